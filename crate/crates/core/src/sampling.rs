//! Random states, observables and measurements for tests and sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::opspace::{Operator, OperatorClass};
use crate::scalar::{creal, lit, Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(lit(re), lit(im))
}

/// Complex Ginibre matrix with i.i.d. standard normal entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector<T> {
    CVector::from_fn(d, |_, _| gaussian(rng))
}

/// GUE sample scaled to unit Frobenius norm.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator<T> {
    let g = ginibre::<T, R>(d, d, rng);
    let h = linalg::hermitian_part(&g);
    let n = linalg::frobenius(&h);
    Operator::from_parts(h / creal(n), OperatorClass::HERMITIAN)
}

pub fn haar_vector<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector<T> {
    let v = gaussian_vector::<T, R>(d, rng);
    let n = v.norm();
    v / creal(n)
}

pub fn haar_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator<T> {
    Operator::pure_state(&haar_vector::<T, R>(d, rng)).expect("nonzero Gaussian vector")
}

/// Hilbert–Schmidt random density operator `GG†/Tr(GG†)`.
pub fn random_density<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator<T> {
    let g = ginibre::<T, R>(d, d, rng);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    let mat = linalg::hermitian_part(&(w / creal(tr)));
    Operator::from_parts(mat, OperatorClass { hermitian: true, effect: true, density: true, projector: false })
}

/// Haar unitary via QR of a Ginibre matrix with the phase of `R`'s diagonal removed.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<T> {
    let qr = ginibre::<T, R>(d, d, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rj = r[(j, j)];
        let n = crate::scalar::cabs(rj);
        let phase = if n > T::zero() { rj / creal(n) } else { creal(T::one()) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Effect with Haar eigenbasis and i.i.d. uniform eigenvalues in `[0, 1]`.
pub fn random_effect<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator<T> {
    let u = random_unitary::<T, R>(d, rng);
    let diag = CVector::from_fn(d, |_, _| creal(lit::<T>(rng.random::<f64>())));
    let mat = linalg::hermitian_part(&(&u * CMatrix::from_diagonal(&diag) * u.adjoint()));
    Operator::from_parts(mat, OperatorClass { hermitian: true, effect: true, density: false, projector: false })
}

/// Rank-1 projectors onto the columns of a Haar unitary.
pub fn random_pvm<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Operator<T>> {
    let u = random_unitary::<T, R>(d, rng);
    (0..d)
        .map(|j| Operator::pure_state(&u.column(j).into_owned()).expect("unit column"))
        .collect()
}
