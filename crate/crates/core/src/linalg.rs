//! Dense complex matrix helpers used across the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::{cis, creal, from_usize, Real, C};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

pub fn identity<T: Real>(d: usize) -> CMatrix<T> {
    CMatrix::identity(d, d)
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn kron_all<T: Real>(factors: &[CMatrix<T>]) -> CMatrix<T> {
    let mut out = CMatrix::<T>::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn trace<T: Real>(a: &CMatrix<T>) -> C<T> {
    a.diagonal().iter().fold(C::new(T::zero(), T::zero()), |acc, z| acc + *z)
}

/// `Tr(AB)` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> C<T> {
    let d = a.nrows();
    let mut acc = C::new(T::zero(), T::zero());
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| crate::scalar::cabs(*x - *y))
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt()
}

/// Largest deviation `|A_jk - conj(A_kj)|` together with its position.
pub fn hermitian_defect<T: Real>(a: &CMatrix<T>) -> (T, usize, usize) {
    let d = a.nrows();
    let mut worst = (T::zero(), 0, 0);
    for i in 0..d {
        for j in i..d {
            let dev = crate::scalar::cabs(a[(i, j)] - a[(j, i)].conj());
            if dev > worst.0 {
                worst = (dev, i, j);
            }
        }
    }
    worst
}

/// Symmetrizes `(A + A^†)/2`.
pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()) * creal(crate::scalar::lit::<T>(0.5))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).expect("finite eigenvalues"));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn eigvalsh<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = SymmetricEigen::new(hermitian_part(a)).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    v
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvals_sym<T: Real>(a: &DMatrix<T>) -> Vec<T> {
    let sym = (a + a.transpose()) * crate::scalar::lit::<T>(0.5);
    let mut v: Vec<T> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    v
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn<T: Real>(a: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let (vals, vecs) = eigh(a);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| creal(f(v)))));
    &vecs * diag * vecs.adjoint()
}

/// `exp(-i θ H)` for Hermitian `H`.
pub fn unitary_exp<T: Real>(h: &CMatrix<T>, theta: T) -> CMatrix<T> {
    let (vals, vecs) = eigh(h);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| cis(-theta * v))));
    &vecs * diag * vecs.adjoint()
}

/// Integer power, negative exponents allowed for unitaries (uses the adjoint).
pub fn unitary_pow<T: Real>(u: &CMatrix<T>, k: i64) -> CMatrix<T> {
    let base = if k < 0 { u.adjoint() } else { u.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = identity::<T>(u.nrows());
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

pub fn outer<T: Real>(v: &CVector<T>) -> CMatrix<T> {
    v * v.adjoint()
}

pub fn scale<T: Real>(a: &CMatrix<T>, s: T) -> CMatrix<T> {
    a * creal(s)
}

pub fn is_unitary<T: Real>(u: &CMatrix<T>, tol: T) -> bool {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

/// Numerical rank of a real matrix via its Gram eigenvalues.
pub fn numerical_rank<T: Real>(a: &DMatrix<T>, rel_tol: T) -> usize {
    let g = if a.nrows() >= a.ncols() { a.transpose() * a } else { a * a.transpose() };
    let vals = eigvals_sym(&g);
    let max = vals.iter().copied().fold(T::zero(), |m, v| if v > m { v } else { m });
    if max <= T::zero() {
        return 0;
    }
    vals.iter().filter(|&&v| v > max * rel_tol).count()
}

pub fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::zero(), |s, v| s + v) / from_usize::<T>(xs.len().max(1))
}
