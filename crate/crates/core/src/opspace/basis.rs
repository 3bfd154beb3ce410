//! Real coordinates for Hermitian operators in the generalized Gell-Mann basis.
//!
//! Ordering: `1/√d`, the `d - 1` diagonal generators, then for each pair
//! `j < k` (row-major) the symmetric and antisymmetric generators.

use nalgebra::DVector;

use crate::linalg::CMatrix;
use crate::scalar::{from_usize, lit, Real, C};

/// Which generator sits at a given coordinate index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Identity,
    Diagonal(usize),
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

pub fn generator_at(d: usize, index: usize) -> Generator {
    assert!(index < d * d, "generator index out of range");
    if index == 0 {
        return Generator::Identity;
    }
    if index < d {
        return Generator::Diagonal(index);
    }
    let mut idx = index - d;
    for j in 0..d {
        for k in (j + 1)..d {
            if idx < 2 {
                return if idx == 0 { Generator::Symmetric(j, k) } else { Generator::Antisymmetric(j, k) };
            }
            idx -= 2;
        }
    }
    unreachable!()
}

/// The orthonormal generator at `index` as a matrix.
pub fn basis_element<T: Real>(d: usize, index: usize) -> CMatrix<T> {
    let zero = C::new(T::zero(), T::zero());
    let mut m = CMatrix::from_element(d, d, zero);
    let r2 = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    match generator_at(d, index) {
        Generator::Identity => {
            let v = T::one() / from_usize::<T>(d).sqrt();
            for i in 0..d {
                m[(i, i)] = C::new(v, T::zero());
            }
        }
        Generator::Diagonal(k) => {
            let kk = from_usize::<T>(k);
            let norm = (kk * (kk + T::one())).sqrt();
            for i in 0..k {
                m[(i, i)] = C::new(T::one() / norm, T::zero());
            }
            m[(k, k)] = C::new(-kk / norm, T::zero());
        }
        Generator::Symmetric(j, k) => {
            m[(j, k)] = C::new(r2, T::zero());
            m[(k, j)] = C::new(r2, T::zero());
        }
        Generator::Antisymmetric(j, k) => {
            m[(j, k)] = C::new(T::zero(), -r2);
            m[(k, j)] = C::new(T::zero(), r2);
        }
    }
    m
}

pub fn orthonormal_basis<T: Real>(d: usize) -> Vec<CMatrix<T>> {
    (0..d * d).map(|i| basis_element(d, i)).collect()
}

/// Coordinates `Tr(B_i A)`; exact for Hermitian `A`, the anti-Hermitian part is dropped.
pub fn coords<T: Real>(a: &CMatrix<T>) -> DVector<T> {
    let d = a.nrows();
    let mut out = DVector::zeros(d * d);
    let mut prefix = T::zero();
    let mut total = T::zero();
    for i in 0..d {
        total += a[(i, i)].re;
    }
    out[0] = total / from_usize::<T>(d).sqrt();
    for k in 1..d {
        prefix += a[(k - 1, k - 1)].re;
        let kk = from_usize::<T>(k);
        out[k] = (prefix - kk * a[(k, k)].re) / (kk * (kk + T::one())).sqrt();
    }
    let s2 = lit::<T>(std::f64::consts::SQRT_2);
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = (a[(j, k)] + a[(k, j)].conj()) * C::new(lit::<T>(0.5), T::zero());
            out[idx] = s2 * z.re;
            out[idx + 1] = -s2 * z.im;
            idx += 2;
        }
    }
    out
}

/// Inverse of [`coords`].
pub fn from_coords<T: Real>(d: usize, c: &DVector<T>) -> CMatrix<T> {
    assert_eq!(c.len(), d * d, "coordinate vector length must be d^2");
    let zero = C::new(T::zero(), T::zero());
    let mut m = CMatrix::from_element(d, d, zero);
    let id = c[0] / from_usize::<T>(d).sqrt();
    for i in 0..d {
        m[(i, i)].re = id;
    }
    for k in 1..d {
        let kk = from_usize::<T>(k);
        let w = c[k] / (kk * (kk + T::one())).sqrt();
        for i in 0..k {
            m[(i, i)].re += w;
        }
        m[(k, k)].re -= kk * w;
    }
    let r2 = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let re = c[idx] * r2;
            let im = -c[idx + 1] * r2;
            m[(j, k)] = C::new(re, im);
            m[(k, j)] = C::new(re, -im);
            idx += 2;
        }
    }
    m
}
