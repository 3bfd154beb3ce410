use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use super::{rep_operator, QuasiDistribution, RepKind};
use crate::error::{Error, Result};
use crate::frames::{DualPair, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::Tolerance;
use crate::scalar::{cabs, creal, to_f64, Real, C};

/// Largest ontic space for which the structure tensor is stored.
pub const DENSE_STAR_LIMIT: usize = 128;

/// The twisted product on frame-side coefficients:
/// `(μ₁ ★ μ₂)(λ) = Σ_{γη} 𝔉(λ,γ,η) μ₁(γ) μ₂(η)` with `𝔉(λ,γ,η) = ⟨F(λ), D(γ)D(η)⟩`.
#[derive(Clone, Debug)]
pub struct StarAlgebra<T: Real> {
    pair: DualPair<T>,
    /// `𝔉` flattened as `[(γ·n + η)·n + λ]`; `None` above [`DENSE_STAR_LIMIT`].
    tensor: Option<Vec<C<T>>>,
    identity: DVector<T>,
}

/// Result of a star product; complex because `AB` need not be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct StarProduct<T: Real> {
    pub space: Arc<OnticSpace>,
    pub values: DVector<C<T>>,
}

impl<T: Real> StarProduct<T> {
    pub fn max_imag(&self) -> T {
        self.values.iter().map(|z| z.im.abs()).fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// Real part as a distribution of `kind`, provided the imaginary part is negligible.
    pub fn into_real(self, kind: RepKind, tol: &Tolerance) -> Result<QuasiDistribution<T>> {
        let im = self.max_imag();
        if im > tol.abs::<T>() {
            return Err(Error::InvalidInput(format!("star product has imaginary part {:.3e}; the operator product is not Hermitian", to_f64(im))));
        }
        let re = self.values.map(|z| z.re);
        Ok(QuasiDistribution::unchecked(self.space, re, kind))
    }
}

impl<T: Real> StarAlgebra<T> {
    pub fn new(pair: &DualPair<T>) -> Self {
        let n = pair.len();
        let d = pair.dim();
        let identity = pair.frame.analyze(&linalg::identity::<T>(d));
        let tensor = (n <= DENSE_STAR_LIMIT).then(|| {
            (0..n * n)
                .into_par_iter()
                .flat_map_iter(|gh| {
                    let prod = pair.dual.element(gh / n).matrix() * pair.dual.element(gh % n).matrix();
                    rep_operator(pair, &prod).into_iter().copied().collect::<Vec<_>>()
                })
                .collect()
        });
        StarAlgebra { pair: pair.clone(), tensor, identity }
    }

    pub fn pair(&self) -> &DualPair<T> {
        &self.pair
    }

    pub fn is_dense(&self) -> bool {
        self.tensor.is_some()
    }

    /// `𝔉(λ,γ,η)`.
    pub fn structure_constant(&self, lambda: usize, gamma: usize, eta: usize) -> C<T> {
        let n = self.pair.len();
        match &self.tensor {
            Some(t) => t[(gamma * n + eta) * n + lambda],
            None => {
                let prod = self.pair.dual.element(gamma).matrix() * self.pair.dual.element(eta).matrix();
                linalg::trace_product(self.pair.frame.element(lambda).matrix(), &prod)
            }
        }
    }

    /// `ξ_𝟙(λ) = ⟨F(λ), 𝟙⟩`, the unit for `★`.
    pub fn identity(&self) -> &DVector<T> {
        &self.identity
    }

    pub fn identity_distribution(&self) -> QuasiDistribution<T> {
        QuasiDistribution::unchecked(self.pair.space().clone(), self.identity.clone(), RepKind::Effect)
    }

    /// Star product of complex coefficient vectors.
    pub fn star_coeffs(&self, a: &DVector<C<T>>, b: &DVector<C<T>>) -> Result<DVector<C<T>>> {
        let n = self.pair.len();
        if a.len() != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: if a.len() != n { a.len() } else { b.len() } });
        }
        Ok(match &self.tensor {
            Some(t) => {
                let mut out = DVector::from_element(n, creal(T::zero()));
                for g in 0..n {
                    if a[g] == creal(T::zero()) {
                        continue;
                    }
                    for h in 0..n {
                        let w = a[g] * b[h];
                        if w == creal(T::zero()) {
                            continue;
                        }
                        let row = &t[(g * n + h) * n..(g * n + h + 1) * n];
                        for (o, f) in out.iter_mut().zip(row) {
                            *o += *f * w;
                        }
                    }
                }
                out
            }
            None => {
                let x = self.synthesize_complex(a);
                let y = self.synthesize_complex(b);
                rep_operator(&self.pair, &(x * y))
            }
        })
    }

    fn synthesize_complex(&self, c: &DVector<C<T>>) -> CMatrix<T> {
        let d = self.pair.dim();
        let mut acc = CMatrix::<T>::zeros(d, d);
        for (op, w) in self.pair.dual.ops().iter().zip(c.iter()) {
            if cabs(*w) > T::zero() {
                acc += op.matrix() * *w;
            }
        }
        acc
    }

    /// `μ₁ ★ μ₂` for frame-side distributions on this algebra's space.
    pub fn star(&self, a: &QuasiDistribution<T>, b: &QuasiDistribution<T>) -> Result<StarProduct<T>> {
        for q in [a, b] {
            if q.space().labels() != self.pair.space().labels() {
                return Err(Error::SpaceMismatch("distribution is not on the algebra's ontic space".into()));
            }
            if q.kind() == RepKind::DualEffect {
                return Err(Error::KindMismatch { expected: "frame-side distribution".into(), found: q.kind().name().into() });
            }
        }
        let lift = |q: &QuasiDistribution<T>| q.values().map(creal);
        let values = self.star_coeffs(&lift(a), &lift(b))?;
        Ok(StarProduct { space: self.pair.space().clone(), values })
    }

    /// Largest deviation of `ξ_𝟙 ★ μ` and `μ ★ ξ_𝟙` from `μ`.
    pub fn identity_defect(&self, mu: &DVector<C<T>>) -> Result<T> {
        let one = self.identity.map(creal);
        let l = self.star_coeffs(&one, mu)?;
        let r = self.star_coeffs(mu, &one)?;
        let mut worst = T::zero();
        for i in 0..mu.len() {
            let e = cabs(l[i] - mu[i]).max(cabs(r[i] - mu[i]));
            if e > worst {
                worst = e;
            }
        }
        Ok(worst)
    }
}
