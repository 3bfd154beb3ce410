//! Lifting a dual pair to states, effects, products and channels.
//!
//! States go through the frame, `μ_ρ(λ) = ⟨F(λ), ρ⟩`. Effects can be taken on
//! either side: `ξ_E(λ) = ⟨F(λ), E⟩` or `ξ′_E(λ) = ⟨D(λ), E⟩`.

mod channel;
mod consistency;
mod star;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{DualPair, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::{Operator, Tolerance};
use crate::scalar::{cplx, to_f64, Real, C};

pub use channel::{channel_matrix, Channel, ChannelForm, ChannelMatrix};
pub use consistency::{validate_measurement, validate_state, Condition, PureSample, Verdict, CONSISTENCY_SAMPLES};
pub use star::{StarAlgebra, StarProduct, DENSE_STAR_LIMIT};

/// What a [`QuasiDistribution`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepKind {
    /// `μ_ρ`, frame side.
    #[serde(rename = "state")]
    State,
    /// `ξ_E`, frame side.
    #[serde(rename = "effect")]
    Effect,
    /// `ξ′_E`, dual side.
    #[serde(rename = "dual-effect")]
    DualEffect,
}

impl RepKind {
    pub fn name(self) -> &'static str {
        match self {
            RepKind::State => "state",
            RepKind::Effect => "effect",
            RepKind::DualEffect => "dual-effect",
        }
    }
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(RepKind::State),
            "effect" => Ok(RepKind::Effect),
            "dual-effect" | "dual_effect" => Ok(RepKind::DualEffect),
            other => Err(Error::InvalidInput(format!("unknown distribution kind '{other}'"))),
        }
    }
}

/// Which member of the pair an effect is represented through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Frame,
    Dual,
}

/// A real function on an ontic space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiDistribution<T: Real> {
    space: Arc<OnticSpace>,
    values: DVector<T>,
    kind: RepKind,
    /// Set when a frame-side effect was requested from a non-positive frame,
    /// so `ξ` need not lie in `[0, 1]`.
    pub warning: Option<String>,
}

impl<T: Real> QuasiDistribution<T> {
    /// Wraps raw values. State distributions must sum to one.
    pub fn new(space: Arc<OnticSpace>, values: DVector<T>, kind: RepKind, tol: &Tolerance) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("distribution has non-finite values".into()));
        }
        if kind == RepKind::State {
            let total = values.sum();
            if !tol.close(total, T::one()) {
                return Err(Error::InvalidInput(format!("state distribution sums to {}, not 1", to_f64(total))));
            }
        }
        Ok(QuasiDistribution { space, values, kind, warning: None })
    }

    /// Wraps values without the normalization check.
    pub fn unchecked(space: Arc<OnticSpace>, values: DVector<T>, kind: RepKind) -> Self {
        assert_eq!(space.len(), values.len());
        QuasiDistribution { space, values, kind, warning: None }
    }

    pub fn space(&self) -> &Arc<OnticSpace> {
        &self.space
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        self.values.sum()
    }

    pub fn min(&self) -> T {
        self.values.min()
    }

    pub fn max(&self) -> T {
        self.values.max()
    }

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    /// Values laid out on a `side x side` grid (rows `q`, columns `p`) when the
    /// space is a row-major phase grid.
    pub fn grid(&self) -> Option<DMatrix<T>> {
        let m = self.space.grid_side()?;
        Some(DMatrix::from_fn(m, m, |q, p| self.values[q * m + p]))
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space.labels() == other.space.labels() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("distributions live on different ontic spaces ({} vs {} points)", self.len(), other.len())))
        }
    }

    fn expect_kind(&self, kind: RepKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: kind.name().into(), found: self.kind.name().into() })
        }
    }
}

fn check_dim<T: Real>(pair: &DualPair<T>, op: &Operator<T>) -> Result<()> {
    if op.dim() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), found: op.dim() });
    }
    Ok(())
}

/// `μ_ρ(λ) = ⟨F(λ), ρ⟩`.
pub fn rep_state<T: Real>(pair: &DualPair<T>, rho: &Operator<T>) -> Result<QuasiDistribution<T>> {
    check_dim(pair, rho)?;
    if !rho.is_density() {
        return Err(Error::KindMismatch { expected: "density operator".into(), found: "operator without the density tag".into() });
    }
    Ok(QuasiDistribution::unchecked(pair.space().clone(), pair.frame.analyze(rho.matrix()), RepKind::State))
}

/// `ξ_E = ⟨F(λ), E⟩` or `ξ′_E = ⟨D(λ), E⟩`.
pub fn rep_effect<T: Real>(pair: &DualPair<T>, effect: &Operator<T>, side: Side, tol: &Tolerance) -> Result<QuasiDistribution<T>> {
    check_dim(pair, effect)?;
    if !effect.is_effect() {
        return Err(Error::KindMismatch { expected: "effect".into(), found: "operator without the effect tag".into() });
    }
    Ok(match side {
        Side::Frame => {
            let mut q = QuasiDistribution::unchecked(pair.space().clone(), pair.frame.analyze(effect.matrix()), RepKind::Effect);
            if !pair.frame.is_positive(tol) {
                q.warning = Some(format!(
                    "frame has an element with eigenvalue {:.3e}; frame-side effect values may leave [0, 1]",
                    to_f64(pair.frame.min_element_eigenvalue())
                ));
            }
            q
        }
        Side::Dual => QuasiDistribution::unchecked(pair.space().clone(), pair.dual.analyze(effect.matrix()), RepKind::DualEffect),
    })
}

/// Frame-side coefficients `⟨F(λ), A⟩` of an arbitrary (possibly non-Hermitian) matrix.
pub fn rep_operator<T: Real>(pair: &DualPair<T>, a: &CMatrix<T>) -> DVector<C<T>> {
    let re = pair.frame.analyze(&linalg::hermitian_part(a));
    let im = pair.frame.analyze(&linalg::hermitian_part(&(a * cplx(T::zero(), -T::one()))));
    DVector::from_fn(re.len(), |i, _| cplx(re[i], im[i]))
}

/// Operator with the given frame-side coefficients, `Σ_λ μ(λ) D(λ)`.
pub fn reconstruct<T: Real>(pair: &DualPair<T>, mu: &QuasiDistribution<T>) -> Result<CMatrix<T>> {
    if mu.space.labels() != pair.space().labels() {
        return Err(Error::SpaceMismatch("distribution is not on this pair's ontic space".into()));
    }
    Ok(match mu.kind {
        RepKind::State | RepKind::Effect => pair.dual.synthesize(&mu.values),
        RepKind::DualEffect => pair.frame.synthesize(&mu.values),
    })
}

/// `Σ_λ μ(λ) ξ′(λ)`.
pub fn born<T: Real>(mu: &QuasiDistribution<T>, xi_dual: &QuasiDistribution<T>) -> Result<T> {
    mu.same_space(xi_dual)?;
    mu.expect_kind(RepKind::State)?;
    xi_dual.expect_kind(RepKind::DualEffect)?;
    Ok(mu.values.dot(&xi_dual.values))
}

/// `Σ_{λγ} μ(λ) 𝙳(λ,γ) ξ(γ)` with `𝙳` the dual Gram matrix.
pub fn born_deformed<T: Real>(mu: &QuasiDistribution<T>, xi: &QuasiDistribution<T>, dual_gram: &DMatrix<T>) -> Result<T> {
    mu.same_space(xi)?;
    mu.expect_kind(RepKind::State)?;
    xi.expect_kind(RepKind::Effect)?;
    if dual_gram.nrows() != mu.len() || dual_gram.ncols() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), found: dual_gram.nrows() });
    }
    Ok(mu.values.dot(&(dual_gram * &xi.values)))
}

/// `ξ′(λ) = Σ_γ 𝙳(λ,γ) ξ(γ)`.
pub fn convert<T: Real>(xi: &QuasiDistribution<T>, dual_gram: &DMatrix<T>) -> Result<QuasiDistribution<T>> {
    xi.expect_kind(RepKind::Effect)?;
    if dual_gram.nrows() != xi.len() || dual_gram.ncols() != xi.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), found: dual_gram.nrows() });
    }
    Ok(QuasiDistribution::unchecked(xi.space.clone(), dual_gram * &xi.values, RepKind::DualEffect))
}
