use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{QuasiDistribution, RepKind};
use crate::error::{Error, Result};
use crate::frames::{dual_gram, DualPair};
use crate::linalg::{self, CMatrix};
use crate::opspace::{weyl, Tolerance};
use crate::scalar::{creal, from_usize, to_f64, Real};

/// A CPTP map given by Kraus operators, `Φ(A) = Σ_k K_k A K_k†`.
#[derive(Clone, Debug)]
pub struct Channel<T: Real> {
    dim: usize,
    kraus: Vec<CMatrix<T>>,
}

impl<T: Real> Channel<T> {
    /// Validates `Σ_k K_k† K_k = 𝟙`.
    pub fn new(kraus: Vec<CMatrix<T>>, tol: &Tolerance) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let d = first.nrows();
        let mut sum = CMatrix::<T>::zeros(d, d);
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.nrows().max(k.ncols()) });
            }
            sum += k.adjoint() * k;
        }
        let deviation = to_f64(linalg::max_abs_diff(&sum, &linalg::identity(d)));
        if deviation > tol.abs_tol.max(1e-9) {
            return Err(Error::NotCptp { deviation });
        }
        Ok(Channel { dim: d, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Channel { dim: d, kraus: vec![linalg::identity(d)] }
    }

    pub fn unitary(u: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        Self::new(vec![u], tol)
    }

    /// `ρ ↦ (1-p) ρ + p Tr(ρ) 𝟙/d`, built from the Weyl operators.
    pub fn depolarizing(d: usize, p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidInput(format!("depolarizing probability {} outside [0, 1]", to_f64(p))));
        }
        let dd = from_usize::<T>(d);
        let mut kraus = Vec::with_capacity(d * d + 1);
        if p < T::one() {
            kraus.push(linalg::identity::<T>(d) * creal((T::one() - p).sqrt()));
        }
        let w = creal(p.sqrt() / dd);
        for a in 0..d {
            for b in 0..d {
                kraus.push(weyl::<T>(d, a as i64, b as i64) * w);
            }
        }
        Ok(Channel { dim: d, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix<T>] {
        &self.kraus
    }

    pub fn apply(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let mut out = CMatrix::<T>::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * a * k.adjoint();
        }
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Channel<T>) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: first.dim });
        }
        let kraus = self.kraus.iter().flat_map(|b| first.kraus.iter().map(move |a| b * a)).collect();
        Ok(Channel { dim: self.dim, kraus })
    }
}

/// Which transfer matrix a [`ChannelMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelForm {
    /// `Φ^{qp}(γ,λ) = ⟨F(γ), Φ(D(λ))⟩`, acting directly on `μ`.
    Qp,
    /// `Φ^{def}(γ,η) = ⟨F(γ), Φ(F(η))⟩`, acting as `Φ^{def} 𝙳 μ`.
    Def,
}

impl fmt::Display for ChannelForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelForm::Qp => "qp",
            ChannelForm::Def => "def",
        })
    }
}

impl FromStr for ChannelForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qp" => Ok(ChannelForm::Qp),
            "def" => Ok(ChannelForm::Def),
            other => Err(Error::InvalidInput(format!("unknown channel form '{other}' (expected qp or def)"))),
        }
    }
}

/// A channel's transfer matrix with respect to one dual pair.
#[derive(Clone, Debug)]
pub struct ChannelMatrix<T: Real> {
    pub form: ChannelForm,
    pub entries: DMatrix<T>,
    /// Dual Gram `𝙳`, kept for the def form.
    kernel: Option<DMatrix<T>>,
    pair: DualPair<T>,
}

/// Transfer matrix of `channel` in `form`; columns are computed in parallel.
pub fn channel_matrix<T: Real>(pair: &DualPair<T>, channel: &Channel<T>, form: ChannelForm) -> Result<ChannelMatrix<T>> {
    if channel.dim() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), found: channel.dim() });
    }
    let n = pair.len();
    let inputs = match form {
        ChannelForm::Qp => &pair.dual,
        ChannelForm::Def => &pair.frame,
    };
    let cols: Vec<DVector<T>> = (0..n).into_par_iter().map(|l| pair.frame.analyze(&linalg::hermitian_part(&channel.apply(inputs.element(l).matrix())))).collect();
    let entries = DMatrix::from_columns(&cols);
    let kernel = (form == ChannelForm::Def).then(|| dual_gram(pair));
    Ok(ChannelMatrix { form, entries, kernel, pair: pair.clone() })
}

impl<T: Real> ChannelMatrix<T> {
    pub fn pair(&self) -> &DualPair<T> {
        &self.pair
    }

    /// The matrix acting directly on state distributions.
    pub fn action(&self) -> DMatrix<T> {
        match &self.kernel {
            Some(k) => &self.entries * k,
            None => self.entries.clone(),
        }
    }

    /// `μ_{Φρ}`.
    pub fn apply(&self, mu: &QuasiDistribution<T>) -> Result<QuasiDistribution<T>> {
        if mu.space().labels() != self.pair.space().labels() {
            return Err(Error::SpaceMismatch("distribution is not on the channel's ontic space".into()));
        }
        if mu.kind() != RepKind::State {
            return Err(Error::KindMismatch { expected: "state".into(), found: mu.kind().name().into() });
        }
        let v = match &self.kernel {
            Some(k) => &self.entries * (k * mu.values()),
            None => &self.entries * mu.values(),
        };
        Ok(QuasiDistribution::unchecked(mu.space().clone(), v, RepKind::State))
    }

    /// Matrix of `self ∘ first`, in this matrix's form.
    pub fn after(&self, first: &ChannelMatrix<T>) -> Result<Self> {
        if self.form != first.form || self.entries.shape() != first.entries.shape() {
            return Err(Error::InvalidInput("channel matrices differ in form or size".into()));
        }
        let entries = match &self.kernel {
            Some(k) => &self.entries * k * &first.entries,
            None => &self.entries * &first.entries,
        };
        Ok(ChannelMatrix { form: self.form, entries, kernel: self.kernel.clone(), pair: self.pair.clone() })
    }

    /// The permutation `λ ↦ π(λ)` if the action matrix is a 0/1 permutation matrix.
    pub fn as_permutation(&self, tol: T) -> Option<Vec<usize>> {
        let m = self.action();
        let n = m.nrows();
        let mut perm = vec![usize::MAX; n];
        let mut hit = vec![false; n];
        for col in 0..n {
            for row in 0..n {
                let v = m[(row, col)];
                if (v - T::one()).abs() <= tol {
                    if perm[col] != usize::MAX || hit[row] {
                        return None;
                    }
                    perm[col] = row;
                    hit[row] = true;
                } else if v.abs() > tol {
                    return None;
                }
            }
        }
        perm.iter().all(|&p| p != usize::MAX).then_some(perm)
    }
}
