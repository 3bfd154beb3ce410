use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{rep_effect, rep_state, QuasiDistribution, RepKind, Side};
use crate::error::Result;
use crate::frames::DualPair;
use crate::linalg::CVector;
use crate::opspace::{Operator, Tolerance};
use crate::sampling;
use crate::scalar::{creal, to_f64, Real};

/// Haar-random pure states drawn for a consistency sample, on top of the computational basis.
pub const CONSISTENCY_SAMPLES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Normalization,
    Positivity,
    Resolution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    /// First condition that failed, with the amount by which it failed.
    pub violated: Option<(Condition, f64)>,
    /// Most negative pairing seen against the sample.
    pub worst_pairing: f64,
    pub normalization_defect: f64,
    pub tested: usize,
}

/// Representations of a fixed set of pure states, used as test functions.
#[derive(Clone, Debug)]
pub struct PureSample<T: Real> {
    /// `μ_ψ` for every sampled `|ψ⟩`.
    pub states: Vec<QuasiDistribution<T>>,
    /// `ξ′_{|ψ⟩⟨ψ|}` for every sampled `|ψ⟩`.
    pub effects: Vec<QuasiDistribution<T>>,
    /// `ξ′_𝟙`.
    pub identity: QuasiDistribution<T>,
}

impl<T: Real> PureSample<T> {
    /// `haar` Haar-random pure states plus the computational basis.
    pub fn new(pair: &DualPair<T>, haar: usize, seed: u64, tol: &Tolerance) -> Result<Self> {
        let d = pair.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors: Vec<CVector<T>> = (0..d).map(|k| CVector::from_fn(d, |i, _| creal(if i == k { T::one() } else { T::zero() }))).collect();
        vectors.extend((0..haar).map(|_| sampling::haar_vector::<T, _>(d, &mut rng)));
        let mut states = Vec::with_capacity(vectors.len());
        let mut effects = Vec::with_capacity(vectors.len());
        for v in &vectors {
            let op = Operator::pure_state(v)?;
            states.push(rep_state(pair, &op)?);
            effects.push(rep_effect(pair, &op, Side::Dual, tol)?);
        }
        let identity = rep_effect(pair, &Operator::identity(d), Side::Dual, tol)?;
        Ok(PureSample { states, effects, identity })
    }

    /// The default sample of [`CONSISTENCY_SAMPLES`] Haar states.
    pub fn standard(pair: &DualPair<T>, seed: u64, tol: &Tolerance) -> Result<Self> {
        Self::new(pair, CONSISTENCY_SAMPLES, seed, tol)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn finish(worst: f64, norm: f64, resolution: Option<f64>, tested: usize, tol: &Tolerance) -> Verdict {
    let violated = if norm > tol.abs_tol {
        Some((Condition::Normalization, norm))
    } else if resolution.is_some_and(|r| r > tol.abs_tol) {
        Some((Condition::Resolution, resolution.unwrap_or(0.0)))
    } else if worst < -tol.abs_tol {
        Some((Condition::Positivity, -worst))
    } else {
        None
    };
    Verdict { ok: violated.is_none(), violated, worst_pairing: worst, normalization_defect: norm.max(resolution.unwrap_or(0.0)), tested }
}

/// A candidate state function must sum to one and pair nonnegatively with
/// every sampled pure-state effect.
pub fn validate_state<T: Real>(sample: &PureSample<T>, mu: &[T], tol: &Tolerance) -> Verdict {
    let mu = DVector::from_column_slice(mu);
    let norm = (to_f64(mu.sum()) - 1.0).abs();
    let worst = sample.effects.iter().map(|xi| to_f64(mu.dot(xi.values()))).fold(f64::INFINITY, f64::min);
    finish(worst, norm, None, sample.effects.len(), tol)
}

/// Candidate dual-side measurement functions must pair nonnegatively with every
/// sampled pure state and resolve `ξ′_𝟙`.
pub fn validate_measurement<T: Real>(sample: &PureSample<T>, outcomes: &[QuasiDistribution<T>], tol: &Tolerance) -> Verdict {
    let n = sample.identity.len();
    let mut total = DVector::<T>::zeros(n);
    let mut worst = f64::INFINITY;
    for xi in outcomes {
        if xi.len() != n || xi.kind() != RepKind::DualEffect {
            return Verdict { ok: false, violated: Some((Condition::Resolution, f64::INFINITY)), worst_pairing: f64::NAN, normalization_defect: f64::INFINITY, tested: 0 };
        }
        total += xi.values();
        for mu in &sample.states {
            worst = worst.min(to_f64(mu.values().dot(xi.values())));
        }
    }
    let resolution = to_f64((total - sample.identity.values()).amax());
    finish(worst, 0.0, Some(resolution), sample.states.len() * outcomes.len(), tol)
}
