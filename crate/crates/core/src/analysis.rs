//! Negativity and randomized witnesses for the no-go results.
//!
//! Nothing here proves anything. The sweeps sample positive normalized frames
//! and record that their canonical duals always contain a negative element;
//! the classicality check reports which condition a given pair violates.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{canonical_dual, DualPair, Frame, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::{Operator, OperatorClass, Tolerance};
use crate::repr::{born, rep_effect, rep_state, QuasiDistribution, Side};
use crate::sampling;
use crate::scalar::{creal, to_f64, Real};

/// Dual eigenvalues must fall below this for a sweep trial to count as negative.
pub const SWEEP_THRESHOLD: f64 = -1e-8;
/// Largest Hilbert-space dimension accepted by [`nogo_sweep`].
pub const MAX_SWEEP_DIM: usize = 5;
/// Frame draws attempted per trial before giving up.
const MAX_REDRAWS: usize = 64;

/// `N(μ) = Σ_λ max(0, -μ(λ))`.
pub fn negativity<T: Real>(mu: &QuasiDistribution<T>) -> T {
    negativity_of(mu.values().as_slice())
}

pub fn negativity_of<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| if *v < T::zero() { acc - *v } else { acc })
}

/// One condition of a classicality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub passed: bool,
    /// Size of the worst violation (zero when passed).
    #[serde(with = "crate::io::hex")]
    pub violation: f64,
}

impl ConditionReport {
    fn from_violation(violation: f64, tol: &Tolerance) -> Self {
        ConditionReport { passed: violation <= tol.abs_tol, violation: violation.max(0.0) }
    }
}

/// Nonnegativity, normalization and Born-rule verdicts over a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub states_tested: usize,
    pub effects_tested: usize,
    /// `min_ρ μ_ρ(λ)` for each `λ`.
    #[serde(with = "crate::io::hex_vec")]
    pub state_min_per_point: Vec<f64>,
    /// `min_E ξ′_E(λ)` for each `λ`.
    #[serde(with = "crate::io::hex_vec")]
    pub effect_min_per_point: Vec<f64>,
    #[serde(with = "crate::io::hex")]
    pub max_state_negativity: f64,
    #[serde(with = "crate::io::hex")]
    pub max_effect_negativity: f64,
    #[serde(with = "crate::io::hex")]
    pub frame_min_eigenvalue: f64,
    #[serde(with = "crate::io::hex")]
    pub dual_min_eigenvalue: f64,
    /// Condition (a) on the state side: `μ_ρ ≥ 0`.
    pub nonnegative_states: ConditionReport,
    /// Condition (a) on the effect side: `ξ′_E ∈ [0, 1]`.
    pub bounded_effects: ConditionReport,
    /// Condition (b): `Σ_λ μ_ρ(λ) = 1` and `Σ_λ μ_ρ(λ) ξ′_𝟙(λ) = 1`.
    pub normalization: ConditionReport,
    /// Condition (c): `Σ_λ μ_ρ(λ) ξ′_E(λ) = Tr(ρE)`.
    pub born_rule: ConditionReport,
}

impl NegativityReport {
    pub fn is_classical(&self) -> bool {
        self.failed_conditions().is_empty()
    }

    pub fn failed_conditions(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.nonnegative_states.passed {
            out.push("a:states");
        }
        if !self.bounded_effects.passed {
            out.push("a:effects");
        }
        if !self.normalization.passed {
            out.push("b");
        }
        if !self.born_rule.passed {
            out.push("c");
        }
        out
    }
}

/// Evaluates the classical-representation conditions on the given samples,
/// with states through the frame and effects through the dual.
pub fn classicality_check<T: Real>(pair: &DualPair<T>, states: &[Operator<T>], effects: &[Operator<T>], tol: &Tolerance) -> Result<NegativityReport> {
    let n = pair.len();
    let d = pair.dim();
    let mus = states.iter().map(|r| rep_state(pair, r)).collect::<Result<Vec<_>>>()?;
    let xis = effects.iter().map(|e| rep_effect(pair, e, Side::Dual, tol)).collect::<Result<Vec<_>>>()?;
    let one = rep_effect(pair, &Operator::identity(d), Side::Dual, tol)?;

    let mut state_min = vec![f64::INFINITY; n];
    let mut effect_min = vec![f64::INFINITY; n];
    let (mut neg_s, mut neg_e, mut above_one, mut norm, mut born_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for mu in &mus {
        for (m, v) in state_min.iter_mut().zip(mu.values().iter()) {
            *m = m.min(to_f64(*v));
        }
        neg_s = neg_s.max(to_f64(negativity(mu)));
        norm = norm.max((to_f64(mu.total()) - 1.0).abs());
        norm = norm.max((to_f64(born(mu, &one)?) - 1.0).abs());
    }
    for xi in &xis {
        for (m, v) in effect_min.iter_mut().zip(xi.values().iter()) {
            *m = m.min(to_f64(*v));
        }
        neg_e = neg_e.max(to_f64(negativity(xi)));
        above_one = above_one.max(to_f64(xi.max()) - 1.0);
    }
    for (rho, mu) in states.iter().zip(&mus) {
        for (e, xi) in effects.iter().zip(&xis) {
            let exact = to_f64(linalg::trace_product(rho.matrix(), e.matrix()).re);
            born_err = born_err.max((to_f64(born(mu, xi)?) - exact).abs());
        }
    }
    let smin = state_min.iter().copied().fold(f64::INFINITY, f64::min);
    let emin = effect_min.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(NegativityReport {
        states_tested: states.len(),
        effects_tested: effects.len(),
        state_min_per_point: state_min,
        effect_min_per_point: effect_min,
        max_state_negativity: neg_s,
        max_effect_negativity: neg_e,
        frame_min_eigenvalue: to_f64(pair.frame.min_element_eigenvalue()),
        dual_min_eigenvalue: to_f64(pair.dual.min_element_eigenvalue()),
        nonnegative_states: ConditionReport::from_violation(if states.is_empty() { 0.0 } else { -smin }, tol),
        bounded_effects: ConditionReport::from_violation(if effects.is_empty() { 0.0 } else { (-emin).max(above_one) }, tol),
        normalization: ConditionReport::from_violation(norm, tol),
        born_rule: ConditionReport::from_violation(born_err, tol),
    })
}

/// [`classicality_check`] on `n` Haar pure states, and effects made of the
/// same number of pure-state projectors plus random effects.
pub fn sampled_classicality_check<T: Real>(pair: &DualPair<T>, n: usize, seed: u64, tol: &Tolerance) -> Result<NegativityReport> {
    let d = pair.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<Operator<T>> = (0..n).map(|_| sampling::haar_pure_state(d, &mut rng)).collect();
    let mut effects: Vec<Operator<T>> = (0..n).map(|_| sampling::haar_pure_state(d, &mut rng)).collect();
    effects.extend((0..n).map(|_| sampling::random_effect::<T, _>(d, &mut rng)));
    classicality_check(pair, &states, &effects, tol)
}

/// Outcome of a no-go sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub dim: usize,
    pub trials: usize,
    pub ontic_sizes: Vec<usize>,
    #[serde(with = "crate::io::hex")]
    pub threshold: f64,
    /// `|Λ|` used in each trial.
    pub trial_sizes: Vec<usize>,
    /// Minimum eigenvalue over all canonical-dual elements, per trial.
    #[serde(with = "crate::io::hex_vec")]
    pub minima: Vec<f64>,
    /// Frames discarded because the dual could not be formed reliably.
    pub regenerated: usize,
    /// Trials whose dual had no eigenvalue below the threshold.
    pub nonnegative_duals: usize,
    /// Largest per-trial minimum, i.e. the trial closest to a counterexample.
    #[serde(with = "crate::io::hex")]
    pub closest: f64,
}

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.nonnegative_duals == 0
    }
}

/// Wishart-distributed positive operators `G_λ = M M†` normalized to
/// `F(λ) = Σ^{-1/2} G_λ Σ^{-1/2}` with `Σ = Σ_λ G_λ`.
pub fn random_positive_frame<T: Real, R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R, tol: &Tolerance) -> Result<Frame<T>> {
    let gs: Vec<CMatrix<T>> = (0..n)
        .map(|_| {
            let m = sampling::ginibre::<T, R>(d, d, rng);
            &m * m.adjoint()
        })
        .collect();
    let mut sigma = CMatrix::<T>::zeros(d, d);
    for g in &gs {
        sigma += g;
    }
    let (vals, _) = linalg::eigh(&sigma);
    if !(vals[0] > T::zero()) {
        return Err(Error::IllConditioned { what: "Wishart sum".into(), condition: f64::INFINITY, limit: 0.0 });
    }
    let root = linalg::hermitian_fn(&sigma, |x| T::one() / x.sqrt());
    let ops = gs
        .iter()
        .map(|g| Operator::from_parts(linalg::hermitian_part(&(&root * g * &root)), OperatorClass { hermitian: true, effect: true, density: false, projector: false }))
        .collect();
    Frame::new(OnticSpace::indexed(n)?, ops, tol)
}

fn sweep_trial<T: Real>(d: usize, n: usize, seed: u64, trial: usize, tol: &Tolerance) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    for redraw in 0..MAX_REDRAWS {
        let pair = match random_positive_frame::<T, _>(d, n, &mut rng, tol).and_then(|f| canonical_dual(&f, tol)) {
            Ok(p) => p,
            Err(Error::IllConditioned { .. } | Error::NotAFrame { .. }) => continue,
            Err(e) => return Err(e),
        };
        return Ok((to_f64(pair.dual.min_element_eigenvalue()), redraw));
    }
    Err(Error::IllConditioned { what: format!("trial {trial}: no usable frame in {MAX_REDRAWS} draws"), condition: f64::INFINITY, limit: crate::frames::DUAL_CONDITION_LIMIT })
}

/// Draws `trials` random positive normalized frames (sizes cycling through
/// `ontic_sizes`) and records the minimum eigenvalue of each canonical dual.
pub fn nogo_sweep<T: Real>(d: usize, trials: usize, ontic_sizes: &[usize], seed: u64, tol: &Tolerance) -> Result<SweepResult> {
    if !(2..=MAX_SWEEP_DIM).contains(&d) {
        return Err(Error::InvalidDimension { dim: d, reason: format!("sweeps support 2 <= d <= {MAX_SWEEP_DIM}") });
    }
    if ontic_sizes.is_empty() {
        return Err(Error::InvalidInput("no ontic sizes given".into()));
    }
    if let Some(&bad) = ontic_sizes.iter().find(|&&n| n < d * d) {
        return Err(Error::InvalidInput(format!("ontic size {bad} is below d² = {}", d * d)));
    }
    let trial_sizes: Vec<usize> = (0..trials).map(|t| ontic_sizes[t % ontic_sizes.len()]).collect();
    let outcomes = trial_sizes.par_iter().enumerate().map(|(t, &n)| sweep_trial::<T>(d, n, seed, t, tol)).collect::<Result<Vec<_>>>()?;
    let minima: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let regenerated = outcomes.iter().map(|o| o.1).sum();
    let nonnegative_duals = minima.iter().filter(|&&m| !(m < SWEEP_THRESHOLD)).count();
    let closest = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SweepResult { seed, dim: d, trials, ontic_sizes: ontic_sizes.to_vec(), threshold: SWEEP_THRESHOLD, trial_sizes, minima, regenerated, nonnegative_duals, closest })
}

/// Result of a mixture-linearity test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffinityVerdict {
    pub ok: bool,
    pub worst: f64,
    pub trials: usize,
}

/// Checks `f(pρ + (1-p)σ) = p f(ρ) + (1-p) f(σ)` elementwise for random
/// densities and weights, always including `p = 0` and `p = 1`.
pub fn affinity_check_map<T: Real, R: Rng + ?Sized>(
    d: usize,
    map: impl Fn(&Operator<T>) -> Result<DVector<T>>,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<AffinityVerdict> {
    let mut worst = 0.0f64;
    for t in 0..trials.max(2) {
        let rho = sampling::random_density::<T, R>(d, rng);
        let sigma = sampling::random_density::<T, R>(d, rng);
        let p: f64 = match t {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random(),
        };
        let pt = crate::scalar::lit::<T>(p);
        let mix = rho.matrix() * creal(pt) + sigma.matrix() * creal(T::one() - pt);
        let mixed = Operator::from_parts(mix, rho.class());
        let lhs = map(&mixed)?;
        let rhs = map(&rho)? * pt + map(&sigma)? * (T::one() - pt);
        worst = worst.max(to_f64((lhs - rhs).amax()));
    }
    Ok(AffinityVerdict { ok: worst <= tol, worst, trials: trials.max(2) })
}

/// [`affinity_check_map`] for the state map of a dual pair.
pub fn affinity_check<T: Real, R: Rng + ?Sized>(pair: &DualPair<T>, trials: usize, rng: &mut R, tol: f64) -> Result<AffinityVerdict> {
    affinity_check_map(pair.dim(), |r| rep_state(pair, r).map(|q| q.values().clone()), trials, rng, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, Family, RepSpec};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn pair(family: Family, d: usize) -> DualPair<f64> {
        build::<f64>(&RepSpec::new(family, d), &tol()).unwrap().pair
    }

    #[test]
    fn negativity_basics() {
        assert_eq!(negativity_of(&[0.25f64; 4]), 0.0);
        assert!((negativity_of(&[1.5f64, -0.25, -0.25]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_never_negative() {
        for (family, d) in [(Family::Wootters, 3), (Family::Odd, 5), (Family::Even, 2), (Family::Constellation, 3), (Family::Ghw, 4), (Family::Sic, 3)] {
            let p = pair(family, d);
            let mu = rep_state(&p, &Operator::maximally_mixed(d)).unwrap();
            assert_eq!(negativity(&mu), 0.0, "{family}");
        }
    }

    #[test]
    fn sic_fails_only_on_effects() {
        let r = sampled_classicality_check(&pair(Family::Sic, 2), 100, 1, &tol()).unwrap();
        assert!(r.nonnegative_states.passed);
        assert!(!r.bounded_effects.passed);
        assert!(r.normalization.passed && r.born_rule.passed);
        assert_eq!(r.failed_conditions(), vec!["a:effects"]);
        assert!((r.dual_min_eigenvalue + 1.0).abs() < 1e-10);
    }

    #[test]
    fn wootters_fails_on_states() {
        let r = sampled_classicality_check(&pair(Family::Wootters, 3), 200, 2, &tol()).unwrap();
        assert!(!r.nonnegative_states.passed);
        assert!(r.max_state_negativity > 0.0);
        assert!(r.normalization.passed && r.born_rule.passed);
        assert!(!r.is_classical());
    }

    #[test]
    fn wishart_frames_are_positive_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_positive_frame::<f64, _>(2, 6, &mut rng, &tol()).unwrap();
        assert!(f.is_positive(&tol()));
        assert!(linalg::max_abs_diff(&f.element_sum(), &linalg::identity(2)) < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic_and_negative() {
        let a = nogo_sweep::<f64>(2, 60, &[4, 6, 8], 9, &tol()).unwrap();
        let b = nogo_sweep::<f64>(2, 60, &[4, 6, 8], 9, &tol()).unwrap();
        assert_eq!(a, b);
        assert!(a.passed() && a.closest < SWEEP_THRESHOLD);
        assert_eq!(&a.trial_sizes[..4], &[4, 6, 8, 4]);
    }

    #[test]
    fn sweep_preconditions() {
        assert!(matches!(nogo_sweep::<f64>(6, 1, &[36], 0, &tol()), Err(Error::InvalidDimension { .. })));
        assert!(matches!(nogo_sweep::<f64>(3, 1, &[8], 0, &tol()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn affinity_holds_and_nonlinear_map_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = pair(Family::Odd, 3);
        assert!(affinity_check(&p, 50, &mut rng, 1e-12).unwrap().ok);
        let squared = |r: &Operator<f64>| -> Result<DVector<f64>> {
            let mu = rep_state(&p, r)?.values().map(|v| v * v);
            let s = mu.sum();
            Ok(mu / s)
        };
        assert!(!affinity_check_map(3, squared, 50, &mut rng, 1e-12).unwrap().ok);
    }
}
