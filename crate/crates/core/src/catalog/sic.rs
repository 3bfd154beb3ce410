//! SIC-POVM frames from Weyl–Heisenberg orbits, and a fiducial search.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{canonical_dual, DualPair, Frame, OnticSpace};
use crate::linalg::{self, CVector};
use crate::opspace::{weyl, Operator, OperatorClass, Tolerance};
use crate::sampling;
use crate::scalar::{creal, from_usize, half_root_of_unity, lit, root_of_unity, to_f64, Real, C};

use super::Translation;

/// Largest fiducial residual accepted by [`sic_frame`].
pub const FIDUCIAL_GATE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Loaded,
    Optimized,
}

/// Unit fiducial vector with its measured quality.
#[derive(Clone, Debug)]
pub struct Fiducial<T: Real> {
    pub dim: usize,
    pub vector: CVector<T>,
    pub provenance: Provenance,
    /// `max_{α≠β} | |⟨φ_α,φ_β⟩|² - 1/(d+1) |`.
    pub residual: f64,
    pub converged: bool,
    pub restarts_used: usize,
}

impl<T: Real> Fiducial<T> {
    /// Normalizes and measures a supplied vector.
    pub fn loaded(d: usize, amplitudes: &[(f64, f64)]) -> Result<Self> {
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amplitudes.len() });
        }
        let v = CVector::<T>::from_iterator(d, amplitudes.iter().map(|&(re, im)| C::new(lit(re), lit(im))));
        let norm = v.norm();
        if !(norm > T::zero()) {
            return Err(Error::InvalidInput("zero fiducial vector".into()));
        }
        let vector = v / creal(norm);
        let residual = sic_overlap_residual(&vector);
        Ok(Fiducial { dim: d, vector, provenance: Provenance::Loaded, residual, converged: residual <= FIDUCIAL_GATE, restarts_used: 0 })
    }

    pub fn amplitudes(&self) -> Vec<(f64, f64)> {
        self.vector.iter().map(|z| (to_f64(z.re), to_f64(z.im))).collect()
    }
}

/// Known fiducials: the qubit tetrahedron state and `(0, 1, -1)/√2` for qutrits.
pub fn bundled_fiducial<T: Real>(d: usize) -> Option<Fiducial<T>> {
    let amps = match d {
        2 => {
            let theta = (1.0f64 / 3f64.sqrt()).acos();
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let ph = std::f64::consts::FRAC_PI_4;
            vec![(c, 0.0), (s * ph.cos(), s * ph.sin())]
        }
        3 => vec![(0.0, 0.0), (std::f64::consts::FRAC_1_SQRT_2, 0.0), (-std::f64::consts::FRAC_1_SQRT_2, 0.0)],
        _ => return None,
    };
    let f = Fiducial::loaded(d, &amps).ok()?;
    (f.residual <= FIDUCIAL_GATE).then_some(f)
}

/// `U_{(a,b)} = ω^{ab/2} X^a Z^b`.
pub fn weyl_orbit_operator<T: Real>(d: usize, a: usize, b: usize) -> crate::linalg::CMatrix<T> {
    weyl::<T>(d, a as i64, b as i64) * half_root_of_unity::<T>(d, (a * b) as i64)
}

/// The `d²` orbit vectors `U_{(a,b)} φ` in row-major `(a, b)` order.
pub fn weyl_orbit<T: Real>(phi: &CVector<T>) -> Vec<CVector<T>> {
    let d = phi.len();
    (0..d * d).map(|i| weyl_orbit_operator::<T>(d, i / d, i % d) * phi).collect()
}

/// `⟨φ| X^a Z^b |φ⟩` without forming the operator.
fn weyl_expectation<T: Real>(phi: &CVector<T>, a: usize, b: usize) -> C<T> {
    let d = phi.len();
    let mut acc = C::new(T::zero(), T::zero());
    for k in 0..d {
        let src = (k + d - a) % d;
        acc += phi[k].conj() * root_of_unity::<T>(d, (b * src) as i64) * phi[src];
    }
    acc
}

fn apply_weyl<T: Real>(phi: &CVector<T>, a: usize, b: usize) -> CVector<T> {
    let d = phi.len();
    CVector::from_fn(d, |k, _| {
        let src = (k + d - a) % d;
        root_of_unity::<T>(d, (b * src) as i64) * phi[src]
    })
}

fn apply_weyl_adjoint<T: Real>(phi: &CVector<T>, a: usize, b: usize) -> CVector<T> {
    let d = phi.len();
    CVector::from_fn(d, |k, _| root_of_unity::<T>(d, -((b * k) as i64)) * phi[(k + a) % d])
}

/// Worst deviation of the orbit overlaps from `1/(d+1)`.
pub fn sic_overlap_residual<T: Real>(phi: &CVector<T>) -> f64 {
    let d = phi.len();
    let n2 = to_f64(phi.norm_squared());
    let target = 1.0 / (d as f64 + 1.0);
    let mut worst = 0.0f64;
    for i in 1..d * d {
        let v = to_f64(weyl_expectation(phi, i / d, i % d).norm_sqr()) / (n2 * n2);
        worst = worst.max((v - target).abs());
    }
    worst
}

/// SIC frame `F_α = φ_α φ_α*/d`, dual `D_α = (d+1) φ_α φ_α* - 𝟙`.
pub fn sic_frame<T: Real>(fid: &Fiducial<T>, tol: &Tolerance) -> Result<DualPair<T>> {
    if fid.residual > FIDUCIAL_GATE || !fid.residual.is_finite() {
        return Err(Error::FiducialQuality { residual: fid.residual, limit: FIDUCIAL_GATE });
    }
    let d = fid.dim;
    let inv_d = creal(T::one() / from_usize::<T>(d));
    let ops = weyl_orbit(&fid.vector)
        .into_iter()
        .map(|v| Operator::from_parts(linalg::outer(&v) * inv_d, OperatorClass { hermitian: true, effect: true, density: false, projector: false }))
        .collect();
    let frame = Frame::new(OnticSpace::phase_grid(d)?, ops, tol)?;
    canonical_dual(&frame, tol)
}

/// Weyl operators permute the orbit: `U_{(a,b)} F_{(a',b')} U† = F_{(a+a', b+b')}`.
pub(crate) fn sic_translations<T: Real>(d: usize) -> Vec<Translation<T>> {
    (0..d * d)
        .map(|s| {
            let (a, b) = (s / d, s % d);
            let perm = (0..d * d).map(|i| ((i / d + a) % d) * d + (i % d + b) % d).collect();
            Translation { shift: vec![(a, b)], unitary: weyl::<T>(d, a as i64, b as i64), perm }
        })
        .collect()
}

/// Settings for [`find_fiducial`].
#[derive(Clone, Debug, PartialEq)]
pub struct SicSearch {
    pub restarts: usize,
    /// Residual at which the search stops early.
    pub tol: f64,
    /// Relative decrease of the potential below which descent stops.
    pub descent_tol: f64,
    pub max_descent_iters: usize,
    pub max_polish_iters: usize,
    pub seed: u64,
    /// Restarts evaluated concurrently between early-stop checks.
    pub batch: usize,
}

impl Default for SicSearch {
    fn default() -> Self {
        SicSearch { restarts: 200, tol: 1e-10, descent_tol: 1e-10, max_descent_iters: 3000, max_polish_iters: 200, seed: 0, batch: 8 }
    }
}

/// `Σ_{(a,b)≠0} |⟨φ|U_{ab}|φ⟩|⁴` for unit `φ`, and its Wirtinger gradient.
fn potential(phi: &CVector<f64>) -> (f64, CVector<f64>) {
    let d = phi.len();
    let mut f = 0.0;
    let mut grad = CVector::<f64>::zeros(d);
    for i in 1..d * d {
        let (a, b) = (i / d, i % d);
        let e = weyl_expectation(phi, a, b);
        let m = e.norm_sqr();
        f += m * m;
        let dir = apply_weyl(phi, a, b) * e.conj() + apply_weyl_adjoint(phi, a, b) * e;
        grad += dir * C::new(4.0 * m, 0.0);
    }
    (f, grad)
}

fn normalized(v: CVector<f64>) -> CVector<f64> {
    let n = v.norm();
    v / C::new(n, 0.0)
}

/// Projected gradient descent with step halving.
fn descend(mut phi: CVector<f64>, opts: &SicSearch) -> CVector<f64> {
    let (mut f, mut g) = potential(&phi);
    let mut step = 0.1;
    for _ in 0..opts.max_descent_iters {
        let radial = phi.dotc(&g).re;
        let tangent = &g - &phi * C::new(radial, 0.0);
        let gn = tangent.norm_squared();
        if gn < 1e-30 {
            break;
        }
        let mut accepted = false;
        while step > 1e-12 {
            let trial = normalized(&phi - &tangent * C::new(step, 0.0));
            let (ft, gt) = potential(&trial);
            if ft <= f - 1e-4 * step * gn {
                let decrease = f - ft;
                phi = trial;
                g = gt;
                let prev = f;
                f = ft;
                step *= 2.0;
                accepted = true;
                if decrease <= opts.descent_tol * prev.max(1e-300) {
                    return phi;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    phi
}

/// Levenberg–Marquardt on the overlap equations `|⟨φ|U_k|φ⟩|² = 1/(d+1)`.
fn polish(mut phi: CVector<f64>, opts: &SicSearch) -> CVector<f64> {
    let d = phi.len();
    let target = 1.0 / (d as f64 + 1.0);
    let residuals = |phi: &CVector<f64>| -> (DVector<f64>, Vec<C<f64>>) {
        let mut r = DVector::zeros(d * d);
        let mut ex = vec![C::new(0.0, 0.0); d * d];
        for i in 1..d * d {
            let e = weyl_expectation(phi, i / d, i % d);
            ex[i] = e;
            r[i - 1] = e.norm_sqr() - target;
        }
        r[d * d - 1] = phi.norm_squared() - 1.0;
        (r, ex)
    };
    let mut mu = 1e-3;
    let (mut r, mut ex) = residuals(&phi);
    let mut cost = r.norm_squared();
    for _ in 0..opts.max_polish_iters {
        if r.amax() < 1e-15 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(d * d, 2 * d);
        for i in 1..d * d {
            let (a, b) = (i / d, i % d);
            let g = (apply_weyl(&phi, a, b) * ex[i].conj() + apply_weyl_adjoint(&phi, a, b) * ex[i]) * C::new(2.0, 0.0);
            for k in 0..d {
                jac[(i - 1, k)] = g[k].re;
                jac[(i - 1, d + k)] = g[k].im;
            }
        }
        for k in 0..d {
            jac[(d * d - 1, k)] = 2.0 * phi[k].re;
            jac[(d * d - 1, d + k)] = 2.0 * phi[k].im;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &r);
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for k in 0..2 * d {
                a[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&rhs)) else {
                mu *= 10.0;
                continue;
            };
            let trial = CVector::<f64>::from_fn(d, |k, _| phi[k] + C::new(step[k], step[d + k]));
            let (rt, et) = residuals(&trial);
            let ct = rt.norm_squared();
            if ct < cost {
                phi = trial;
                r = rt;
                ex = et;
                cost = ct;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    normalized(phi)
}

fn one_restart(d: usize, index: usize, opts: &SicSearch) -> (f64, CVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let start = sampling::haar_vector::<f64, _>(d, &mut rng);
    let phi = polish(descend(start, opts), opts);
    (sic_overlap_residual(&phi), phi)
}

/// Minimizes the Weyl–Heisenberg frame potential from random starts.
///
/// Restarts run in parallel batches; the search stops after the first batch
/// whose best residual reaches `opts.tol`. The result is deterministic in the
/// seed and flagged non-converged when no restart reaches the gate.
pub fn find_fiducial<T: Real>(d: usize, opts: &SicSearch) -> Fiducial<T> {
    let batch = opts.batch.max(1);
    let mut best: Option<(f64, usize, CVector<f64>)> = None;
    let mut used = 0;
    while used < opts.restarts.max(1) {
        let hi = (used + batch).min(opts.restarts.max(1));
        let results: Vec<(f64, usize, CVector<f64>)> = (used..hi)
            .into_par_iter()
            .map(|i| {
                let (res, phi) = one_restart(d, i, opts);
                (res, i, phi)
            })
            .collect();
        used = hi;
        for cand in results {
            let better = match &best {
                None => true,
                Some((r, i, _)) => cand.0 < *r || (cand.0 == *r && cand.1 < *i),
            };
            if better {
                best = Some(cand);
            }
        }
        if best.as_ref().is_some_and(|b| b.0 <= opts.tol) {
            break;
        }
    }
    let (residual, _, phi) = best.expect("at least one restart");
    let vector = CVector::<T>::from_iterator(d, phi.iter().map(|z| C::new(lit(z.re), lit(z.im))));
    let residual_t = sic_overlap_residual(&vector);
    Fiducial {
        dim: d,
        vector,
        provenance: Provenance::Optimized,
        residual: residual.max(residual_t),
        converged: residual <= opts.tol.max(FIDUCIAL_GATE),
        restarts_used: used,
    }
}
