//! Wootters, Cohendet (odd) and Leonhardt (even) phase-space frames.

use crate::error::Result;
use crate::finitefield::prime_factors;
use crate::frames::{canonical_dual, DualPair, Frame, Label, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::{parity, weyl, Operator, OperatorClass, Tolerance};
use crate::scalar::{creal, from_usize, half_root_of_unity, root_of_unity, Real};

use super::Translation;

/// How `ω^{x/2}` is evaluated in the Wootters sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfPower {
    /// `exp(iπx/d)`.
    Branch,
    /// `ω^{x·2⁻¹ mod d}`, odd `d` only.
    InverseOfTwo,
}

fn half_power<T: Real>(d: usize, x: i64, how: HalfPower) -> crate::scalar::C<T> {
    match how {
        HalfPower::Branch => half_root_of_unity(d, x),
        HalfPower::InverseOfTwo => {
            let inv2 = (d as i64 + 1) / 2;
            root_of_unity(d, x * inv2)
        }
    }
}

/// `A(q,p) = (1/d) Σ_{j,m} ω^{pj - qm + jm/2} X^j Z^m` for prime `d`.
pub fn wootters_phase_point_sum<T: Real>(d: usize, q: usize, p: usize, how: HalfPower) -> CMatrix<T> {
    let mut acc = CMatrix::<T>::zeros(d, d);
    let (q, p) = (q as i64, p as i64);
    for j in 0..d as i64 {
        for m in 0..d as i64 {
            let phase = root_of_unity::<T>(d, p * j - q * m) * half_power::<T>(d, j * m, how);
            acc += weyl::<T>(d, j, m) * phase;
        }
    }
    acc / creal(from_usize::<T>(d))
}

/// Phase-point operator of a prime dimension.
///
/// `d = 2` uses the sum over Weyl operators with `ω^{1/2} = i`; odd primes use
/// the closed form `X^{2q} Z^{2p} P ω^{2qp}`.
pub fn wootters_phase_point<T: Real>(d: usize, q: usize, p: usize) -> CMatrix<T> {
    if d == 2 {
        return wootters_phase_point_sum(2, q, p, HalfPower::Branch);
    }
    let (q, p) = (q as i64, p as i64);
    let par = parity::<T>(d).expect("d >= 2").into_matrix();
    weyl::<T>(d, 2 * q, 2 * p) * par * root_of_unity::<T>(d, 2 * q * p)
}

fn mixed_index(parts: &[(usize, usize)], factors: &[usize]) -> usize {
    parts.iter().zip(factors).fold(0, |acc, (&(q, p), &f)| acc * f * f + q * f + p)
}

fn product_points(factors: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * f * f);
        for prefix in &out {
            for q in 0..f {
                for p in 0..f {
                    let mut v = prefix.clone();
                    v.push((q, p));
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

fn pair_from_duals<T: Real>(space: std::sync::Arc<OnticSpace>, duals: Vec<CMatrix<T>>, scale: T, tol: &Tolerance) -> Result<DualPair<T>> {
    let ops = duals
        .into_iter()
        .map(|a| Operator::from_parts(linalg::hermitian_part(&a) * creal(scale), OperatorClass::HERMITIAN))
        .collect();
    let frame = Frame::new(space, ops, tol)?;
    canonical_dual(&frame, tol)
}

/// `F(λ) = A(λ)/d` over `Z_d x Z_d` (prime `d`) or a product of prime phase
/// spaces (composite `d`, factors in nondecreasing order).
pub fn wootters_frame<T: Real>(d: usize, tol: &Tolerance) -> Result<DualPair<T>> {
    super::Family::Wootters.check(d)?;
    let factors = prime_factors(d);
    let inv_d = T::one() / from_usize::<T>(d);
    if factors.len() == 1 {
        let duals = (0..d * d).map(|i| wootters_phase_point::<T>(d, i / d, i % d)).collect();
        return pair_from_duals(OnticSpace::phase_grid(d)?, duals, inv_d, tol);
    }
    let points = product_points(&factors);
    let duals = points
        .iter()
        .map(|parts| {
            let mats: Vec<CMatrix<T>> = parts.iter().zip(&factors).map(|(&(q, p), &f)| wootters_phase_point(f, q, p)).collect();
            linalg::kron_all(&mats)
        })
        .collect();
    let space = OnticSpace::new(points.into_iter().map(Label::Product).collect())?;
    pair_from_duals(space, duals, inv_d, tol)
}

/// Fano operator `Δ_{qp} = W_{qp} P` with `W_{mn} φ_k = ω^{2n(k-m)} φ_{k-2m}`.
pub fn fano_operator<T: Real>(d: usize, q: usize, p: usize) -> CMatrix<T> {
    let w = cohendet_w::<T>(d, q as i64, p as i64);
    w * parity::<T>(d).expect("d >= 2").into_matrix()
}

/// Cohendet's displacement `W_{mn}`.
pub fn cohendet_w<T: Real>(d: usize, m: i64, n: i64) -> CMatrix<T> {
    let di = d as i64;
    CMatrix::from_fn(d, d, |r, c| {
        let k = c as i64;
        if r as i64 == (k - 2 * m).rem_euclid(di) {
            root_of_unity::<T>(d, 2 * n * (k - m))
        } else {
            creal(T::zero())
        }
    })
}

/// `F(q,p) = (1/d) X^{-2q} Z^{2p} P ω^{-2qp}`; the dual elements are the Fano operators.
pub fn odd_frame<T: Real>(d: usize, tol: &Tolerance) -> Result<DualPair<T>> {
    super::Family::Odd.check(d)?;
    let par = parity::<T>(d)?.into_matrix();
    let duals = (0..d * d)
        .map(|i| {
            let (q, p) = ((i / d) as i64, (i % d) as i64);
            weyl::<T>(d, -2 * q, 2 * p) * &par * root_of_unity::<T>(d, -2 * q * p)
        })
        .collect();
    pair_from_duals(OnticSpace::phase_grid(d)?, duals, T::one() / from_usize::<T>(d), tol)
}

/// Leonhardt's operators `X^q Z^p P ω^{qp/2}` over `Z_{2d} x Z_{2d}`, scaled by
/// `1/(2d)` so the family sums to the identity.
pub fn even_frame<T: Real>(d: usize, tol: &Tolerance) -> Result<DualPair<T>> {
    super::Family::Even.check(d)?;
    let m = 2 * d;
    let par = parity::<T>(d)?.into_matrix();
    let duals = (0..m * m)
        .map(|i| {
            let (q, p) = ((i / m) as i64, (i % m) as i64);
            weyl::<T>(d, q, p) * &par * half_root_of_unity::<T>(d, q * p)
        })
        .collect();
    pair_from_duals(OnticSpace::phase_grid(m)?, duals, T::one() / from_usize::<T>(m), tol)
}

/// `X^{q0} Z^{p0}` shifts Wootters points by `(q0, p0)`, factor by factor.
pub(crate) fn wootters_translations<T: Real>(d: usize) -> Vec<Translation<T>> {
    let factors = prime_factors(d);
    let points = product_points(&factors);
    let index = |parts: &[(usize, usize)]| mixed_index(parts, &factors);
    points
        .iter()
        .map(|shift| {
            let mats: Vec<CMatrix<T>> = shift.iter().zip(&factors).map(|(&(a, b), &f)| weyl::<T>(f, a as i64, b as i64)).collect();
            let perm = points
                .iter()
                .map(|pt| {
                    let moved: Vec<(usize, usize)> = pt.iter().zip(shift).zip(&factors).map(|((&(q, p), &(a, b)), &f)| ((q + a) % f, (p + b) % f)).collect();
                    index(&moved)
                })
                .collect();
            Translation { shift: shift.clone(), unitary: linalg::kron_all(&mats), perm }
        })
        .collect()
}

/// `X^{-q0} Z^{p0}` shifts odd-frame points by `(q0, p0)`.
pub(crate) fn odd_translations<T: Real>(d: usize) -> Vec<Translation<T>> {
    (0..d * d)
        .map(|s| {
            let (a, b) = (s / d, s % d);
            let perm = (0..d * d).map(|i| ((i / d + a) % d) * d + (i % d + b) % d).collect();
            Translation { shift: vec![(a, b)], unitary: weyl::<T>(d, -(a as i64), b as i64), perm }
        })
        .collect()
}

/// `X^a Z^b` shifts even-frame points by `(2a, 2b)`; only this index-`4`
/// subgroup of `Z_{2d} x Z_{2d}` is realized by Weyl operators.
pub(crate) fn even_translations<T: Real>(d: usize) -> Vec<Translation<T>> {
    let m = 2 * d;
    (0..d * d)
        .map(|s| {
            let (a, b) = (s / d, s % d);
            let perm = (0..m * m).map(|i| ((i / m + 2 * a) % m) * m + (i % m + 2 * b) % m).collect();
            Translation { shift: vec![(2 * a, 2 * b)], unitary: weyl::<T>(d, a as i64, b as i64), perm }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::verify_dual;
    use crate::opspace::basis;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn qubit_phase_points_match_pauli_form() {
        let x = crate::opspace::shift::<f64>(2);
        let z = crate::opspace::clock::<f64>(2);
        let y = CMatrix::from_row_slice(2, 2, &[creal(0.0), crate::scalar::C::new(0.0, -1.0), crate::scalar::C::new(0.0, 1.0), creal(0.0)]);
        for q in 0..2 {
            for p in 0..2 {
                let sq = if q == 0 { 1.0 } else { -1.0 };
                let sp = if p == 0 { 1.0 } else { -1.0 };
                let want = (linalg::identity::<f64>(2) + &z * creal(sq) + &x * creal(sp) + &y * creal(sq * sp)) * creal(0.5);
                assert!(linalg::max_abs_diff(&wootters_phase_point::<f64>(2, q, p), &want) < 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_matches_sum_with_inverse_of_two() {
        for d in [3usize, 5, 7] {
            for q in 0..d {
                for p in 0..d {
                    let a = wootters_phase_point::<f64>(d, q, p);
                    let b = wootters_phase_point_sum::<f64>(d, q, p, HalfPower::InverseOfTwo);
                    assert!(linalg::max_abs_diff(&a, &b) < 1e-12, "d={d} ({q},{p})");
                }
            }
        }
        // the exp(iπx/d) branch is not Hermitian-consistent for odd d
        let a = wootters_phase_point::<f64>(3, 1, 1);
        let b = wootters_phase_point_sum::<f64>(3, 1, 1, HalfPower::Branch);
        assert!(linalg::max_abs_diff(&a, &b) > 1e-3);
    }

    #[test]
    fn wootters_d3_frame_operator_and_dual() {
        let pair = wootters_frame::<f64>(3, &tol()).unwrap();
        let s = pair.frame.frame_operator();
        assert!((s - nalgebra::DMatrix::<f64>::identity(9, 9) / 3.0).amax() < 1e-12);
        for (i, a) in pair.dual.ops().iter().enumerate() {
            let want = wootters_phase_point::<f64>(3, i / 3, i % 3);
            assert!(linalg::max_abs_diff(a.matrix(), &want) < 1e-12);
            assert!(linalg::max_abs_diff(&(pair.frame.element(i).matrix() * creal(3.0)), &want) < 1e-12);
        }
        let cross = crate::frames::cross_gram(&pair);
        assert!((cross - nalgebra::DMatrix::<f64>::identity(9, 9)).amax() < 1e-12);
    }

    #[test]
    fn wootters_ket_zero_is_line_supported() {
        let pair = wootters_frame::<f64>(3, &tol()).unwrap();
        let mut rho = CMatrix::<f64>::zeros(3, 3);
        rho[(0, 0)] = creal(1.0);
        let mu = pair.frame.analyze(&rho);
        // oracle: Tr(F(q,p) ρ) = F(q,p)_{00}
        for i in 0..9 {
            let want = pair.frame.element(i).matrix()[(0, 0)].re;
            assert!((mu[i] - want).abs() < 1e-14);
            let expect = if i / 3 == 0 { 1.0 / 3.0 } else { 0.0 };
            assert!((mu[i] - expect).abs() < 1e-12, "point {i}: {}", mu[i]);
        }
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        for d in [2usize, 3, 4, 5, 6] {
            let pair = wootters_frame::<f64>(d, &tol()).unwrap();
            let mu = pair.frame.analyze(&(linalg::identity::<f64>(d) / creal(d as f64)));
            for v in mu.iter() {
                assert!((v - 1.0 / (d * d) as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composite_wootters_is_tensor_product() {
        let pair = wootters_frame::<f64>(6, &tol()).unwrap();
        assert_eq!(pair.len(), 36);
        assert_eq!(pair.space().labels()[10], Label::Product(vec![(0, 1), (0, 1)]));
        let a = linalg::kron(&wootters_phase_point::<f64>(2, 0, 1), &wootters_phase_point::<f64>(3, 0, 1));
        assert!(linalg::max_abs_diff(pair.dual.element(10).matrix(), &a) < 1e-12);
        let (ok, a) = pair.frame.is_tight(&tol());
        assert!(ok && (a - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn translations_act_covariantly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cases: Vec<(DualPair<f64>, Vec<Translation<f64>>)> = vec![
            (wootters_frame(3, &tol()).unwrap(), wootters_translations(3)),
            (wootters_frame(5, &tol()).unwrap(), wootters_translations(5)),
            (wootters_frame(4, &tol()).unwrap(), wootters_translations(4)),
            (odd_frame(3, &tol()).unwrap(), odd_translations(3)),
            (odd_frame(5, &tol()).unwrap(), odd_translations(5)),
            (even_frame(2, &tol()).unwrap(), even_translations(2)),
        ];
        for (pair, group) in cases {
            let d = pair.dim();
            for t in &group {
                for (i, f) in pair.frame.ops().iter().enumerate() {
                    let moved = &t.unitary * f.matrix() * t.unitary.adjoint();
                    assert!(linalg::max_abs_diff(&moved, pair.frame.element(t.perm[i]).matrix()) < 1e-12);
                }
                let rho = sampling::random_density::<f64, _>(d, &mut rng);
                let mu = pair.frame.analyze(rho.matrix());
                let mu_t = pair.frame.analyze(&(&t.unitary * rho.matrix() * t.unitary.adjoint()));
                for i in 0..pair.len() {
                    assert!((mu_t[t.perm[i]] - mu[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn odd_duals_are_fano_operators() {
        for d in [3usize, 5] {
            let pair = odd_frame::<f64>(d, &tol()).unwrap();
            for i in 0..d * d {
                let (q, p) = (i / d, i % d);
                let fano = fano_operator::<f64>(d, q, p);
                assert!(linalg::max_abs_diff(pair.dual.element(i).matrix(), &fano) < 1e-12);
                let sq = &fano * &fano;
                assert!(linalg::max_abs_diff(&sq, &linalg::identity(d)) < 1e-12);
            }
        }
        let pair = odd_frame::<f64>(3, &tol()).unwrap();
        for q in 0..3 {
            for p in 0..3 {
                let a = wootters_phase_point::<f64>(3, (3 - q) % 3, p);
                assert!(linalg::max_abs_diff(pair.dual.element(q * 3 + p).matrix(), &a) < 1e-12);
            }
        }
        let pair5 = odd_frame::<f64>(5, &tol()).unwrap();
        let (ok, a) = pair5.frame.is_tight(&tol());
        assert!(ok && (a - 0.2).abs() < 1e-12);
        assert!(odd_frame::<f64>(4, &tol()).is_err());
    }

    #[test]
    fn even_frame_is_redundant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in [2usize, 4] {
            let pair = even_frame::<f64>(d, &tol()).unwrap();
            assert_eq!(pair.len(), 4 * d * d);
            assert_eq!(pair.frame.coordinate_rank(), d * d);
            assert!(verify_dual(&pair, 20, &mut rng, &tol()).ok);
            let (ok, a) = pair.frame.is_tight(&tol());
            // normalized redundant family: a·d² = Σ‖F‖² = 4d²·d/(2d)² = d
            assert!(ok && (a - 1.0 / d as f64).abs() < 1e-12);
        }
        assert!(even_frame::<f64>(3, &tol()).is_err());
    }

    #[test]
    fn striation_sums_are_pvms() {
        for d in [3usize, 5] {
            let pair = wootters_frame::<f64>(d, &tol()).unwrap();
            // vertical lines q = c
            for c in 0..d {
                let mut s = CMatrix::<f64>::zeros(d, d);
                for p in 0..d {
                    s += pair.dual.element(c * d + p).matrix();
                }
                let mut want = CMatrix::<f64>::zeros(d, d);
                want[(c, c)] = creal(d as f64);
                assert!(linalg::max_abs_diff(&s, &want) < 1e-12);
            }
        }
        let b = basis::orthonormal_basis::<f64>(2);
        assert_eq!(b.len(), 4);
    }
}
