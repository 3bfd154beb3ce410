//! Discrete spherical kernels sampled at a constellation of `d²` points.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::frames::{canonical_dual, DualPair, Frame, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::{clebsch_gordan_doubled, spin_matrices, Operator, OperatorClass, Tolerance};
use crate::scalar::{creal, from_usize, lit, to_f64, Real};

/// Gram condition-number gate for accepting a constellation.
pub const CONSTELLATION_CONDITION_LIMIT: f64 = 1e8;

/// Built constellation: kernel `Δ_ν`, dual kernel `Δ^ν` and the frame pair
/// `F(ν) = Δ^ν/d`, `D(ν) = Δ_ν`.
#[derive(Clone, Debug)]
pub struct ConstellationData<T: Real> {
    pub points: Vec<[f64; 3]>,
    pub signs: Vec<i8>,
    pub kernel: Vec<Operator<T>>,
    pub dual_kernel: Vec<Operator<T>>,
    pub condition: f64,
    pub pair: DualPair<T>,
}

/// Weights `w_m = Σ_l ε_l (2l+1)/(2s+1) C^{s l s}_{m 0 m}` for `m = s, s-1, …, -s`.
pub fn kernel_weights(d: usize, signs: &[i8]) -> Vec<f64> {
    let ts = d as i32 - 1;
    (0..d)
        .map(|i| {
            let tm = ts - 2 * i as i32;
            (0..=ts)
                .map(|l| {
                    let eps = if l == 0 { 1.0 } else { f64::from(signs[l as usize - 1]) };
                    eps * f64::from(2 * l + 1) / d as f64 * clebsch_gordan_doubled(ts, tm, 2 * l, 0, ts, tm)
                })
                .sum()
        })
        .collect()
}

/// `Δ(n) = Σ_m w_m |m; n⟩⟨m; n|` with `|m; n⟩` the eigenvectors of `J·n`.
pub fn kernel_at<T: Real>(d: usize, n: [f64; 3], weights: &[f64]) -> CMatrix<T> {
    let [jx, jy, jz] = spin_matrices::<T>(d).expect("d >= 2");
    let jn = jx * creal(lit::<T>(n[0])) + jy * creal(lit::<T>(n[1])) + jz * creal(lit::<T>(n[2]));
    let (_, vecs) = linalg::eigh(&jn);
    // eigenvalues ascend from -s, weights are listed from m = s
    let mut acc = CMatrix::<T>::zeros(d, d);
    for (k, w) in weights.iter().rev().enumerate() {
        let v = vecs.column(k).into_owned();
        acc += linalg::outer(&v) * creal(lit::<T>(*w));
    }
    linalg::hermitian_part(&acc)
}

/// `exp(-iθ a·J)` for a unit axis `a`.
pub fn rotation_unitary<T: Real>(d: usize, axis: [f64; 3], angle: f64) -> CMatrix<T> {
    let [jx, jy, jz] = spin_matrices::<T>(d).expect("d >= 2");
    let h = jx * creal(lit::<T>(axis[0])) + jy * creal(lit::<T>(axis[1])) + jz * creal(lit::<T>(axis[2]));
    linalg::unitary_exp(&h, lit(angle))
}

/// Rodrigues rotation of `v` about unit `axis` by `angle`.
pub fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
    let cross = [axis[1] * v[2] - axis[2] * v[1], axis[2] * v[0] - axis[0] * v[2], axis[0] * v[1] - axis[1] * v[0]];
    [0, 1, 2].map(|i| v[i] * c + cross[i] * s + axis[i] * dot * (1.0 - c))
}

/// Fibonacci-lattice constellation of `d²` points.
pub fn default_constellation(d: usize) -> Vec<[f64; 3]> {
    let n = d * d;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

pub fn constellation_frame<T: Real>(d: usize, points: &[[f64; 3]], signs: Option<&[i8]>, tol: &Tolerance) -> Result<ConstellationData<T>> {
    super::Family::Constellation.check(d)?;
    if points.len() != d * d {
        return Err(Error::InvalidInput(format!("a constellation for d = {d} needs {} points, got {}", d * d, points.len())));
    }
    let mut unit = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if !(norm > 0.0) || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!("constellation point {i} is not a unit vector (norm {norm})")));
        }
        let u = [p[0] / norm, p[1] / norm, p[2] / norm];
        if unit.iter().any(|q: &[f64; 3]| (0..3).all(|k| (q[k] - u[k]).abs() < 1e-12)) {
            return Err(Error::InvalidInput(format!("constellation point {i} repeats an earlier point")));
        }
        unit.push(u);
    }
    let signs: Vec<i8> = match signs {
        Some(s) => {
            if s.len() != d - 1 || s.iter().any(|&e| e != 1 && e != -1) {
                return Err(Error::InvalidInput(format!("need {} signs of ±1 for l = 1..{}", d - 1, d - 1)));
            }
            s.to_vec()
        }
        None => vec![1; d - 1],
    };
    let weights = kernel_weights(d, &signs);
    let kernel: Vec<CMatrix<T>> = unit.iter().map(|&n| kernel_at(d, n, &weights)).collect();
    let n = kernel.len();
    let gram = DMatrix::<T>::from_fn(n, n, |i, j| linalg::trace_product(&kernel[i], &kernel[j]).re);
    let ev = linalg::eigvals_sym(&gram);
    let (lo, hi) = (to_f64(ev[0].abs()), to_f64(ev[n - 1].abs()));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= CONSTELLATION_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { what: "constellation Gram matrix".into(), condition, limit: CONSTELLATION_CONDITION_LIMIT });
    }
    let ginv = gram.clone().try_inverse().ok_or_else(|| Error::IllConditioned {
        what: "constellation Gram matrix".into(),
        condition,
        limit: CONSTELLATION_CONDITION_LIMIT,
    })?;
    let dd = from_usize::<T>(d);
    let dual_kernel: Vec<CMatrix<T>> = (0..n)
        .map(|mu| {
            let mut acc = CMatrix::<T>::zeros(d, d);
            for (nu, k) in kernel.iter().enumerate() {
                acc += k * creal(ginv[(nu, mu)] * dd);
            }
            linalg::hermitian_part(&acc)
        })
        .collect();
    let space = OnticSpace::indexed(n)?;
    let frame_ops = dual_kernel.iter().map(|k| Operator::from_parts(k / creal(dd), OperatorClass::HERMITIAN)).collect();
    let frame = Frame::new(space, frame_ops, tol)?;
    let pair = canonical_dual(&frame, tol)?;
    let herm = |m: CMatrix<T>| Operator::from_parts(m, OperatorClass::HERMITIAN);
    Ok(ConstellationData {
        points: unit,
        signs,
        kernel: kernel.into_iter().map(herm).collect(),
        dual_kernel: dual_kernel.into_iter().map(herm).collect(),
        condition,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;

    #[test]
    fn qubit_kernel_closed_form() {
        // ε = +1: Δ(n) = (𝟙 + √3 n·σ)/2
        let n = [0.6, 0.0, 0.8];
        let k = kernel_at::<f64>(2, n, &kernel_weights(2, &[1]));
        let sx = crate::opspace::shift::<f64>(2);
        let sz = crate::opspace::clock::<f64>(2);
        let want = (linalg::identity::<f64>(2) + (sx * C::new(n[0], 0.0) + sz * C::new(n[2], 0.0)) * C::new(3f64.sqrt(), 0.0)) * C::new(0.5, 0.0);
        assert!(linalg::max_abs_diff(&k, &want) < 1e-12);
    }

    #[test]
    fn kernel_has_unit_trace() {
        for d in 2..=5 {
            let w = kernel_weights(d, &vec![1; d - 1]);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn postulates_hold() {
        let tol = Tolerance::default();
        for d in [2usize, 3, 4] {
            let data = constellation_frame::<f64>(d, &default_constellation(d), None, &tol).unwrap();
            let dd = d as f64;
            let mut sum = CMatrix::<f64>::zeros(d, d);
            for k in &data.dual_kernel {
                sum += k.matrix();
            }
            assert!(linalg::max_abs_diff(&(sum / C::new(dd, 0.0)), &linalg::identity(d)) < 1e-10);
            for (mu, up) in data.dual_kernel.iter().enumerate() {
                let mut acc = CMatrix::<f64>::zeros(d, d);
                for (nu, down) in data.kernel.iter().enumerate() {
                    let t = linalg::trace_product(down.matrix(), up.matrix()).re;
                    assert!((t / dd - if mu == nu { 1.0 } else { 0.0 }).abs() < 1e-9);
                    let w = linalg::trace_product(data.dual_kernel[nu].matrix(), up.matrix()).re;
                    acc += down.matrix() * C::new(w / dd, 0.0);
                }
                assert!(linalg::max_abs_diff(&acc, up.matrix()) < 1e-9);
            }
            for (i, k) in data.kernel.iter().enumerate() {
                assert!(linalg::max_abs_diff(pair_dual(&data, i), k.matrix()) < 1e-9);
            }
        }
    }

    fn pair_dual(data: &ConstellationData<f64>, i: usize) -> &CMatrix<f64> {
        data.pair.dual.element(i).matrix()
    }

    #[test]
    fn degenerate_constellation_is_rejected() {
        let mut pts = default_constellation(2);
        pts[1] = [pts[0][0], pts[0][1], pts[0][2]];
        assert!(constellation_frame::<f64>(2, &pts, None, &Tolerance::default()).is_err());
        // four points on a great circle leave σ_y's direction unspanned
        let flat: Vec<[f64; 3]> = (0..4).map(|i| {
            let t = i as f64 * 0.9;
            [t.cos(), 0.0, t.sin()]
        }).collect();
        match constellation_frame::<f64>(2, &flat, None, &Tolerance::default()) {
            Err(Error::IllConditioned { condition, .. }) => assert!(condition > 1e8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_covariance() {
        let axis = [0.0, 0.6, 0.8];
        let angle = 0.7;
        for d in [2usize, 3] {
            let w = kernel_weights(d, &vec![1; d - 1]);
            let u = rotation_unitary::<f64>(d, axis, angle);
            let n = [1.0, 0.0, 0.0];
            let lhs = kernel_at::<f64>(d, rotate(n, axis, angle), &w);
            let rhs = &u * kernel_at::<f64>(d, n, &w) * u.adjoint();
            assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }
}
