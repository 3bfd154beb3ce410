//! Finite-field phase space: translation operators, a quantum net and the
//! induced phase-point operators.

use crate::error::{Error, Result};
use crate::finitefield::{dual_basis, polynomial_basis, FieldCtx, FieldElement, Geometry, Point};
use crate::frames::{canonical_dual, DualPair, Frame, Label, OnticSpace};
use crate::linalg::{self, CMatrix};
use crate::opspace::{weyl, Operator, OperatorClass, Tolerance};
use crate::scalar::{cis, creal, from_usize, half_root_of_unity, lit, root_of_unity, Real};

use super::Translation;

/// Rank-1 projector per line, translationally covariant.
#[derive(Clone, Debug)]
pub struct QuantumNet<T: Real> {
    /// Indexed like [`Geometry::lines`].
    pub projectors: Vec<Operator<T>>,
}

/// Geometry, translations and net behind a finite-field frame.
#[derive(Clone, Debug)]
pub struct GhwData<T: Real> {
    pub geometry: Geometry,
    pub f: FieldElement,
    /// Per-point expansion coefficients `(q_i, p_i)` in `Z_p`.
    pub components: Vec<(Vec<u32>, Vec<u32>)>,
    /// `T_α`, indexed by point `q * d + p`.
    pub translation_ops: Vec<CMatrix<T>>,
    pub net: QuantumNet<T>,
    pub phase_points: Vec<Operator<T>>,
    pub pair: DualPair<T>,
}

impl<T: Real> GhwData<T> {
    pub fn order(&self) -> usize {
        self.geometry.order()
    }

    pub fn point_index(&self, pt: Point) -> usize {
        pt.0 * self.order() + pt.1
    }

    pub fn translation(&self, pt: Point) -> &CMatrix<T> {
        &self.translation_ops[self.point_index(pt)]
    }

    pub(crate) fn translations(&self) -> Vec<Translation<T>> {
        let geo = &self.geometry;
        geo.points()
            .into_iter()
            .map(|by| {
                let perm = geo.points().into_iter().map(|pt| self.point_index(geo.translate_point(pt, by))).collect();
                Translation { shift: vec![by], unitary: self.translation(by).clone(), perm }
            })
            .collect()
    }

    /// Largest `‖Q(τ_α λ) - T_α Q(λ) T_α†‖_max` over all points and lines.
    pub fn covariance_defect(&self) -> f64 {
        let geo = &self.geometry;
        let mut worst = 0.0f64;
        for by in geo.points() {
            let t = self.translation(by);
            for li in 0..geo.lines().len() {
                let moved = t * self.net.projectors[li].matrix() * t.adjoint();
                let target = self.net.projectors[geo.translate(li, by)].matrix();
                worst = worst.max(crate::scalar::to_f64(linalg::max_abs_diff(&moved, target)));
            }
        }
        worst
    }

    /// The relabeling onto `Z_p x Z_p` phase-grid labels; only for `n = 1`.
    pub fn prime_labels(&self) -> Option<std::sync::Arc<OnticSpace>> {
        (self.geometry.ctx().n() == 1).then(|| OnticSpace::phase_grid(self.order()).expect("valid grid"))
    }
}

/// Symmetric Weyl operator `⊗ ω^{q_i p_i/2} X^{q_i} Z^{p_i}`; the half power
/// uses `2⁻¹ mod p` for odd `p` and `exp(iπ q p/2)` for `p = 2`.
fn symmetric_weyl<T: Real>(p: usize, comps: &(Vec<u32>, Vec<u32>)) -> CMatrix<T> {
    let mats: Vec<CMatrix<T>> = comps
        .0
        .iter()
        .zip(&comps.1)
        .map(|(&q, &m)| {
            let x = i64::from(q) * i64::from(m);
            let phase = if p == 2 { half_root_of_unity::<T>(2, x) } else { root_of_unity::<T>(p, x * ((p as i64 + 1) / 2)) };
            weyl::<T>(p, i64::from(q), i64::from(m)) * phase
        })
        .collect();
    linalg::kron_all(&mats)
}

/// Builds the GHW frame `F(α) = (1/d)(Σ_{λ∋α} Q(λ) - 𝟙)` over `GF(p^n)²`.
///
/// The net on each ray is the common eigenvector of the ray's translations
/// with the largest total overlap with the symmetric Weyl operators (the joint
/// `+1` eigenvector whenever one exists); the other lines of a striation are
/// its translates.
pub fn ghw_frame<T: Real>(p: u32, n: usize, modulus: Option<Vec<u32>>, f: Option<FieldElement>, tol: &Tolerance) -> Result<GhwData<T>> {
    let ctx = match modulus {
        Some(m) => FieldCtx::with_modulus(p, n, m)?,
        None => FieldCtx::new(p, n)?,
    };
    let d = ctx.order();
    let pu = p as usize;
    let f = f.unwrap_or_else(|| ctx.one());
    let fi = ctx.index(&f)?;
    let f_inv = ctx.inv_i(fi).map_err(|_| Error::InvalidField("the momentum multiplier f must be nonzero".into()))?;
    let e = polynomial_basis(&ctx);
    let e_idx: Vec<usize> = e.iter().map(|x| ctx.index(x)).collect::<Result<_>>()?;
    let dual_idx: Vec<usize> = dual_basis(&ctx, &e)?.iter().map(|x| ctx.index(x)).collect::<Result<_>>()?;
    let geometry = Geometry::new(ctx.clone());

    // q = Σ q_i e_i, p = Σ p_i f ẽ_i
    let components: Vec<(Vec<u32>, Vec<u32>)> = geometry
        .points()
        .into_iter()
        .map(|(q, m)| {
            let qs = dual_idx.iter().map(|&dt| ctx.trace_i(ctx.mul_i(q, dt))).collect();
            let ps = e_idx.iter().map(|&ei| ctx.trace_i(ctx.mul_i(ctx.mul_i(m, f_inv), ei))).collect();
            (qs, ps)
        })
        .collect();
    let translation_ops: Vec<CMatrix<T>> = components
        .iter()
        .map(|(qs, ps)| {
            let mats: Vec<CMatrix<T>> = qs.iter().zip(ps).map(|(&a, &b)| weyl::<T>(pu, i64::from(a), i64::from(b))).collect();
            linalg::kron_all(&mats)
        })
        .collect();
    let point_index = |pt: Point| pt.0 * d + pt.1;

    let mut projectors: Vec<Option<Operator<T>>> = vec![None; geometry.lines().len()];
    for s in geometry.striations() {
        let ray = &geometry.line(s.ray).points;
        // generic Hermitian element of the commutative algebra spanned by the ray
        let mut h = CMatrix::<T>::zeros(d, d);
        for (k, &pt) in ray.iter().enumerate() {
            let coef = cis::<T>(lit(1.2345 * k as f64 + 0.1)) * creal(lit::<T>(1.0 + 0.173 * k as f64));
            h += &translation_ops[point_index(pt)] * coef;
        }
        let h = linalg::hermitian_part(&(&h + h.adjoint()));
        let (_, vecs) = linalg::eigh(&h);
        let weyls: Vec<CMatrix<T>> = ray.iter().map(|&pt| symmetric_weyl::<T>(pu, &components[point_index(pt)])).collect();
        let mut best = (0, T::min_value().unwrap_or_else(|| -T::one()));
        for k in 0..d {
            let v = vecs.column(k).into_owned();
            let score = weyls.iter().fold(T::zero(), |acc, w| acc + (v.adjoint() * w * &v)[(0, 0)].re);
            if score > best.1 + lit(1e-9) {
                best = (k, score);
            }
        }
        let v = vecs.column(best.0).into_owned();
        let ray_proj = linalg::outer(&v);
        for &li in &s.lines {
            let at = geometry.line(li).points[0];
            let t = &translation_ops[point_index(at)];
            let q = linalg::hermitian_part(&(t * &ray_proj * t.adjoint()));
            projectors[li] = Some(Operator::from_parts(q, OperatorClass { hermitian: true, effect: true, density: true, projector: true }));
        }
    }
    let projectors: Vec<Operator<T>> = projectors.into_iter().map(|p| p.expect("every line assigned")).collect();

    let id = linalg::identity::<T>(d);
    let phase_points: Vec<Operator<T>> = geometry
        .points()
        .into_iter()
        .map(|pt| {
            let mut acc = -id.clone();
            for li in geometry.lines_through(pt) {
                acc += projectors[li].matrix();
            }
            Operator::from_parts(acc, OperatorClass::HERMITIAN)
        })
        .collect();
    let labels = geometry
        .points()
        .into_iter()
        .map(|(q, m)| Label::Field { q: ctx.element(q).coeffs, p: ctx.element(m).coeffs })
        .collect();
    let space = OnticSpace::new(labels)?;
    let inv_d = creal(T::one() / from_usize::<T>(d));
    let frame_ops = phase_points.iter().map(|a| Operator::from_parts(a.matrix() * inv_d, OperatorClass::HERMITIAN)).collect();
    let frame = Frame::new(space, frame_ops, tol)?;
    let pair = canonical_dual(&frame, tol)?;
    Ok(GhwData { geometry, f, components, translation_ops, net: QuantumNet { projectors }, phase_points, pair })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::wootters_phase_point;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn d3_matches_wootters() {
        let data = ghw_frame::<f64>(3, 1, None, None, &tol()).unwrap();
        for q in 0..3 {
            for p in 0..3 {
                let a = &data.phase_points[q * 3 + p];
                assert!(linalg::max_abs_diff(a.matrix(), &wootters_phase_point::<f64>(3, q, p)) < 1e-12);
            }
        }
    }

    #[test]
    fn d4_covariance_and_pvms() {
        let data = ghw_frame::<f64>(2, 2, None, None, &tol()).unwrap();
        assert!(data.covariance_defect() < 1e-12);
        for s in data.geometry.striations() {
            let mut sum = CMatrix::<f64>::zeros(4, 4);
            for &li in &s.lines {
                let q = data.net.projectors[li].matrix();
                assert!(linalg::max_abs_diff(&(q * q), q) < 1e-12);
                assert!((linalg::trace(q).re - 1.0).abs() < 1e-12);
                sum += q;
                // common eigenstate of the ray translations
                for &pt in &data.geometry.line(s.ray).points {
                    let t = data.translation(pt);
                    assert!(linalg::max_abs_diff(&(t * q * t.adjoint()), q) < 1e-12);
                }
            }
            assert!(linalg::max_abs_diff(&sum, &linalg::identity(4)) < 1e-12);
        }
    }

    #[test]
    fn phase_points_are_orthogonal() {
        for (p, n) in [(2u32, 2usize), (3, 1), (2, 3), (5, 1)] {
            let data = ghw_frame::<f64>(p, n, None, None, &tol()).unwrap();
            let d = data.order();
            for (i, a) in data.phase_points.iter().enumerate() {
                assert!((linalg::trace(a.matrix()).re - 1.0).abs() < 1e-12);
                for (j, b) in data.phase_points.iter().enumerate() {
                    let t = linalg::trace_product(a.matrix(), b.matrix()).re;
                    assert!((t - if i == j { d as f64 } else { 0.0 }).abs() < 1e-10);
                }
            }
            let (ok, a) = data.pair.frame.is_tight(&tol());
            assert!(ok && (a - 1.0 / d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn line_sums_give_net() {
        let data = ghw_frame::<f64>(3, 2, None, None, &tol()).unwrap();
        for (li, line) in data.geometry.lines().iter().enumerate() {
            let mut sum = CMatrix::<f64>::zeros(9, 9);
            for &pt in &line.points {
                sum += data.phase_points[data.point_index(pt)].matrix();
            }
            let want = data.net.projectors[li].matrix() * creal(9.0);
            assert!(linalg::max_abs_diff(&sum, &want) < 1e-10);
        }
    }

    #[test]
    fn nontrivial_multiplier_and_modulus() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        let f = ctx.generator();
        let data = ghw_frame::<f64>(3, 2, Some(vec![2, 2, 1]), Some(f), &tol()).unwrap();
        assert!(data.covariance_defect() < 1e-10);
        assert!(ghw_frame::<f64>(2, 2, None, Some(FieldElement { coeffs: vec![0, 0] }), &tol()).is_err());
    }
}
