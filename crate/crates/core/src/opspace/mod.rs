//! Operator space of a `d`-level system: generalized Paulis, parity,
//! trace inner product and validated operator classes.

mod angular;
pub mod basis;

pub use angular::{clebsch_gordan, clebsch_gordan_doubled, spin_matrices, HalfInt};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{creal, lit, root_of_unity, to_f64, Real, C};

/// Absolute and relative comparison thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) || !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::InvalidTolerance(format!(
                "abs_tol={abs_tol}, rel_tol={rel_tol}; both must be strictly positive"
            )));
        }
        Ok(Tolerance { abs_tol, rel_tol })
    }

    pub fn uniform(tol: f64) -> Result<Self> {
        Self::new(tol, tol)
    }

    pub fn abs<T: Real>(&self) -> T {
        lit(self.abs_tol)
    }

    pub fn rel<T: Real>(&self) -> T {
        lit(self.rel_tol)
    }

    /// `|a - b| <= abs_tol + rel_tol * max(|a|, |b|)`.
    pub fn close<T: Real>(&self, a: T, b: T) -> bool {
        let scale = a.abs().max(b.abs());
        (a - b).abs() <= self.abs::<T>() + self.rel::<T>() * scale
    }
}

/// Which of the nested operator classes an [`Operator`] was validated against.
///
/// Projectors, density operators and effects are all Hermitian; the flags
/// record what was checked at construction and are not re-verified on use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorClass {
    pub hermitian: bool,
    pub effect: bool,
    pub density: bool,
    pub projector: bool,
}

impl OperatorClass {
    pub const GENERAL: Self = OperatorClass { hermitian: false, effect: false, density: false, projector: false };
    pub const HERMITIAN: Self = OperatorClass { hermitian: true, effect: false, density: false, projector: false };
}

/// A `d x d` complex matrix with validated class tags.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    mat: CMatrix<T>,
    class: OperatorClass,
}

impl<T: Real> Operator<T> {
    fn check_square(mat: &CMatrix<T>) -> Result<usize> {
        let d = mat.nrows();
        if d == 0 || mat.ncols() != d {
            return Err(Error::InvalidDimension { dim: d, reason: format!("expected a non-empty square matrix, got {}x{}", mat.nrows(), mat.ncols()) });
        }
        Ok(d)
    }

    /// An operator with no class guarantees.
    pub fn general(mat: CMatrix<T>) -> Result<Self> {
        Self::check_square(&mat)?;
        Ok(Operator { mat, class: OperatorClass::GENERAL })
    }

    pub fn hermitian(mat: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        Self::check_square(&mat)?;
        let (dev, row, col) = linalg::hermitian_defect(&mat);
        let scale = mat.iter().map(|z| crate::scalar::cabs(*z)).fold(T::zero(), |m, v| if v > m { v } else { m });
        if dev > tol.abs::<T>() + tol.rel::<T>() * scale {
            return Err(Error::NotHermitian { row, col, deviation: to_f64(dev) });
        }
        Ok(Operator { mat: linalg::hermitian_part(&mat), class: OperatorClass::HERMITIAN })
    }

    pub fn effect(mat: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let mut op = Self::hermitian(mat, tol)?;
        op.check_effect(tol)?;
        op.class.effect = true;
        Ok(op)
    }

    pub fn density(mat: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let mut op = Self::effect(mat, tol)?;
        let tr = op.trace_re();
        if !tol.close(tr, T::one()) {
            return Err(Error::NotDensity { trace: to_f64(tr) });
        }
        op.class.density = true;
        if op.is_projector_matrix(tol) {
            op.class.projector = true;
        }
        Ok(op)
    }

    pub fn projector(mat: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let mut op = Self::hermitian(mat, tol)?;
        let dev = linalg::max_abs_diff(&(&op.mat * &op.mat), &op.mat);
        if dev > tol.abs::<T>() {
            return Err(Error::NotProjector { deviation: to_f64(dev) });
        }
        op.class.projector = true;
        op.class.effect = true;
        if tol.close(op.trace_re(), T::one()) {
            op.class.density = true;
        }
        Ok(op)
    }

    /// Validates every class and records the ones that hold.
    pub fn classify(mat: CMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let mut op = Self::hermitian(mat, tol)?;
        if op.check_effect(tol).is_ok() {
            op.class.effect = true;
            if tol.close(op.trace_re(), T::one()) {
                op.class.density = true;
            }
        }
        if op.is_projector_matrix(tol) {
            op.class.projector = true;
        }
        Ok(op)
    }

    /// Pure state `|ψ⟩⟨ψ|` from a (not necessarily normalized) vector.
    pub fn pure_state(psi: &linalg::CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if norm <= T::zero() {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let v = psi / creal(norm);
        Ok(Operator {
            mat: linalg::outer(&v),
            class: OperatorClass { hermitian: true, effect: true, density: true, projector: true },
        })
    }

    pub fn identity(d: usize) -> Self {
        Operator {
            mat: linalg::identity(d),
            class: OperatorClass { hermitian: true, effect: true, density: d == 1, projector: true },
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Operator {
            mat: linalg::identity::<T>(d) * creal(T::one() / crate::scalar::from_usize::<T>(d)),
            class: OperatorClass { hermitian: true, effect: true, density: true, projector: d == 1 },
        }
    }

    pub fn zero(d: usize) -> Self {
        Operator {
            mat: CMatrix::zeros(d, d),
            class: OperatorClass { hermitian: true, effect: true, density: false, projector: true },
        }
    }

    pub(crate) fn from_parts(mat: CMatrix<T>, class: OperatorClass) -> Self {
        Operator { mat, class }
    }

    fn check_effect(&self, tol: &Tolerance) -> Result<()> {
        let vals = linalg::eigvalsh(&self.mat);
        let t = tol.abs::<T>();
        for v in vals {
            if v < -t || v > T::one() + t {
                return Err(Error::NotEffect { eigenvalue: to_f64(v) });
            }
        }
        Ok(())
    }

    fn is_projector_matrix(&self, tol: &Tolerance) -> bool {
        linalg::max_abs_diff(&(&self.mat * &self.mat), &self.mat) <= tol.abs::<T>()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.mat
    }

    pub fn class(&self) -> OperatorClass {
        self.class
    }

    pub fn is_hermitian(&self) -> bool {
        self.class.hermitian
    }

    pub fn is_effect(&self) -> bool {
        self.class.effect
    }

    pub fn is_density(&self) -> bool {
        self.class.density
    }

    pub fn is_projector(&self) -> bool {
        self.class.projector
    }

    pub fn trace_re(&self) -> T {
        linalg::trace(&self.mat).re
    }

    /// Eigenvalues in ascending order; only meaningful for Hermitian operators.
    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::eigvalsh(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        self.eigenvalues().iter().filter(|v| v.abs() > tol.abs::<T>()).count()
    }

    /// Real linear combination of Hermitian operators.
    pub fn combine(ops: &[&Operator<T>], weights: &[T]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        let d = first.dim();
        let mut acc = CMatrix::<T>::zeros(d, d);
        for (op, w) in ops.iter().zip(weights) {
            if op.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
            }
            acc += &op.mat * creal(*w);
        }
        Ok(Operator { mat: acc, class: OperatorClass::HERMITIAN })
    }

    pub fn conjugate_by(&self, u: &CMatrix<T>) -> Self {
        Operator { mat: u * &self.mat * u.adjoint(), class: self.class }
    }

    pub fn scaled(&self, s: T) -> Self {
        Operator { mat: &self.mat * creal(s), class: if self.class.hermitian { OperatorClass::HERMITIAN } else { OperatorClass::GENERAL } }
    }
}

/// Tr(AB) for Hermitian `A`, `B`; real by construction.
pub fn hs_inner<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if !a.is_hermitian() || !b.is_hermitian() {
        return Err(Error::InvalidInput("hs_inner requires Hermitian operands".into()));
    }
    Ok(linalg::trace_product(a.matrix(), b.matrix()).re)
}

/// A positive-operator valued measure.
#[derive(Clone, Debug)]
pub struct Povm<T: Real> {
    effects: Vec<Operator<T>>,
    pvm: bool,
}

impl<T: Real> Povm<T> {
    pub fn new(effects: Vec<Operator<T>>, tol: &Tolerance) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::NotPovm("no effects".into()))?;
        let d = first.dim();
        let mut sum = CMatrix::<T>::zeros(d, d);
        for (k, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.dim() });
            }
            if !e.is_effect() {
                return Err(Error::NotPovm(format!("element {k} is not effect-tagged")));
            }
            sum += e.matrix();
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(d));
        if dev > tol.abs::<T>() {
            return Err(Error::NotPovm(format!("effects sum to identity only within {:e}", to_f64(dev))));
        }
        Ok(Povm { effects, pvm: false })
    }

    /// A projector-valued measure: `d` pairwise orthogonal rank-1 projectors.
    pub fn pvm(projectors: Vec<Operator<T>>, tol: &Tolerance) -> Result<Self> {
        let mut povm = Self::new(projectors, tol)?;
        let d = povm.effects[0].dim();
        if povm.effects.len() != d {
            return Err(Error::NotPovm(format!("PVM needs {d} elements, got {}", povm.effects.len())));
        }
        for (k, p) in povm.effects.iter().enumerate() {
            if !p.is_projector() || p.rank(tol) != 1 {
                return Err(Error::NotPovm(format!("element {k} is not a rank-1 projector")));
            }
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let prod = povm.effects[j].matrix() * povm.effects[k].matrix();
                let dev = prod.iter().map(|z| crate::scalar::cabs(*z)).fold(T::zero(), |m, v| if v > m { v } else { m });
                if dev > tol.abs::<T>() {
                    return Err(Error::NotPovm(format!("elements {j} and {k} are not orthogonal ({:e})", to_f64(dev))));
                }
            }
        }
        povm.pvm = true;
        Ok(povm)
    }

    pub fn effects(&self) -> &[Operator<T>] {
        &self.effects
    }

    pub fn is_pvm(&self) -> bool {
        self.pvm
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Z,
    Y,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, reason: "need d >= 2".into() });
    }
    Ok(())
}

/// Cyclic shift `X φ_k = φ_{k+1}`.
pub fn shift<T: Real>(d: usize) -> CMatrix<T> {
    CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { C::new(T::one(), T::zero()) } else { C::new(T::zero(), T::zero()) })
}

/// Clock `Z = diag(ω^0, …, ω^{d-1})`.
pub fn clock<T: Real>(d: usize) -> CMatrix<T> {
    CMatrix::from_fn(d, d, |r, c| if r == c { root_of_unity::<T>(d, r as i64) } else { C::new(T::zero(), T::zero()) })
}

/// Generalized Pauli operators; `Y` is fixed by `[X, Z] = 2iY` and is not
/// Hermitian for `d > 2`.
pub fn generalized_pauli<T: Real>(kind: PauliKind, d: usize) -> Result<CMatrix<T>> {
    check_dim(d)?;
    Ok(match kind {
        PauliKind::X => shift(d),
        PauliKind::Z => clock(d),
        PauliKind::Y => {
            let x = shift::<T>(d);
            let z = clock::<T>(d);
            let comm = &x * &z - &z * &x;
            comm * C::new(T::zero(), -lit::<T>(0.5))
        }
    })
}

/// Parity `P φ_k = φ_{-k}`.
pub fn parity<T: Real>(d: usize) -> Result<Operator<T>> {
    check_dim(d)?;
    let mat = CMatrix::from_fn(d, d, |r, c| if r == (d - c) % d { C::new(T::one(), T::zero()) } else { C::new(T::zero(), T::zero()) });
    Ok(Operator::from_parts(mat, OperatorClass::HERMITIAN))
}

/// `X^a Z^b` with exponents taken modulo `d`.
pub fn weyl<T: Real>(d: usize, a: i64, b: i64) -> CMatrix<T> {
    let a = a.rem_euclid(d as i64) as usize;
    let b = b.rem_euclid(d as i64);
    CMatrix::from_fn(d, d, |r, c| {
        if r == (c + a) % d {
            root_of_unity::<T>(d, b * c as i64)
        } else {
            C::new(T::zero(), T::zero())
        }
    })
}

/// Real symmetric matrix of pairwise trace inner products.
pub fn gram_of<T: Real>(ops: &[Operator<T>]) -> DMatrix<T> {
    let n = ops.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = linalg::trace_product(ops[i].matrix(), ops[j].matrix()).re;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn pauli_x_d2_is_sigma_x() {
        let x = generalized_pauli::<f64>(PauliKind::X, 2).unwrap();
        assert_eq!(x[(0, 1)].re, 1.0);
        assert_eq!(x[(1, 0)].re, 1.0);
        assert_eq!(x[(0, 0)].re, 0.0);
        assert_eq!(x[(1, 1)].re, 0.0);
    }

    #[test]
    fn pauli_z_d3_spectrum() {
        let z = generalized_pauli::<f64>(PauliKind::Z, 3).unwrap();
        let w = C::new((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
        assert!((z[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(1, 1)] - w).norm() < 1e-15);
        assert!((z[(2, 2)] - w * w).norm() < 1e-15);
    }

    #[test]
    fn shift_has_period_d() {
        for d in 2..=6 {
            let x = generalized_pauli::<f64>(PauliKind::X, d).unwrap();
            let xd = linalg::unitary_pow(&x, d as i64);
            assert!(linalg::max_abs_diff(&xd, &linalg::identity(d)) < 1e-14);
        }
    }

    #[test]
    fn y_is_sigma_y_up_to_sign_at_d2() {
        let y = generalized_pauli::<f64>(PauliKind::Y, 2).unwrap();
        // [X,Z] = 2iY gives Y = -σ_y for the d = 2 conventions used here.
        assert!((y[(0, 1)] - C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((y[(1, 0)] - C::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn y_not_hermitian_for_d3() {
        let y = generalized_pauli::<f64>(PauliKind::Y, 3).unwrap();
        assert!(Operator::hermitian(y, &tol()).is_err());
    }

    #[test]
    fn pauli_rejects_small_dim() {
        assert!(matches!(generalized_pauli::<f64>(PauliKind::X, 1), Err(Error::InvalidDimension { .. })));
        assert!(parity::<f64>(0).is_err());
    }

    #[test]
    fn weyl_commutation() {
        for d in 2..=7 {
            let x = shift::<f64>(d);
            let z = clock::<f64>(d);
            let w = root_of_unity::<f64>(d, 1);
            let lhs = &x * &z * w;
            let rhs = &z * &x;
            // ZX = ω XZ in the φ_k → φ_{k+1} convention.
            assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12, "d={d}");
        }
    }

    #[test]
    fn parity_small_cases() {
        let p2 = parity::<f64>(2).unwrap();
        assert!(linalg::max_abs_diff(p2.matrix(), &linalg::identity(2)) == 0.0);
        let p3 = parity::<f64>(3).unwrap();
        let m = p3.matrix();
        assert_eq!(m[(0, 0)].re, 1.0);
        assert_eq!(m[(2, 1)].re, 1.0);
        assert_eq!(m[(1, 2)].re, 1.0);
        assert_eq!(m[(1, 1)].re, 0.0);
        for d in 2..=7 {
            let p = parity::<f64>(d).unwrap();
            let sq = p.matrix() * p.matrix();
            assert!(linalg::max_abs_diff(&sq, &linalg::identity(d)) == 0.0);
        }
    }

    #[test]
    fn hs_inner_basics() {
        let id = Operator::<f64>::identity(4);
        assert!((hs_inner(&id, &id).unwrap() - 4.0).abs() < 1e-15);
        let sx = Operator::hermitian(shift::<f64>(2), &tol()).unwrap();
        let sz = Operator::hermitian(clock::<f64>(2), &tol()).unwrap();
        assert!(hs_inner(&sx, &sz).unwrap().abs() < 1e-15);
        assert!(matches!(hs_inner(&id, &sx), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn purity_via_hs_inner_matches_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..100 {
            let d = 2 + i % 4;
            let rho = if i % 2 == 0 { sampling::haar_pure_state::<f64, _>(d, &mut rng) } else { sampling::random_density::<f64, _>(d, &mut rng) };
            let purity = hs_inner(&rho, &rho).unwrap();
            // oracle: a density operator is pure iff it has exactly one nonzero eigenvalue
            let nonzero = rho.eigenvalues().iter().filter(|v| v.abs() > 1e-9).count();
            assert_eq!((purity - 1.0).abs() < 1e-10, nonzero == 1);
        }
    }

    #[test]
    fn hs_inner_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..100 {
            let a = sampling::random_hermitian::<f64, _>(2 + i % 5, &mut rng);
            assert!(hs_inner(&a, &a).unwrap() > 0.0);
        }
    }

    #[test]
    fn hermitian_rejection_names_entry() {
        let mut m = CMatrix::<f64>::identity(3, 3);
        m[(0, 2)] = C::new(0.5, 0.0);
        match Operator::hermitian(m, &tol()) {
            Err(Error::NotHermitian { row, col, .. }) => assert_eq!((row, col), (0, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validators_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..=5 {
            let pvm = sampling::random_pvm::<f64, _>(d, &mut rng);
            let povm = Povm::pvm(pvm.clone(), &tol()).unwrap();
            assert!(povm.is_pvm());
            assert!(Povm::new(pvm.clone(), &tol()).is_ok());
            for p in &pvm {
                assert!(Operator::projector(p.matrix().clone(), &tol()).unwrap().is_effect());
                assert!(Operator::effect(p.matrix().clone(), &tol()).is_ok());
                assert!(Operator::hermitian(p.matrix().clone(), &tol()).is_ok());
            }
        }
    }

    #[test]
    fn class_checks_reject() {
        let t = tol();
        let two = CMatrix::<f64>::identity(2, 2) * C::new(2.0, 0.0);
        assert!(matches!(Operator::effect(two.clone(), &t), Err(Error::NotEffect { .. })));
        let half = CMatrix::<f64>::identity(2, 2) * C::new(0.25, 0.0);
        assert!(matches!(Operator::density(half, &t), Err(Error::NotDensity { .. })));
        assert!(matches!(Operator::projector(two, &t), Err(Error::NotProjector { .. })));
        assert!(Povm::new(vec![Operator::<f64>::maximally_mixed(2)], &t).is_err());
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(0.0, 1e-10).is_err());
        assert!(Tolerance::new(1e-10, -1.0).is_err());
        assert!(Tolerance::new(1e-10, 1e-12).is_ok());
    }

    #[test]
    fn single_precision_weyl_relation() {
        let x = shift::<f32>(3);
        let z = clock::<f32>(3);
        let lhs = &x * &z * root_of_unity::<f32>(3, 1);
        assert!(linalg::max_abs_diff(&lhs, &(&z * &x)) < 1e-5);
    }
}
