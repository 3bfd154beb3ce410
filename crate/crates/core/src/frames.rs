//! Frames of Hermitian operators: frame operator, bounds, Gram matrices and duals.
//!
//! Hermitian operators on `C^d` are handled through their real Gell-Mann
//! coordinates, so a frame over `Λ` is a real `|Λ| x d²` matrix `V` and the
//! frame operator is `S = VᵀV`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::opspace::basis;
use crate::opspace::{Operator, OperatorClass, Tolerance};
use crate::sampling;
use crate::scalar::{lit, to_f64, Real};

/// Conditioning limit for the frame-operator solve.
pub const DUAL_CONDITION_LIMIT: f64 = 1e12;

/// A point of an ontic space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// `(q, p)` over `Z_m x Z_m`.
    Phase { q: usize, p: usize },
    /// Tensor product of per-factor `(q, p)` points.
    Product(Vec<(usize, usize)>),
    /// `(q, p)` over `GF(p^n)`, coefficients from `c_0` upwards.
    Field { q: Vec<u32>, p: Vec<u32> },
    Index(usize),
    Opaque(String),
}

fn digits(coeffs: &[u32]) -> String {
    coeffs
        .iter()
        .rev()
        .map(|&c| std::char::from_digit(c, 36).expect("coefficient below 36"))
        .collect()
}

fn parse_digits(s: &str) -> Option<Vec<u32>> {
    if s.is_empty() {
        return None;
    }
    s.chars().rev().map(|c| c.to_digit(36)).collect()
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Phase { q, p } => write!(f, "({q},{p})"),
            Label::Product(parts) => {
                let s: Vec<String> = parts.iter().map(|(q, p)| format!("({q},{p})")).collect();
                write!(f, "{}", s.join("x"))
            }
            Label::Field { q, p } => write!(f, "gf({},{})", digits(q), digits(p)),
            Label::Index(k) => write!(f, "#{k}"),
            Label::Opaque(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Label {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix('#') {
            if let Ok(k) = rest.parse() {
                return Ok(Label::Index(k));
            }
        }
        if let Some(inner) = s.strip_prefix("gf(").and_then(|r| r.strip_suffix(')')) {
            if let Some((a, b)) = inner.split_once(',') {
                if let (Some(q), Some(p)) = (parse_digits(a), parse_digits(b)) {
                    return Ok(Label::Field { q, p });
                }
            }
        }
        if s.contains(")x(") {
            let parts: Option<Vec<_>> = s.split('x').map(parse_pair).collect();
            if let Some(parts) = parts {
                return Ok(Label::Product(parts));
            }
        }
        if let Some((q, p)) = parse_pair(s) {
            return Ok(Label::Phase { q, p });
        }
        Ok(Label::Opaque(s.to_string()))
    }
}

/// The finite index set `Λ` of a representation.
#[derive(Debug, PartialEq, Eq)]
pub struct OnticSpace {
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl OnticSpace {
    pub fn new(labels: Vec<Label>) -> Result<Arc<Self>> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("ontic space needs at least one point".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate ontic label {l}")));
            }
        }
        Ok(Arc::new(OnticSpace { labels, index }))
    }

    pub fn indexed(n: usize) -> Result<Arc<Self>> {
        Self::new((0..n).map(Label::Index).collect())
    }

    /// `Z_m x Z_m` in row-major `(q, p)` order.
    pub fn phase_grid(m: usize) -> Result<Arc<Self>> {
        Self::new((0..m * m).map(|i| Label::Phase { q: i / m, p: i % m }).collect())
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Side length `m` when the space is exactly `Z_m x Z_m` in row-major order.
    pub fn grid_side(&self) -> Option<usize> {
        let m = (self.len() as f64).sqrt().round() as usize;
        if m * m != self.len() {
            return None;
        }
        let ok = self.labels.iter().enumerate().all(|(i, l)| *l == Label::Phase { q: i / m, p: i % m });
        ok.then_some(m)
    }
}

/// An indexed family of Hermitian operators spanning the operator space.
#[derive(Clone, Debug)]
pub struct Frame<T: Real> {
    space: Arc<OnticSpace>,
    ops: Vec<Operator<T>>,
    dim: usize,
    coords: DMatrix<T>,
    frame_op: DMatrix<T>,
    gram: DMatrix<T>,
    spectrum: Vec<T>,
    min_element_eigenvalue: T,
}

impl<T: Real> Frame<T> {
    pub fn new(space: Arc<OnticSpace>, ops: Vec<Operator<T>>, tol: &Tolerance) -> Result<Self> {
        if ops.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: ops.len() });
        }
        let dim = ops.first().map(Operator::dim).ok_or_else(|| Error::InvalidInput("empty frame".into()))?;
        for op in &ops {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
            }
            if !op.is_hermitian() {
                return Err(Error::InvalidInput("frame elements must be Hermitian".into()));
            }
        }
        let n = ops.len();
        let d2 = dim * dim;
        let rows: Vec<DVector<T>> = ops.par_iter().map(|op| basis::coords(op.matrix())).collect();
        let coords = DMatrix::from_fn(n, d2, |r, c| rows[r][c]);
        let frame_op = coords.transpose() * &coords;
        let spectrum = linalg::eigvals_sym(&frame_op);
        let top = spectrum.last().copied().unwrap_or_else(T::zero);
        let floor = top * tol.rel::<T>().max(lit(1e-12));
        let rank = spectrum.iter().filter(|&&v| v > floor).count();
        if n < d2 || rank < d2 {
            return Err(Error::NotAFrame { size: n, rank, required: d2 });
        }
        let gram = &coords * coords.transpose();
        let min_element_eigenvalue = ops
            .par_iter()
            .map(Operator::min_eigenvalue)
            .reduce(|| T::max_value().unwrap_or_else(T::one), |a, b| if a < b { a } else { b });
        Ok(Frame { space, ops, dim, coords, frame_op, gram, spectrum, min_element_eigenvalue })
    }

    /// Builds a frame from raw matrices, validating Hermiticity.
    pub fn from_matrices(space: Arc<OnticSpace>, mats: Vec<CMatrix<T>>, tol: &Tolerance) -> Result<Self> {
        let ops = mats.into_iter().map(|m| Operator::hermitian(m, tol)).collect::<Result<Vec<_>>>()?;
        Self::new(space, ops, tol)
    }

    fn from_coords(space: Arc<OnticSpace>, dim: usize, coords: &DMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let ops = (0..coords.nrows())
            .map(|r| {
                let row = coords.row(r).transpose();
                Operator::from_parts(basis::from_coords(dim, &row), OperatorClass::HERMITIAN)
            })
            .collect();
        Self::new(space, ops, tol)
    }

    pub fn space(&self) -> &Arc<OnticSpace> {
        &self.space
    }

    pub fn ops(&self) -> &[Operator<T>] {
        &self.ops
    }

    pub fn element(&self, i: usize) -> &Operator<T> {
        &self.ops[i]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Real `|Λ| x d²` coordinate matrix.
    pub fn coords(&self) -> &DMatrix<T> {
        &self.coords
    }

    /// `S = Σ_λ |F(λ)⟩⟨F(λ)|` in Gell-Mann coordinates.
    pub fn frame_operator(&self) -> &DMatrix<T> {
        &self.frame_op
    }

    pub fn frame_spectrum(&self) -> &[T] {
        &self.spectrum
    }

    /// `(a, b)`: extreme eigenvalues of the frame operator.
    pub fn frame_bounds(&self) -> (T, T) {
        (self.spectrum[0], *self.spectrum.last().expect("nonempty spectrum"))
    }

    /// Tight iff `b/a - 1 <= rel_tol`; returns the lower bound.
    pub fn is_tight(&self, tol: &Tolerance) -> (bool, T) {
        let (a, b) = self.frame_bounds();
        (b / a - T::one() <= tol.rel::<T>(), a)
    }

    /// `G_{λγ} = ⟨F(λ), F(γ)⟩`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    pub fn coordinate_rank(&self) -> usize {
        linalg::numerical_rank(&self.coords, lit(1e-12))
    }

    pub fn min_element_eigenvalue(&self) -> T {
        self.min_element_eigenvalue
    }

    pub fn is_positive(&self, tol: &Tolerance) -> bool {
        self.min_element_eigenvalue >= -tol.abs::<T>()
    }

    /// `Σ_λ F(λ)`.
    pub fn element_sum(&self) -> CMatrix<T> {
        let mut acc = CMatrix::<T>::zeros(self.dim, self.dim);
        for op in &self.ops {
            acc += op.matrix();
        }
        acc
    }

    /// Frame coefficients `⟨F(λ), A⟩` of a Hermitian matrix.
    pub fn analyze(&self, a: &CMatrix<T>) -> DVector<T> {
        &self.coords * basis::coords(a)
    }

    /// `Σ_λ c_λ F(λ)`.
    pub fn synthesize(&self, c: &DVector<T>) -> CMatrix<T> {
        basis::from_coords(self.dim, &(self.coords.transpose() * c))
    }

    /// Same elements over a different ontic space of equal size.
    pub fn relabeled(&self, space: Arc<OnticSpace>) -> Result<Self> {
        if space.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: space.len() });
        }
        let mut f = self.clone();
        f.space = space;
        Ok(f)
    }
}

/// A frame together with a dual frame on the same ontic space.
#[derive(Clone, Debug)]
pub struct DualPair<T: Real> {
    pub frame: Frame<T>,
    pub dual: Frame<T>,
}

impl<T: Real> DualPair<T> {
    /// Pairs two frames without checking reconstruction; see [`verify_dual`].
    pub fn new(frame: Frame<T>, dual: Frame<T>) -> Result<Self> {
        if frame.dim() != dual.dim() {
            return Err(Error::DimensionMismatch { expected: frame.dim(), found: dual.dim() });
        }
        if frame.space().labels() != dual.space().labels() {
            return Err(Error::SpaceMismatch("frame and dual are indexed by different ontic spaces".into()));
        }
        Ok(DualPair { frame, dual })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn space(&self) -> &Arc<OnticSpace> {
        self.frame.space()
    }

    /// `A ↦ Σ_λ ⟨F(λ), A⟩ D(λ)`.
    pub fn reconstruct(&self, a: &CMatrix<T>) -> CMatrix<T> {
        self.dual.synthesize(&self.frame.analyze(a))
    }

    /// Roles exchanged: the dual becomes the frame.
    pub fn swapped(&self) -> Self {
        DualPair { frame: self.dual.clone(), dual: self.frame.clone() }
    }

    /// Adds `(I - V S⁻¹ Vᵀ) H` to the canonical dual coordinates, giving another
    /// valid dual when `|Λ| > d²`. `h` is `|Λ| x d²`.
    pub fn with_kernel_component(&self, h: &DMatrix<T>, tol: &Tolerance) -> Result<Self> {
        let v = self.frame.coords();
        if h.nrows() != v.nrows() || h.ncols() != v.ncols() {
            return Err(Error::DimensionMismatch { expected: v.nrows() * v.ncols(), found: h.nrows() * h.ncols() });
        }
        let chol = factor(&self.frame)?;
        let proj = v * chol.solve(&(v.transpose() * h));
        let w = h - proj;
        let coords = self.dual.coords() + w;
        let dual = Frame::from_coords(self.frame.space().clone(), self.dim(), &coords, tol)?;
        DualPair::new(self.frame.clone(), dual)
    }
}

fn factor<T: Real>(frame: &Frame<T>) -> Result<Cholesky<T, nalgebra::Dyn>> {
    let (a, b) = frame.frame_bounds();
    let condition = to_f64(b) / to_f64(a);
    if !(a > T::zero()) || !(condition <= DUAL_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { what: "frame operator".into(), condition, limit: DUAL_CONDITION_LIMIT });
    }
    Cholesky::new(frame.frame_operator().clone())
        .ok_or_else(|| Error::IllConditioned { what: "frame operator (Cholesky)".into(), condition, limit: DUAL_CONDITION_LIMIT })
}

/// Canonical dual `D(λ) = S⁻¹F(λ)`, via a Cholesky solve.
pub fn canonical_dual<T: Real>(frame: &Frame<T>, tol: &Tolerance) -> Result<DualPair<T>> {
    let chol = factor(frame)?;
    let dual_coords = chol.solve(&frame.coords().transpose()).transpose();
    let dual = Frame::from_coords(frame.space().clone(), frame.dim(), &dual_coords, tol)?;
    DualPair::new(frame.clone(), dual)
}

/// Outcome of a reconstruction check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualVerdict {
    pub ok: bool,
    pub residual: f64,
    pub tested: usize,
}

/// Checks `A = Σ ⟨F(λ),A⟩ D(λ)` on the Gell-Mann basis plus `trials`
/// random unit-norm Hermitian operators.
pub fn verify_dual<T: Real, R: Rng + ?Sized>(pair: &DualPair<T>, trials: usize, rng: &mut R, tol: &Tolerance) -> DualVerdict {
    let d = pair.dim();
    let mut tests: Vec<CMatrix<T>> = basis::orthonormal_basis(d);
    tests.extend((0..trials).map(|_| sampling::random_hermitian::<T, R>(d, rng).into_matrix()));
    let residual = tests
        .par_iter()
        .map(|a| {
            let mut acc = CMatrix::<T>::zeros(d, d);
            for (op, c) in pair.dual.ops().iter().zip(pair.frame.analyze(a).iter()) {
                acc += op.matrix() * crate::scalar::creal(*c);
            }
            to_f64(linalg::max_abs_diff(&acc, a))
        })
        .reduce(|| 0.0, f64::max);
    DualVerdict { ok: residual <= tol.abs_tol, residual, tested: tests.len() }
}

/// `G_{λγ} = ⟨F(λ), F(γ)⟩`.
pub fn gram<T: Real>(f: &Frame<T>) -> DMatrix<T> {
    f.gram().clone()
}

/// `⟨F(λ), D(γ)⟩`.
pub fn cross_gram<T: Real>(pair: &DualPair<T>) -> DMatrix<T> {
    pair.frame.coords() * pair.dual.coords().transpose()
}

/// Dual-side kernel `𝙳(λ,γ) = ⟨D(λ), D(γ)⟩`.
pub fn dual_gram<T: Real>(pair: &DualPair<T>) -> DMatrix<T> {
    pair.dual.gram().clone()
}
