//! Arithmetic in GF(p^n) for the small fields used as phase-space coordinates.
//!
//! Elements are polynomials over `Z_p` reduced modulo a monic irreducible of
//! degree `n`. Internally every element also has an integer index, the
//! coefficient tuple `c_{n-1} … c_0` read in base `p`; that index fixes the
//! ordering of points in every emitted distribution.

mod geometry;

pub use geometry::{Geometry, Line, Point, Striation};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: usize = 16;

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// Splits `d` as `p^n`, if it is a prime power.
pub fn prime_power(d: usize) -> Option<(u32, usize)> {
    if d < 2 {
        return None;
    }
    let p = (2..=d).find(|k| d.is_multiple_of(*k))? as u32;
    let mut rest = d;
    let mut n = 0;
    while rest.is_multiple_of(p as usize) {
        rest /= p as usize;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

/// Prime factors in nondecreasing order, with multiplicity.
pub fn prime_factors(mut d: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= d {
        while d.is_multiple_of(k) {
            out.push(k);
            d /= k;
        }
        k += 1;
    }
    if d > 1 {
        out.push(d);
    }
    out
}

/// An element of GF(p^n), coefficients `c_0, c_1, …, c_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    pub coeffs: Vec<u32>,
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in self.coeffs.iter().rev() {
            write!(f, "{}", std::char::from_digit(c, 36).expect("coefficient below 36"))?;
        }
        Ok(())
    }
}

impl FromStr for FieldElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs: Option<Vec<u32>> = s.chars().rev().map(|c| c.to_digit(36)).collect();
        match coeffs {
            Some(c) if !c.is_empty() => Ok(FieldElement { coeffs: c }),
            _ => Err(Error::InvalidField(format!("cannot parse field element {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Field `Z_p[x]/(m(x))` with precomputed operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    p: u32,
    n: usize,
    modulus: Vec<u32>,
    order: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
}

fn poly_rem(mut a: Vec<u32>, m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while a.len() > dm {
        let top = *a.last().expect("nonempty");
        if top != 0 {
            let f = top * lead_inv % p;
            let shift = a.len() - 1 - dm;
            for (i, &mc) in m.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p * p - f * mc % p) % p;
            }
        }
        a.pop();
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|x| a * x % p == 1).expect("nonzero residue modulo a prime")
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let n = m.len() - 1;
    for deg in 1..=n / 2 {
        let count = (p as usize).pow(deg as u32);
        for low in 0..count {
            let mut div = Vec::with_capacity(deg + 1);
            let mut v = low;
            for _ in 0..deg {
                div.push((v % p as usize) as u32);
                v /= p as usize;
            }
            div.push(1);
            if poly_rem(m.to_vec(), &div, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// GF(p^n) over the lexicographically smallest monic irreducible modulus.
    pub fn new(p: u32, n: usize) -> Result<Self> {
        Self::check(p, n)?;
        let count = (p as usize).pow(n as u32);
        // candidates ordered by (c_{n-1}, …, c_0) read in base p
        for idx in 0..count {
            let mut m = vec![0u32; n + 1];
            let mut v = idx;
            for c in m.iter_mut().take(n) {
                *c = (v % p as usize) as u32;
                v /= p as usize;
            }
            m[n] = 1;
            if is_irreducible(&m, p) {
                return Ok(Self::build(p, n, m));
            }
        }
        Err(Error::InvalidField(format!("no irreducible polynomial of degree {n} over Z_{p}")))
    }

    /// GF(p^n) over a caller-supplied monic modulus `c_0, …, c_{n-1}, 1`.
    pub fn with_modulus(p: u32, n: usize, modulus: Vec<u32>) -> Result<Self> {
        Self::check(p, n)?;
        if modulus.len() != n + 1 || modulus[n] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField(format!("modulus must be monic of degree {n} with coefficients below {p}")));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over Z_{p}")));
        }
        Ok(Self::build(p, n, modulus))
    }

    /// Field of order `d`, if `d` is a supported prime power.
    pub fn of_order(d: usize) -> Result<Self> {
        let (p, n) = prime_power(d).ok_or_else(|| Error::InvalidField(format!("{d} is not a prime power")))?;
        Self::new(p, n)
    }

    fn check(p: u32, n: usize) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        let order = (p as usize).checked_pow(n as u32).unwrap_or(usize::MAX);
        if order > MAX_ORDER {
            return Err(Error::InvalidField(format!("GF({p}^{n}) exceeds the supported order {MAX_ORDER}")));
        }
        Ok(())
    }

    fn build(p: u32, n: usize, modulus: Vec<u32>) -> Self {
        let order = (p as usize).pow(n as u32);
        let mut ctx = FieldCtx { p, n, modulus, order, add: vec![0; order * order], mul: vec![0; order * order] };
        for a in 0..order {
            let ca = ctx.coeffs_of(a);
            for b in 0..order {
                let cb = ctx.coeffs_of(b);
                let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                ctx.add[a * order + b] = ctx.index_of(&sum);
                let mut prod = vec![0u32; 2 * n - 1];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut red = poly_rem(prod, &ctx.modulus, p);
                red.resize(n, 0);
                ctx.mul[a * order + b] = ctx.index_of(&red);
            }
        }
        ctx
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn coeffs_of(&self, mut idx: usize) -> Vec<u32> {
        (0..self.n)
            .map(|_| {
                let c = (idx % self.p as usize) as u32;
                idx /= self.p as usize;
                c
            })
            .collect()
    }

    fn index_of(&self, coeffs: &[u32]) -> usize {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p as usize + c as usize)
    }

    /// Element from its ordering index.
    pub fn element(&self, idx: usize) -> FieldElement {
        assert!(idx < self.order, "field index out of range");
        FieldElement { coeffs: self.coeffs_of(idx) }
    }

    /// Ordering index of an element, validating its shape.
    pub fn index(&self, x: &FieldElement) -> Result<usize> {
        if x.coeffs.len() != self.n || x.coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidField(format!("{x} is not an element of GF({}^{})", self.p, self.n)));
        }
        Ok(self.index_of(&x.coeffs))
    }

    pub fn elements(&self) -> Vec<FieldElement> {
        (0..self.order).map(|i| self.element(i)).collect()
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// The class of `x` (the polynomial generator), for `n >= 2`.
    pub fn generator(&self) -> FieldElement {
        if self.n == 1 {
            return self.one();
        }
        let mut c = vec![0; self.n];
        c[1] = 1;
        FieldElement { coeffs: c }
    }

    pub fn embed(&self, k: u32) -> FieldElement {
        self.element((k % self.p) as usize)
    }

    // index-level arithmetic

    pub fn add_i(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b]
    }

    pub fn mul_i(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn neg_i(&self, a: usize) -> usize {
        (0..self.order).find(|&b| self.add_i(a, b) == 0).expect("additive inverse")
    }

    pub fn sub_i(&self, a: usize, b: usize) -> usize {
        self.add_i(a, self.neg_i(b))
    }

    pub fn inv_i(&self, a: usize) -> Result<usize> {
        if a == 0 {
            return Err(Error::DivisionByZero(self.order));
        }
        Ok((1..self.order).find(|&b| self.mul_i(a, b) == 1).expect("multiplicative inverse"))
    }

    pub fn pow_i(&self, a: usize, mut e: usize) -> usize {
        let mut acc = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_i(acc, base);
            }
            base = self.mul_i(base, base);
            e >>= 1;
        }
        acc
    }

    /// `tr(a) = Σ_{i<n} a^{p^i}` as an integer in `Z_p`.
    pub fn trace_i(&self, a: usize) -> u32 {
        let mut acc = 0;
        let mut term = a;
        for _ in 0..self.n {
            acc = self.add_i(acc, term);
            term = self.pow_i(term, self.p as usize);
        }
        debug_assert!(acc < self.p as usize, "trace lies in the prime subfield");
        acc as u32
    }

    // element-level arithmetic

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.element(self.add_i(self.index(x)?, self.index(y)?)))
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.element(self.mul_i(self.index(x)?, self.index(y)?)))
    }

    pub fn neg(&self, x: &FieldElement) -> Result<FieldElement> {
        Ok(self.element(self.neg_i(self.index(x)?)))
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        Ok(self.element(self.inv_i(self.index(x)?)?))
    }

    pub fn pow(&self, x: &FieldElement, e: usize) -> Result<FieldElement> {
        Ok(self.element(self.pow_i(self.index(x)?, e)))
    }
}

/// Applies one field operation; `y` is required for `Add` and `Mul`.
pub fn ff_arith(ctx: &FieldCtx, op: FieldOp, x: &FieldElement, y: Option<&FieldElement>) -> Result<FieldElement> {
    let need = || y.ok_or_else(|| Error::InvalidInput(format!("{op:?} needs two operands")));
    match op {
        FieldOp::Add => ctx.add(x, need()?),
        FieldOp::Mul => ctx.mul(x, need()?),
        FieldOp::Neg => ctx.neg(x),
        FieldOp::Inv => ctx.inv(x),
    }
}

/// Field trace, returned as an element of the prime subfield.
pub fn field_trace(ctx: &FieldCtx, x: &FieldElement) -> Result<FieldElement> {
    Ok(ctx.embed(ctx.trace_i(ctx.index(x)?)))
}

/// Rank of a square matrix over `Z_p` by Gaussian elimination; solves
/// `M c = rhs` for each right-hand side when full rank.
#[allow(clippy::needless_range_loop)] // row-reduction reads clearer with explicit indices
fn solve_mod_p(mut m: Vec<Vec<u32>>, mut rhs: Vec<Vec<u32>>, p: u32) -> std::result::Result<Vec<Vec<u32>>, usize> {
    let n = m.len();
    let k = rhs.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..n).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        rhs.swap(rank, piv);
        let inv = inv_mod(m[rank][col], p);
        for c in 0..n {
            m[rank][c] = m[rank][c] * inv % p;
        }
        for c in 0..k {
            rhs[rank][c] = rhs[rank][c] * inv % p;
        }
        for r in 0..n {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..n {
                    m[r][c] = (m[r][c] + p * p - f * m[rank][c] % p) % p;
                }
                for c in 0..k {
                    rhs[r][c] = (rhs[r][c] + p * p - f * rhs[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    if rank < n {
        return Err(rank);
    }
    Ok(rhs)
}

/// The basis `Ẽ` with `tr(ẽ_i e_j) = δ_ij`.
pub fn dual_basis(ctx: &FieldCtx, basis: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let n = ctx.n();
    let p = ctx.p();
    if basis.len() != n {
        return Err(Error::DependentBasis { p, rank: basis.len().min(n), n });
    }
    let idx: Vec<usize> = basis.iter().map(|e| ctx.index(e)).collect::<Result<_>>()?;
    // independence over Z_p
    let coeff_matrix: Vec<Vec<u32>> = (0..n).map(|r| (0..n).map(|c| ctx.element(idx[c]).coeffs[r]).collect()).collect();
    let zero_rhs = vec![vec![]; n];
    if let Err(rank) = solve_mod_p(coeff_matrix, zero_rhs, p) {
        return Err(Error::DependentBasis { p, rank, n });
    }
    // unknown ẽ_i = Σ_k c_k x^k; constraint row j: Σ_k c_k tr(x^k e_j) = δ_ij
    let gen = ctx.index(&ctx.generator())?;
    let mons: Vec<usize> = (0..n).map(|k| ctx.pow_i(gen, k)).collect();
    let m: Vec<Vec<u32>> = (0..n).map(|j| (0..n).map(|k| ctx.trace_i(ctx.mul_i(mons[k], idx[j]))).collect()).collect();
    let rhs: Vec<Vec<u32>> = (0..n).map(|j| (0..n).map(|i| u32::from(i == j)).collect()).collect();
    let sol = solve_mod_p(m, rhs, p).map_err(|rank| Error::DependentBasis { p, rank, n })?;
    Ok((0..n)
        .map(|i| {
            let mut acc = 0;
            for k in 0..n {
                acc = ctx.add_i(acc, ctx.mul_i(sol[k][i] as usize, mons[k]));
            }
            ctx.element(acc)
        })
        .collect())
}

/// Polynomial basis `1, x, …, x^{n-1}`.
pub fn polynomial_basis(ctx: &FieldCtx) -> Vec<FieldElement> {
    (0..ctx.n())
        .map(|k| {
            let mut c = vec![0; ctx.n()];
            c[k] = 1;
            FieldElement { coeffs: c }
        })
        .collect()
}
