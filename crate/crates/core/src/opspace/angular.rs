//! Clebsch–Gordan coefficients and spin-`s` angular momentum matrices.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, Real, C};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{x} is not a half-integer")));
        }
        Ok(HalfInt(t.round() as i32))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

const LOG_FACT_LEN: usize = 512;

fn log_factorial(n: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LOG_FACT_LEN];
        for k in 1..LOG_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Coefficient `⟨j1 m1; j2 m2 | J M⟩` from doubled arguments.
///
/// Condon–Shortley phase. Violated selection rules give 0.
pub fn clebsch_gordan_doubled(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return 0.0;
    }
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    if (tj1 + tj2 + tj) / 2 + 1 >= LOG_FACT_LEN as i32 {
        return f64::NAN;
    }
    // integer arguments of the Racah sum
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tm1) / 2;
    let c = (tj2 + tm2) / 2;
    let e = (tj - tj2 + tm1) / 2;
    let f = (tj - tj1 - tm2) / 2;

    let ln_pre = 0.5
        * ((f64::from(tj) + 1.0).ln()
            + log_factorial((tj + tj1 - tj2) / 2)
            + log_factorial((tj - tj1 + tj2) / 2)
            + log_factorial(a)
            - log_factorial((tj1 + tj2 + tj) / 2 + 1)
            + log_factorial((tj + tm) / 2)
            + log_factorial((tj - tm) / 2)
            + log_factorial((tj1 - tm1) / 2)
            + log_factorial((tj1 + tm1) / 2)
            + log_factorial((tj2 - tm2) / 2)
            + log_factorial((tj2 + tm2) / 2));

    let k_min = 0.max(-e).max(-f);
    let k_max = a.min(b).min(c);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = log_factorial(k)
            + log_factorial(a - k)
            + log_factorial(b - k)
            + log_factorial(c - k)
            + log_factorial(e + k)
            + log_factorial(f + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_pre - ln_den).exp();
    }
    sum
}

/// Coefficient `⟨j1 m1; j2 m2 | J M⟩` with half-integer arguments.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    Ok(clebsch_gordan_doubled(
        HalfInt::from_f64(j1)?.twice(),
        HalfInt::from_f64(m1)?.twice(),
        HalfInt::from_f64(j2)?.twice(),
        HalfInt::from_f64(m2)?.twice(),
        HalfInt::from_f64(j)?.twice(),
        HalfInt::from_f64(m)?.twice(),
    ))
}

/// Hermitian spin matrices `(J_x, J_y, J_z)` for dimension `d = 2s + 1`,
/// basis ordered `m = s, s-1, …, -s`.
pub fn spin_matrices<T: Real>(d: usize) -> Result<[CMatrix<T>; 3]> {
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, reason: "spin matrices need d >= 2".into() });
    }
    let s = (d as f64 - 1.0) / 2.0;
    let m_of = |i: usize| s - i as f64;
    let zero = C::new(T::zero(), T::zero());
    let mut jp = CMatrix::from_element(d, d, zero);
    for i in 1..d {
        let m = m_of(i);
        jp[(i - 1, i)] = C::new(lit((s * (s + 1.0) - m * (m + 1.0)).sqrt()), T::zero());
    }
    let jm = jp.adjoint();
    let half = lit::<T>(0.5);
    let jx = (&jp + &jm) * C::new(half, T::zero());
    let jy = (&jp - &jm) * C::new(T::zero(), -half);
    let jz = CMatrix::from_fn(d, d, |r, c| if r == c { C::new(lit(m_of(r)), T::zero()) } else { zero });
    Ok([jx, jy, jz])
}
