//! Constructors for the catalogued representation families.
//!
//! Every family is emitted as a frame `F` normalized so that `Σ_λ F(λ) = 𝟙`,
//! paired with its canonical dual `D`. For the phase-space families the dual
//! elements are the usual phase-point (or Fano) operators and `F = D/d`.

mod constellation;
mod ghw;
mod phase;
pub mod props;
mod sic;

pub use constellation::{constellation_frame, default_constellation, kernel_at, kernel_weights, rotate, rotation_unitary, ConstellationData, CONSTELLATION_CONDITION_LIMIT};
pub use ghw::{ghw_frame, GhwData, QuantumNet};
pub use phase::{cohendet_w, even_frame, fano_operator, odd_frame, wootters_frame, wootters_phase_point, wootters_phase_point_sum, HalfPower};
pub use sic::{bundled_fiducial, find_fiducial, sic_frame, sic_overlap_residual, weyl_orbit, Fiducial, Provenance, SicSearch};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitefield::{prime_power, FieldElement};
use crate::frames::DualPair;
use crate::linalg::CMatrix;
use crate::opspace::Tolerance;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Wootters,
    Odd,
    Even,
    Constellation,
    Ghw,
    Sic,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Wootters, Family::Odd, Family::Even, Family::Constellation, Family::Ghw, Family::Sic];

    pub fn name(self) -> &'static str {
        match self {
            Family::Wootters => "wootters",
            Family::Odd => "odd",
            Family::Even => "even",
            Family::Constellation => "constellation",
            Family::Ghw => "ghw",
            Family::Sic => "sic",
        }
    }

    /// Human-readable dimension rule.
    pub fn validity_rule(self) -> &'static str {
        match self {
            Family::Wootters => "any d >= 2 (prime factors are tensored)",
            Family::Odd => "odd d >= 3",
            Family::Even => "even d >= 2",
            Family::Constellation => "any d = 2s + 1 >= 2",
            Family::Ghw => "d = p^n a prime power, d <= 16",
            Family::Sic => "any d >= 2 with a fiducial (bundled for d = 2, 3, otherwise optimized)",
        }
    }

    pub fn supports(self, d: usize) -> bool {
        match self {
            Family::Wootters | Family::Constellation | Family::Sic => d >= 2,
            Family::Odd => d >= 3 && d % 2 == 1,
            Family::Even => d >= 2 && d.is_multiple_of(2),
            Family::Ghw => d <= crate::finitefield::MAX_ORDER && prime_power(d).is_some(),
        }
    }

    pub fn check(self, d: usize) -> Result<()> {
        if self.supports(d) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch { family: self.name().into(), dim: d, rule: self.validity_rule().into() })
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown family {s:?}; expected one of wootters, odd, even, constellation, ghw, sic")))
    }
}

/// Everything needed to build one representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepSpec {
    pub family: Family,
    pub dim: usize,
    /// Modulus override for `ghw`, coefficients `c_0 … c_{n-1}, 1`.
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    /// Momentum-basis multiplier for `ghw`; defaults to 1.
    #[serde(default)]
    pub f_multiplier: Option<FieldElement>,
    /// Fiducial amplitudes `(re, im)` for `sic`.
    #[serde(default)]
    pub fiducial: Option<Vec<(f64, f64)>>,
    /// Unit 3-vectors for `constellation`.
    #[serde(default)]
    pub constellation: Option<Vec<[f64; 3]>>,
    /// `ε_1 … ε_{2s}` for `constellation`; `ε_0 = +1` always.
    #[serde(default)]
    pub signs: Option<Vec<i8>>,
    /// Seed for the `sic` optimizer when no fiducial is available.
    #[serde(default)]
    pub seed: u64,
    /// Restart budget for the `sic` optimizer.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    200
}

impl RepSpec {
    pub fn new(family: Family, dim: usize) -> Self {
        RepSpec { family, dim, modulus: None, f_multiplier: None, fiducial: None, constellation: None, signs: None, seed: 0, restarts: default_restarts() }
    }
}

/// A unitary acting on the Hilbert space together with the induced
/// permutation of the ontic space: `U F(λ) U† = F(perm[λ])`.
#[derive(Clone, Debug)]
pub struct Translation<T: Real> {
    pub shift: Vec<(usize, usize)>,
    pub unitary: CMatrix<T>,
    pub perm: Vec<usize>,
}

/// A built representation: frame, canonical dual and family data.
#[derive(Clone, Debug)]
pub struct Representation<T: Real> {
    pub family: Family,
    pub dim: usize,
    pub pair: DualPair<T>,
    pub ghw: Option<GhwData<T>>,
    pub constellation: Option<ConstellationData<T>>,
    pub fiducial: Option<Fiducial<T>>,
}

impl<T: Real> Representation<T> {
    /// The translation group acting covariantly on the ontic space, where one
    /// exists (empty for constellations, whose symmetry is continuous).
    pub fn translations(&self) -> Vec<Translation<T>> {
        match self.family {
            Family::Wootters => phase::wootters_translations(self.dim),
            Family::Odd => phase::odd_translations(self.dim),
            Family::Even => phase::even_translations(self.dim),
            Family::Ghw => self.ghw.as_ref().map(GhwData::translations).unwrap_or_default(),
            Family::Sic => sic::sic_translations(self.dim),
            Family::Constellation => Vec::new(),
        }
    }
}

/// Builds the representation described by `spec`.
pub fn build<T: Real>(spec: &RepSpec, tol: &Tolerance) -> Result<Representation<T>> {
    let d = spec.dim;
    spec.family.check(d)?;
    let plain = |pair| Representation { family: spec.family, dim: d, pair, ghw: None, constellation: None, fiducial: None };
    match spec.family {
        Family::Wootters => Ok(plain(wootters_frame(d, tol)?)),
        Family::Odd => Ok(plain(odd_frame(d, tol)?)),
        Family::Even => Ok(plain(even_frame(d, tol)?)),
        Family::Constellation => {
            let points = match &spec.constellation {
                Some(p) => p.clone(),
                None => default_constellation(d),
            };
            let data = constellation_frame::<T>(d, &points, spec.signs.as_deref(), tol)?;
            let pair = data.pair.clone();
            Ok(Representation { constellation: Some(data), ..plain(pair) })
        }
        Family::Ghw => {
            let (p, n) = prime_power(d).expect("checked above");
            let data = ghw_frame::<T>(p, n, spec.modulus.clone(), spec.f_multiplier.clone(), tol)?;
            let pair = data.pair.clone();
            Ok(Representation { ghw: Some(data), ..plain(pair) })
        }
        Family::Sic => {
            let fid = match &spec.fiducial {
                Some(v) => Fiducial::loaded(d, v)?,
                None => match bundled_fiducial::<T>(d) {
                    Some(f) => f,
                    None => find_fiducial::<T>(d, &SicSearch { restarts: spec.restarts, seed: spec.seed, ..SicSearch::default() }),
                },
            };
            let pair = sic_frame(&fid, tol)?;
            Ok(Representation { fiducial: Some(fid), ..plain(pair) })
        }
    }
}
