//! File formats: JSON documents for operators, frames, distributions, Kraus
//! lists and fiducials, plus CSV grids.
//!
//! Doubles are written as hex-float strings (`"0x1.8p+1"`) so values survive a
//! round trip bit for bit. Readers also accept plain JSON numbers.

use std::fmt::Write as _;

use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{Fiducial, Provenance, RepSpec};
use crate::error::{Error, Result};
use crate::frames::{DualPair, Frame, Label, OnticSpace};
use crate::linalg::CMatrix;
use crate::opspace::{Operator, Tolerance};
use crate::repr::{Channel, QuasiDistribution, RepKind};
use crate::scalar::{lit, to_f64, Real, C};

/// Formats a double as a C99-style hex float.
pub fn f64_to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{frac}p{e:+}")
}

/// Parses a hex float such as `-0x1.8p+1`, or `inf`/`nan`. Exact whenever the
/// mantissa has at most 53 significant bits.
pub fn hex_to_f64(s: &str) -> Result<f64> {
    let bad = || Error::Schema(format!("malformed hex float '{s}'"));
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let signed = |v: f64| if neg { -v } else { v };
    match body.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => return Ok(signed(f64::INFINITY)),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
    let (mantissa, exponent) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exponent: i64 = exponent.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let mut m: u128 = 0;
    let mut significant = 0usize;
    for c in int_part.chars().chain(frac_part.chars()) {
        let v = c.to_digit(16).ok_or_else(bad)? as u128;
        if m != 0 || v != 0 {
            significant += 1;
        }
        if significant > 30 {
            return Err(Error::Schema(format!("hex float '{s}' has too many digits")));
        }
        m = m * 16 + v;
    }
    let mut k = exponent - 4 * frac_part.len() as i64;
    let mut v = m as f64;
    while k > 960 {
        v *= 2f64.powi(960);
        k -= 960;
    }
    while k < -960 {
        v *= 2f64.powi(-960);
        k += 960;
    }
    Ok(signed(v * 2f64.powi(k as i32)))
}

/// A double that serializes as a hex string and deserializes from either form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&f64_to_hex(self.0))
    }
}

struct NumVisitor;

impl Visitor<'_> for NumVisitor {
    type Value = Num;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or a hex-float string")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Num, E> {
        Ok(Num(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Num, E> {
        hex_to_f64(v).map(Num).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(NumVisitor)
    }
}

/// `#[serde(with = "hex")]` for `f64` fields.
pub mod hex {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        Num(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Num::deserialize(d).map(|n| n.0)
    }
}

/// `#[serde(with = "hex_vec")]` for `Vec<f64>` fields.
pub mod hex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| Num(*v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Vec::<Num>::deserialize(d).map(|v| v.into_iter().map(|n| n.0).collect())
    }
}

/// Parses JSON, reporting line and column on failure.
pub fn parse<D: DeserializeOwned>(text: &str, what: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{what}: line {}, column {}: {e}", e.line(), e.column())))
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub dim: usize,
    pub re: Vec<Vec<Num>>,
    pub im: Vec<Vec<Num>>,
}

/// Tag enforced when loading an [`OperatorDoc`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Hermitian,
    Effect,
    Density,
}

impl OperatorDoc {
    pub fn from_matrix<T: Real>(m: &CMatrix<T>) -> Self {
        let d = m.nrows();
        let grid = |f: &dyn Fn(C<T>) -> T| (0..d).map(|i| (0..d).map(|j| Num(to_f64(f(m[(i, j)])))).collect()).collect();
        OperatorDoc { dim: d, re: grid(&|z| z.re), im: grid(&|z| z.im) }
    }

    pub fn to_matrix<T: Real>(&self) -> Result<CMatrix<T>> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Schema("operator: dim must be positive".into()));
        }
        for (name, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != d {
                return Err(Error::Schema(format!("operator: '{name}' has {} rows, expected {d}", rows.len())));
            }
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
                return Err(Error::Schema(format!("operator: '{name}' row {i} has {} entries, expected {d}", r.len())));
            }
        }
        Ok(CMatrix::from_fn(d, d, |i, j| C::new(lit(self.re[i][j].0), lit(self.im[i][j].0))))
    }

    /// Builds an operator, enforcing the requested class.
    pub fn to_operator<T: Real>(&self, kind: OperatorKind, tol: &Tolerance) -> Result<Operator<T>> {
        let m = self.to_matrix::<T>()?;
        match kind {
            OperatorKind::General => Operator::general(m),
            OperatorKind::Hermitian => Operator::hermitian(m, tol),
            OperatorKind::Effect => Operator::effect(m, tol),
            OperatorKind::Density => Operator::density(m, tol),
        }
    }
}

/// `{"dim": d, "labels": [...], "ops": [Operator, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub dim: usize,
    pub labels: Vec<String>,
    pub ops: Vec<OperatorDoc>,
}

impl FrameDoc {
    pub fn from_frame<T: Real>(f: &Frame<T>) -> Self {
        FrameDoc {
            dim: f.dim(),
            labels: f.space().labels().iter().map(Label::to_string).collect(),
            ops: f.ops().iter().map(|o| OperatorDoc::from_matrix(o.matrix())).collect(),
        }
    }

    fn space(&self) -> Result<std::sync::Arc<OnticSpace>> {
        let labels = self.labels.iter().map(|s| s.parse::<Label>().unwrap_or_else(|e| match e {})).collect();
        OnticSpace::new(labels)
    }

    pub fn to_frame<T: Real>(&self, tol: &Tolerance) -> Result<Frame<T>> {
        if self.labels.len() != self.ops.len() {
            return Err(Error::Schema(format!("frame: {} labels for {} operators", self.labels.len(), self.ops.len())));
        }
        let mats = self
            .ops
            .iter()
            .enumerate()
            .map(|(i, o)| {
                if o.dim != self.dim {
                    return Err(Error::Schema(format!("frame: operator {i} has dim {}, expected {}", o.dim, self.dim)));
                }
                o.to_matrix::<T>()
            })
            .collect::<Result<Vec<_>>>()?;
        Frame::from_matrices(self.space()?, mats, tol)
    }
}

/// A frame with its dual, plus the recipe that produced it when known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<RepSpec>,
    pub frame: FrameDoc,
    pub dual: FrameDoc,
}

impl PairDoc {
    pub fn from_pair<T: Real>(pair: &DualPair<T>, spec: Option<RepSpec>) -> Self {
        PairDoc { version: Some(crate::VERSION.into()), spec, frame: FrameDoc::from_frame(&pair.frame), dual: FrameDoc::from_frame(&pair.dual) }
    }

    pub fn to_pair<T: Real>(&self, tol: &Tolerance) -> Result<DualPair<T>> {
        let frame = self.frame.to_frame(tol)?;
        let dual = self.dual.to_frame(tol)?;
        DualPair::new(frame, dual)
    }
}

/// `{"labels": [...], "values": [...], "kind": "..."}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub labels: Vec<String>,
    pub values: Vec<Num>,
    pub kind: RepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl DistributionDoc {
    pub fn from_distribution<T: Real>(q: &QuasiDistribution<T>) -> Self {
        DistributionDoc {
            labels: q.space().labels().iter().map(Label::to_string).collect(),
            values: q.values().iter().map(|v| Num(to_f64(*v))).collect(),
            kind: q.kind(),
            warning: q.warning.clone(),
        }
    }

    /// Rebuilds the distribution on `space`, which must carry the same labels.
    pub fn to_distribution<T: Real>(&self, space: &std::sync::Arc<OnticSpace>, tol: &Tolerance) -> Result<QuasiDistribution<T>> {
        let labels: Vec<String> = space.labels().iter().map(Label::to_string).collect();
        if labels != self.labels {
            return Err(Error::SpaceMismatch("distribution labels do not match the frame's ontic space".into()));
        }
        let values = nalgebra::DVector::from_iterator(self.values.len(), self.values.iter().map(|n| lit::<T>(n.0)));
        QuasiDistribution::new(space.clone(), values, self.kind, tol)
    }
}

/// `{"dim": d, "kraus": [Operator, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausDoc {
    pub dim: usize,
    pub kraus: Vec<OperatorDoc>,
}

impl KrausDoc {
    pub fn from_channel<T: Real>(ch: &Channel<T>) -> Self {
        KrausDoc { dim: ch.dim(), kraus: ch.kraus().iter().map(OperatorDoc::from_matrix).collect() }
    }

    pub fn to_channel<T: Real>(&self, tol: &Tolerance) -> Result<Channel<T>> {
        let mats = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| {
                if k.dim != self.dim {
                    return Err(Error::Schema(format!("kraus: operator {i} has dim {}, expected {}", k.dim, self.dim)));
                }
                k.to_matrix::<T>()
            })
            .collect::<Result<Vec<_>>>()?;
        Channel::new(mats, tol)
    }
}

/// `{"dim": d, "re": [...], "im": [...]}` plus optional quality metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiducialDoc {
    pub dim: usize,
    pub re: Vec<Num>,
    pub im: Vec<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

impl FiducialDoc {
    pub fn from_fiducial<T: Real>(f: &Fiducial<T>) -> Self {
        let amps = f.amplitudes();
        FiducialDoc {
            dim: f.dim,
            re: amps.iter().map(|a| Num(a.0)).collect(),
            im: amps.iter().map(|a| Num(a.1)).collect(),
            residual: Some(Num(f.residual)),
            provenance: Some(f.provenance),
            converged: Some(f.converged),
        }
    }

    pub fn amplitudes(&self) -> Result<Vec<(f64, f64)>> {
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::Schema(format!("fiducial: expected {} amplitudes, got re={} im={}", self.dim, self.re.len(), self.im.len())));
        }
        Ok(self.re.iter().zip(&self.im).map(|(r, i)| (r.0, i.0)).collect())
    }
}

/// Values on a row-major phase grid as CSV, rows `q` and columns `p`.
pub fn grid_csv<T: Real>(q: &QuasiDistribution<T>) -> Result<String> {
    let g = q.grid().ok_or_else(|| Error::InvalidInput("distribution is not on a square phase grid".into()))?;
    let m = g.nrows();
    let mut out = String::from("q\\p");
    for p in 0..m {
        let _ = write!(out, ",{p}");
    }
    out.push('\n');
    for row in 0..m {
        let _ = write!(out, "{row}");
        for col in 0..m {
            let _ = write!(out, ",{:?}", to_f64(g[(row, col)]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, Family};

    #[test]
    fn hex_round_trip_specials() {
        for x in [0.0, -0.0, 1.0, -2.5, 0.1, f64::MIN_POSITIVE, 5e-324, f64::MAX, -f64::MIN_POSITIVE / 3.0, 1.0 / 3.0, f64::INFINITY, f64::NEG_INFINITY] {
            let s = f64_to_hex(x);
            assert_eq!(hex_to_f64(&s).unwrap().to_bits(), x.to_bits(), "{x} -> {s}");
        }
        assert!(hex_to_f64(&f64_to_hex(f64::NAN)).unwrap().is_nan());
        assert_eq!(f64_to_hex(3.0), "0x1.8p+1");
        assert_eq!(f64_to_hex(0.25), "0x1p-2");
        assert_eq!(hex_to_f64("0x.8p1").unwrap(), 1.0);
        assert!(hex_to_f64("1.5").is_err());
        assert!(hex_to_f64("0x1.gp0").is_err());
    }

    #[test]
    fn num_accepts_both_forms() {
        let v: Vec<Num> = serde_json::from_str(r#"[1.5, "0x1.8p+0", 2]"#).unwrap();
        assert_eq!(v, vec![Num(1.5), Num(1.5), Num(2.0)]);
    }

    #[test]
    fn operator_doc_rejects_non_hermitian_with_entry() {
        let text = r#"{"dim": 2, "re": [[1, 0.5], [0, 0]], "im": [[0, 0], [0, 0]]}"#;
        let doc: OperatorDoc = parse(text, "operator").unwrap();
        match doc.to_operator::<f64>(OperatorKind::Hermitian, &Tolerance::default()) {
            Err(Error::NotHermitian { row, col, .. }) => assert_eq!((row.min(col), row.max(col)), (0, 1)),
            other => panic!("{other:?}"),
        }
        let ragged = r#"{"dim": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}"#;
        assert!(matches!(parse::<OperatorDoc>(ragged, "operator").unwrap().to_matrix::<f64>(), Err(Error::Schema(_))));
    }

    #[test]
    fn schema_errors_carry_line() {
        let err = parse::<OperatorDoc>("{\n  \"dim\": 2,\n  \"re\": oops\n}", "state").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn pair_round_trip_is_bit_exact() {
        let tol = Tolerance::default();
        let rep = build::<f64>(&RepSpec::new(Family::Ghw, 4), &tol).unwrap();
        let text = to_json(&PairDoc::from_pair(&rep.pair, None)).unwrap();
        let back = parse::<PairDoc>(&text, "pair").unwrap().to_pair::<f64>(&tol).unwrap();
        assert_eq!(back.space().labels(), rep.pair.space().labels());
        for (a, b) in back.dual.ops().iter().zip(rep.pair.dual.ops()) {
            assert!(a.matrix().iter().zip(b.matrix().iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        }
    }

    #[test]
    fn csv_grid_layout() {
        let tol = Tolerance::default();
        let rep = build::<f64>(&RepSpec::new(Family::Wootters, 3), &tol).unwrap();
        let mu = crate::repr::rep_state(&rep.pair, &Operator::maximally_mixed(3)).unwrap();
        let csv = grid_csv(&mu).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q\\p,0,1,2");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.111"));
    }
}
