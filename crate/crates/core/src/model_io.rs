//! JSON model files.
//!
//! A file describes one model at one base point:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "kind": "cy3",
//!   "number_mode": "rational",
//!   "order": 6,
//!   "payload": {
//!     "n_moduli": 1,
//!     "yukawa": [{ "index": [0, 0, 0], "value": [2, 1] }]
//!   }
//! }
//! ```
//!
//! Numbers are `[p, q]` pairs or integers in rational mode, decimal strings in
//! float mode, and `{"re": …, "im": …}` objects when complex.

use std::collections::BTreeMap;
use std::path::Path;

use num::{BigInt, BigRational, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::family::{build_cy3_model, FamilyError, ModelKind, VHSModel, DEFAULT_ORDER};
use crate::hodge::{HodgeData, HodgeError, PolarizationForm};
use crate::hyperkahler::{build_hk_model, HKModel, HkError};
use crate::linalg::Matrix;
use crate::scalar::{cq_from_bigint_ratio, Cq, NumberMode, Scalar, C64};
use crate::series::MultiIndex;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported schema_version {0} (this build reads version {SCHEMA_VERSION})")]
    SchemaVersion(u64),
    #[error("schema violation in `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("Yukawa entries disagree at ({i}, {j}, {k}): the tensor must be symmetric")]
    AsymmetricYukawa { i: usize, j: usize, k: usize },
    #[error("invalid number `{text}`: {reason}")]
    Number { text: String, reason: String },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Hk(#[from] HkError),
}

impl ModelIoError {
    fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelIoError::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// A number as written in a model file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Integer(i64),
    Ratio([i64; 2]),
    Decimal(String),
    Complex { re: Box<Number>, im: Box<Number> },
}

impl Number {
    pub fn ratio(p: i64, q: i64) -> Self {
        Number::Ratio([p, q])
    }

    /// Converts to a scalar; decimals are refused in rational mode.
    pub fn to_scalar<S: Scalar>(&self, mode: NumberMode) -> Result<S, ModelIoError> {
        match self {
            Number::Integer(v) => Ok(S::from_i64(*v)),
            Number::Ratio([p, q]) => {
                if *q == 0 {
                    return Err(ModelIoError::Number {
                        text: format!("[{p}, {q}]"),
                        reason: "zero denominator".into(),
                    });
                }
                Ok(S::from_ratio(*p, *q))
            }
            Number::Decimal(s) => {
                if mode == NumberMode::Rational {
                    return Err(ModelIoError::Number {
                        text: s.clone(),
                        reason: "decimal strings need number_mode \"float\"; use [p, q] pairs".into(),
                    });
                }
                let v: f64 = s.trim().parse().map_err(|e: std::num::ParseFloatError| ModelIoError::Number {
                    text: s.clone(),
                    reason: e.to_string(),
                })?;
                Ok(S::from_parts_f64(v, 0.0))
            }
            Number::Complex { re, im } => {
                let re: S = re.to_scalar(mode)?;
                let im: S = im.to_scalar(mode)?;
                Ok(re + S::i() * im)
            }
        }
    }

    /// Exact representation of a rational scalar; `None` when a part does
    /// not fit in `i64`.
    pub fn from_cq(z: &Cq) -> Option<Self> {
        let part = |r: &BigRational| -> Option<Number> {
            let p: i64 = r.numer().try_into().ok()?;
            let q: i64 = r.denom().try_into().ok()?;
            Some(if q == 1 { Number::Integer(p) } else { Number::Ratio([p, q]) })
        };
        let re = part(&z.re)?;
        if z.im.is_zero() {
            return Some(re);
        }
        Some(Number::Complex {
            re: Box::new(re),
            im: Box::new(part(&z.im)?),
        })
    }

    /// Shortest round-tripping decimal form.
    pub fn from_c64(z: C64) -> Self {
        let re = Number::Decimal(format!("{:?}", z.re));
        if z.im == 0.0 {
            return re;
        }
        Number::Complex {
            re: Box::new(re),
            im: Box::new(Number::Decimal(format!("{:?}", z.im))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YukawaEntry {
    pub index: [usize; 3],
    pub value: Number,
}

/// A higher coefficient of the canonical family: `t^index` (exponents) with
/// its vector in reference coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraEntry {
    pub index: Vec<u16>,
    pub vector: Vec<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cy3Payload {
    pub n_moduli: usize,
    /// Entries not listed are zero; each entry fills its permutations.
    #[serde(default)]
    pub yukawa: Vec<YukawaEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_coeffs: Vec<ExtraEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractVhsPayload {
    pub weight: usize,
    pub hodge_numbers: Vec<usize>,
    pub gram_q: Vec<Vec<Number>>,
    /// One square matrix per modulus, rows acting on row vectors.
    pub interior: Vec<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugation: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_coeffs: Vec<ExtraEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperkahlerPayload {
    pub n_moduli: usize,
    pub half_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Cy3(Cy3Payload),
    AbstractVhs(AbstractVhsPayload),
    Hyperkahler(HyperkahlerPayload),
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_mode() -> NumberMode {
    NumberMode::Rational
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(default = "default_mode")]
    pub number_mode: NumberMode,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(flatten)]
    pub payload: Payload,
}

/// A loaded model of either family.
#[derive(Clone, Debug)]
pub enum AnyModel<S> {
    Vhs(VHSModel<S>),
    Hyperkahler { hk: HKModel<S>, vhs: VHSModel<S> },
}

impl<S: Scalar> AnyModel<S> {
    pub fn vhs(&self) -> &VHSModel<S> {
        match self {
            AnyModel::Vhs(m) => m,
            AnyModel::Hyperkahler { vhs, .. } => vhs,
        }
    }

    pub fn hk(&self) -> Option<&HKModel<S>> {
        match self {
            AnyModel::Hyperkahler { hk, .. } => Some(hk),
            AnyModel::Vhs(_) => None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.vhs().kind()
    }
}

#[derive(Clone, Debug)]
pub enum LoadedModel {
    Rational(AnyModel<Cq>),
    Float(AnyModel<C64>),
}

fn parse_error(e: serde_json::Error) -> ModelIoError {
    ModelIoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl ModelFile {
    pub fn cy3(n_moduli: usize, couplings: &[Cq], order: usize) -> Option<Self> {
        let mut yukawa = Vec::new();
        for i in 0..n_moduli {
            for j in i..n_moduli {
                for k in j..n_moduli {
                    let v = &couplings[(i * n_moduli + j) * n_moduli + k];
                    if !v.is_zero() {
                        yukawa.push(YukawaEntry {
                            index: [i, j, k],
                            value: Number::from_cq(v)?,
                        });
                    }
                }
            }
        }
        Some(ModelFile {
            schema_version: SCHEMA_VERSION,
            number_mode: NumberMode::Rational,
            order,
            payload: Payload::Cy3(Cy3Payload {
                n_moduli,
                yukawa,
                extra_coeffs: Vec::new(),
            }),
        })
    }

    pub fn hyperkahler(n_moduli: usize, half_dim: usize, order: usize) -> Self {
        ModelFile {
            schema_version: SCHEMA_VERSION,
            number_mode: NumberMode::Rational,
            order,
            payload: Payload::Hyperkahler(HyperkahlerPayload { n_moduli, half_dim }),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.payload {
            Payload::Cy3(_) => ModelKind::Cy3,
            Payload::AbstractVhs(_) => ModelKind::AbstractVhs,
            Payload::Hyperkahler(_) => ModelKind::Hyperkahler,
        }
    }

    /// Parses and checks the schema version before looking at the payload.
    pub fn from_json(text: &str) -> Result<Self, ModelIoError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
        match value.get("schema_version") {
            None => return Err(ModelIoError::schema("schema_version", "missing")),
            Some(v) => match v.as_u64() {
                Some(v) if v == SCHEMA_VERSION as u64 => {}
                Some(v) => return Err(ModelIoError::SchemaVersion(v)),
                None => return Err(ModelIoError::schema("schema_version", "must be a non-negative integer")),
            },
        }
        serde_json::from_str(text).map_err(parse_error)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files serialize")
    }

    /// SHA-256 of the compact serialization.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("model files serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn build<S: Scalar>(&self) -> Result<AnyModel<S>, ModelIoError> {
        let mode = self.number_mode;
        match &self.payload {
            Payload::Cy3(p) => {
                let c = fill_yukawa::<S>(p.n_moduli, &p.yukawa, mode)?;
                let mut model = build_cy3_model(p.n_moduli, c, self.order)?;
                if !p.extra_coeffs.is_empty() {
                    model = model.with_extra_coeffs(extras(&p.extra_coeffs, p.n_moduli, 2 * p.n_moduli + 2, mode)?)?;
                }
                Ok(AnyModel::Vhs(model))
            }
            Payload::AbstractVhs(p) => {
                let mut hodge = HodgeData::new(p.weight, p.hodge_numbers.clone())?;
                if let Some(c) = &p.conjugation {
                    hodge = hodge.with_conjugation(c.clone())?;
                }
                let d = hodge.total_dim();
                let gram = matrix::<S>(&p.gram_q, d, "payload.gram_q", mode)?;
                let interior = p
                    .interior
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix::<S>(m, d, &format!("payload.interior[{i}]"), mode))
                    .collect::<Result<Vec<_>, _>>()?;
                let n = interior.len();
                let extra = extras(&p.extra_coeffs, n, d, mode)?;
                let model = VHSModel::new(hodge, PolarizationForm::from_q(p.weight, gram), interior, extra, self.order)?;
                Ok(AnyModel::Vhs(model))
            }
            Payload::Hyperkahler(p) => {
                let hk = build_hk_model::<S>(p.n_moduli, p.half_dim)?;
                let vhs = hk.to_vhs_model(self.order)?;
                Ok(AnyModel::Hyperkahler { hk, vhs })
            }
        }
    }

    pub fn load(&self) -> Result<LoadedModel, ModelIoError> {
        Ok(match self.number_mode {
            NumberMode::Rational => LoadedModel::Rational(self.build()?),
            NumberMode::Float => LoadedModel::Float(self.build()?),
        })
    }
}

/// Reads, validates and builds a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelFile, LoadedModel), ModelIoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = ModelFile::from_json(&text)?;
    let model = file.load()?;
    Ok((file, model))
}

fn fill_yukawa<S: Scalar>(n: usize, entries: &[YukawaEntry], mode: NumberMode) -> Result<Vec<S>, ModelIoError> {
    let mut c: Vec<Option<S>> = vec![None; n * n * n];
    for (e, entry) in entries.iter().enumerate() {
        let [i, j, k] = entry.index;
        if i >= n || j >= n || k >= n {
            return Err(ModelIoError::schema(
                format!("payload.yukawa[{e}].index"),
                format!("({i}, {j}, {k}) out of range for N = {n}"),
            ));
        }
        let v: S = entry.value.to_scalar(mode)?;
        for (a, b, cc) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            let slot = &mut c[(a * n + b) * n + cc];
            match slot {
                Some(old) if *old != v => return Err(ModelIoError::AsymmetricYukawa { i, j, k }),
                _ => *slot = Some(v.clone()),
            }
        }
    }
    Ok(c.into_iter().map(|v| v.unwrap_or_else(S::zero)).collect())
}

fn matrix<S: Scalar>(rows: &[Vec<Number>], d: usize, field: &str, mode: NumberMode) -> Result<Matrix<S>, ModelIoError> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(ModelIoError::schema(field, format!("expected a {d}x{d} matrix")));
    }
    let data = rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_scalar(mode)).collect::<Result<Vec<S>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(data))
}

fn extras<S: Scalar>(
    entries: &[ExtraEntry],
    n: usize,
    d: usize,
    mode: NumberMode,
) -> Result<BTreeMap<MultiIndex, Vec<S>>, ModelIoError> {
    let mut out = BTreeMap::new();
    for (e, entry) in entries.iter().enumerate() {
        let field = format!("payload.extra_coeffs[{e}]");
        if entry.index.len() != n {
            return Err(ModelIoError::schema(format!("{field}.index"), format!("needs {n} exponents")));
        }
        if entry.vector.len() != d {
            return Err(ModelIoError::schema(format!("{field}.vector"), format!("needs {d} entries")));
        }
        let v = entry
            .vector
            .iter()
            .map(|x| x.to_scalar(mode))
            .collect::<Result<Vec<S>, _>>()?;
        if out.insert(MultiIndex::new(entry.index.clone()), v).is_some() {
            return Err(ModelIoError::schema(format!("{field}.index"), "duplicate multi-index"));
        }
    }
    Ok(out)
}

/// Parses `a`, `a+bi`, `bi`, `-i`, where `a`, `b` are integers, `p/q`
/// fractions or decimals. Decimals are read exactly in rational mode.
pub fn parse_complex<S: Scalar>(text: &str) -> Result<S, ModelIoError> {
    let err = |reason: &str| ModelIoError::Number {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty"));
    }
    // split at a sign that is not leading and not part of an exponent
    let bytes = s.as_bytes();
    let mut split = None;
    for p in 1..bytes.len() {
        if (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E') {
            split = Some(p);
        }
    }
    let (re_txt, im_txt) = match split {
        Some(p) => (&s[..p], Some(&s[p..])),
        None if s.ends_with('i') => ("", Some(s.as_str())),
        None => (s.as_str(), None),
    };
    let re = if re_txt.is_empty() {
        S::zero()
    } else {
        parse_real::<S>(re_txt).ok_or_else(|| err("not a number"))?
    };
    let im = match im_txt {
        None => S::zero(),
        Some(t) => {
            let body = t.strip_suffix('i').ok_or_else(|| err("imaginary part must end in `i`"))?;
            match body {
                "" | "+" => S::one(),
                "-" => -S::one(),
                b => parse_real::<S>(b).ok_or_else(|| err("not a number"))?,
            }
        }
    };
    Ok(re + S::i() * im)
}

fn parse_real<S: Scalar>(t: &str) -> Option<S> {
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.parse().ok()?;
        let q: i64 = q.parse().ok()?;
        return (q != 0).then(|| S::from_ratio(p, q));
    }
    if S::MODE == NumberMode::Rational && !t.contains(['e', 'E']) {
        let exact = exact_decimal(t)?;
        return Some(rational_to_scalar(&exact));
    }
    t.parse::<f64>().ok().map(|v| S::from_parts_f64(v, 0.0))
}

fn exact_decimal(t: &str) -> Option<BigRational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, den);
    Some(if neg { -r } else { r })
}

fn rational_to_scalar<S: Scalar>(r: &BigRational) -> S {
    if let (Ok(p), Ok(q)) = (i64::try_from(r.numer()), i64::try_from(r.denom())) {
        return S::from_ratio(p, q);
    }
    let z = cq_from_bigint_ratio(r.numer().clone(), r.denom().clone());
    let boxed: Box<dyn std::any::Any> = Box::new(z.clone());
    match boxed.downcast::<S>() {
        Ok(s) => *s,
        Err(_) => S::from_c64(z.to_c64()),
    }
}

/// A list of points: `;` between points, `,` between coordinates.
pub fn parse_points<S: Scalar>(text: &str, n_moduli: usize) -> Result<Vec<Vec<S>>, ModelIoError> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let coords = p.split(',').map(parse_complex::<S>).collect::<Result<Vec<S>, _>>()?;
            if coords.len() != n_moduli {
                return Err(ModelIoError::Number {
                    text: p.to_string(),
                    reason: format!("expected {n_moduli} coordinates"),
                });
            }
            Ok(coords)
        })
        .collect()
}

/// Writes a scalar back in model-file form.
pub fn number_of<S: Scalar>(z: &S) -> Number {
    exact_number(z).unwrap_or_else(|| Number::from_c64(z.to_c64()))
}

fn exact_number<S: Scalar>(z: &S) -> Option<Number> {
    let any: &dyn std::any::Any = z;
    any.downcast_ref::<Cq>().and_then(Number::from_cq)
}
