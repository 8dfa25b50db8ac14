//! JSON documents for matrices, verification reports and scans, plus the
//! parsers for complex numbers used on the command line.
//!
//! Complex numbers are `[re, im]` pairs. Keys are written in declaration
//! order and floats in shortest round-trip form, so a document parsed and
//! written again reproduces the original bytes.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::report::VerificationReport;

pub const SCHEMA_VERSION: &str = "1";
pub const NORMALIZATION: &str = "max-modulus-1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported schema_version {0:?} (expected \"1\")")]
    Version(String),
    #[error("shape error: {rows}x{cols} matrix with {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which convention produced a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    #[serde(rename = "paper")]
    Paper,
    #[serde(rename = "antipode-dual")]
    AntipodeDual,
    #[serde(rename = "antipode-dual-crossed")]
    AntipodeDualCrossed,
}

impl From<crate::reps::DualConvention> for Convention {
    fn from(c: crate::reps::DualConvention) -> Self {
        match c {
            crate::reps::DualConvention::Inverse => Convention::AntipodeDual,
            crate::reps::DualConvention::Crossed => Convention::AntipodeDualCrossed,
        }
    }
}

pub type Pair = [f64; 2];

/// `[re, im]`, with negative zero written as zero.
pub fn pair(z: Complex<f64>) -> Pair {
    [z.re + 0.0, z.im + 0.0]
}

pub fn from_pair(p: Pair) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub schema_version: String,
    pub kind: String,
    pub n: usize,
    pub q: Pair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rapidities: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<Pair>,
    pub convention: Convention,
    pub normalization: String,
    pub tol: f64,
}

impl Meta {
    pub fn new(kind: &str, n: usize, q: Complex<f64>, convention: Convention, tol: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            kind: kind.into(),
            n,
            q: pair(q),
            x: None,
            rapidities: None,
            eps: Vec::new(),
            convention,
            normalization: NORMALIZATION.into(),
            tol,
        }
    }

    fn validate(&self) -> Result<(), IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::Version(self.schema_version.clone()));
        }
        let mut values: Vec<f64> = vec![self.q[0], self.q[1], self.tol];
        for list in [self.x.as_deref(), self.rapidities.as_deref(), Some(&self.eps[..])]
            .into_iter()
            .flatten()
        {
            values.extend(list.iter().flatten());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IoError::NonFinite("meta".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Pair>,
}

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix<f64>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|&z| pair(z)).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix<f64>, IoError> {
        self.validate()?;
        ComplexMatrix::from_vec(self.rows, self.cols, self.data.iter().map(|&p| from_pair(p)).collect())
            .map_err(|e| IoError::Invalid(e.to_string()))
    }

    fn validate(&self) -> Result<(), IoError> {
        if self.rows.checked_mul(self.cols) != Some(self.data.len()) {
            return Err(IoError::Shape {
                rows: self.rows,
                cols: self.cols,
                len: self.data.len(),
            });
        }
        if self.data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(IoError::NonFinite("matrix data".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub meta: Meta,
    pub matrix: MatrixData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub name: String,
    pub deviation: f64,
    pub lambda: Pair,
    pub tol: f64,
    pub passed: bool,
}

impl From<&VerificationReport<f64>> for CheckEntry {
    fn from(r: &VerificationReport<f64>) -> Self {
        Self {
            name: r.name.clone(),
            deviation: r.deviation,
            lambda: pair(r.lambda),
            tol: r.tol,
            passed: r.passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub meta: Meta,
    pub checks: Vec<CheckEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanData {
    /// `"eps"` or `"theta"`.
    pub axis: String,
    /// `"bulk"`, `"paper"` or `"engine"`.
    pub system: String,
    /// One entry per grid point: the ε̂ vector, or a one-element list
    /// holding the rapidity.
    pub points: Vec<Vec<Pair>>,
    pub dims: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDocument {
    pub meta: Meta,
    pub scan: ScanData,
}

/// Validation shared by the document types.
pub trait Document: Serialize + for<'de> Deserialize<'de> {
    fn validate(&self) -> Result<(), IoError>;
}

impl Document for MatrixDocument {
    fn validate(&self) -> Result<(), IoError> {
        self.meta.validate()?;
        self.matrix.validate()
    }
}

impl Document for ReportDocument {
    fn validate(&self) -> Result<(), IoError> {
        self.meta.validate()?;
        for c in &self.checks {
            if !(c.deviation.is_finite() && c.tol.is_finite() && c.lambda.iter().all(|v| v.is_finite())) {
                return Err(IoError::NonFinite(format!("check {}", c.name)));
            }
            if c.passed != (c.deviation <= c.tol) {
                return Err(IoError::Invalid(format!(
                    "check {}: passed flag disagrees with deviation",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

impl Document for ScanDocument {
    fn validate(&self) -> Result<(), IoError> {
        self.meta.validate()?;
        if self.scan.points.len() != self.scan.dims.len() {
            return Err(IoError::Invalid("scan points and dims differ in length".into()));
        }
        if self.scan.points.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(IoError::NonFinite("scan points".into()));
        }
        Ok(())
    }
}

/// Compact JSON followed by a newline.
pub fn serialize<D: Document>(doc: &D) -> Result<Vec<u8>, IoError> {
    doc.validate()?;
    let mut out = serde_json::to_vec(doc).map_err(|e| IoError::Parse(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn deserialize<D: Document>(bytes: &[u8]) -> Result<D, IoError> {
    // Check the version before the full schema so that a future document
    // reports a version error rather than a field mismatch.
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| IoError::Parse(e.to_string()))?;
    if let Some(v) = value.pointer("/meta/schema_version") {
        let v = v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string());
        if v != SCHEMA_VERSION {
            return Err(IoError::Version(v));
        }
    }
    let doc: D = serde_json::from_value(value).map_err(|e| IoError::Parse(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

pub fn serialize_matrix(doc: &MatrixDocument) -> Result<Vec<u8>, IoError> {
    serialize(doc)
}

pub fn deserialize_matrix(bytes: &[u8]) -> Result<MatrixDocument, IoError> {
    deserialize(bytes)
}

pub fn read_document<D: Document>(path: &Path) -> Result<D, IoError> {
    deserialize(&std::fs::read(path)?)
}

pub fn write_document<D: Document>(path: &Path, doc: &D) -> Result<(), IoError> {
    let bytes = serialize(doc)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

fn parse_real(s: &str, whole: &str) -> Result<f64, IoError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| IoError::Parse(format!("not a complex number: {whole:?}")))?;
    if !v.is_finite() {
        return Err(IoError::NonFinite(format!("{whole:?}")));
    }
    Ok(v)
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, or polar `r@phi` (`phi` in
/// radians).
pub fn parse_complex(s: &str) -> Result<Complex<f64>, IoError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(IoError::Parse("empty complex number".into()));
    }
    if let Some((r, phi)) = t.split_once('@') {
        return Ok(Complex::from_polar(parse_real(r, t)?, parse_real(phi, t)?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex::new(parse_real(t, t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k], t)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im.trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other, t)?,
    };
    Ok(Complex::new(re, im))
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex<f64>>, IoError> {
    s.split(',').map(parse_complex).collect()
}
