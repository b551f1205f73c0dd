//! Machine-readable reports. Floats are written with 17 significant digits
//! so that identical runs give byte-identical files; non-finite values are
//! written as `null`.

use std::path::Path;

use num_complex::Complex64;
use scalecalc::identities::IdentityReport;
use scalecalc::variational::{ResidualReport, ScanPoint};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::problem::ProblemFile;
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cplx {
    pub re: Num,
    pub im: Num,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self {
            re: Num(z.re),
            im: Num(z.im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoRoot,
    Indeterminate,
    Unverified,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NoRoot => 2,
            Status::Indeterminate => 3,
            Status::Unverified | Status::Failed => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub label: String,
    pub re: Num,
    pub im: Num,
    pub norm: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstVariation {
    pub draws: usize,
    pub max_magnitude: Num,
    pub all_agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Root {
    #[serde(rename = "T")]
    pub t_end: Num,
    pub el_norm: Num,
    pub natural_conditions: Vec<Condition>,
    pub functional_value: Cplx,
    pub tol: Num,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_variation: Option<FirstVariation>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
}

impl Root {
    pub fn new(r: &ResidualReport) -> Self {
        Self {
            t_end: Num(r.t_end),
            el_norm: Num(r.el_norm),
            natural_conditions: r
                .natural_conditions
                .iter()
                .map(|c| Condition {
                    label: c.label.clone(),
                    re: Num(c.value.re),
                    im: Num(c.value.im),
                    norm: Num(c.norm()),
                })
                .collect(),
            functional_value: r.functional_value.into(),
            tol: Num(r.tol),
            verdict: r.verdict,
            iterations: None,
            first_variation: None,
            warnings: Vec::new(),
            trajectory: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub t: Num,
    /// `None` where the fixed-`T` solve failed.
    pub residual: Option<Cplx>,
}

impl From<&ScanPoint> for ScanEntry {
    fn from(s: &ScanPoint) -> Self {
        Self {
            t: Num(s.t),
            residual: s.residual.map(Cplx::from),
        }
    }
}

/// Outcome on one rung of a grid ladder.
#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub h: Num,
    pub status: Status,
    #[serde(rename = "T")]
    pub t_end: Vec<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub status: Status,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub problem: ProblemFile,
    pub h: Num,
    pub roots: Vec<Root>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scan: Vec<ScanEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<Rung>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderPoint {
    pub h: Num,
    pub residual: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct Identity {
    pub residual_per_h: Vec<LadderPoint>,
    pub fitted_order: Option<Num>,
    pub strictly_decreasing: bool,
    pub pass: bool,
}

impl From<&IdentityReport> for Identity {
    fn from(r: &IdentityReport) -> Self {
        Self {
            residual_per_h: r
                .residual_per_h
                .iter()
                .map(|&(h, residual)| LadderPoint {
                    h: Num(h),
                    residual: Num(residual),
                })
                .collect(),
            fitted_order: r.fitted_order.map(Num),
            strictly_decreasing: r.strictly_decreasing(),
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Identities {
    pub command: &'static str,
    pub status: Status,
    pub exit_code: u8,
    pub function: String,
    pub with: String,
    pub interval: [Num; 2],
    pub ladder: Vec<Num>,
    pub leibniz: Identity,
    pub barrow: Identity,
    pub parts: Identity,
    /// `None` when the Taylor check does not apply.
    pub taylor: Option<Identity>,
    pub warnings: Vec<String>,
}

/// Write `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
