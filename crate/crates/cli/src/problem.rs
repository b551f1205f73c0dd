//! Problem files: a JSON object naming the Lagrangian, the regime data, the
//! grid and the tolerances.

use std::path::Path;

use num_complex::Complex64;
use scalecalc::variational::{Regime, VariationalProblem, DEFAULT_NEWTON_TOL, DEFAULT_RESIDUAL_TOL};
use scalecalc::Error;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub lagrangian: String,
    pub order: usize,
    pub interval: [f64; 2],
    pub regime: RegimeEntry,
    pub grid: GridEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_scan: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum RegimeEntry {
    A {
        y_a: f64,
    },
    B {},
    C {
        y_a: f64,
        #[serde(rename = "y_T")]
        y_t: f64,
    },
    D {
        y_a: f64,
        psi: String,
    },
    #[serde(rename = "fixedT")]
    FixedT {
        #[serde(rename = "T")]
        t_end: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_a: Option<f64>,
        #[serde(default, rename = "y_T", skip_serializing_if = "Option::is_none")]
        y_t: Option<f64>,
    },
    #[serde(rename = "higher")]
    Higher {
        y_a: f64,
        derivs_a: Vec<ComplexEntry>,
    },
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexEntry {
    fn value(self) -> Complex64 {
        match self {
            ComplexEntry::Real(x) => Complex64::new(x, 0.0),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderEntry>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LadderEntry {
    pub h0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_residual")]
    pub residual: f64,
    #[serde(default = "default_newton_step")]
    pub newton_step: f64,
}

fn default_residual() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

fn default_newton_step() -> f64 {
    DEFAULT_NEWTON_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: default_residual(),
            newton_step: default_newton_step(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub scan_points: Option<usize>,
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Input(m) => input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut f: Self = serde_json::from_str(text).map_err(|e| input(format!("schema error: {e}")))?;
        match (&f.grid.h, &f.grid.ladder) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(input("schema error: grid needs exactly one of `h` and `ladder`")),
        }
        if let Some(l) = f.grid.ladder {
            if l.rungs == 0 || !(l.ratio > 0.0 && l.ratio < 1.0) {
                return Err(input("schema error: ladder needs rungs >= 1 and 0 < ratio < 1"));
            }
        }
        for (name, x) in [
            ("tolerances.residual", f.tolerances.residual),
            ("tolerances.newton_step", f.tolerances.newton_step),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(input(format!("schema error: {name} must be positive")));
            }
        }
        if let RegimeEntry::FixedT {
            y_a: None,
            y_t: Some(_),
            ..
        } = f.regime
        {
            return Err(input("schema error: fixedT with y_T also needs y_a"));
        }
        f.lagrangian = f.lagrangian.trim().to_string();
        Ok(f)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(h) = o.h {
            self.grid = GridEntry {
                h: Some(h),
                ladder: None,
            };
        }
        if let Some(t) = o.tol {
            self.tolerances.residual = t;
        }
    }

    /// Steps to solve on, coarsest first.
    pub fn steps(&self) -> Vec<f64> {
        match (self.grid.h, self.grid.ladder) {
            (Some(h), _) => vec![h],
            (None, Some(l)) => (0..l.rungs).map(|k| l.h0 * l.ratio.powi(k as i32)).collect(),
            (None, None) => Vec::new(),
        }
    }

    fn regime(&self) -> Result<Regime, Failure> {
        Ok(match &self.regime {
            RegimeEntry::A { y_a } => Regime::A { y_a: *y_a },
            RegimeEntry::B {} => Regime::B,
            RegimeEntry::C { y_a, y_t } => Regime::C { y_a: *y_a, y_t: *y_t },
            RegimeEntry::D { y_a, psi } => Regime::d_from_source(*y_a, psi).map_err(|e| input(format!("psi: {e}")))?,
            RegimeEntry::FixedT { t_end, y_a, y_t } => match (y_a, y_t) {
                (Some(y_a), Some(y_t)) => Regime::FixedTC {
                    t_end: *t_end,
                    y_a: *y_a,
                    y_t: *y_t,
                },
                _ => Regime::FixedTAB {
                    t_end: *t_end,
                    y_a: *y_a,
                },
            },
            RegimeEntry::Higher { y_a, derivs_a } => Regime::HigherOrder {
                y_a: *y_a,
                derivs_a: derivs_a.iter().map(|z| z.value()).collect(),
            },
        })
    }

    /// Build the problem at step `h`.
    pub fn problem(&self, h: f64, o: Overrides) -> Result<VariationalProblem, Failure> {
        let regime = self.regime()?;
        let [a, b] = self.interval;
        let mut p = VariationalProblem::from_source(&self.lagrangian, self.order, (a, b), regime, h)
            .map_err(|e| match e {
                Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::OrderMismatch { .. } => {
                    input(format!("lagrangian: {e}"))
                }
                _ => input(format!("problem: {e}")),
            })?
            .with_tol(self.tolerances.residual)
            .with_newton_tol(self.tolerances.newton_step);
        if let Some([lo, hi]) = self.t_scan {
            p = p.with_t_scan(lo, hi).map_err(|e| input(format!("t_scan: {e}")))?;
        }
        if let Some(n) = o.scan_points {
            p = p.with_scan_points(n).map_err(|e| input(format!("scan points: {e}")))?;
        }
        Ok(p)
    }
}
