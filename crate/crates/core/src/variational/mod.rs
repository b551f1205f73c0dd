//! Variational problems `ℐ[y, T] = ∫_a^T L(t, y, □y, …, □ⁿy) dt` with a free
//! or fixed terminal point, their Euler–Lagrange and natural boundary
//! residuals, a first-variation oracle and solvers.
//!
//! A candidate trajectory is a vector of nodal values on the problem lattice
//! with `2n` halo layers on each side: the Euler–Lagrange residual at a node
//! `t` reaches `y(t ± 2n·h)` because `□ⁱ` of `∂L/∂vᵢ` composes two stencils.

mod eval;
mod gateaux;
mod hypotheses;
mod lsq;
mod newton;
mod scan;
mod symbolic;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{parse_curve, parse_expr, Expr, GradL};
use crate::grid::{Grid, SampledFn};

pub use eval::{el_residual, functional_value, natural_residuals, residual_report};
pub use gateaux::{check_admissible, gateaux_derivative, random_variation, GateauxEstimate};
pub use hypotheses::hypothesis_warnings;
pub use newton::{solve_at, solve_fixed_t};
pub use scan::{solve_free_t, FreeTSolution, ScanPoint};
pub use symbolic::{el_symbolic, Derivation};

pub const DEFAULT_SCAN_POINTS: usize = 200;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;

/// Boundary data and which of `T`, `y(T)` are free.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// `y(a)` fixed; `T` and `y(T)` free.
    A { y_a: f64 },
    /// Both ends and `T` free.
    B,
    /// `y(a)` and `y(T)` fixed; `T` free.
    C { y_a: f64, y_t: f64 },
    /// `y(a)` fixed, the end lies on the curve `y(T) = ψ(T)`.
    D { y_a: f64, psi: Expr },
    /// `T` fixed, `y(T)` free; `y(a)` fixed when given.
    FixedTAB { t_end: f64, y_a: Option<f64> },
    /// `T`, `y(a)` and `y(T)` fixed.
    FixedTC { t_end: f64, y_a: f64, y_t: f64 },
    /// Order-`n` problem with `y(a)` and `□ᵏy(a)`, `k = 1..n−1`, prescribed.
    HigherOrder { y_a: f64, derivs_a: Vec<Complex64> },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::A { .. } => "A",
            Regime::B => "B",
            Regime::C { .. } => "C",
            Regime::D { .. } => "D",
            Regime::FixedTAB { .. } => "fixedT-AB",
            Regime::FixedTC { .. } => "fixedT-C",
            Regime::HigherOrder { .. } => "higher",
        }
    }

    pub fn fixed_t(&self) -> Option<f64> {
        match self {
            Regime::FixedTAB { t_end, .. } | Regime::FixedTC { t_end, .. } => Some(*t_end),
            _ => None,
        }
    }

    /// Parse the curve of regime D.
    pub fn d_from_source(y_a: f64, psi: &str) -> Result<Self> {
        Ok(Regime::D {
            y_a,
            psi: parse_curve(psi)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VariationalProblem {
    lagrangian: Expr,
    grad: GradL,
    order: usize,
    regime: Regime,
    grid: Grid,
    t_scan: (f64, f64),
    tol: f64,
    newton_tol: f64,
    scan_points: usize,
}

fn finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("{what} must be finite")))
    }
}

impl VariationalProblem {
    pub fn new(lagrangian: Expr, order: usize, interval: (f64, f64), regime: Regime, h: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidProblem("order must be at least 1".into()));
        }
        let used = lagrangian.max_order();
        if used > order {
            return Err(Error::OrderMismatch { index: used, order });
        }
        let (a, b) = interval;
        let grid = Grid::new(a, b, h, 2 * order)?;
        let p = Self {
            grad: GradL::of(&lagrangian, order),
            lagrangian,
            order,
            regime,
            grid,
            t_scan: (a + h, b),
            tol: DEFAULT_RESIDUAL_TOL,
            newton_tol: DEFAULT_NEWTON_TOL,
            scan_points: DEFAULT_SCAN_POINTS,
        };
        p.validate_regime()?;
        Ok(p)
    }

    /// Parse the Lagrangian and build the problem.
    pub fn from_source(src: &str, order: usize, interval: (f64, f64), regime: Regime, h: f64) -> Result<Self> {
        Self::new(parse_expr(src, order)?, order, interval, regime, h)
    }

    fn validate_regime(&self) -> Result<()> {
        let n = self.order;
        let needs_first = |name: &str| {
            if n == 1 {
                Ok(())
            } else {
                Err(Error::InvalidProblem(format!("regime {name} requires order 1")))
            }
        };
        match &self.regime {
            Regime::A { y_a } => {
                needs_first("A")?;
                finite(*y_a, "y_a")
            }
            Regime::B => needs_first("B"),
            Regime::C { y_a, y_t } => {
                needs_first("C")?;
                finite(*y_a, "y_a")?;
                finite(*y_t, "y_T")
            }
            Regime::D { y_a, psi } => {
                needs_first("D")?;
                finite(*y_a, "y_a")?;
                if psi.max_order() > 0 || psi.depends_on(crate::expr::Var::Y) {
                    return Err(Error::InvalidProblem("ψ may depend on t only".into()));
                }
                Ok(())
            }
            Regime::FixedTAB { t_end, y_a } => {
                needs_first("fixedT")?;
                if let Some(y) = y_a {
                    finite(*y, "y_a")?;
                }
                self.check_fixed_t(*t_end)
            }
            Regime::FixedTC { t_end, y_a, y_t } => {
                needs_first("fixedT")?;
                finite(*y_a, "y_a")?;
                finite(*y_t, "y_T")?;
                self.check_fixed_t(*t_end)
            }
            Regime::HigherOrder { y_a, derivs_a } => {
                finite(*y_a, "y_a")?;
                if derivs_a.len() != n - 1 {
                    return Err(Error::InvalidProblem(format!(
                        "order {n} needs {} initial derivative value(s), got {}",
                        n - 1,
                        derivs_a.len()
                    )));
                }
                if derivs_a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::InvalidProblem("initial derivatives must be finite".into()));
                }
                Ok(())
            }
        }
    }

    fn check_fixed_t(&self, t: f64) -> Result<()> {
        self.check_t(t)?;
        let (_, frac) = self.grid.locate_core(t)?;
        if frac != 0.0 {
            return Err(Error::InvalidProblem(format!("fixed T = {t} is not a grid node")));
        }
        Ok(())
    }

    /// `T` must leave at least one full cell after `a` and not pass `b`.
    pub(crate) fn check_t(&self, t: f64) -> Result<()> {
        let (a, b, h) = (self.a(), self.b(), self.h());
        if !(t >= a + h * (1.0 - 1e-9) && t <= b + h * 1e-9) {
            return Err(Error::OutOfRange { t, lo: a + h, hi: b });
        }
        Ok(())
    }

    pub fn with_t_scan(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidProblem(format!("empty scan range [{lo}, {hi}]")));
        }
        self.check_t(lo)?;
        self.check_t(hi)?;
        self.t_scan = (lo, hi);
        Ok(self)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_newton_tol(mut self, tol: f64) -> Self {
        self.newton_tol = tol;
        self
    }

    pub fn with_scan_points(mut self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProblem("scan needs at least 2 points".into()));
        }
        self.scan_points = n;
        Ok(self)
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn grad(&self) -> &GradL {
        &self.grad
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// Problem lattice over `[a, b]` with `2n` halo layers.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn a(&self) -> f64 {
        self.grid.a()
    }

    pub fn b(&self) -> f64 {
        self.grid.b()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Halo depth every candidate needs.
    pub fn halo(&self) -> usize {
        2 * self.order
    }

    pub fn t_scan(&self) -> (f64, f64) {
        self.t_scan
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol
    }

    pub fn scan_points(&self) -> usize {
        self.scan_points
    }

    /// Grid for a candidate ending at `t_end`: the problem lattice with its
    /// core cut at the first node at or after `t_end`.
    pub fn candidate_grid(&self, t_end: f64) -> Result<Grid> {
        self.check_t(t_end)?;
        let (k, frac) = self.grid.locate_core(t_end)?;
        let cells = if frac > 0.0 { k + 1 } else { k };
        self.grid.truncated(cells)
    }

    pub(crate) fn check_candidate(&self, c: &Candidate) -> Result<()> {
        let g = c.y.grid();
        if (g.h() - self.h()).abs() > 1e-12 * self.h() || (g.a() - self.a()).abs() > 1e-9 * self.h() {
            return Err(Error::GridMismatch);
        }
        if g.halo() < self.halo() {
            return Err(Error::HaloExhausted {
                needed: self.halo(),
                available: g.halo(),
            });
        }
        if g.b() > self.b() + 1e-9 * self.h() {
            return Err(Error::GridMismatch);
        }
        self.check_t(c.t_end)?;
        if c.t_end > g.b() + 1e-9 * self.h() {
            return Err(Error::OutOfRange {
                t: c.t_end,
                lo: self.a(),
                hi: g.b(),
            });
        }
        Ok(())
    }
}

/// A trajectory with its terminal point.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub y: SampledFn,
    pub t_end: f64,
}

impl Candidate {
    pub fn new(y: SampledFn, t_end: f64) -> Self {
        Self { y, t_end }
    }

    /// Sample `f` on the candidate grid of `p` for terminal point `t_end`.
    pub fn from_fn<F, V>(p: &VariationalProblem, f: F, t_end: f64) -> Result<Self>
    where
        F: Fn(f64) -> V,
        V: Into<Complex64>,
    {
        let g = p.candidate_grid(t_end)?;
        Ok(Self {
            y: SampledFn::sample(f, &g)?,
            t_end,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedResidual {
    pub label: String,
    pub value: Complex64,
}

impl NamedResidual {
    pub fn norm(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub t_end: f64,
    /// Largest Euler–Lagrange residual over the nodes of `[a, T]`.
    pub el_norm: f64,
    pub natural_conditions: Vec<NamedResidual>,
    pub functional_value: Complex64,
    pub tol: f64,
    pub verdict: bool,
}

impl ResidualReport {
    pub fn max_natural(&self) -> f64 {
        self.natural_conditions
            .iter()
            .map(NamedResidual::norm)
            .fold(0.0, f64::max)
    }

    pub fn get(&self, label: &str) -> Option<Complex64> {
        self.natural_conditions
            .iter()
            .find(|r| r.label == label)
            .map(|r| r.value)
    }
}

/// A solved candidate with its residual report.
#[derive(Debug, Clone)]
pub struct Solution {
    pub candidate: Candidate,
    pub report: ResidualReport,
    pub iterations: usize,
}
