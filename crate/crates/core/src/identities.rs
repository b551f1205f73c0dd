//! Residuals of the scale Leibniz, Barrow, integration-by-parts and Taylor
//! rules at finite `h`, tracked across a ladder of steps.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::grid::{Grid, SampledFn};
use crate::scale_ops::{hscale_at, hscale_derivative};

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// `(h, max-node residual)` in ladder order (decreasing `h`).
    pub residual_per_h: Vec<(f64, f64)>,
    /// Log–log slope of residual against `h`; `None` when every residual is
    /// at roundoff level and there is nothing to fit.
    pub fitted_order: Option<f64>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.residual_per_h.iter().map(|&(_, r)| r)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.residual_per_h.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_per_h.last().map_or(0.0, |&(_, r)| r)
    }
}

/// Acceptance rule for a residual ladder.
///
/// A report passes when every residual is below `floor`, or when the
/// residuals strictly decrease, the last one is below `final_tol` and the
/// fitted order is at least `min_order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassRule {
    pub floor: f64,
    pub final_tol: f64,
    pub min_order: f64,
}

impl PassRule {
    /// Smooth inputs: first-order decay down to a small final residual.
    pub fn smooth() -> Self {
        Self {
            floor: 1e-12,
            final_tol: 1e-2,
            min_order: 0.9,
        }
    }

    /// Hölder inputs: only monotone decay is required.
    pub fn holder() -> Self {
        Self {
            floor: 1e-12,
            final_tol: f64::INFINITY,
            min_order: 0.0,
        }
    }

    /// Taylor remainder: second order.
    pub fn taylor() -> Self {
        Self {
            floor: 1e-12,
            final_tol: f64::INFINITY,
            min_order: 1.8,
        }
    }

    fn judge(&self, residual_per_h: Vec<(f64, f64)>) -> IdentityReport {
        let exact = residual_per_h.iter().all(|&(_, r)| r <= self.floor);
        let (hs, rs): (Vec<f64>, Vec<f64>) = residual_per_h.iter().filter(|&&(_, r)| r > 0.0).copied().unzip();
        let fitted_order = (!exact && hs.len() >= 2).then(|| log_log_slope(&hs, &rs));
        let mut report = IdentityReport {
            residual_per_h,
            fitted_order,
            pass: exact,
        };
        if !exact {
            report.pass = report.strictly_decreasing()
                && report.final_residual() < self.final_tol
                && fitted_order.is_some_and(|p| p >= self.min_order);
        }
        report
    }
}

fn check_ladder(steps: &[f64]) -> Result<()> {
    if steps.len() < 2 {
        return Err(Error::InsufficientLadder {
            needed: 2,
            got: steps.len(),
        });
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParams("ladder steps must strictly decrease".into()));
    }
    Ok(())
}

fn per_step(steps: &[f64], residual: impl Fn(f64) -> Result<f64> + Sync) -> Result<Vec<(f64, f64)>> {
    check_ladder(steps)?;
    steps.par_iter().map(|&h| Ok((h, residual(h)?))).collect()
}

fn core_max(f: &SampledFn) -> f64 {
    let g = f.grid();
    (0..=g.cells()).map(|k| f.at_core(k).norm()).fold(0.0, f64::max)
}

/// `max_node |□_h f − f′|` over `[a, b]` for each step.
pub fn smooth_consistency<F, D, V>(f: F, df: D, a: f64, b: f64, steps: &[f64]) -> Result<IdentityReport>
where
    F: Fn(f64) -> V + Sync,
    D: Fn(f64) -> f64 + Sync,
    V: Into<Complex64>,
{
    let residual = |h: f64| {
        let g = Grid::new(a, b, h, 1)?;
        let d = hscale_derivative(&SampledFn::sample(&f, &g)?)?;
        Ok((0..=g.cells())
            .map(|k| (d.at_core(k) - df(g.node(g.first_core() + k))).norm())
            .fold(0.0, f64::max))
    };
    Ok(PassRule::smooth().judge(per_step(steps, residual)?))
}

/// `max_node |□_h(fg) − (□_h f·g + f·□_h g)|` per step.
pub fn leibniz_residual<F, G, V, W>(f: F, g: G, a: f64, b: f64, steps: &[f64], rule: PassRule) -> Result<IdentityReport>
where
    F: Fn(f64) -> V + Sync,
    G: Fn(f64) -> W + Sync,
    V: Into<Complex64>,
    W: Into<Complex64>,
{
    let residual = |h: f64| {
        let grid = Grid::new(a, b, h, 1)?;
        let fs = SampledFn::sample(&f, &grid)?;
        let gs = SampledFn::sample(&g, &grid)?;
        let d_prod = hscale_derivative(&fs.mul(&gs)?)?;
        let (df, dg) = (hscale_derivative(&fs)?, hscale_derivative(&gs)?);
        // one product per term keeps the result symmetric in (f, g) bit for bit
        let rule_sum = df.mul(&gs)?.add(&fs.mul(&dg)?)?;
        Ok(core_max(&d_prod.sub(&rule_sum)?))
    };
    Ok(rule.judge(per_step(steps, residual)?))
}

/// Left-Riemann sum of `□_h f · h` over the cells of `[a, b)`.
fn left_riemann(d: &SampledFn) -> Complex64 {
    let g = d.grid();
    (0..g.cells()).map(|k| d.at_core(k)).sum::<Complex64>() * g.h()
}

/// `|Σ_[a,b) □_h f·h − (f(b) − f(a))|` per step.
pub fn barrow_residual<F, V>(f: F, a: f64, b: f64, steps: &[f64], rule: PassRule) -> Result<IdentityReport>
where
    F: Fn(f64) -> V + Sync,
    V: Into<Complex64>,
{
    let residual = |h: f64| {
        let grid = Grid::new(a, b, h, 1)?;
        let fs = SampledFn::sample(&f, &grid)?;
        let d = hscale_derivative(&fs)?;
        let jump = fs.at_core(grid.cells()) - fs.at_core(0);
        Ok((left_riemann(&d) - jump).norm())
    };
    Ok(rule.judge(per_step(steps, residual)?))
}

/// `|Σ □_h f·g·h + Σ f·□_h g·h − [fg]_a^b|` per step, left-Riemann sums.
pub fn parts_residual<F, G, V, W>(f: F, g: G, a: f64, b: f64, steps: &[f64], rule: PassRule) -> Result<IdentityReport>
where
    F: Fn(f64) -> V + Sync,
    G: Fn(f64) -> W + Sync,
    V: Into<Complex64>,
    W: Into<Complex64>,
{
    let residual = |h: f64| {
        let grid = Grid::new(a, b, h, 1)?;
        let fs = SampledFn::sample(&f, &grid)?;
        let gs = SampledFn::sample(&g, &grid)?;
        let lhs = left_riemann(&hscale_derivative(&fs)?.mul(&gs)?);
        let rhs = left_riemann(&fs.mul(&hscale_derivative(&gs)?)?);
        let n = grid.cells();
        let bracket = fs.at_core(n) * gs.at_core(n) - fs.at_core(0) * gs.at_core(0);
        Ok((lhs + rhs - bracket).norm())
    };
    Ok(rule.judge(per_step(steps, residual)?))
}

/// First-order Taylor remainder `|f(a+s) − f(a) − □_h f(a)·s|` with `h = s/8`
/// for each offset `s`.
pub fn taylor_order_fit<F, V>(f: F, a: f64, offsets: &[f64]) -> Result<IdentityReport>
where
    F: Fn(f64) -> V + Sync,
    V: Into<Complex64>,
{
    let f = |t: f64| -> Complex64 { f(t).into() };
    let residual = |s: f64| {
        if !(s > 0.0) {
            return Err(Error::BadParams(format!("Taylor offset {s} must be positive")));
        }
        let d = hscale_at(&f, a, s / 8.0);
        Ok((f(a + s) - f(a) - d * s).norm())
    };
    Ok(PassRule::taylor().judge(per_step(offsets, residual)?))
}
