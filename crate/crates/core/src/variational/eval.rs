//! Sampled derived quantities of a trajectory and the residuals built on them.

use num_complex::Complex64;

use super::{Candidate, NamedResidual, Regime, ResidualReport, VariationalProblem};
use crate::error::{Error, Result};
use crate::expr::{Expr, Point};
use crate::grid::{Grid, SampledFn};
use crate::scale_ops::{hscale_derivative, hscale_derivative_n};

/// `□ᵏy` for `k = 0..=n` and the Lagrangian's partial derivatives along `y`.
pub(crate) struct Fields<'p> {
    p: &'p VariationalProblem,
    /// `d[k] = □ᵏy`, on grids with halo `H − k`.
    pub d: Vec<SampledFn>,
    /// `∂L/∂vᵢ` for `i = 1..=n`, on the halo `H − n` grid.
    pub grad_v: Vec<SampledFn>,
}

impl<'p> Fields<'p> {
    pub fn new(p: &'p VariationalProblem, y: &SampledFn) -> Result<Self> {
        let n = p.order();
        let mut d = Vec::with_capacity(n + 1);
        d.push(y.clone());
        for k in 0..n {
            let next = hscale_derivative(&d[k])?;
            d.push(next);
        }
        let mut f = Self {
            p,
            d,
            grad_v: Vec::new(),
        };
        let grad_v = p.grad().dl_dv.iter().map(|e| f.eval(e)).collect::<Result<_>>()?;
        f.grad_v = grad_v;
        Ok(f)
    }

    /// Grid on which `L` and its partial derivatives are sampled.
    pub fn top_grid(&self) -> &Grid {
        self.d[self.p.order()].grid()
    }

    /// Evaluate `e(t, y, □y, …, □ⁿy)` at every node of the top grid.
    pub fn eval(&self, e: &Expr) -> Result<SampledFn> {
        let n = self.p.order();
        let grid = *self.top_grid();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        let mut out = Vec::with_capacity(grid.len());
        for m in 0..grid.len() {
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = self.d[k + 1].values()[m + n - k - 1];
            }
            let pt = Point {
                t: grid.node(m),
                y: self.d[0].values()[m + n],
                v: &v,
            };
            out.push(e.eval(&pt)?);
        }
        SampledFn::new(grid, out)
    }

    pub fn lagrangian(&self) -> Result<SampledFn> {
        self.eval(self.p.lagrangian())
    }

    /// `∂L/∂y + Σᵢ (−1)ⁱ □ⁱ(∂L/∂vᵢ)`, on the halo `H − 2n` grid.
    pub fn el(&self) -> Result<SampledFn> {
        let mut acc = self.eval(&self.p.grad().dl_dy)?;
        for (i, g) in self.grad_v.iter().enumerate() {
            let term = hscale_derivative_n(g, i + 1)?;
            acc = if i % 2 == 0 { acc.sub(&term)? } else { acc.add(&term)? };
        }
        Ok(acc)
    }

    /// `Σ_{k=i}^{n} (−1)^{k−i} □^{k−i}(∂L/∂v_k)`.
    pub fn natural_sum(&self, i: usize) -> Result<SampledFn> {
        let n = self.p.order();
        let mut acc = self.grad_v[i - 1].clone();
        for k in i + 1..=n {
            let term = hscale_derivative_n(&self.grad_v[k - 1], k - i)?;
            acc = if (k - i) % 2 == 1 {
                acc.sub(&term)?
            } else {
                acc.add(&term)?
            };
        }
        Ok(acc)
    }
}

/// Integral over `[a, t_end]` of a sampled integrand whose right halo may be
/// used when `t_end` lies slightly past the core.
pub(crate) fn integral_to(s: &SampledFn, t_end: f64) -> Result<Complex64> {
    let g = s.grid();
    let skip = g.halo();
    let cells = g.cells() + g.halo();
    let ext = Grid::new(g.a(), g.a() + cells as f64 * g.h(), g.h(), 0)?;
    let vals = s.values()[skip..].to_vec();
    SampledFn::new(ext, vals)?.quad_to(t_end)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Initial,
    Terminal,
    Transversality,
}

#[derive(Debug, Clone)]
pub(crate) struct Cond {
    pub label: String,
    pub value: Complex64,
    pub kind: Kind,
}

fn cond(label: impl Into<String>, value: Complex64, kind: Kind) -> Cond {
    Cond {
        label: label.into(),
        value,
        kind,
    }
}

/// Boundary conditions of the regime, evaluated on `f` at `t_end`.
/// The transversality condition is only evaluated when requested.
pub(crate) fn conditions(
    p: &VariationalProblem,
    f: &Fields<'_>,
    t_end: f64,
    transversality: bool,
) -> Result<Vec<Cond>> {
    use Kind::*;
    let y = &f.d[0];
    let y_at_a = y.at_core(0);
    let dv = |t: f64| f.grad_v[0].interp_linear(t);
    let lag_t = || f.lagrangian()?.interp_linear(t_end);
    let mut out = Vec::new();
    match p.regime() {
        Regime::A { y_a } => {
            out.push(cond("y(a) - y_a", y_at_a - y_a, Initial));
            out.push(cond("dL/dv(T)", dv(t_end)?, Terminal));
            if transversality {
                out.push(cond("L(T)", lag_t()?, Transversality));
            }
        }
        Regime::B => {
            out.push(cond("dL/dv(a)", f.grad_v[0].at_core(0), Initial));
            out.push(cond("dL/dv(T)", dv(t_end)?, Terminal));
            if transversality {
                out.push(cond("L(T)", lag_t()?, Transversality));
            }
        }
        Regime::C { y_a, y_t } => {
            out.push(cond("y(a) - y_a", y_at_a - y_a, Initial));
            out.push(cond("y(T) - y_T", y.interp_linear(t_end)? - y_t, Terminal));
            if transversality {
                let r = f.lagrangian()?.sub(&f.grad_v[0].mul(&f.d[1])?)?;
                out.push(cond("L(T) - dL/dv(T)*□y(T)", r.interp_linear(t_end)?, Transversality));
            }
        }
        Regime::D { y_a, psi } => {
            out.push(cond("y(a) - y_a", y_at_a - y_a, Initial));
            let psi_t = psi.eval_t(t_end)?;
            out.push(cond("y(T) - psi(T)", y.interp_linear(t_end)? - psi_t, Terminal));
            if transversality {
                let dpsi = psi_scale_derivative(psi, t_end, p.h())?;
                let r = f.lagrangian()?.sub(&f.grad_v[0].mul(&f.d[1])?)?;
                let value = r.interp_linear(t_end)? + dv(t_end)? * dpsi;
                out.push(cond("L(T) - dL/dv(T)*(□y(T) - □psi(T))", value, Transversality));
            }
        }
        Regime::FixedTAB { y_a, .. } => {
            match y_a {
                Some(y_a) => out.push(cond("y(a) - y_a", y_at_a - y_a, Initial)),
                None => out.push(cond("dL/dv(a)", f.grad_v[0].at_core(0), Initial)),
            }
            out.push(cond("dL/dv(T)", dv(t_end)?, Terminal));
        }
        Regime::FixedTC { y_a, y_t, .. } => {
            out.push(cond("y(a) - y_a", y_at_a - y_a, Initial));
            out.push(cond("y(T) - y_T", y.interp_linear(t_end)? - y_t, Terminal));
        }
        Regime::HigherOrder { y_a, derivs_a } => {
            out.push(cond("y(a) - y_a", y_at_a - y_a, Initial));
            for (k, target) in derivs_a.iter().enumerate() {
                let label = format!("□^{}y(a) - y{}_a", k + 1, k + 1);
                out.push(cond(label, f.d[k + 1].at_core(0) - target, Initial));
            }
            for i in 1..=p.order() {
                let s = f.natural_sum(i)?.interp_linear(t_end)?;
                out.push(cond(format!("natural_{i}(T)"), s, Terminal));
            }
            if transversality {
                out.push(cond("L(T)", lag_t()?, Transversality));
            }
        }
    }
    Ok(out)
}

/// `□_h ψ(t)` from the closed-form curve.
pub(crate) fn psi_scale_derivative(psi: &Expr, t: f64, h: f64) -> Result<Complex64> {
    let (l, c, r) = (psi.eval_t(t - h)?, psi.eval_t(t)?, psi.eval_t(t + h)?);
    Ok(((r - l) + Complex64::i() * (r - c - c + l)) / (2.0 * h))
}

fn fields<'p>(p: &'p VariationalProblem, c: &Candidate) -> Result<Fields<'p>> {
    p.check_candidate(c)?;
    Fields::new(p, &c.y)
}

/// Core nodes `t ≤ T` of the Euler–Lagrange residual.
fn el_upto(el: &SampledFn, t_end: f64) -> Result<SampledFn> {
    let core = el.restrict(0)?;
    let (k, _) = core.grid().locate_core(t_end)?;
    if k == 0 {
        return Err(Error::OutOfRange {
            t: t_end,
            lo: core.grid().a() + core.grid().h(),
            hi: core.grid().b(),
        });
    }
    let g = core.grid().truncated(k)?;
    SampledFn::new(g, core.values()[..=k].to_vec())
}

/// Node-wise `∂L/∂y + Σᵢ (−1)ⁱ □ⁱ_h(∂L/∂vᵢ)` on the nodes of `[a, T]`.
pub fn el_residual(p: &VariationalProblem, c: &Candidate) -> Result<SampledFn> {
    let f = fields(p, c)?;
    el_upto(&f.el()?, c.t_end)
}

/// `∫_a^T L(t, y, □_h y, …, □ⁿ_h y) dt` by the trapezoid rule.
pub fn functional_value(p: &VariationalProblem, c: &Candidate) -> Result<Complex64> {
    let f = fields(p, c)?;
    integral_to(&f.lagrangian()?, c.t_end)
}

/// Every boundary, natural and transversality condition of the regime.
pub fn natural_residuals(p: &VariationalProblem, c: &Candidate) -> Result<Vec<NamedResidual>> {
    let f = fields(p, c)?;
    Ok(named(conditions(p, &f, c.t_end, true)?))
}

fn named(conds: Vec<Cond>) -> Vec<NamedResidual> {
    conds
        .into_iter()
        .map(|c| NamedResidual {
            label: c.label,
            value: c.value,
        })
        .collect()
}

/// All residuals of a candidate and the verdict at the problem tolerance.
pub fn residual_report(p: &VariationalProblem, c: &Candidate) -> Result<ResidualReport> {
    let f = fields(p, c)?;
    let el_norm = el_upto(&f.el()?, c.t_end)?.sup_norm();
    let natural_conditions = named(conditions(p, &f, c.t_end, true)?);
    let functional_value = integral_to(&f.lagrangian()?, c.t_end)?;
    let tol = p.tol();
    let verdict = el_norm <= tol && natural_conditions.iter().all(|r| r.norm() <= tol);
    Ok(ResidualReport {
        t_end: c.t_end,
        el_norm,
        natural_conditions,
        functional_value,
        tol,
        verdict,
    })
}
