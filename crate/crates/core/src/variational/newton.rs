//! Fixed-`T` solve: damped Gauss–Newton least squares on the real and
//! imaginary parts of the Euler–Lagrange residual at the nodes of `[a, T]`
//! together with the real parts of the regime's boundary conditions.
//!
//! Imaginary parts of the boundary conditions are `O(h)` by construction
//! (`Im □_h y = h/2·y″ + …`) and cannot all vanish with the interior
//! equations; they are reported but not imposed. Rows are scaled once by
//! their largest Jacobian entry at the starting point so that stencils of
//! different order carry comparable weight.
//!
//! The unknowns are real nodal values from `a − 2n·h` to `t_lo + 2n·h`, where
//! `t_lo` is the last node at or before `T`. When `T` falls between nodes the
//! candidate grid carries one extra node past the unknowns, filled by linear
//! extension, so that interpolation at `T` has both neighbours available.

use num_complex::Complex64;

use super::eval::{conditions, Fields, Kind};
use super::lsq::BandedLsq;
use super::{residual_report, Candidate, Solution, VariationalProblem};
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFn};

const MAX_ITER: usize = 200;
/// Relative forward-difference step for Jacobian columns.
const FD_STEP: f64 = 1e-7;
/// A Gauss–Newton direction no shorter than this (relative to `‖x‖∞`) along
/// which no step length lowers the objective is a genuine failure; shorter
/// ones mean the residual has reached its rounding floor, which for `□ⁿ`
/// stencils grows like `ε·h⁻²ⁿ`.
const ROUNDING_STEP: f64 = 1e-4;
/// Iterations without objective decrease accepted as convergence at the
/// rounding floor.
const STALL_LIMIT: usize = 3;

pub(crate) struct Window {
    pub grid: Grid,
    pub unknowns: usize,
    pub e_lo: usize,
    pub t_end: f64,
    span: usize,
}

impl Window {
    pub fn new(p: &VariationalProblem, t_end: f64) -> Result<Self> {
        let grid = p.candidate_grid(t_end)?;
        let (e_lo, _) = p.grid().locate_core(t_end)?;
        let span = 4 * p.order();
        Ok(Self {
            grid,
            unknowns: e_lo + span + 1,
            e_lo,
            t_end,
            span,
        })
    }

    pub fn values(&self, x: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        if self.grid.len() > self.unknowns {
            let n = x.len();
            v.push(Complex64::new(2.0 * x[n - 1] - x[n - 2], 0.0));
        }
        v
    }

    fn sampled(&self, x: &[f64]) -> Result<SampledFn> {
        SampledFn::new(self.grid, self.values(x))
    }

    /// Resize a previous solution to this window, extending linearly.
    fn adapt(&self, guess: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = guess.iter().copied().take(self.unknowns).collect();
        while x.len() < self.unknowns {
            let n = x.len();
            let next = if n >= 2 {
                2.0 * x[n - 1] - x[n - 2]
            } else {
                x.last().copied().unwrap_or(0.0)
            };
            x.push(next);
        }
        x
    }
}

/// Residual rows and the column window each row depends on.
struct System<'p> {
    p: &'p VariationalProblem,
    w: Window,
    /// `(first column, width)` per real row.
    rows: Vec<(usize, usize)>,
    n_el: usize,
    n_init: usize,
    /// Fixed row scaling.
    weights: Vec<f64>,
}

impl<'p> System<'p> {
    fn new(p: &'p VariationalProblem, w: Window, x0: &[f64]) -> Result<Self> {
        let n_el = w.e_lo + 1;
        let f = Fields::new(p, &w.sampled(x0)?)?;
        let conds = conditions(p, &f, w.t_end, false)?;
        let n_init = conds.iter().filter(|c| c.kind == Kind::Initial).count();
        let mut rows = Vec::new();
        for j in 0..n_el {
            rows.push((j, w.span + 1));
            rows.push((j, w.span + 1));
        }
        let last = w.unknowns - 1;
        for c in &conds {
            let (first, width) = match c.kind {
                Kind::Initial => (0, (w.span + 1).min(w.unknowns)),
                _ => (w.e_lo, last - w.e_lo + 1),
            };
            rows.push((first, width));
        }
        let mut sys = Self {
            p,
            weights: vec![1.0; rows.len()],
            w,
            rows,
            n_el,
            n_init,
        };
        let f0 = sys.residual(x0)?;
        let jac = sys.jacobian(x0, &f0)?;
        for (wt, row) in sys.weights.iter_mut().zip(&jac) {
            let m = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m > 0.0 {
                *wt = 1.0 / m;
            }
        }
        Ok(sys)
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = Fields::new(self.p, &self.w.sampled(x)?)?;
        let el = f.el()?;
        let mut out = Vec::with_capacity(self.rows.len());
        for j in 0..self.n_el {
            let z = el.at_core(j);
            out.push(z.re);
            out.push(z.im);
        }
        for c in conditions(self.p, &f, self.w.t_end, false)? {
            out.push(c.value.re);
        }
        for (v, wt) in out.iter_mut().zip(&self.weights) {
            *v *= wt;
        }
        debug_assert_eq!(out.len(), self.rows.len());
        Ok(out)
    }

    /// Real rows touched by column `u`.
    fn rows_of(&self, u: usize, out: &mut Vec<usize>) {
        out.clear();
        let span = self.w.span;
        let lo = u.saturating_sub(span);
        let hi = u.min(self.n_el - 1);
        for j in lo..=hi {
            out.push(2 * j);
            out.push(2 * j + 1);
        }
        let base = 2 * self.n_el;
        if u <= span {
            out.extend(base..base + self.n_init);
        }
        if u >= self.w.e_lo {
            out.extend(base + self.n_init..self.rows.len());
        }
    }

    /// Forward-difference Jacobian, columns grouped so that no two columns
    /// in a group share a row.
    fn jacobian(&self, x: &[f64], f0: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut jac: Vec<Vec<f64>> = self.rows.iter().map(|&(_, w)| vec![0.0; w]).collect();
        let stride = self.w.span + 2;
        let mut touched = Vec::new();
        let mut xp = x.to_vec();
        for r in 0..stride.min(x.len()) {
            let cols: Vec<usize> = (r..x.len()).step_by(stride).collect();
            let steps: Vec<f64> = cols.iter().map(|&u| FD_STEP * x[u].abs().max(1.0)).collect();
            for (&u, &s) in cols.iter().zip(&steps) {
                xp[u] = x[u] + s;
            }
            let fp = self.residual(&xp)?;
            for (&u, &s) in cols.iter().zip(&steps) {
                xp[u] = x[u];
                self.rows_of(u, &mut touched);
                for &row in &touched {
                    let (first, width) = self.rows[row];
                    if u >= first && u < first + width {
                        jac[row][u - first] = (fp[row] - f0[row]) / s;
                    }
                }
            }
        }
        Ok(jac)
    }

    fn step(&self, x: &[f64], f0: &[f64]) -> Result<Vec<f64>> {
        let jac = self.jacobian(x, f0)?;
        let band = self.rows.iter().map(|&(_, w)| w).max().unwrap_or(1);
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&r| self.rows[r].0);
        let mut lsq = BandedLsq::new(x.len(), band);
        for r in order {
            lsq.add_row(self.rows[r].0, &jac[r], -f0[r]);
        }
        lsq.solve()
    }
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::NonFinite { .. })
}

pub(crate) struct Inner {
    pub x: Vec<f64>,
    pub candidate: Candidate,
    pub iterations: usize,
}

fn default_guess(p: &VariationalProblem) -> f64 {
    use super::Regime::*;
    match p.regime() {
        A { y_a } | C { y_a, .. } | D { y_a, .. } | FixedTC { y_a, .. } | HigherOrder { y_a, .. } => *y_a,
        FixedTAB { y_a, .. } => y_a.unwrap_or(0.0),
        B => 0.0,
    }
}

/// Solve the fixed-`T` system for terminal point `t_end`.
pub(crate) fn inner_solve(p: &VariationalProblem, t_end: f64, guess: Option<&[f64]>) -> Result<Inner> {
    let w = Window::new(p, t_end)?;
    let mut x = match guess {
        Some(g) if !g.is_empty() => w.adapt(g),
        _ => vec![default_guess(p); w.unknowns],
    };
    let sys = System::new(p, w, &x)?;
    let tol = p.newton_tol();
    let mut f = sys.residual(&x)?;
    let mut phi = sq(&f);
    let mut stall = 0;
    for it in 1..=MAX_ITER {
        let delta = sys.step(&x, &f)?;
        let step_norm = sup(&delta);
        let scale = sup(&x).max(1.0);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= 1e-6 {
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            match sys.residual(&xt) {
                Ok(ft) => {
                    let phit = sq(&ft);
                    if phit <= phi {
                        accepted = Some((xt, ft, phit));
                        break;
                    }
                }
                Err(e) if recoverable(&e) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        let done = match accepted {
            Some((xt, ft, phit)) => {
                let improved = phit < phi * (1.0 - 1e-10);
                x = xt;
                f = ft;
                phi = phit;
                stall = if improved { 0 } else { stall + 1 };
                alpha * step_norm <= tol * scale || stall >= STALL_LIMIT
            }
            None if step_norm <= ROUNDING_STEP * scale => true,
            None => {
                return Err(Error::NoConvergence {
                    iterations: it,
                    last_step: step_norm,
                })
            }
        };
        if done {
            let candidate = Candidate::new(sys.w.sampled(&x)?, t_end);
            return Ok(Inner {
                x,
                candidate,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        last_step: f64::NAN,
    })
}

/// Solve the Euler–Lagrange system with the regime's boundary conditions at a
/// given terminal point and report every residual there.
pub fn solve_at(p: &VariationalProblem, t_end: f64) -> Result<Solution> {
    let inner = inner_solve(p, t_end, None)?;
    let report = residual_report(p, &inner.candidate)?;
    Ok(Solution {
        candidate: inner.candidate,
        report,
        iterations: inner.iterations,
    })
}

/// Solve a problem whose regime fixes `T`.
pub fn solve_fixed_t(p: &VariationalProblem) -> Result<Solution> {
    let t_end = p
        .regime()
        .fixed_t()
        .ok_or_else(|| Error::InvalidProblem(format!("regime {} leaves T free", p.regime().name())))?;
    solve_at(p, t_end)
}
