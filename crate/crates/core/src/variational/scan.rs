//! Free terminal point: scan the transversality residual over a range of `T`,
//! bracket its sign changes and refine each bracket by bisection.

use num_complex::Complex64;
use rayon::prelude::*;

use super::eval::{conditions, Fields, Kind};
use super::newton::{inner_solve, Inner};
use super::{residual_report, Solution, VariationalProblem};
use crate::error::{Error, Result};

/// Bisection stops once the bracket is this narrow.
const BISECT_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    /// Transversality residual after solving at `t`, or `None` when the
    /// fixed-`T` solve failed there.
    pub residual: Option<Complex64>,
}

#[derive(Debug, Clone)]
pub struct FreeTSolution {
    /// One solution per root, ordered by `T`.
    pub roots: Vec<Solution>,
    pub scan: Vec<ScanPoint>,
}

fn transversality_at(p: &VariationalProblem, t: f64, guess: Option<&[f64]>) -> Result<(Inner, Complex64)> {
    let inner = inner_solve(p, t, guess)?;
    let f = Fields::new(p, &inner.candidate.y)?;
    let r = conditions(p, &f, t, true)?
        .into_iter()
        .find(|c| c.kind == Kind::Transversality)
        .map(|c| c.value)
        .ok_or_else(|| {
            Error::InvalidProblem(format!("regime {} has no transversality condition", p.regime().name()))
        })?;
    Ok((inner, r))
}

fn scan_nodes(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            if k + 1 == m {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (m - 1) as f64
            }
        })
        .collect()
}

struct Side {
    t: f64,
    r: f64,
    x: Vec<f64>,
}

fn bisect(p: &VariationalProblem, mut lo: Side, mut hi: Side) -> Result<(f64, Vec<f64>)> {
    while hi.t - lo.t > BISECT_WIDTH * hi.t.abs().max(1.0) {
        let t = 0.5 * (lo.t + hi.t);
        let near = if t - lo.t <= hi.t - t { &lo.x } else { &hi.x };
        let (inner, r) = transversality_at(p, t, Some(near))?;
        let r = r.re;
        if r == 0.0 {
            return Ok((t, inner.x));
        }
        let side = Side { t, r, x: inner.x };
        if r.signum() == lo.r.signum() {
            lo = side;
        } else {
            hi = side;
        }
    }
    Ok(if lo.r.abs() <= hi.r.abs() {
        (lo.t, lo.x)
    } else {
        (hi.t, hi.x)
    })
}

/// Solve a free-`T` problem: every root of the real part of the
/// transversality residual on the scan range, each with its solved trajectory.
///
/// Fails with [`Error::IndeterminateT`] when the residual is below tolerance
/// on most of the scan, and with [`Error::NoRoot`] when it never changes sign.
pub fn solve_free_t(p: &VariationalProblem) -> Result<FreeTSolution> {
    if p.regime().fixed_t().is_some() {
        return Err(Error::InvalidProblem(format!("regime {} fixes T", p.regime().name())));
    }
    let (lo, hi) = p.t_scan();
    let ts = scan_nodes(lo, hi, p.scan_points());
    let solved: Vec<Result<(Inner, Complex64)>> = ts.par_iter().map(|&t| transversality_at(p, t, None)).collect();

    let scan: Vec<ScanPoint> = ts
        .iter()
        .zip(&solved)
        .map(|(&t, s)| ScanPoint {
            t,
            residual: s.as_ref().ok().map(|(_, r)| *r),
        })
        .collect();
    let total = scan.iter().filter(|s| s.residual.is_some()).count();
    if total == 0 {
        let first = solved.into_iter().find_map(|s| s.err());
        return Err(first.unwrap_or(Error::NoRoot { lo, hi }));
    }
    let flat = scan
        .iter()
        .filter(|s| s.residual.is_some_and(|r| r.norm() <= p.tol()))
        .count();
    if 2 * flat > total {
        return Err(Error::IndeterminateT { flat, total });
    }

    let sides: Vec<Option<Side>> = ts
        .iter()
        .zip(solved)
        .map(|(&t, s)| s.ok().map(|(inner, r)| Side { t, r: r.re, x: inner.x }))
        .collect();
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    for k in 0..sides.len() {
        let Some(s) = &sides[k] else { continue };
        if s.r == 0.0 {
            found.push((s.t, s.x.clone()));
            continue;
        }
        let Some(Some(next)) = sides.get(k + 1) else { continue };
        if next.r != 0.0 && next.r.signum() != s.r.signum() {
            let a = Side {
                t: s.t,
                r: s.r,
                x: s.x.clone(),
            };
            let b = Side {
                t: next.t,
                r: next.r,
                x: next.x.clone(),
            };
            if let Ok(root) = bisect(p, a, b) {
                found.push(root);
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoRoot { lo, hi });
    }

    let roots = found
        .into_iter()
        .map(|(t, x)| {
            let inner = inner_solve(p, t, Some(&x))?;
            let report = residual_report(p, &inner.candidate)?;
            Ok(Solution {
                candidate: inner.candidate,
                report,
                iterations: inner.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeTSolution { roots, scan })
}
