//! A-posteriori check of the regularity hypotheses on a solved trajectory:
//! for random directions `η`, the integrals `∫ □_s(∂L/∂vᵢ·η) dt` taken with
//! steps `s = 16h, 8h, …, h` should extrapolate cleanly to `s → 0`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::Fields;
use super::{random_variation, Candidate, VariationalProblem};
use crate::error::Result;
use crate::grid::SampledFn;
use crate::scale_ops::{extrapolate, LadderConfig};

const DIRECTIONS: usize = 5;
const MULTIPLES: [usize; 5] = [16, 8, 4, 2, 1];

/// Trapezoid integral over core nodes `lo..=hi` of `□_{k·h} g`.
fn ladder_integral(g: &SampledFn, k: usize, lo: usize, hi: usize) -> Complex64 {
    let grid = g.grid();
    let h = grid.h();
    let v = g.values();
    let off = grid.halo();
    let d = |m: usize| {
        let (l, c, r) = (v[off + m - k], v[off + m], v[off + m + k]);
        ((r - l) + Complex64::i() * (r - c - c + l)) / (2.0 * k as f64 * h)
    };
    let mut s = (d(lo) + d(hi)) * 0.5;
    for m in lo + 1..hi {
        s += d(m);
    }
    s * h
}

/// Warnings for every `(i, η)` whose ladder does not settle within the
/// default ladder tolerance (relative to the limit when that exceeds one).
/// Never fails on a poor ladder; errors only propagate evaluation failures.
pub fn hypothesis_warnings(p: &VariationalProblem, c: &Candidate, seed: u64) -> Result<Vec<String>> {
    let f = Fields::new(p, &c.y)?;
    let (last, _) = p.grid().locate_core(c.t_end)?;
    let margin = MULTIPLES[0];
    if last < 2 * margin + 2 {
        return Ok(vec![format!(
            "interval [a, T] spans {last} cells, too few for a {margin}h ladder; hypotheses not checked"
        )]);
    }
    let (lo, hi) = (margin, last - margin);
    let tol = LadderConfig::default().tol;
    let hs: Vec<f64> = MULTIPLES.iter().map(|&k| k as f64 * p.h()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for draw in 0..DIRECTIONS {
        let (eta, _) = random_variation(p, c, &mut rng)?;
        for (i, g) in f.grad_v.iter().enumerate() {
            let prod = g.mul(&eta)?;
            let gs: Vec<Complex64> = MULTIPLES.iter().map(|&k| ladder_integral(&prod, k, lo, hi)).collect();
            let (limit, gap) = extrapolate(&hs, &gs);
            if gap > tol * limit.norm().max(1.0) {
                let v = if p.order() == 1 {
                    "v".to_string()
                } else {
                    format!("v{}", i + 1)
                };
                out.push(format!(
                    "direction {draw}: ladder for ∫□(∂L/∂{v}·η) did not settle (gap {gap:.2e}, limit {limit:.6e})"
                ));
            }
        }
    }
    Ok(out)
}
