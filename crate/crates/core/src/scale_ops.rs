//! Finite-step difference operators, the h-scale derivative, limit ladders
//! and Hölder exponent estimation.
//!
//! For a step `h` the h-scale derivative is
//!
//! ```text
//! □_h f(t) = ½[(Δ_h f + ∇_h f) + i(Δ_h f − ∇_h f)](t)
//! ```
//!
//! whose real part is the central difference quotient and whose imaginary
//! part is `(f(t+h) − 2f(t) + f(t−h)) / 2h`. Complex samples are handled
//! componentwise, which coincides with applying the formula to the complex
//! values directly, so the operator is complex-linear.
//!
//! Every operator here consumes one halo layer on each side of the grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{line_fit, LineFit};
use crate::grid::{Grid, SampledFn};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn consume_halo(f: &SampledFn, layers: usize) -> Result<Grid> {
    let g = f.grid();
    if g.halo() < layers {
        return Err(Error::HaloExhausted {
            needed: layers,
            available: g.halo(),
        });
    }
    Ok(g.with_halo(g.halo() - layers))
}

fn stencil(f: &SampledFn, op: impl Fn(Complex64, Complex64, Complex64) -> Complex64) -> Result<SampledFn> {
    let grid = consume_halo(f, 1)?;
    let v = f.values();
    let out = v.windows(3).map(|w| op(w[0], w[1], w[2])).collect();
    SampledFn::new(grid, out)
}

/// Δ_h f(t) = (f(t+h) − f(t)) / h.
pub fn forward_diff(f: &SampledFn) -> Result<SampledFn> {
    let inv_h = 1.0 / f.grid().h();
    stencil(f, |_, c, r| (r - c) * inv_h)
}

/// ∇_h f(t) = (f(t) − f(t−h)) / h.
pub fn backward_diff(f: &SampledFn) -> Result<SampledFn> {
    let inv_h = 1.0 / f.grid().h();
    stencil(f, |l, c, _| (c - l) * inv_h)
}

/// The h-scale derivative □_h f at every retained node.
pub fn hscale_derivative(f: &SampledFn) -> Result<SampledFn> {
    let half_inv_h = 0.5 / f.grid().h();
    stencil(f, |l, c, r| ((r - l) + I * (r - c - c + l)) * half_inv_h)
}

/// n-fold h-scale derivative; `n = 0` returns `f` unchanged.
pub fn hscale_derivative_n(f: &SampledFn, n: usize) -> Result<SampledFn> {
    consume_halo(f, n)?;
    let mut out = f.clone();
    for _ in 0..n {
        out = hscale_derivative(&out)?;
    }
    Ok(out)
}

/// □_h f at a single point, evaluating `f` directly at `t` and `t ± h`.
pub fn hscale_at<F, V>(f: &F, t: f64, h: f64) -> Complex64
where
    F: Fn(f64) -> V + ?Sized,
    V: Into<Complex64>,
{
    let l: Complex64 = f(t - h).into();
    let c: Complex64 = f(t).into();
    let r: Complex64 = f(t + h).into();
    ((r - l) + I * (r - c - c + l)) * (0.5 / h)
}

/// Geometric ladder of steps `h0, h0·r, h0·r², …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderConfig {
    pub h0: f64,
    pub ratio: f64,
    pub rungs: usize,
    /// Absolute per-node tolerance on the extrapolation remainder.
    pub tol: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            h0: 1.0 / 64.0,
            ratio: 0.5,
            rungs: 5,
            tol: 1e-6,
        }
    }
}

impl LadderConfig {
    pub fn new(h0: f64, ratio: f64, rungs: usize) -> Self {
        Self {
            h0,
            ratio,
            rungs,
            ..Self::default()
        }
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.rungs).map(|k| self.h0 * self.ratio.powi(k as i32)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.rungs < 3 {
            return Err(Error::InsufficientLadder {
                needed: 3,
                got: self.rungs,
            });
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::BadParams(format!("ladder ratio {} not in (0,1)", self.ratio)));
        }
        if !(self.h0 > 0.0 && self.h0 < 1.0) {
            return Err(Error::BadStep(self.h0));
        }
        Ok(())
    }
}

/// Samples of an h-parameterised family `g(·, h)` for each rung of a ladder,
/// all taken on the nodes of the coarsest grid.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub h_values: Vec<f64>,
    pub samples_per_h: Vec<SampledFn>,
}

#[derive(Debug, Clone)]
pub struct LimitEstimate {
    /// Extrapolated h → 0 limit per node.
    pub value: SampledFn,
    /// Size of the part that does not extrapolate: gap between the two
    /// highest-order extrapolants on the finest rungs.
    pub e_residual: Vec<f64>,
    pub converged: Vec<bool>,
}

impl LimitEstimate {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn max_residual(&self) -> f64 {
        self.e_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Polynomial extrapolation to `h = 0` through `(h_k, g_k)` (Neville tableau).
///
/// Returns the full-order estimate and the gap to the next-lower order on the
/// finest rungs. `hs` must be strictly decreasing and hold at least two values.
pub fn extrapolate(hs: &[f64], gs: &[Complex64]) -> (Complex64, f64) {
    debug_assert_eq!(hs.len(), gs.len());
    let m = hs.len();
    let mut row = gs.to_vec();
    let mut prev_top = row[m - 1];
    let mut top = row[m - 1];
    for j in 1..m {
        // row[i] holds the order-(j-1) extrapolant through rungs i-j+1..=i
        for i in (j..m).rev() {
            let hi = hs[i];
            let hlo = hs[i - j];
            row[i] = row[i] + (row[i] - row[i - 1]) * (hi / (hlo - hi));
        }
        prev_top = top;
        top = row[m - 1];
    }
    (top, (top - prev_top).norm())
}

/// Extrapolate the family `g(t, h)` to `h → 0` at every node of the coarsest
/// ladder grid over `[a, b]`.
pub fn limit_ladder<G>(family: G, a: f64, b: f64, config: &LadderConfig) -> Result<(Ladder, LimitEstimate)>
where
    G: Fn(f64, f64) -> Complex64 + Sync,
{
    config.validate()?;
    let coarse = Grid::new(a, b, config.h0, 0)?;
    let hs = config.steps();
    let samples: Vec<SampledFn> = hs
        .par_iter()
        .map(|&h| SampledFn::sample(|t| family(t, h), &coarse))
        .collect::<Result<_>>()?;
    let mut value = Vec::with_capacity(coarse.len());
    let mut e_residual = Vec::with_capacity(coarse.len());
    let mut gs = vec![Complex64::new(0.0, 0.0); hs.len()];
    for j in 0..coarse.len() {
        for (k, s) in samples.iter().enumerate() {
            gs[k] = s.values()[j];
        }
        let (v, r) = extrapolate(&hs, &gs);
        value.push(v);
        e_residual.push(r);
    }
    let converged = e_residual.iter().map(|&r| r <= config.tol).collect();
    let estimate = LimitEstimate {
        value: SampledFn::new(coarse, value)?,
        e_residual,
        converged,
    };
    Ok((
        Ladder {
            h_values: hs,
            samples_per_h: samples,
        },
        estimate,
    ))
}

/// Limit-ladder estimate of the scale derivative of a plain function.
pub fn scale_derivative_ladder<F, V>(f: F, a: f64, b: f64, config: &LadderConfig) -> Result<LimitEstimate>
where
    F: Fn(f64) -> V + Sync,
    V: Into<Complex64>,
{
    limit_ladder(|t, h| hscale_at(&f, t, h), a, b, config).map(|(_, est)| est)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub fit_r2: f64,
}

/// Dyadic scales `2^-coarsest ..= 2^-finest`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicScales {
    pub coarsest: u32,
    pub finest: u32,
}

impl Default for DyadicScales {
    fn default() -> Self {
        Self {
            coarsest: 4,
            finest: 12,
        }
    }
}

impl DyadicScales {
    pub fn count(&self) -> usize {
        (self.finest.saturating_sub(self.coarsest) + 1) as usize
    }
}

/// Smallest exponent reported for a nonincreasing oscillation profile.
const ALPHA_FLOOR: f64 = 1e-6;

/// Fit `osc(s) ≈ C s^α`, where `osc(s)` is the largest increment
/// `|f(t+s) − f(t)|` over a lattice of spacing `2^-(finest+1)` in `[a, b]`.
pub fn estimate_holder_exponent<F, V>(f: F, a: f64, b: f64, scales: DyadicScales) -> Result<HolderEstimate>
where
    F: Fn(f64) -> V,
    V: Into<Complex64>,
{
    if scales.finest < scales.coarsest || scales.count() < 4 {
        return Err(Error::InsufficientLadder {
            needed: 4,
            got: scales.count(),
        });
    }
    if !(a < b) {
        return Err(Error::BadInterval { a, b });
    }
    let d = 0.5f64.powi(scales.finest as i32 + 1);
    let n = ((b - a) / d).floor() as usize;
    let vals: Vec<Complex64> = (0..=n).map(|j| f(a + j as f64 * d).into()).collect();
    if let Some(j) = vals.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite { t: a + j as f64 * d });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in scales.coarsest..=scales.finest {
        let step = 1usize << (scales.finest + 1 - k);
        if step > n {
            continue;
        }
        let osc = vals[step..]
            .iter()
            .zip(&vals)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        if osc > 0.0 {
            xs.push(-(k as f64) * std::f64::consts::LN_2);
            ys.push(osc.ln());
        }
    }
    if xs.is_empty() {
        return Err(Error::DegenerateFit("oscillation vanishes at every scale"));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two scales with nonzero oscillation"));
    }
    let LineFit { slope, intercept, r2 } = line_fit(&xs, &ys);
    Ok(HolderEstimate {
        alpha_hat: slope.clamp(ALPHA_FLOOR, 1.0),
        c_hat: intercept.exp(),
        fit_r2: r2,
    })
}

/// Log–log slope of `max_node |□_h f|` against `h` over the given steps,
/// sampling the core nodes of `[a, b]` at each step.
pub fn blowup_slope<F, V>(f: F, a: f64, b: f64, steps: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> V + Sync,
    V: Into<Complex64>,
{
    let maxima: Vec<f64> = steps
        .par_iter()
        .map(|&h| {
            let g = Grid::new(a, b, h, 1)?;
            let d = hscale_derivative(&SampledFn::sample(&f, &g)?)?;
            Ok(d.sup_norm())
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
    Ok(line_fit(&xs, &ys).slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use crate::holder::{weierstrass, WeierstrassParams};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_sided_differences() {
        let g = make_grid(0.0, 2.0, 0.1, 1).unwrap();
        let sq = sample(|t| t * t, &g).unwrap();
        let fwd = forward_diff(&sq).unwrap();
        let bwd = backward_diff(&sq).unwrap();
        // node t = 1 is core index 10
        assert_relative_eq!(fwd.at_core(10).re, 2.1, epsilon = 1e-12);
        assert_relative_eq!(bwd.at_core(10).re, 1.9, epsilon = 1e-12);
        let lin = sample(|t| t, &g).unwrap();
        assert!(forward_diff(&lin)
            .unwrap()
            .values()
            .iter()
            .all(|v| (v.re - 1.0).abs() < 1e-12));
        assert!(backward_diff(&lin)
            .unwrap()
            .values()
            .iter()
            .all(|v| (v.re - 1.0).abs() < 1e-12));
        let k = sample(|_| 4.0, &g).unwrap();
        assert!(forward_diff(&k).unwrap().sup_norm() == 0.0);
        assert!(backward_diff(&k).unwrap().sup_norm() == 0.0);
        let bare = sample(|t| t, &make_grid(0.0, 1.0, 0.5, 0).unwrap()).unwrap();
        assert!(matches!(forward_diff(&bare), Err(Error::HaloExhausted { .. })));
        assert!(matches!(hscale_derivative(&bare), Err(Error::HaloExhausted { .. })));
    }

    #[test]
    fn scale_derivative_pins() {
        let g = make_grid(0.0, 2.0, 0.1, 1).unwrap();
        let sq = sample(|t| t * t, &g).unwrap();
        let d = hscale_derivative(&sq).unwrap();
        let at1 = d.at_core(10);
        assert_relative_eq!(at1.re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(at1.im, 0.1, epsilon = 1e-12);
        let lin = sample(|t| t, &g).unwrap();
        for v in hscale_derivative(&lin).unwrap().values() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
        let k = sample(|_| -7.5, &g).unwrap();
        assert_eq!(hscale_derivative(&k).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn higher_orders() {
        let g = make_grid(0.0, 1.0, 1.0 / 16.0, 3).unwrap();
        let sq = sample(|t| t * t, &g).unwrap();
        assert_eq!(hscale_derivative_n(&sq, 0).unwrap(), sq);
        let d2 = hscale_derivative_n(&sq, 2).unwrap();
        for v in d2.values() {
            assert!((v - c(2.0, 0.0)).norm() < 1e-10);
        }
        let k = sample(|_| 1.5, &g).unwrap();
        assert_eq!(hscale_derivative_n(&k, 3).unwrap().sup_norm(), 0.0);
        assert!(matches!(hscale_derivative_n(&k, 4), Err(Error::HaloExhausted { .. })));
        let d1 = hscale_derivative_n(&sq, 1).unwrap();
        assert_eq!(d1, hscale_derivative(&sq).unwrap());
    }

    #[test]
    fn real_and_imaginary_parts_are_central_and_second_differences() {
        let h = 0.05;
        let g = make_grid(0.0, 1.0, h, 1).unwrap();
        let f = |t: f64| (3.0 * t).sin() + t.powi(3);
        let d = hscale_derivative(&sample(f, &g).unwrap()).unwrap();
        for (j, t) in d.grid().nodes().enumerate() {
            let central = (f(t + h) - f(t - h)) / (2.0 * h);
            let second = (f(t + h) - 2.0 * f(t) + f(t - h)) / (2.0 * h);
            assert_relative_eq!(d.values()[j].re, central, epsilon = 1e-9);
            assert_relative_eq!(d.values()[j].im, second, epsilon = 1e-9);
        }
    }

    #[test]
    fn ladder_on_quadratic() {
        let cfg = LadderConfig::new(0.1, 0.5, 3);
        let est = scale_derivative_ladder(|t| t * t, 0.0, 1.0, &cfg).unwrap();
        for (j, t) in est.value.grid().nodes().enumerate() {
            assert!((est.value.values()[j] - c(2.0 * t, 0.0)).norm() < 1e-9);
            assert!(est.e_residual[j] <= 1e-10);
        }
        assert!(est.all_converged());
    }

    #[test]
    fn ladder_on_smooth_recovers_derivative() {
        let est = scale_derivative_ladder(f64::sin, 0.0, 1.0, &LadderConfig::default()).unwrap();
        for (j, t) in est.value.grid().nodes().enumerate() {
            assert!((est.value.values()[j] - c(t.cos(), 0.0)).norm() < 1e-8);
        }
        assert!(est.all_converged());
    }

    #[test]
    fn ladder_on_weierstrass_does_not_converge() {
        let w = weierstrass(WeierstrassParams::new(0.5, 3.0, 30).unwrap());
        let est = scale_derivative_ladder(w, 0.0, 1.0, &LadderConfig::default()).unwrap();
        let failed = est.converged.iter().filter(|c| !**c).count();
        assert!(
            failed * 10 >= est.converged.len() * 9,
            "{failed} of {}",
            est.converged.len()
        );
    }

    #[test]
    fn ladder_needs_three_rungs() {
        let cfg = LadderConfig::new(0.1, 0.5, 2);
        assert!(matches!(
            scale_derivative_ladder(|t| t, 0.0, 1.0, &cfg),
            Err(Error::InsufficientLadder { .. })
        ));
    }

    #[test]
    fn holder_estimates() {
        let w = weierstrass(WeierstrassParams::new(0.5, 3.0, 30).unwrap());
        let est = estimate_holder_exponent(w, 0.0, 1.0, DyadicScales::default()).unwrap();
        assert!((est.alpha_hat - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{est:?}");
        let root = estimate_holder_exponent(|t: f64| t.abs().sqrt(), -1.0, 1.0, DyadicScales::default()).unwrap();
        assert!((root.alpha_hat - 0.5).abs() < 0.05);
        let lin = estimate_holder_exponent(|t| t, 0.0, 1.0, DyadicScales::default()).unwrap();
        assert_eq!(lin.alpha_hat, 1.0);
        assert!(matches!(
            estimate_holder_exponent(|_| 1.0, 0.0, 1.0, DyadicScales::default()),
            Err(Error::DegenerateFit(_))
        ));
        let few = DyadicScales { coarsest: 4, finest: 6 };
        assert!(matches!(
            estimate_holder_exponent(|t| t, 0.0, 1.0, few),
            Err(Error::InsufficientLadder { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn complex_linear(c1r in -3.0f64..3.0, c1i in -3.0f64..3.0, c2r in -3.0f64..3.0, c2i in -3.0f64..3.0,
                              p in 0.5f64..4.0) {
                let g = make_grid(0.0, 1.0, 1.0 / 32.0, 1).unwrap();
                let f = sample(|t: f64| c((p * t).sin(), t * t), &g).unwrap();
                let k = sample(|t: f64| c((p * t).exp(), -t), &g).unwrap();
                let (c1, c2) = (c(c1r, c1i), c(c2r, c2i));
                let combo = f.scale(c1).add(&k.scale(c2)).unwrap();
                let lhs = hscale_derivative(&combo).unwrap();
                let rhs = hscale_derivative(&f).unwrap().scale(c1)
                    .add(&hscale_derivative(&k).unwrap().scale(c2)).unwrap();
                let scale = lhs.sup_norm().max(1.0);
                prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-12 * scale);
            }
        }
    }
}
