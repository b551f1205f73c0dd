//! First variation of the functional along `(η, δ)`: a symmetric difference
//! in `ε` and the closed-form integral, with admissibility checks and a
//! generator of random admissible directions.

use num_complex::Complex64;
use rand::Rng;

use super::eval::{integral_to, psi_scale_derivative, Fields};
use super::{Candidate, Regime, VariationalProblem};
use crate::error::{Error, Result};
use crate::grid::SampledFn;
use crate::scale_ops::hscale_derivative_n;

/// Both estimates of `d/dε ℐ[y + εη, T + εδ]` at `ε = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateauxEstimate {
    pub numeric: Complex64,
    pub analytic: Complex64,
    pub epsilon: f64,
}

impl GateauxEstimate {
    /// Larger of the two moduli.
    pub fn magnitude(&self) -> f64 {
        self.numeric.norm().max(self.analytic.norm())
    }

    /// The two estimates match within `max(1e-6, 1e-3·magnitude)`.
    pub fn agree(&self) -> bool {
        (self.numeric - self.analytic).norm() <= (1e-3 * self.magnitude()).max(1e-6)
    }
}

fn check_eta(p: &VariationalProblem, c: &Candidate, eta: &SampledFn) -> Result<()> {
    p.check_candidate(c)?;
    let (g, e) = (c.y.grid(), eta.grid());
    if !g.same_lattice(e) || g.cells() != e.cells() || g.halo() != e.halo() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Verify that `(η, δ)` respects the endpoint constraints of the regime,
/// linearised about `c`.
pub fn check_admissible(p: &VariationalProblem, c: &Candidate, eta: &SampledFn, delta: f64) -> Result<()> {
    check_eta(p, c, eta)?;
    let tol = 1e-6 * eta.sup_norm().max(1.0);
    let t = c.t_end;
    let bad = |what: String| Err(Error::InadmissibleVariation(what));
    let at_a = |k: usize| -> Result<Complex64> { Ok(hscale_derivative_n(eta, k)?.at_core(0)) };
    let pinned_a = |eta_a: Complex64| -> Result<()> {
        if eta_a.norm() > tol {
            return bad(format!("η(a) = {eta_a} must vanish"));
        }
        Ok(())
    };
    let fixed = |delta: f64| -> Result<()> {
        if delta != 0.0 {
            return bad(format!("δ = {delta} must vanish when T is fixed"));
        }
        Ok(())
    };
    let slope = || -> Result<f64> {
        let f = Fields::new(p, &c.y)?;
        Ok(f.d[1].interp_linear(t)?.re)
    };
    match p.regime() {
        Regime::A { .. } => pinned_a(eta.at_core(0)),
        Regime::B => Ok(()),
        Regime::C { .. } => {
            pinned_a(eta.at_core(0))?;
            let r = eta.interp_linear(t)? + slope()? * delta;
            if r.norm() > tol {
                return bad(format!("η(T) + □y(T)·δ = {r} must vanish"));
            }
            Ok(())
        }
        Regime::D { psi, .. } => {
            pinned_a(eta.at_core(0))?;
            let dpsi = psi_scale_derivative(psi, t, p.h())?.re;
            let r = eta.interp_linear(t)? + (slope()? - dpsi) * delta;
            if r.norm() > tol {
                return bad(format!("η(T) + (□y(T) − □ψ(T))·δ = {r} must vanish"));
            }
            Ok(())
        }
        Regime::FixedTAB { y_a, .. } => {
            fixed(delta)?;
            if y_a.is_some() {
                pinned_a(eta.at_core(0))?;
            }
            Ok(())
        }
        Regime::FixedTC { .. } => {
            fixed(delta)?;
            pinned_a(eta.at_core(0))?;
            let r = eta.interp_linear(t)?;
            if r.norm() > tol {
                return bad(format!("η(T) = {r} must vanish"));
            }
            Ok(())
        }
        Regime::HigherOrder { .. } => {
            for k in 0..p.order() {
                let v = at_a(k)?;
                if v.norm() > tol {
                    return bad(format!("□^{k}η(a) = {v} must vanish"));
                }
            }
            Ok(())
        }
    }
}

/// `ℐ` of a trajectory sampled on a candidate grid up to `t_end`, which may
/// reach into the right halo.
fn functional_at(p: &VariationalProblem, y: &SampledFn, t_end: f64) -> Result<Complex64> {
    integral_to(&Fields::new(p, y)?.lagrangian()?, t_end)
}

/// First variation of `ℐ` at `c` along `(η, δ)`.
///
/// The numeric estimate is `(ℐ[y + εη, T + εδ] − ℐ[y − εη, T − εδ]) / 2ε`
/// with `ε = 1e-5 / max(1, ‖η‖∞, |δ|)`; the analytic one is
/// `∫_a^T [∂L/∂y·η + Σᵢ ∂L/∂vᵢ·□ⁱη] dt + L(T)·δ`.
pub fn gateaux_derivative(
    p: &VariationalProblem,
    c: &Candidate,
    eta: &SampledFn,
    delta: f64,
) -> Result<GateauxEstimate> {
    check_admissible(p, c, eta, delta)?;
    let t = c.t_end;
    let eps = 1e-5 / eta.sup_norm().max(delta.abs()).max(1.0);

    let shifted = |s: f64| c.y.add(&eta.scale(Complex64::new(s, 0.0)));
    let plus = functional_at(p, &shifted(eps)?, t + eps * delta)?;
    let minus = functional_at(p, &shifted(-eps)?, t - eps * delta)?;
    let numeric = (plus - minus) / (2.0 * eps);

    let f = Fields::new(p, &c.y)?;
    let mut integrand = f.eval(&p.grad().dl_dy)?.mul(eta)?;
    for (i, g) in f.grad_v.iter().enumerate() {
        integrand = integrand.add(&g.mul(&hscale_derivative_n(eta, i + 1)?)?)?;
    }
    let analytic = integral_to(&integrand, t)? + f.lagrangian()?.interp_linear(t)? * delta;
    Ok(GateauxEstimate {
        numeric,
        analytic,
        epsilon: eps,
    })
}

/// `max(sup|η|, sup|Δη/h|)` over the core nodes.
fn c1_norm(eta: &SampledFn) -> f64 {
    let g = eta.grid();
    let v = &eta.values()[g.first_core()..=g.last_core()];
    let sup = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let slope = v.windows(2).map(|w| (w[1] - w[0]).norm() / g.h()).fold(0.0, f64::max);
    sup.max(slope)
}

/// A random admissible direction for `c`.
///
/// The shape is `u^{2n+2}·sin(ωu + φ)` with `u = (t − a)/(T − a)`, zero left
/// of `a`, so that `□ᵏη(a)` is negligible for `k < n`. When the regime ties
/// `η(T)` to `δ`, a multiple of `u^{2n+2}` is added to satisfy the constraint
/// on the sampled interpolant. The pair is then scaled so that
/// `max(sup|η|, sup|Δη/h|, |δ|)` over the core equals a random `A ∈ [0.2, 1]`;
/// the constraints are linear, so scaling keeps the pair admissible.
pub fn random_variation<R: Rng + ?Sized>(
    p: &VariationalProblem,
    c: &Candidate,
    rng: &mut R,
) -> Result<(SampledFn, f64)> {
    p.check_candidate(c)?;
    let (a, t) = (p.a(), c.t_end);
    let power = 2 * p.order() as i32 + 2;
    let amp = rng.gen_range(0.2..=1.0);
    let omega = rng.gen_range(1.0..=6.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut delta = rng.gen_range(-1.0..=1.0);
    let grid = *c.y.grid();
    let u = |s: f64| ((s - a) / (t - a)).max(0.0);
    let base = SampledFn::sample(|s| u(s).powi(power) * (omega * u(s) + phase).sin(), &grid)?;
    let bump = SampledFn::sample(|s| u(s).powi(power), &grid)?;

    // required η(T) as a multiple of δ, when the end is constrained
    let target = match p.regime() {
        Regime::FixedTAB { .. } => {
            delta = 0.0;
            None
        }
        Regime::FixedTC { .. } => {
            delta = 0.0;
            Some(0.0)
        }
        Regime::C { .. } | Regime::D { .. } => {
            let f = Fields::new(p, &c.y)?;
            let mut slope = f.d[1].interp_linear(t)?.re;
            if let Regime::D { psi, .. } = p.regime() {
                slope -= psi_scale_derivative(psi, t, p.h())?.re;
            }
            Some(-slope * delta)
        }
        _ => None,
    };
    let eta = match target {
        Some(want) => {
            let kappa = (want - base.interp_linear(t)?.re) / bump.interp_linear(t)?.re;
            base.add(&bump.scale(Complex64::new(kappa, 0.0)))?
        }
        None => base,
    };
    let norm = c1_norm(&eta).max(delta.abs());
    if norm == 0.0 {
        return Ok((eta, delta));
    }
    let k = amp / norm;
    Ok((eta.scale(Complex64::new(k, 0.0)), delta * k))
}
