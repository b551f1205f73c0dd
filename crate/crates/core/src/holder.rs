//! Deterministic test functions: truncated Weierstrass series with a known
//! Hölder exponent and a small catalogue of smooth functions with their
//! exact derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_TERMS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassParams {
    amp: f64,
    freq: f64,
    terms: usize,
}

impl WeierstrassParams {
    pub fn new(amp: f64, freq: f64, terms: usize) -> Result<Self> {
        if !(amp > 0.0 && amp < 1.0) {
            return Err(Error::BadParams(format!("amplitude {amp} not in (0,1)")));
        }
        if !(freq.is_finite() && amp * freq >= 1.0) {
            return Err(Error::BadParams(format!(
                "amp·freq = {} < 1 gives a differentiable series",
                amp * freq
            )));
        }
        if terms == 0 {
            return Err(Error::BadParams("at least one term required".into()));
        }
        Ok(Self { amp, freq, terms })
    }

    pub fn amp(&self) -> f64 {
        self.amp
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// Hölder exponent `−ln amp / ln freq`.
    pub fn exponent(&self) -> f64 {
        -self.amp.ln() / self.freq.ln()
    }

    /// Bound on the tail dropped by truncating after `terms` terms.
    pub fn truncation_bound(&self) -> f64 {
        self.amp.powi(self.terms as i32 + 1) / (1.0 - self.amp)
    }
}

/// `t ↦ Σ_{k=0}^{K} amp^k cos(freq^k π t)`.
pub fn weierstrass(p: WeierstrassParams) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
    move |t| {
        let (mut a, mut w, mut s) = (1.0, PI, 0.0);
        for _ in 0..=p.terms {
            s += a * (w * t).cos();
            a *= p.amp;
            w *= p.freq;
        }
        s
    }
}

/// Closed-form smooth functions paired with their classical derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smooth {
    /// `t^k`
    Poly(u32),
    Sin,
    Cos,
    Exp,
    /// `½(t − c)²`
    QuadraticShift(f64),
}

impl Smooth {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Smooth::Poly(k) => t.powi(k as i32),
            Smooth::Sin => t.sin(),
            Smooth::Cos => t.cos(),
            Smooth::Exp => t.exp(),
            Smooth::QuadraticShift(c) => 0.5 * (t - c) * (t - c),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Smooth::Poly(0) => 0.0,
            Smooth::Poly(k) => k as f64 * t.powi(k as i32 - 1),
            Smooth::Sin => t.cos(),
            Smooth::Cos => -t.sin(),
            Smooth::Exp => t.exp(),
            Smooth::QuadraticShift(c) => t - c,
        }
    }

    pub fn func(self) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
        move |t| self.eval(t)
    }

    pub fn deriv(self) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
        move |t| self.derivative(t)
    }
}

impl fmt::Display for Smooth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smooth::Poly(k) => write!(f, "poly_{k}"),
            Smooth::Sin => f.write_str("sin"),
            Smooth::Cos => f.write_str("cos"),
            Smooth::Exp => f.write_str("exp"),
            Smooth::QuadraticShift(c) => write!(f, "quadratic_shift({c})"),
        }
    }
}

impl FromStr for Smooth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownName(s.to_string());
        match s {
            "sin" => return Ok(Smooth::Sin),
            "cos" => return Ok(Smooth::Cos),
            "exp" => return Ok(Smooth::Exp),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("poly_") {
            return k.parse().map(Smooth::Poly).map_err(|_| unknown());
        }
        if let Some(rest) = s.strip_prefix("quadratic_shift(") {
            let c = rest.strip_suffix(')').ok_or_else(unknown)?;
            let c: f64 = c.trim().parse().map_err(|_| unknown())?;
            if !c.is_finite() {
                return Err(unknown());
            }
            return Ok(Smooth::QuadraticShift(c));
        }
        Err(unknown())
    }
}

/// Look up a smooth catalogue entry by name.
pub fn smooth_catalogue(name: &str) -> Result<Smooth> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weierstrass_at_zero_is_geometric_sum() {
        let w = weierstrass(WeierstrassParams::new(0.5, 3.0, 30).unwrap());
        assert!((w(0.0) - 2.0 * (1.0 - 0.5f64.powi(31))).abs() < 1e-14);
        assert!((w(0.0) - 2.0).abs() < 2.0 * 0.5f64.powi(30));
    }

    #[test]
    fn weierstrass_period_two() {
        let w = weierstrass(WeierstrassParams::new(0.5, 3.0, 12).unwrap());
        for k in 0..50 {
            let t = -1.0 + 0.0371 * k as f64;
            assert!((w(t + 2.0) - w(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn weierstrass_params_validated() {
        assert!(WeierstrassParams::new(1.0, 3.0, 5).is_err());
        assert!(WeierstrassParams::new(0.5, 1.5, 5).is_err());
        assert!(WeierstrassParams::new(0.5, 3.0, 0).is_err());
        let p = WeierstrassParams::new(0.5, 3.0, 30).unwrap();
        assert!((p.exponent() - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn truncation_bound_holds() {
        let p = WeierstrassParams::new(0.5, 3.0, 10).unwrap();
        let q = WeierstrassParams::new(0.5, 3.0, 15).unwrap();
        let (wp, wq) = (weierstrass(p), weierstrass(q));
        for k in 0..=2000 {
            let t = -1.0 + k as f64 * 1e-3;
            assert!((wp(t) - wq(t)).abs() <= p.truncation_bound());
        }
    }

    #[test]
    fn catalogue_lookup() {
        let s = smooth_catalogue("sin").unwrap();
        assert_eq!((s.eval(0.3), s.derivative(0.3)), (0.3f64.sin(), 0.3f64.cos()));
        let p = smooth_catalogue("poly_2").unwrap();
        assert_eq!((p.eval(3.0), p.derivative(3.0)), (9.0, 6.0));
        let q = smooth_catalogue("quadratic_shift(1)").unwrap();
        assert_eq!((q.eval(0.0), q.derivative(0.0)), (0.5, -1.0));
        assert_eq!(smooth_catalogue("poly_0").unwrap().derivative(2.0), 0.0);
        assert!(matches!(smooth_catalogue("tan"), Err(Error::UnknownName(_))));
        assert!(matches!(
            smooth_catalogue("quadratic_shift(x)"),
            Err(Error::UnknownName(_))
        ));
        for name in ["poly_3", "cos", "exp", "quadratic_shift(-2.5)"] {
            assert_eq!(smooth_catalogue(name).unwrap().to_string(), name);
        }
    }
}
