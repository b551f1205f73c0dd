//! The `identities` command: Leibniz, Barrow, integration-by-parts and
//! Taylor residual ladders for catalogue or Weierstrass functions.

use std::path::Path;
use std::str::FromStr;

use scalecalc::holder::{weierstrass, Smooth, WeierstrassParams, DEFAULT_TERMS};
use scalecalc::identities::{barrow_residual, leibniz_residual, parts_residual, taylor_order_fit, PassRule};

use crate::report::{write_json, Identities, Identity, Num, Status};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    Smooth(Smooth),
    Weierstrass(WeierstrassParams),
}

impl Selector {
    fn eval(self, t: f64) -> f64 {
        match self {
            Selector::Smooth(s) => s.eval(t),
            Selector::Weierstrass(w) => weierstrass(w)(t),
        }
    }

    fn is_rough(self) -> bool {
        matches!(self, Selector::Weierstrass(_))
    }

    fn name(self) -> String {
        match self {
            Selector::Smooth(s) => s.to_string(),
            Selector::Weierstrass(w) => format!("weierstrass:{},{},{}", w.amp(), w.freq(), w.terms()),
        }
    }
}

impl FromStr for Selector {
    type Err = Failure;

    /// `sin`, `cos`, `exp`, `poly_k`, `quadratic_shift(c)`, or
    /// `weierstrass[:amp,freq[,terms]]` (default `0.5,3`).
    fn from_str(s: &str) -> Result<Self, Failure> {
        let s = s.trim();
        let bad = |msg: String| Failure::Input(format!("function `{s}`: {msg}"));
        let params = match s.split_once(':') {
            Some(("weierstrass", rest)) => Some(rest),
            None if s == "weierstrass" => Some("0.5,3"),
            _ => None,
        };
        let Some(params) = params else {
            return Smooth::from_str(s)
                .map(Selector::Smooth)
                .map_err(|e| bad(e.to_string()));
        };
        let nums: Vec<&str> = params.split(',').map(str::trim).collect();
        if !(2..=3).contains(&nums.len()) {
            return Err(bad("expected weierstrass:amp,freq[,terms]".into()));
        }
        let amp: f64 = nums[0]
            .parse()
            .map_err(|_| bad(format!("bad amplitude `{}`", nums[0])))?;
        let freq: f64 = nums[1]
            .parse()
            .map_err(|_| bad(format!("bad frequency `{}`", nums[1])))?;
        let terms = match nums.get(2) {
            Some(k) => k.parse().map_err(|_| bad(format!("bad term count `{k}`")))?,
            None => DEFAULT_TERMS,
        };
        WeierstrassParams::new(amp, freq, terms)
            .map(Selector::Weierstrass)
            .map_err(|e| bad(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    pub h0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Ladder {
    fn steps(self) -> Vec<f64> {
        (0..self.rungs).map(|k| self.h0 * self.ratio.powi(k as i32)).collect()
    }

    /// Dyadic for smooth inputs; triadic for a base-3 Weierstrass series,
    /// whose residuals are not monotone along powers of two.
    fn default_for(rough: bool) -> Self {
        if rough {
            Self {
                h0: 3f64.powi(-4),
                ratio: 1.0 / 3.0,
                rungs: 5,
            }
        } else {
            Self {
                h0: 2f64.powi(-6),
                ratio: 0.5,
                rungs: 5,
            }
        }
    }
}

impl FromStr for Ladder {
    type Err = Failure;

    /// `h0,ratio,rungs`.
    fn from_str(s: &str) -> Result<Self, Failure> {
        let bad = || Failure::Input(format!("ladder `{s}`: expected h0,ratio,rungs"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [h0, ratio, rungs] = parts[..] else {
            return Err(bad());
        };
        Ok(Self {
            h0: h0.parse().map_err(|_| bad())?,
            ratio: ratio.parse().map_err(|_| bad())?,
            rungs: rungs.parse().map_err(|_| bad())?,
        })
    }
}

/// `a,b`.
pub fn parse_interval(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Input(format!("interval `{s}`: expected a,b"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

pub struct Request {
    pub f: Selector,
    pub g: Option<Selector>,
    pub interval: Option<(f64, f64)>,
    pub ladder: Option<Ladder>,
}

pub fn run(req: Request, out: &Path, quiet: bool) -> Result<Status, Failure> {
    let (f, g) = (req.f, req.g.unwrap_or(req.f));
    let rough = f.is_rough() || g.is_rough();
    let (a, b) = req.interval.unwrap_or((0.0, 1.0));
    let ladder = req.ladder.unwrap_or_else(|| Ladder::default_for(rough));
    let steps = ladder.steps();
    let rule = if rough { PassRule::holder() } else { PassRule::smooth() };
    let fe = move |t: f64| f.eval(t);
    let ge = move |t: f64| g.eval(t);
    let input = |e: scalecalc::Error| Failure::Input(e.to_string());

    let leibniz = leibniz_residual(fe, ge, a, b, &steps, rule).map_err(input)?;
    let barrow = barrow_residual(fe, a, b, &steps, rule).map_err(input)?;
    let parts = parts_residual(fe, ge, a, b, &steps, rule).map_err(input)?;
    let mut warnings = Vec::new();
    let taylor = if f.is_rough() {
        warnings.push(format!("taylor skipped: {} is not twice differentiable", f.name()));
        None
    } else {
        Some(taylor_order_fit(fe, 0.5 * (a + b), &steps).map_err(input)?)
    };
    let pass = leibniz.pass && barrow.pass && parts.pass && taylor.as_ref().is_none_or(|t| t.pass);
    let status = if pass { Status::Ok } else { Status::Unverified };

    let report = Identities {
        command: "identities",
        status,
        exit_code: status.exit_code(),
        function: f.name(),
        with: g.name(),
        interval: [Num(a), Num(b)],
        ladder: steps.iter().map(|&h| Num(h)).collect(),
        leibniz: Identity::from(&leibniz),
        barrow: Identity::from(&barrow),
        parts: Identity::from(&parts),
        taylor: taylor.as_ref().map(Identity::from),
        warnings,
    };
    if !quiet {
        let line = |name: &str, r: &Identity| {
            let order = r.fitted_order.map_or("-".to_string(), |p| format!("{:.3}", p.0));
            println!("{name:8} order {order:>6}  {}", if r.pass { "pass" } else { "FAIL" });
        };
        line("leibniz", &report.leibniz);
        line("barrow", &report.barrow);
        line("parts", &report.parts);
        match &report.taylor {
            Some(t) => line("taylor", t),
            None => println!("taylor   skipped"),
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    write_json(&out.join("identities.json"), &report)?;
    Ok(status)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!("sin".parse::<Selector>().unwrap(), Selector::Smooth(Smooth::Sin));
        assert_eq!("poly_3".parse::<Selector>().unwrap(), Selector::Smooth(Smooth::Poly(3)));
        let w = "weierstrass:0.5,3".parse::<Selector>().unwrap();
        assert_eq!(
            w,
            Selector::Weierstrass(WeierstrassParams::new(0.5, 3.0, DEFAULT_TERMS).unwrap())
        );
        assert_eq!("weierstrass".parse::<Selector>().unwrap(), w);
        assert_eq!(w.name(), "weierstrass:0.5,3,30");
        for bad in [
            "tan",
            "weierstrass:0.5",
            "weierstrass:0.2,3",
            "poly_x",
            "weierstrass:a,b",
        ] {
            assert!(matches!(bad.parse::<Selector>(), Err(Failure::Input(_))), "{bad}");
        }
    }

    #[test]
    fn ladders_and_intervals() {
        let l: Ladder = "0.0625,0.5,4".parse().unwrap();
        assert_eq!(l.steps(), vec![0.0625, 0.03125, 0.015625, 0.0078125]);
        assert!("0.1,0.5".parse::<Ladder>().is_err());
        assert_eq!(parse_interval("0, 2").unwrap(), (0.0, 2.0));
        assert!(parse_interval("0").is_err());
    }

    #[test]
    fn smooth_and_rough_runs() {
        let dir = tempfile::tempdir().unwrap();
        let req = |f: &str| Request {
            f: f.parse().unwrap(),
            g: None,
            interval: None,
            ladder: None,
        };
        assert_eq!(run(req("sin"), dir.path(), true).unwrap(), Status::Ok);
        assert_eq!(run(req("weierstrass:0.5,3"), dir.path(), true).unwrap(), Status::Ok);
        let text = std::fs::read_to_string(dir.path().join("identities.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["taylor"].is_null());
        assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
    }
}
