//! Euler–Lagrange equation and endpoint conditions as text, with the
//! symbolic partial derivatives of `L` substituted.

use std::fmt;

use num_complex::Complex64;

use super::{Regime, VariationalProblem};
use crate::expr::{Expr, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub euler_lagrange: String,
    /// Natural boundary and transversality conditions.
    pub natural: Vec<String>,
    /// Prescribed data of the regime.
    pub boundary: Vec<String>,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Euler-Lagrange: {}", self.euler_lagrange)?;
        for c in &self.natural {
            writeln!(f, "natural: {c}")?;
        }
        for c in &self.boundary {
            writeln!(f, "boundary: {c}")?;
        }
        Ok(())
    }
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c as usize - '0' as usize])
        .collect()
}

/// `□ᵏ/□tᵏ`, with the exponent omitted for `k = 1`.
fn op(k: usize) -> String {
    if k == 1 {
        "□/□t".into()
    } else {
        format!("□{0}/□t{0}", superscript(k))
    }
}

/// `□ᵏy/□tᵏ`.
fn op_y(k: usize) -> String {
    if k == 1 {
        "□y/□t".into()
    } else {
        format!("□{0}y/□t{0}", superscript(k))
    }
}

fn plain(e: &Expr) -> String {
    e.to_string()
}

/// Render with every variable evaluated at the endpoint `at`.
fn at(e: &Expr, point: &str) -> String {
    let name = |v: Var| match v {
        Var::T => point.to_string(),
        other => format!("{other}({point})"),
    };
    let out = e.display_with(&name).to_string();
    out
}

fn num(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{z}")
    }
}

fn el_text(p: &VariationalProblem) -> String {
    let g = p.grad();
    if p.order() == 1 {
        let rhs = if g.dl_dv[0].is_const(0.0) {
            "0".to_string()
        } else {
            format!("{}({})", op(1), plain(&g.dl_dv[0]))
        };
        return format!("{} = {rhs}", plain(&g.dl_dy));
    }
    let mut s = String::new();
    if !g.dl_dy.is_const(0.0) {
        s.push_str(&plain(&g.dl_dy));
    }
    for (i, d) in g.dl_dv.iter().enumerate() {
        if d.is_const(0.0) {
            continue;
        }
        let k = i + 1;
        let minus = k % 2 == 1;
        let term = format!("{}({})", op(k), plain(d));
        push_term(&mut s, minus, &term);
    }
    if s.is_empty() {
        s.push('0');
    }
    format!("{s} = 0")
}

fn push_term(s: &mut String, minus: bool, term: &str) {
    match (s.is_empty(), minus) {
        (true, false) => s.push_str(term),
        (true, true) => {
            s.push('-');
            s.push_str(term);
        }
        (false, false) => {
            s.push_str(" + ");
            s.push_str(term);
        }
        (false, true) => {
            s.push_str(" - ");
            s.push_str(term);
        }
    }
}

/// `Σ_{k=i}^{n} (−1)^{k−i} □^{k−i}/□t^{k−i}(∂L/∂v_k)` at `T`.
fn natural_sum(p: &VariationalProblem, i: usize) -> String {
    let g = p.grad();
    let mut s = String::new();
    for k in i..=p.order() {
        let d = &g.dl_dv[k - 1];
        if d.is_const(0.0) {
            continue;
        }
        let term = if k == i {
            at(d, "T")
        } else {
            format!("[{}({})](T)", op(k - i), plain(d))
        };
        push_term(&mut s, (k - i) % 2 == 1, &term);
    }
    if s.is_empty() {
        s.push('0');
    }
    format!("{s} = 0")
}

/// Euler–Lagrange equation and the regime's endpoint conditions.
///
/// Variables appear by name (`t`, `y`, `v`, `v2`, …) in the equation and as
/// `y(T)`, `v(T)` at the terminal point.
pub fn el_symbolic(p: &VariationalProblem) -> Derivation {
    let g = p.grad();
    let l = p.lagrangian();
    let dv_t = || format!("{} = 0", at(&g.dl_dv[0], "T"));
    let dv_a = || format!("{} = 0", at(&g.dl_dv[0], "a"));
    let l_t = || format!("{} = 0", at(l, "T"));
    let mut natural = Vec::new();
    let mut boundary = Vec::new();
    match p.regime() {
        Regime::A { y_a } => {
            natural.push(dv_t());
            natural.push(l_t());
            boundary.push(format!("y(a) = {y_a}"));
        }
        Regime::B => {
            natural.push(dv_a());
            natural.push(dv_t());
            natural.push(l_t());
        }
        Regime::C { y_a, y_t } => {
            natural.push(format!("{} = ({})*v(T)", at(l, "T"), at(&g.dl_dv[0], "T")));
            boundary.push(format!("y(a) = {y_a}"));
            boundary.push(format!("y(T) = {y_t}"));
        }
        Regime::D { y_a, psi } => {
            natural.push(format!("{} = ({})*(v(T) - □ψ/□t(T))", at(l, "T"), at(&g.dl_dv[0], "T")));
            boundary.push(format!("y(a) = {y_a}"));
            boundary.push(format!("y(T) = ψ(T) = {}", at(psi, "T")));
        }
        Regime::FixedTAB { t_end, y_a } => {
            match y_a {
                Some(y) => boundary.push(format!("y(a) = {y}")),
                None => natural.push(dv_a()),
            }
            natural.push(dv_t());
            boundary.push(format!("T = {t_end}"));
        }
        Regime::FixedTC { t_end, y_a, y_t } => {
            boundary.push(format!("y(a) = {y_a}"));
            boundary.push(format!("y(T) = {y_t}"));
            boundary.push(format!("T = {t_end}"));
        }
        Regime::HigherOrder { y_a, derivs_a } => {
            for i in 1..=p.order() {
                natural.push(natural_sum(p, i));
            }
            natural.push(l_t());
            boundary.push(format!("y(a) = {y_a}"));
            for (k, z) in derivs_a.iter().enumerate() {
                boundary.push(format!("{}(a) = {}", op_y(k + 1), num(*z)));
            }
        }
    }
    Derivation {
        euler_lagrange: el_text(p),
        natural,
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1.0 / 64.0;

    #[test]
    fn regime_a_conditions() {
        let p = VariationalProblem::from_source("0.5*v^2 + y", 1, (0.0, 2.0), Regime::A { y_a: 0.5 }, H).unwrap();
        let d = el_symbolic(&p);
        assert_eq!(d.euler_lagrange, "1 = □/□t(v)");
        assert_eq!(d.natural, vec!["v(T) = 0", "0.5*v(T)^2 + y(T) = 0"]);
        assert_eq!(d.boundary, vec!["y(a) = 0.5"]);
    }

    #[test]
    fn higher_order_equation() {
        let r = Regime::HigherOrder {
            y_a: 0.125,
            derivs_a: vec![Complex64::new(0.0, 0.0)],
        };
        let p = VariationalProblem::from_source("0.5*v2^2 + y", 2, (0.0, 2.0), r, H).unwrap();
        let d = el_symbolic(&p);
        assert_eq!(d.euler_lagrange, "1 + □²/□t²(v2) = 0");
        assert_eq!(d.natural.len(), 3);
        assert_eq!(d.natural[0], "-[□/□t(v2)](T) = 0");
        assert_eq!(d.natural[1], "v2(T) = 0");
        assert_eq!(d.boundary[1], "□y/□t(a) = 0");
    }

    #[test]
    fn regime_d_mentions_curve_slope() {
        let p = VariationalProblem::from_source(
            "0.5*v^2 + 1",
            1,
            (0.0, 2.0),
            Regime::d_from_source(0.0, "2 - t").unwrap(),
            H,
        )
        .unwrap();
        let d = el_symbolic(&p);
        assert!(d.natural[0].contains("□ψ/□t"), "{}", d.natural[0]);
        assert_eq!(d.boundary[1], "y(T) = ψ(T) = 2 - T");
        let text = d.to_string();
        assert_eq!(text.lines().count(), 4);
    }
}
