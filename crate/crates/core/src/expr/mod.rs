//! Expression trees for Lagrangians `L(t, y, v1, …, vn)` and curves `ψ(t)`:
//! parsing, printing, complex evaluation and symbolic differentiation.

mod diff;
mod parse;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use diff::diff_expr;
pub use parse::{parse_curve, parse_expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Y,
    /// `v_k`, the k-th scale derivative slot, `k ≥ 1`.
    V(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => f.write_str("t"),
            Var::Y => f.write_str("y"),
            Var::V(1) => f.write_str("v"),
            Var::V(k) => write!(f, "v{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
            Func::Log => {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain("log of zero"));
                }
                z.ln()
            }
            Func::Sqrt => z.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Arguments at which an expression is evaluated.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub t: f64,
    pub y: Complex64,
    pub v: &'a [Complex64],
}

/// Partial derivatives of a Lagrangian with respect to `y` and each `v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradL {
    pub dl_dy: Expr,
    pub dl_dv: Vec<Expr>,
}

impl GradL {
    pub fn of(lagrangian: &Expr, order: usize) -> Self {
        Self {
            dl_dy: lagrangian.diff(Var::Y),
            dl_dv: (1..=order).map(|k| lagrangian.diff(Var::V(k))).collect(),
        }
    }
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl Expr {
    pub fn real(x: f64) -> Self {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(z) if *z == Complex64::new(c, 0.0))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(z) => Some(*z),
            _ => None,
        }
    }

    fn children(&self) -> (Option<&Expr>, Option<&Expr>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => (None, None),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                (Some(a), Some(b))
            }
            Expr::Neg(a) | Expr::Call(_, a) => (Some(a), None),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Var(w) => *w == v,
            _ => {
                let (l, r) = self.children();
                l.is_some_and(|e| e.depends_on(v)) || r.is_some_and(|e| e.depends_on(v))
            }
        }
    }

    /// Largest `k` such that `v_k` occurs, or 0.
    pub fn max_order(&self) -> usize {
        match self {
            Expr::Var(Var::V(k)) => *k,
            _ => {
                let (l, r) = self.children();
                l.map_or(0, Expr::max_order).max(r.map_or(0, Expr::max_order))
            }
        }
    }

    /// Complex evaluation with principal branches for `log`, `sqrt` and
    /// non-integer powers.
    pub fn eval(&self, p: &Point<'_>) -> Result<Complex64> {
        let z = self.eval_raw(p)?;
        if z.re.is_finite() && z.im.is_finite() {
            Ok(z)
        } else {
            Err(Error::Domain("non-finite result"))
        }
    }

    fn eval_raw(&self, p: &Point<'_>) -> Result<Complex64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::T) => Complex64::new(p.t, 0.0),
            Expr::Var(Var::Y) => p.y,
            Expr::Var(Var::V(k)) => *p.v.get(k - 1).ok_or(Error::OrderMismatch {
                index: *k,
                order: p.v.len(),
            })?,
            Expr::Add(a, b) => a.eval_raw(p)? + b.eval_raw(p)?,
            Expr::Sub(a, b) => a.eval_raw(p)? - b.eval_raw(p)?,
            Expr::Mul(a, b) => a.eval_raw(p)? * b.eval_raw(p)?,
            Expr::Div(a, b) => {
                let d = b.eval_raw(p)?;
                if d == ZERO {
                    return Err(Error::Domain("division by zero"));
                }
                a.eval_raw(p)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval_raw(p)?;
                let e = b.eval_raw(p)?;
                match integer_valued(e) {
                    Some(n) => {
                        if n < 0 && base == ZERO {
                            return Err(Error::Domain("division by zero"));
                        }
                        base.powi(n)
                    }
                    None if base == ZERO => {
                        if e.re > 0.0 {
                            ZERO
                        } else {
                            return Err(Error::Domain("zero raised to a non-positive power"));
                        }
                    }
                    None => base.powc(e),
                }
            }
            Expr::Neg(a) => -a.eval_raw(p)?,
            Expr::Call(f, a) => f.apply(a.eval_raw(p)?)?,
        })
    }

    /// Evaluate a curve that depends on `t` only.
    pub fn eval_t(&self, t: f64) -> Result<Complex64> {
        self.eval(&Point { t, y: ZERO, v: &[] })
    }

    /// Render with a custom spelling for variables.
    pub fn display_with<'a>(&'a self, var: &'a dyn Fn(Var) -> String) -> impl fmt::Display + 'a {
        Rendered { e: self, var }
    }
}

fn integer_valued(c: Complex64) -> Option<i32> {
    (c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 1024.0).then_some(c.re as i32)
}

fn integer_exponent(e: &Expr) -> Option<i32> {
    e.as_const().and_then(integer_valued)
}

// Printing. Precedence levels: sums 1, products 2, negation 3, powers 4, atoms 5.

fn const_prec(c: Complex64) -> u8 {
    if c.im == 0.0 {
        if c.re < 0.0 {
            3
        } else {
            5
        }
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            3
        } else if c.im == 1.0 {
            5
        } else {
            2
        }
    } else {
        1
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) => const_prec(*c),
        Expr::Var(_) | Expr::Call(..) => 5,
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // -0 prints as 0 so that the output reparses to the same text
    write!(f, "{}", if x == 0.0 { 0.0 } else { x })
}

fn write_imag(f: &mut fmt::Formatter<'_>, b: f64) -> fmt::Result {
    if b == 1.0 {
        f.write_str("i")
    } else {
        write_real(f, b)?;
        f.write_str("*i")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 {
            f.write_str("-")?;
        }
        write_real(f, c.re.abs())
    } else if c.re == 0.0 {
        if c.im < 0.0 {
            f.write_str("-")?;
        }
        write_imag(f, c.im.abs())
    } else {
        if c.re < 0.0 {
            f.write_str("-")?;
        }
        write_real(f, c.re.abs())?;
        f.write_str(if c.im < 0.0 { " - " } else { " + " })?;
        write_imag(f, c.im.abs())
    }
}

struct Rendered<'a> {
    e: &'a Expr,
    var: &'a dyn Fn(Var) -> String,
}

impl Rendered<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
        let r = Rendered { e, var: self.var };
        if parens {
            write!(f, "({r})")
        } else {
            write!(f, "{r}")
        }
    }

    fn binary(&self, f: &mut fmt::Formatter<'_>, a: &Expr, b: &Expr, op: &str, level: u8) -> fmt::Result {
        self.child(f, a, prec(a) < level)?;
        f.write_str(op)?;
        self.child(f, b, prec(b) <= level)
    }
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(v) => f.write_str(&(self.var)(*v)),
            Expr::Add(a, b) => self.binary(f, a, b, " + ", 1),
            Expr::Sub(a, b) => self.binary(f, a, b, " - ", 1),
            Expr::Mul(a, b) => self.binary(f, a, b, "*", 2),
            Expr::Div(a, b) => self.binary(f, a, b, "/", 2),
            Expr::Pow(a, b) => {
                self.child(f, a, prec(a) <= 4)?;
                f.write_str("^")?;
                self.child(f, b, prec(b) < 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.child(f, a, prec(a) < 3)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.child(f, a, false)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plain = |v: Var| v.to_string();
        Rendered { e: self, var: &plain }.fmt(f)
    }
}

// Smart constructors with light simplification.

fn fold(z: Complex64) -> Option<Expr> {
    (z.re.is_finite() && z.im.is_finite()).then_some(Expr::Const(z))
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => fold(x + y).unwrap_or_else(|| Expr::Add(a.into(), b.into())),
            _ if a.is_const(0.0) => b,
            _ if b.is_const(0.0) => a,
            _ => Expr::Add(a.into(), b.into()),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => fold(x - y).unwrap_or_else(|| Expr::Sub(a.into(), b.into())),
            _ if b.is_const(0.0) => a,
            _ if a.is_const(0.0) => Expr::neg(b),
            _ => Expr::Sub(a.into(), b.into()),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) || b.is_const(0.0) {
            return Expr::real(0.0);
        }
        if a.is_const(1.0) {
            return b;
        }
        if b.is_const(1.0) {
            return a;
        }
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => {
                fold(x * y).unwrap_or_else(|| Expr::Mul(Expr::Const(x).into(), Expr::Const(y).into()))
            }
            // c1*(c2*x) and (c1*x)*c2 collapse to (c1c2)*x
            (Expr::Const(x), Expr::Mul(p, q)) | (Expr::Mul(p, q), Expr::Const(x)) if p.as_const().is_some() => {
                let y = p.as_const().unwrap_or(ONE);
                match fold(x * y) {
                    Some(c) => Expr::mul(c, *q),
                    None => Expr::Mul(Expr::Const(x).into(), Expr::Mul(p, q).into()),
                }
            }
            (a, Expr::Const(x)) => Expr::mul(Expr::Const(x), a),
            (a, b) => Expr::Mul(a.into(), b.into()),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_const(1.0) {
            return a;
        }
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != ZERO => {
                fold(x / y).unwrap_or_else(|| Expr::Div(a.into(), b.into()))
            }
            _ if a.is_const(0.0) && !b.is_const(0.0) => Expr::real(0.0),
            _ => Expr::Div(a.into(), b.into()),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if b.is_const(1.0) {
            return a;
        }
        if b.is_const(0.0) {
            return Expr::real(1.0);
        }
        if let (Expr::Const(x), Some(n)) = (&a, integer_exponent(&b)) {
            if *x != ZERO || n > 0 {
                if let Some(c) = fold(x.powi(n)) {
                    return c;
                }
            }
        }
        Expr::Pow(a.into(), b.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(a.into()),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Expr::Const(x) = a {
            if let Ok(z) = f.apply(x) {
                if let Some(c) = fold(z) {
                    return c;
                }
            }
        }
        Expr::Call(f, a.into())
    }

    /// Rebuild the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::add(a.simplify(), b.simplify()),
            Expr::Sub(a, b) => Expr::sub(a.simplify(), b.simplify()),
            Expr::Mul(a, b) => Expr::mul(a.simplify(), b.simplify()),
            Expr::Div(a, b) => Expr::div(a.simplify(), b.simplify()),
            Expr::Pow(a, b) => Expr::pow(a.simplify(), b.simplify()),
            Expr::Neg(a) => Expr::neg(a.simplify()),
            Expr::Call(f, a) => Expr::call(*f, a.simplify()),
        }
    }
}
