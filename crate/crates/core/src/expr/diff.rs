//! Symbolic differentiation.

use super::{Expr, Func, Var};

/// Exact derivative of `e` with respect to `wrt`, lightly simplified.
pub fn diff_expr(e: &Expr, wrt: Var) -> Expr {
    e.diff(wrt)
}

impl Expr {
    pub fn diff(&self, wrt: Var) -> Expr {
        if !self.depends_on(wrt) {
            return Expr::real(0.0);
        }
        match self {
            Expr::Const(_) => Expr::real(0.0),
            Expr::Var(v) => Expr::real(if *v == wrt { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(a.diff(wrt), b.diff(wrt)),
            Expr::Sub(a, b) => Expr::sub(a.diff(wrt), b.diff(wrt)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(wrt), b.simplify()),
                Expr::mul(a.simplify(), b.diff(wrt)),
            ),
            Expr::Div(a, b) => {
                let (a, b, da, db) = (a.simplify(), b.simplify(), a.diff(wrt), b.diff(wrt));
                if db.is_const(0.0) {
                    return Expr::div(da, b);
                }
                Expr::div(
                    Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                    Expr::pow(b, Expr::real(2.0)),
                )
            }
            Expr::Pow(a, b) => {
                let (base, expo) = (a.simplify(), b.simplify());
                if !expo.depends_on(wrt) {
                    // b·a^(b−1)·a'
                    let lowered = Expr::pow(base, Expr::sub(expo.clone(), Expr::real(1.0)));
                    return Expr::mul(Expr::mul(expo, lowered), a.diff(wrt));
                }
                let log_a = Expr::call(Func::Log, base.clone());
                let whole = Expr::pow(base.clone(), expo.clone());
                if !base.depends_on(wrt) {
                    return Expr::mul(whole, Expr::mul(log_a, b.diff(wrt)));
                }
                // a^b·(b'·log a + b·a'/a)
                let inner = Expr::add(
                    Expr::mul(b.diff(wrt), log_a),
                    Expr::div(Expr::mul(expo, a.diff(wrt)), base),
                );
                Expr::mul(whole, inner)
            }
            Expr::Neg(a) => Expr::neg(a.diff(wrt)),
            Expr::Call(f, a) => {
                let (u, du) = (a.simplify(), a.diff(wrt));
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Log => return Expr::div(du, u),
                    Func::Sqrt => {
                        return Expr::div(du, Expr::mul(Expr::real(2.0), Expr::call(Func::Sqrt, u)));
                    }
                };
                Expr::mul(outer, du)
            }
        }
    }
}
