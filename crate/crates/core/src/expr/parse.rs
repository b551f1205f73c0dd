//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' unary)?
//! base   := number | 'i' | var | fn '(' expr ')' | '(' expr ')'
//! var    := 't' | 'y' | 'v' | 'v' digits
//! fn     := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)` and `2^3^2` is `2^(3^2)`. Positions in errors are character
//! offsets from the start of the input.

use num_complex::Complex64;

use super::{Expr, Func, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn new(src: &str) -> Result<Self> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            if ch.is_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let x: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                toks.push((Tok::Num(x), start));
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
            } else if "+-*/^()".contains(ch) {
                toks.push((Tok::Op(ch), i));
                i += 1;
            } else {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
        toks.push((Tok::End, chars.len()));
        Ok(Self { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    /// Highest admissible `v` index; `None` means only `t` is allowed.
    order: Option<usize>,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: format!("expected {wanted}, found {}", describe(self.peek())),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(lhs.into(), self.term()?.into());
            } else if self.eat('-') {
                lhs = Expr::Sub(lhs.into(), self.term()?.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(lhs.into(), self.unary()?.into());
            } else if self.eat('/') {
                lhs = Expr::Div(lhs.into(), self.unary()?.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(self.unary()?.into()))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat('^') {
            Ok(Expr::Pow(base.into(), self.unary()?.into()))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::real(x))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.unexpected("`)`");
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return self.unexpected(&format!("`(` after `{name}`"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.unexpected("`)`");
                    }
                    return Ok(Expr::Call(f, arg.into()));
                }
                if name == "i" {
                    return Ok(Expr::Const(Complex64::new(0.0, 1.0)));
                }
                self.variable(name, pos).map(Expr::Var)
            }
            _ => self.unexpected("a number, variable, function or `(`"),
        }
    }

    fn variable(&self, name: String, pos: usize) -> Result<Var> {
        let unknown = |name: String| Error::UnknownVariable { name, pos };
        let var = match name.as_str() {
            "t" => return Ok(Var::T),
            "y" => Var::Y,
            "v" => Var::V(1),
            s => match s.strip_prefix('v').map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 && !s[1..].starts_with('0') => Var::V(k),
                _ => return Err(unknown(name)),
            },
        };
        match (self.order, var) {
            (None, _) => Err(unknown(name)),
            (Some(n), Var::V(k)) if k > n => Err(Error::OrderMismatch { index: k, order: n }),
            _ => Ok(var),
        }
    }
}

fn run(src: &str, order: Option<usize>) -> Result<Expr> {
    let lexer = Lexer::new(src)?;
    let mut p = Parser {
        toks: lexer.toks,
        at: 0,
        order,
    };
    if *p.peek() == Tok::End {
        return p.unexpected("an expression");
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.unexpected("an operator or end of input");
    }
    Ok(e)
}

/// Parse a Lagrangian over `t, y, v1..v_order` (`v` is `v1`).
pub fn parse_expr(src: &str, order: usize) -> Result<Expr> {
    if order == 0 {
        return Err(Error::BadParams("expression order must be at least 1".into()));
    }
    run(src, Some(order))
}

/// Parse a curve `ψ(t)`; only `t` may appear.
pub fn parse_curve(src: &str) -> Result<Expr> {
    run(src, None)
}
