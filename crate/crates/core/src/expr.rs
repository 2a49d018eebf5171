//! A small grammar of holomorphic expressions in `z`.
//!
//! Syntax: decimal literals, `i`, `pi`, `z`, `+ - * /`, `^` with a constant
//! exponent, parentheses and the functions `exp`, `log`, `sqrt` and
//! `pow(expr, const)`. A literal directly followed by `i` is imaginary
//! (`0.5i`). Expressions are evaluated exactly as written.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::mat2::{C64, I, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Z,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Pow(Box<Expr>, C64),
}

/// Branch and cut settings for `log` and non-integer `pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalCtx {
    /// Angle of the ray opposite to which logarithms are cut.
    pub anchor: f64,
    /// Minimum distance (in argument and modulus) from a cut.
    pub cut_margin: f64,
}

impl Default for EvalCtx {
    fn default() -> Self {
        EvalCtx {
            anchor: 0.0,
            cut_margin: 1e-8,
        }
    }
}

impl EvalCtx {
    fn log(&self, z: C64, w: C64) -> Result<C64> {
        let r = w.norm();
        if r <= self.cut_margin || !w.is_finite() {
            return Err(Error::eval(z, "logarithm at or near zero"));
        }
        let rot = w * C64::from_polar(1.0, -self.anchor);
        let arg = rot.arg();
        if std::f64::consts::PI - arg.abs() < self.cut_margin {
            return Err(Error::eval(z, "too close to the branch cut"));
        }
        Ok(C64::new(r.ln(), arg + self.anchor))
    }
}

fn integer_exponent(c: C64) -> Option<i32> {
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 64.0 {
        Some(c.re as i32)
    } else {
        None
    }
}

fn powi_value(w: C64, n: i32) -> C64 {
    let mut acc = ONE;
    let mut base = w;
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    if n < 0 {
        acc.inv()
    } else {
        acc
    }
}

fn powi_jet(j: &Jet, n: i32) -> Result<Jet> {
    let mut acc = Jet::constant(j.z, ONE);
    let mut base = *j;
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    if n < 0 {
        acc.recip()
    } else {
        Ok(acc)
    }
}

fn check_finite(z: C64, v: C64) -> Result<C64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::eval(z, "non-finite value"))
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse_all()
    }

    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn contains_z(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Z => true,
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Pow(a, _) => a.contains_z(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_z() || b.contains_z()
            }
        }
    }

    /// Value at `z`.
    pub fn value(&self, z: C64, ctx: &EvalCtx) -> Result<C64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Z => z,
            Expr::Neg(a) => -a.value(z, ctx)?,
            Expr::Add(a, b) => a.value(z, ctx)? + b.value(z, ctx)?,
            Expr::Sub(a, b) => a.value(z, ctx)? - b.value(z, ctx)?,
            Expr::Mul(a, b) => a.value(z, ctx)? * b.value(z, ctx)?,
            Expr::Div(a, b) => {
                let den = b.value(z, ctx)?;
                if den == ZERO {
                    return Err(Error::eval(z, "division by zero (pole)"));
                }
                a.value(z, ctx)? / den
            }
            Expr::Exp(a) => a.value(z, ctx)?.exp(),
            Expr::Log(a) => ctx.log(z, a.value(z, ctx)?)?,
            Expr::Pow(a, c) => {
                let w = a.value(z, ctx)?;
                match integer_exponent(*c) {
                    Some(n) => {
                        if n < 0 && w == ZERO {
                            return Err(Error::eval(z, "negative power of zero (pole)"));
                        }
                        powi_value(w, n)
                    }
                    None => (c * ctx.log(z, w)?).exp(),
                }
            }
        };
        check_finite(z, v)
    }

    /// Value and first three derivatives at `z`.
    pub fn jet(&self, z: C64, ctx: &EvalCtx) -> Result<Jet> {
        let j = match self {
            Expr::Const(c) => Jet::constant(z, *c),
            Expr::Z => Jet::variable(z),
            Expr::Neg(a) => -a.jet(z, ctx)?,
            Expr::Add(a, b) => a.jet(z, ctx)? + b.jet(z, ctx)?,
            Expr::Sub(a, b) => a.jet(z, ctx)? - b.jet(z, ctx)?,
            Expr::Mul(a, b) => a.jet(z, ctx)? * b.jet(z, ctx)?,
            Expr::Div(a, b) => (a.jet(z, ctx)? / b.jet(z, ctx)?)?,
            Expr::Exp(a) => a.jet(z, ctx)?.exp(),
            Expr::Log(a) => {
                let inner = a.jet(z, ctx)?;
                let w = inner.d0();
                let l = ctx.log(z, w)?;
                let r = w.inv();
                inner.compose([l, r, -r * r, 2.0 * r * r * r])
            }
            Expr::Pow(a, c) => {
                let inner = a.jet(z, ctx)?;
                match integer_exponent(*c) {
                    Some(n) => powi_jet(&inner, n)?,
                    None => {
                        let w = inner.d0();
                        let p = (c * ctx.log(z, w)?).exp();
                        let r = w.inv();
                        let c = *c;
                        inner.compose([
                            p,
                            c * p * r,
                            c * (c - 1.0) * p * r * r,
                            c * (c - 1.0) * (c - 2.0) * p * r * r * r,
                        ])
                    }
                }
            }
        };
        for v in j.d {
            check_finite(z, v)?;
        }
        Ok(j)
    }
}

/// Jet of `expr` at `z` with the default evaluation context.
pub fn eval_jet(expr: &Expr, z: C64) -> Result<Jet> {
    expr.jet(z, &EvalCtx::default())
}

fn fmt_c(c: &C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "({}*i)", c.im)
    } else {
        write!(f, "({}+{}*i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_c(c, f),
            Expr::Z => write!(f, "z"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Pow(a, c) => {
                write!(f, "pow({a},")?;
                fmt_c(c, f)?;
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
    lex_error: Option<Error>,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number literal '{text}'"),
            })?;
            let imag = i < bytes.len()
                && bytes[i] == b'i'
                && !(i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric());
            if imag {
                i += 1;
                out.push((start, Tok::Imag(v)));
            } else {
                out.push((start, Tok::Num(v)));
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_ascii_lowercase())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

impl Parser {
    fn new(src: &str) -> Self {
        match lex(src) {
            Ok(toks) => Parser {
                toks,
                pos: 0,
                len: src.len(),
                lex_error: None,
            },
            Err(e) => Parser {
                toks: Vec::new(),
                pos: 0,
                len: src.len(),
                lex_error: Some(e),
            },
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.err(format!("expected '{op}'"))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if self.toks.is_empty() {
            return self.err("empty expression");
        }
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return self.err("trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(fold_neg(self.unary()?));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat_op('^') {
            let exponent = self.unary()?;
            let c = self.constant_of(&exponent)?;
            return Ok(Expr::Pow(Box::new(base), c));
        }
        Ok(base)
    }

    fn constant_of(&self, e: &Expr) -> Result<C64> {
        if e.contains_z() {
            return self.err("exponent must not depend on z");
        }
        e.value(ZERO, &EvalCtx::default())
            .or_else(|_| self.err("exponent does not evaluate to a finite constant"))
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect_op('(')?;
        let mut args = vec![self.expr()?];
        while self.eat_op(',') {
            args.push(self.expr()?);
        }
        self.expect_op(')')?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Const(C64::new(v, 0.0)))
            }
            Tok::Imag(v) => {
                self.pos += 1;
                Ok(Expr::Const(C64::new(0.0, v)))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "z" => Ok(Expr::Z),
                    "i" => Ok(Expr::Const(I)),
                    "pi" => Ok(Expr::Const(C64::new(std::f64::consts::PI, 0.0))),
                    "exp" | "log" | "sqrt" | "pow" => {
                        let mut args = self.args()?;
                        let want = if name == "pow" { 2 } else { 1 };
                        if args.len() != want {
                            return self.err(format!("{name} takes {want} argument(s)"));
                        }
                        let a = Box::new(args.remove(0));
                        Ok(match name.as_str() {
                            "exp" => Expr::Exp(a),
                            "log" => Expr::Log(a),
                            "sqrt" => Expr::Pow(a, C64::new(0.5, 0.0)),
                            _ => {
                                let c = self.constant_of(&args[0])?;
                                Expr::Pow(a, c)
                            }
                        })
                    }
                    other => {
                        self.pos -= 1;
                        self.err(format!("unknown identifier '{other}'"))
                    }
                }
            }
            Tok::Op(c) => self.err(format!("unexpected '{c}'")),
        }
    }
}

fn fold_neg(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Neg(Box::new(other)),
    }
}
