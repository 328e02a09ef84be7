//! Scalar expressions in `t` and `x` with exact second-order derivatives.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | 't' | 'x' | 'pi' | 'e' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | tan | exp | log | sqrt
//! ```

mod jet;

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

pub use jet::Jet2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(NamedConst),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("function `{name}` at offset {offset} takes 1 argument, got {got}")]
    Arity { offset: usize, name: String, got: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdent { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("domain violation in `{subexpr}`: {msg}")]
pub struct EvalError {
    pub subexpr: String,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
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
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError::Syntax { offset: start, msg: format!("malformed number `{text}`") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '·' || src[i..].starts_with('·') {
            // U+00B7 middle dot is accepted as multiplication
            out.push((i, Tok::Op('*')));
            i += '·'.len_utf8();
        } else {
            let ch = src[i..].chars().next().unwrap();
            return Err(ParseError::Syntax { offset: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(ParseError::Syntax { offset: self.offset(), msg: format!("expected `{op}`") })
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat_op('+') {
                BinOp::Add
            } else if self.eat_op('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_op('*') {
                BinOp::Mul
            } else if self.eat_op('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat_op('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let tok = match self.toks.get(self.pos) {
            Some((_, t)) => t.clone(),
            None => return Err(ParseError::Syntax { offset, msg: "unexpected end of input".into() }),
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(ParseError::Syntax { offset, msg: format!("unexpected `{c}`") }),
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var(Var::T)),
                "x" => Ok(Expr::Var(Var::X)),
                "pi" => Ok(Expr::Const(NamedConst::Pi)),
                "e" => Ok(Expr::Const(NamedConst::E)),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ParseError::UnknownIdent { offset, name: name.clone() })?;
                    self.expect_op('(')?;
                    let mut args = vec![self.sum()?];
                    while self.eat_op(',') {
                        args.push(self.sum()?);
                    }
                    self.expect_op(')')?;
                    if args.len() != 1 {
                        return Err(ParseError::Arity { offset, name, got: args.len() });
                    }
                    Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
                }
            },
        }
    }
}

/// Parses `src` into an expression tree.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax { offset: p.offset(), msg: "trailing input".into() });
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Const(NamedConst::Pi) => f.write_str("pi"),
            Expr::Const(NamedConst::E) => f.write_str("e"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expr {
    /// Integer value of a constant exponent such as `2`, `-3` or `3^2`.
    fn integer_literal(&self) -> Option<i32> {
        if !self.is_constant() {
            return None;
        }
        let v = self.eval(0.0f64, 0.0).ok()?;
        (v.fract() == 0.0 && v.abs() <= 1024.0).then_some(v as i32)
    }

    fn is_constant(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// True when the expression does not reference `x`.
    pub fn is_x_free(&self) -> bool {
        match self {
            Expr::Var(Var::X) => false,
            Expr::Num(_) | Expr::Var(Var::T) | Expr::Const(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_x_free(),
            Expr::Bin(_, a, b) => a.is_x_free() && b.is_x_free(),
        }
    }

    /// Plain value at `(t, x)`.
    pub fn eval<T: Real>(&self, t: T, x: T) -> Result<T, EvalError> {
        self.eval_jet(t, x).map(|j| j.v)
    }

    /// Value and all partial derivatives up to second order at `(t, x)`.
    pub fn eval_jet<T: Real>(&self, t: T, x: T) -> Result<Jet2<T>, EvalError> {
        let fail = |e: &Expr, msg: &str| EvalError { subexpr: e.to_string(), msg: msg.to_string() };
        let out = match self {
            Expr::Num(v) => Jet2::constant(T::lit(*v)),
            Expr::Var(Var::T) => Jet2::var_t(t),
            Expr::Var(Var::X) => Jet2::var_x(x),
            Expr::Const(NamedConst::Pi) => Jet2::constant(T::PI()),
            Expr::Const(NamedConst::E) => Jet2::constant(T::E()),
            Expr::Neg(a) => -a.eval_jet(t, x)?,
            Expr::Bin(op, a, b) => {
                let ja = a.eval_jet(t, x)?;
                match op {
                    BinOp::Add => ja + b.eval_jet(t, x)?,
                    BinOp::Sub => ja - b.eval_jet(t, x)?,
                    BinOp::Mul => ja * b.eval_jet(t, x)?,
                    BinOp::Div => {
                        let jb = b.eval_jet(t, x)?;
                        if jb.v == T::zero() {
                            return Err(fail(self, "division by zero"));
                        }
                        ja / jb
                    }
                    BinOp::Pow => match b.integer_literal() {
                        Some(n) => {
                            if n < 0 && ja.v == T::zero() {
                                return Err(fail(self, "negative power of zero"));
                            }
                            ja.powi(n)
                        }
                        None => {
                            if ja.v <= T::zero() {
                                return Err(fail(self, "non-integer power of non-positive base"));
                            }
                            ja.powf(b.eval_jet(t, x)?)
                        }
                    },
                }
            }
            Expr::Call(func, a) => {
                let ja = a.eval_jet(t, x)?;
                match func {
                    Func::Sin => ja.sin(),
                    Func::Cos => ja.cos(),
                    Func::Tan => {
                        if ja.v.cos() == T::zero() {
                            return Err(fail(self, "tan pole"));
                        }
                        ja.tan()
                    }
                    Func::Exp => ja.exp(),
                    Func::Log => {
                        if ja.v <= T::zero() {
                            return Err(fail(self, "log of non-positive value"));
                        }
                        ja.ln()
                    }
                    Func::Sqrt => {
                        if ja.v <= T::zero() {
                            return Err(fail(self, "sqrt of non-positive value"));
                        }
                        ja.sqrt()
                    }
                }
            }
        };
        if !out.is_finite() {
            return Err(fail(self, "non-finite result"));
        }
        Ok(out)
    }
}
