//! Coefficient expressions in `t` and `x`.
//!
//! Grammar: numbers, `t`, `x`, `pi`, `e`, binary `+ - * / ^` (`^` is
//! right-associative and binds tighter than unary minus), parentheses and the
//! builtins `sin cos tan exp log sqrt abs pos sgn step min max`. `pos(u)` is
//! `max(u, 0)` and `step(u)` is `1` for `u > 0`, else `0`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Parser recursion limit.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expression error at byte {pos}: {msg}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pos,
    Sgn,
    Step,
    Min,
    Max,
}

const FUNCS: [(&str, Func); 12] = [
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("tan", Func::Tan),
    ("exp", Func::Exp),
    ("log", Func::Log),
    ("sqrt", Func::Sqrt),
    ("abs", Func::Abs),
    ("pos", Func::Pos),
    ("sgn", Func::Sgn),
    ("step", Func::Step),
    ("min", Func::Min),
    ("max", Func::Max),
];

impl Func {
    fn name(self) -> &'static str {
        FUNCS.iter().find(|f| f.1 == self).unwrap().0
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

fn step(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else {
        0.0
    }
}

fn sgn(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum()
    }
}

impl Expr {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Neg(a) => -a.eval(t, x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(t, x), b.eval(t, x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let u = args[0].eval(t, x);
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Exp => u.exp(),
                    Func::Log => u.ln(),
                    Func::Sqrt => u.sqrt(),
                    Func::Abs => u.abs(),
                    Func::Pos => u.max(0.0),
                    Func::Sgn => sgn(u),
                    Func::Step => step(u),
                    Func::Min => u.min(args[1].eval(t, x)),
                    Func::Max => u.max(args[1].eval(t, x)),
                }
            }
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) => a.depends_on(v),
            Expr::Bin(_, a, b) => a.depends_on(v) || b.depends_on(v),
            Expr::Call(_, args) => args.iter().any(|a| a.depends_on(v)),
        }
    }

    /// Symbolic `∂/∂x`. Kinks of `abs`, `pos`, `min`, `max` get one-sided
    /// derivatives; `sgn` and `step` differentiate to 0.
    pub fn dx(&self) -> Expr {
        use Expr::{Bin, Call, Neg, Num};
        match self {
            Num(_) | Expr::Var(Var::T) => Num(0.0),
            Expr::Var(Var::X) => Num(1.0),
            Neg(a) => neg(a.dx()),
            Bin(op, a, b) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => add(a.dx(), b.dx()),
                    BinOp::Sub => sub(a.dx(), b.dx()),
                    BinOp::Mul => add(mul(a.dx(), b.clone()), mul(a, b.dx())),
                    BinOp::Div => {
                        let num = sub(mul(a.dx(), b.clone()), mul(a, b.dx()));
                        div(num, pow(b, Num(2.0)))
                    }
                    BinOp::Pow if !b.depends_on(Var::X) => {
                        let da = a.dx();
                        mul(mul(b.clone(), pow(a, sub(b, Num(1.0)))), da)
                    }
                    BinOp::Pow => {
                        let inner = add(mul(b.dx(), call(Func::Log, a.clone())), div(mul(b.clone(), a.dx()), a.clone()));
                        mul(pow(a, b), inner)
                    }
                }
            }
            Call(f, args) => {
                let u = args[0].clone();
                let du = u.dx();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => div(Num(1.0), pow(call(Func::Cos, u), Num(2.0))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Log => div(Num(1.0), u),
                    Func::Sqrt => div(Num(0.5), call(Func::Sqrt, u)),
                    Func::Abs => call(Func::Sgn, u),
                    Func::Pos => call(Func::Step, u),
                    Func::Sgn | Func::Step => Num(0.0),
                    Func::Min | Func::Max => {
                        let v = args[1].clone();
                        let (first, second) = if *f == Func::Min { (v.clone(), u.clone()) } else { (u.clone(), v.clone()) };
                        let pick_u = call(Func::Step, sub(first, second));
                        let pick_v = sub(Num(1.0), pick_u.clone());
                        return add(mul(pick_u, du), mul(pick_v, v.dx()));
                    }
                };
                mul(outer, du)
            }
        }
    }
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(w) if *w == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(b) => *b,
        a => Expr::Neg(Box::new(a)),
    }
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    let folds = matches!((&a, &b), (Expr::Num(_), Expr::Num(_)));
    let e = Expr::Bin(op, Box::new(a), Box::new(b));
    if folds {
        Expr::Num(e.eval(0.0, 0.0))
    } else {
        e
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        bin(BinOp::Add, a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(b)
    } else {
        bin(BinOp::Sub, a, b)
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else {
        bin(BinOp::Mul, a, b)
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else {
        bin(BinOp::Div, a, b)
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else {
        bin(BinOp::Pow, a, b)
    }
}

fn call(f: Func, u: Expr) -> Expr {
    Expr::Call(f, vec![u])
}

/// Fully parenthesized; parses back to the same tree.
impl Expr {
    /// Binding level for printing: sums, products, negation, powers, atoms.
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn fmt_wrapped(&self, f: &mut fmt::Formatter<'_>, paren: bool) -> fmt::Result {
        if paren {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints with the fewest parentheses that parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{:?}", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_wrapped(f, a.prec() < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = self.prec();
                let (sym, right_assoc) = match op {
                    BinOp::Add => ('+', false),
                    BinOp::Sub => ('-', false),
                    BinOp::Mul => ('*', false),
                    BinOp::Div => ('/', false),
                    BinOp::Pow => ('^', true),
                };
                a.fmt_wrapped(f, a.prec() < p || (right_assoc && a.prec() == p))?;
                write!(f, "{sym}")?;
                let neg = b.prec() == 3;
                b.fmt_wrapped(f, !neg && (b.prec() < p || (!right_assoc && b.prec() == p)))
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { pos, msg: msg.into() })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut p = self.pos + 1;
                if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                    p += 1;
                }
                if p < bytes.len() && bytes[p].is_ascii_digit() {
                    while p < bytes.len() && bytes[p].is_ascii_digit() {
                        p += 1;
                    }
                    self.pos = p;
                }
            }
            let text = &self.src[start..self.pos];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => self.tok = Tok::Num(v),
                Ok(_) => return self.err(start, format!("number `{text}` overflows")),
                Err(_) => return self.err(start, format!("malformed number `{text}`")),
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Op(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap();
            return self.err(self.pos, format!("unexpected character `{ch}`"));
        }
        Ok(())
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.tok != Tok::Op(op) {
            return self.err(self.tok_pos, format!("expected `{op}`"));
        }
        self.advance()
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err(self.tok_pos, "expression nested too deeply");
        }
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp, rbp) = match self.tok {
                Tok::Op('+') => (BinOp::Add, 1, 2),
                Tok::Op('-') => (BinOp::Sub, 1, 2),
                Tok::Op('*') => (BinOp::Mul, 3, 4),
                Tok::Op('/') => (BinOp::Div, 3, 4),
                Tok::Op('^') => (BinOp::Pow, 8, 7),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.advance()?;
            let rhs = self.expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ExprError> {
        let pos = self.tok_pos;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Op('-') => {
                self.advance()?;
                Ok(Expr::Neg(Box::new(self.expr(5)?)))
            }
            Tok::Op('+') => {
                self.advance()?;
                self.expr(5)
            }
            Tok::Op('(') => {
                self.advance()?;
                let e = self.expr(0)?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "t" => return Ok(Expr::Var(Var::T)),
                    "x" => return Ok(Expr::Var(Var::X)),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Num(std::f64::consts::E)),
                    _ => {}
                }
                let Some(&(_, func)) = FUNCS.iter().find(|f| f.0 == name) else {
                    return self.err(pos, format!("unknown name `{name}`"));
                };
                self.expect('(')?;
                let mut args = vec![self.expr(0)?];
                while self.tok == Tok::Op(',') {
                    self.advance()?;
                    args.push(self.expr(0)?);
                }
                self.expect(')')?;
                if args.len() != func.arity() {
                    return self.err(pos, format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()));
                }
                Ok(Expr::Call(func, args))
            }
            Tok::Op(c) => self.err(pos, format!("unexpected `{c}`")),
            Tok::End => self.err(pos, "unexpected end of expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src,
        pos: 0,
        tok: Tok::End,
        tok_pos: 0,
        depth: 0,
    };
    p.advance()?;
    let e = p.expr(0)?;
    if p.tok != Tok::End {
        return p.err(p.tok_pos, "trailing input");
    }
    Ok(e)
}

/// A constant expression (no `t`, no `x`), evaluated.
pub fn parse_constant(src: &str) -> Result<f64, ExprError> {
    let e = parse(src)?;
    if e.depends_on(Var::T) || e.depends_on(Var::X) {
        return Err(ExprError {
            pos: 0,
            msg: "a constant may not mention t or x".into(),
        });
    }
    Ok(e.eval(0.0, 0.0))
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct Formula {
    pub source: String,
    pub expr: Arc<Expr>,
}

impl Formula {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        Ok(Formula {
            source: src.trim().to_string(),
            expr: Arc::new(parse(src)?),
        })
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}
