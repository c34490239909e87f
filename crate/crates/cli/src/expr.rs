//! Arithmetic expressions in `t` (and `n` for sequences).
//!
//! Vocabulary: numbers, `t`, `n`, `pi`, `e`, `+ - * / ^`, and the functions
//! `sin cos tan exp ln sqrt abs sign min max` plus
//! `piecewise(b1, e1, b2, e2, ..., ek)`, which is `e1` for `t < b1`, `e2` for
//! `b1 <= t < b2`, ... and `ek` beyond the last breakpoint. Breakpoints must
//! be constants.

use std::fmt;
use std::sync::Arc;

use gauge_measure::{Density, Poly};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    T,
    N,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
    Piecewise(Vec<f64>, Vec<Node>),
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    allow_n: bool,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Node>, ParseError> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(c) = self.peek() else { return self.err("unexpected end of expression") };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            return match name {
                "t" => Ok(Node::T),
                "n" if self.allow_n => Ok(Node::N),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                "min" | "max" => {
                    let mut a = self.args()?;
                    if a.len() != 2 {
                        return self.err(format!("{name} takes two arguments"));
                    }
                    let (y, x) = (a.pop().unwrap(), a.pop().unwrap());
                    Ok(if name == "min" { Node::Min(Box::new(x), Box::new(y)) } else { Node::Max(Box::new(x), Box::new(y)) })
                }
                "piecewise" => self.piecewise(),
                _ => match Func::lookup(name) {
                    Some(f) => {
                        let mut a = self.args()?;
                        if a.len() != 1 {
                            return self.err(format!("{name} takes one argument"));
                        }
                        Ok(Node::Call(f, Box::new(a.pop().unwrap())))
                    }
                    None => {
                        self.pos = start;
                        self.err(format!("unknown name '{name}'"))
                    }
                },
            };
        }
        self.err(format!("unexpected character '{c}'"))
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
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
        self.pos = i;
        match self.src[start..i].parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("bad number '{}'", &self.src[start..i]))
            }
        }
    }

    fn piecewise(&mut self) -> Result<Node, ParseError> {
        let open = self.pos;
        let a = self.args()?;
        if a.len() % 2 == 0 {
            self.pos = open;
            return self.err("piecewise takes an odd number of arguments: b1, e1, ..., ek");
        }
        let last = a.len() - 1;
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        for (i, node) in a.into_iter().enumerate() {
            if i % 2 == 1 || i == last {
                pieces.push(node);
            } else if let Some(b) = const_value(&node) {
                breaks.push(b);
            } else {
                self.pos = open;
                return self.err("piecewise breakpoints must be constants");
            }
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            self.pos = open;
            return self.err("piecewise breakpoints must increase");
        }
        Ok(Node::Piecewise(breaks, pieces))
    }
}

fn const_value(n: &Node) -> Option<f64> {
    let c = |a: &Node| const_value(a);
    Some(match n {
        Node::Num(v) => *v,
        Node::T | Node::N | Node::Piecewise(..) => return None,
        Node::Neg(a) => -c(a)?,
        Node::Add(a, b) => c(a)? + c(b)?,
        Node::Sub(a, b) => c(a)? - c(b)?,
        Node::Mul(a, b) => c(a)? * c(b)?,
        Node::Div(a, b) => c(a)? / c(b)?,
        Node::Pow(a, b) => c(a)?.powf(c(b)?),
        Node::Call(f, a) => f.apply(c(a)?),
        Node::Min(a, b) => c(a)?.min(c(b)?),
        Node::Max(a, b) => c(a)?.max(c(b)?),
    })
}

fn eval(n: &Node, t: f64, nn: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::T => t,
        Node::N => nn,
        Node::Neg(a) => -eval(a, t, nn),
        Node::Add(a, b) => eval(a, t, nn) + eval(b, t, nn),
        Node::Sub(a, b) => eval(a, t, nn) - eval(b, t, nn),
        Node::Mul(a, b) => eval(a, t, nn) * eval(b, t, nn),
        Node::Div(a, b) => eval(a, t, nn) / eval(b, t, nn),
        Node::Pow(a, b) => {
            let (x, y) = (eval(a, t, nn), eval(b, t, nn));
            if y == y.trunc() && y.abs() <= i32::MAX as f64 {
                x.powi(y as i32)
            } else {
                x.powf(y)
            }
        }
        Node::Call(f, a) => f.apply(eval(a, t, nn)),
        Node::Min(a, b) => eval(a, t, nn).min(eval(b, t, nn)),
        Node::Max(a, b) => eval(a, t, nn).max(eval(b, t, nn)),
        Node::Piecewise(breaks, pieces) => {
            let k = breaks.partition_point(|b| *b <= t);
            eval(&pieces[k], t, nn)
        }
    }
}

fn collect_breaks(n: &Node, out: &mut Vec<f64>) {
    match n {
        Node::Num(_) | Node::T | Node::N => {}
        Node::Neg(a) | Node::Call(_, a) => collect_breaks(a, out),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) | Node::Min(a, b) | Node::Max(a, b) => {
            collect_breaks(a, out);
            collect_breaks(b, out);
        }
        Node::Piecewise(breaks, pieces) => {
            out.extend(breaks);
            pieces.iter().for_each(|p| collect_breaks(p, out));
        }
    }
}

/// Coefficients when `n` is a polynomial in `t` (no `n`, integer powers only).
fn as_poly(n: &Node) -> Option<Poly> {
    Some(match n {
        Node::Num(v) => Poly::constant(*v),
        Node::T => Poly::identity(),
        Node::N | Node::Call(..) | Node::Min(..) | Node::Max(..) | Node::Piecewise(..) => {
            return const_value(n).map(Poly::constant);
        }
        Node::Neg(a) => as_poly(a)?.scale(-1.0),
        Node::Add(a, b) => as_poly(a)?.add(&as_poly(b)?),
        Node::Sub(a, b) => as_poly(a)?.add(&as_poly(b)?.scale(-1.0)),
        Node::Mul(a, b) => as_poly(a)?.mul(&as_poly(b)?),
        Node::Div(a, b) => {
            let d = const_value(b)?;
            as_poly(a)?.scale(1.0 / d)
        }
        Node::Pow(a, b) => {
            let k = const_value(b)?;
            if k < 0.0 || k != k.trunc() || k > 64.0 {
                return None;
            }
            let base = as_poly(a)?;
            (0..k as usize).fold(Poly::constant(1.0), |acc, _| acc.mul(&base))
        }
    })
}

impl Expr {
    /// An expression in `t`.
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        Self::parse_with(src, false)
    }

    /// An expression in `t` and `n`.
    pub fn parse_sequence(src: &str) -> Result<Self, ParseError> {
        Self::parse_with(src, true)
    }

    fn parse_with(src: &str, allow_n: bool) -> Result<Self, ParseError> {
        let mut p = Parser { src, pos: 0, allow_n };
        let root = p.expr()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        Ok(Self { root, source: src.to_string() })
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval(&self.root, t, 0.0)
    }

    pub fn eval_n(&self, t: f64, n: f64) -> f64 {
        eval(&self.root, t, n)
    }

    /// Constant breakpoints of `piecewise` terms.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = Vec::new();
        collect_breaks(&self.root, &mut b);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn constant(&self) -> Option<f64> {
        const_value(&self.root)
    }

    pub fn closure(&self) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let root = Arc::new(self.root.clone());
        move |t| eval(&root, t, 0.0)
    }

    /// `t -> expr(t, n)` with `n` fixed.
    pub fn closure_at(&self, n: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let root = Arc::new(self.root.clone());
        move |t| eval(&root, t, n)
    }

    /// The expression on `[lo, hi]` as a density: exact when polynomial
    /// (piecewise polynomials are split at their breakpoints), a closure otherwise.
    pub fn density(&self, lo: f64, hi: f64) -> Density {
        if let Some(p) = as_poly(&self.root) {
            return Density::poly(lo, hi, p);
        }
        if let Node::Piecewise(breaks, pieces) = &self.root {
            if let Some(polys) = pieces.iter().map(as_poly).collect::<Option<Vec<Poly>>>() {
                let mut edges = vec![lo];
                edges.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
                edges.push(hi);
                let mut d = Density::zero();
                for w in edges.windows(2) {
                    let mid = if w[0].is_finite() && w[1].is_finite() { 0.5 * (w[0] + w[1]) } else if w[0].is_finite() { w[0] + 1.0 } else { w[1] - 1.0 };
                    let k = breaks.partition_point(|b| *b <= mid);
                    d = d.add(&Density::poly(w[0], w[1], polys[k].clone()));
                }
                return d;
            }
        }
        Density::func(lo, hi, self.closure()).with_breakpoints(self.breakpoints())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("1 + 2*t^2 - -3").unwrap();
        assert_eq!(e.eval(2.0), 12.0);
        assert_eq!(Expr::parse("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(Expr::parse("-t^2").unwrap().eval(3.0), -9.0);
        assert!((Expr::parse("sin(pi/2) + exp(0) + sqrt(4) + abs(-1) + sign(-2)").unwrap().eval(0.0) - 4.0).abs() < 1e-15);
        assert_eq!(Expr::parse("min(t, 1) + max(t, 1)").unwrap().eval(3.0), 4.0);
        assert_eq!(Expr::parse("1e-3*t").unwrap().eval(2.0), 2e-3);
    }

    #[test]
    fn piecewise_selects_by_breakpoint() {
        let e = Expr::parse("piecewise(0.5, t, 0.75, 1, 2*t)").unwrap();
        assert_eq!(e.eval(0.25), 0.25);
        assert_eq!(e.eval(0.5), 1.0);
        assert_eq!(e.eval(0.8), 1.6);
        assert_eq!(e.breakpoints(), vec![0.5, 0.75]);
        assert!(Expr::parse("piecewise(t, 1, 2)").is_err());
        assert!(Expr::parse("piecewise(0.5, 1)").is_err());
    }

    #[test]
    fn sequences_need_n() {
        assert!(Expr::parse("t + n").is_err());
        let e = Expr::parse_sequence("t + sin(n*t)/n").unwrap();
        assert_eq!(e.eval_n(0.0, 10.0), 0.0);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + foo(t)").unwrap_err();
        assert_eq!(e.column, 5);
        assert_eq!(Expr::parse("(1 + t").unwrap_err().message, "expected ')'");
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn polynomials_become_exact_densities() {
        let d = Expr::parse("3*t^2 - 2*t + 1").unwrap().density(0.0, 1.0);
        assert!(matches!(d, Density::Poly(_)));
        assert!((d.integral(0.0, 1.0) - 1.0).abs() < 1e-15);
        let pw = Expr::parse("piecewise(0.5, 0, 2*t)").unwrap().density(0.0, 1.0);
        assert!(matches!(pw, Density::Poly(_)));
        assert!((pw.integral(0.0, 1.0) - 0.75).abs() < 1e-15);
        assert!(matches!(Expr::parse("sin(t)").unwrap().density(0.0, 1.0), Density::Func(_)));
    }
}
