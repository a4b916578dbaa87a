//! Small arithmetic expression language for user-supplied coefficient
//! functions and analytic field profiles.
//!
//! Grammar: `+ - * / ^`, parentheses, numeric literals, the constant `pi`,
//! the unary functions `sin cos tan exp ln sqrt abs sinh cosh tanh`, and a
//! caller-defined symbol table. `^` is right associative and binds tighter
//! than unary minus, so `-2^2 == -4`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
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
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    fn uses(&self, idx: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == idx,
            Node::Neg(a) | Node::Call(_, a) => a.uses(idx),
            Node::Bin(_, a, b) => a.uses(idx) || b.uses(idx),
        }
    }
}

// Integer exponents use repeated multiplication so that `I2^2` agrees
// bit-for-bit with `I2*I2`.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// A parsed expression bound to a fixed symbol table.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, symbols: &[&str]) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            symbols,
        };
        let root = p.expr()?;
        if let Some(t) = p.tokens.get(p.pos) {
            return Err(Error::Parse {
                offset: t.offset,
                message: format!("unexpected {:?}", t.kind),
            });
        }
        Ok(Self {
            source: source.trim().to_string(),
            root,
        })
    }

    pub fn constant(v: f64) -> Self {
        Self {
            source: format_number(v),
            root: Node::Num(v),
        }
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        self.root.eval(vars)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// True if the symbol at `idx` of the parse-time table appears.
    pub fn uses(&self, idx: usize) -> bool {
        self.root.uses(idx)
    }

    /// Returns `self + lambda`.
    pub fn plus_constant(&self, lambda: f64) -> Self {
        Self {
            source: format!("({}) + {}", self.source, format_number(lambda)),
            root: Node::Bin(
                BinOp::Add,
                Box::new(self.root.clone()),
                Box::new(Node::Num(lambda)),
            ),
        }
    }

    /// Numeric value if the expression has no symbols.
    pub fn as_constant(&self) -> Option<f64> {
        fn free(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var(_) => false,
                Node::Neg(a) | Node::Call(_, a) => free(a),
                Node::Bin(_, a, b) => free(a) && free(b),
            }
        }
        free(&self.root).then(|| self.root.eval(&[]))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn format_number(v: f64) -> String {
    if v < 0.0 {
        format!("({v:?})")
    } else {
        format!("{v:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            let text = &src[chars[start].0..end];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                offset: off,
                message: format!("bad number {text:?}"),
            })?;
            out.push(Token {
                kind: TokenKind::Num(v),
                offset: off,
            });
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            out.push(Token {
                kind: TokenKind::Ident(src[chars[start].0..end].to_string()),
                offset: off,
            });
            continue;
        } else {
            match c {
                '+' | '*' | '/' | '^' => TokenKind::Op(c),
                '-' | '\u{2212}' => TokenKind::Op('-'),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                _ => {
                    return Err(Error::Parse {
                        offset: off,
                        message: format!("unexpected character {c:?}"),
                    })
                }
            }
        };
        out.push(Token { kind, offset: off });
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    symbols: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map_or(0, |t| t.offset)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(TokenKind::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(TokenKind::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(TokenKind::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(TokenKind::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(TokenKind::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(kind) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match kind {
            TokenKind::Num(v) => Ok(Node::Num(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if let Some(i) = self.symbols.iter().position(|s| *s == name) {
                    return Ok(Node::Var(i));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                if let Some(f) = Func::from_name(&name) {
                    if self.peek() != Some(&TokenKind::LParen) {
                        return self.err(format!("function {name} needs an argument"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                self.pos -= 1;
                self.err(format!(
                    "unknown symbol {name:?} (allowed: {})",
                    self.symbols.join(", ")
                ))
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected {other:?}"))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&TokenKind::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, syms: &[&str], vals: &[f64]) -> f64 {
        Expr::parse(s, syms).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[], &[]), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2^2", &[], &[]), -4.0);
        assert_eq!(ev("2^-1", &[], &[]), 0.5);
        assert_eq!(ev("8 / 4 / 2", &[], &[]), 1.0);
        assert_eq!(ev("1 - 2 - 3", &[], &[]), -4.0);
        assert_eq!(ev("3 \u{2212} 1", &[], &[]), 2.0);
    }

    #[test]
    fn symbols_literals_and_functions() {
        assert_eq!(ev("I1*I2 + 1.5e1", &["I1", "I2"], &[2.0, 3.0]), 21.0);
        assert_eq!(ev("2.5E-1", &[], &[]), 0.25);
        assert!((ev("sin(pi/2) + cos(0)", &[], &[]) - 2.0).abs() < 1e-15);
        assert_eq!(ev("sqrt(I2)", &["I1", "I2"], &[0.0, 16.0]), 4.0);
    }

    #[test]
    fn integer_powers_match_products() {
        let x = 1.234_567_891_234;
        assert_eq!(ev("I2^2", &["I1", "I2"], &[0.0, x]), x * x);
    }

    #[test]
    fn errors_report_offsets() {
        match Expr::parse("1 + I5", &["I1", "I2"]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("(1 + 2", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
        assert!(Expr::parse("", &[]).is_err());
        assert!(Expr::parse("1 $ 2", &[]).is_err());
        assert!(Expr::parse("sin 2", &[]).is_err());
    }

    #[test]
    fn constant_shift_and_detection() {
        let e = Expr::parse("I2", &["I1", "I2"]).unwrap();
        let s = e.plus_constant(5.0);
        assert_eq!(s.eval(&[0.0, 2.0]), 7.0);
        assert!(s.uses(1) && !s.uses(0));
        assert_eq!(Expr::parse("1/4", &[]).unwrap().as_constant(), Some(0.25));
        assert_eq!(e.as_constant(), None);
        let reparsed = Expr::parse(s.source(), &["I1", "I2"]).unwrap();
        assert_eq!(reparsed.eval(&[0.0, 2.0]), 7.0);
    }
}
