//! Whitelisted expression grammar for densities g(x) and nonlinearities
//! f(x, y): variables x and y, arithmetic, powers, abs/min/max, exp/log,
//! and trigonometry. No user code is executed; expressions parse to a small
//! AST evaluated per point.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Tanh,
    Cosh,
    Sinh,
    Atan,
    Sign,
}

impl Func {
    fn from_name(name: &str) -> Option<(Self, usize)> {
        Some(match name {
            "abs" => (Func::Abs, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "exp" => (Func::Exp, 1),
            "ln" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "tanh" => (Func::Tanh, 1),
            "cosh" => (Func::Cosh, 1),
            "sinh" => (Func::Sinh, 1),
            "atan" => (Func::Atan, 1),
            "sign" => (Func::Sign, 1),
            _ => return None,
        })
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {}", self.message, self.position)
    }
}

impl std::error::Error for ParseError {}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            message: message.into(),
            position: self.pos,
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right-associative; exponent may be unary-negated
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.error("expected ')'");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => self.error(format!("unexpected character '{}'", c as char)),
            None => self.error("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.error(format!("invalid number '{text}'")),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        match name {
            "x" => Ok(Expr::X),
            "y" => Ok(Expr::Y),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            _ => {
                let Some((func, arity)) = Func::from_name(name) else {
                    return self.error(format!("unknown identifier '{name}'"));
                };
                if !self.eat(b'(') {
                    return self.error(format!("'{name}' must be called with arguments"));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return self.error("expected ')'");
                }
                if args.len() != arity {
                    return self.error(format!(
                        "'{name}' takes {arity} argument(s), got {}",
                        args.len()
                    ));
                }
                Ok(Expr::Call(func, args))
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    if !src.is_ascii() {
        return Err(ParseError {
            message: "expressions must be ascii".into(),
            position: 0,
        });
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.error("trailing input");
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, b) => a.eval(x, y).powf(b.eval(x, y)),
            Expr::Call(f, args) => {
                let a0 = args[0].eval(x, y);
                match f {
                    Func::Abs => a0.abs(),
                    Func::Min => a0.min(args[1].eval(x, y)),
                    Func::Max => a0.max(args[1].eval(x, y)),
                    Func::Exp => a0.exp(),
                    Func::Ln => a0.ln(),
                    Func::Sqrt => a0.sqrt(),
                    Func::Sin => a0.sin(),
                    Func::Cos => a0.cos(),
                    Func::Tan => a0.tan(),
                    Func::Tanh => a0.tanh(),
                    Func::Cosh => a0.cosh(),
                    Func::Sinh => a0.sinh(),
                    Func::Atan => a0.atan(),
                    Func::Sign => {
                        if a0 > 0.0 {
                            1.0
                        } else if a0 < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
    }

    /// True when the expression never references y.
    pub fn is_x_only(&self) -> bool {
        match self {
            Expr::Y => false,
            Expr::Num(_) | Expr::X => true,
            Expr::Neg(a) => a.is_x_only(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_x_only() && b.is_x_only(),
            Expr::Call(_, args) => args.iter().all(Expr::is_x_only),
        }
    }
}
