//! Text grammar for scalar and operator expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? int)?
//! atom   := int | 'i' | ident | G[..] | F[..] | qhat(k) | phat(k)
//!         | '(' expr ')' | '{' expr ',' expr '}'
//! ```
//! Moment indices are written momentum first: `G[a,b;c,d]`.

use super::coeff::GaussianRational;
use super::expr::ScalarExpr;
use super::var::{Canon, Exps, Labels, Var, MAX_PAIRS};
use crate::Error;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Parsed syntax tree, evaluated later into a concrete algebra.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    I,
    Ident(String),
    Moment(Exps),
    F(Exps),
    Hat(usize, Canon),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i32),
    Bracket(Box<Ast>, Box<Ast>),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

pub fn parse_ast(text: &str) -> Result<Ast, Error> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in {:?}", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, Error> {
        if self.eat(b'-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let a = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let n = self.int()?;
            let k: i32 = n.try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(Ast::Pow(Box::new(a), if neg { -k } else { k }));
        }
        Ok(a)
    }

    fn int(&mut self) -> Result<BigInt, Error> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        t.parse().map_err(|_| self.err("bad integer"))
    }

    fn small(&mut self) -> Result<u8, Error> {
        let n = self.int()?;
        u8::try_from(n).map_err(|_| self.err("index too large"))
    }

    fn indices(&mut self) -> Result<Exps, Error> {
        self.expect(b'[')?;
        let mut pairs = Vec::new();
        loop {
            let a = self.small()?;
            self.expect(b',')?;
            let b = self.small()?;
            pairs.push((a, b));
            if pairs.len() > MAX_PAIRS {
                return Err(self.err("too many pairs"));
            }
            if self.eat(b';') {
                continue;
            }
            self.expect(b']')?;
            return Ok(Exps::from_pairs(&pairs));
        }
    }

    fn atom(&mut self) -> Result<Ast, Error> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'{') => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b'}')?;
                Ok(Ast::Bracket(Box::new(a), Box::new(b)))
            }
            Some(c) if c.is_ascii_digit() => Ok(Ast::Num(self.int()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let id = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii").to_string();
                match id.as_str() {
                    "i" => Ok(Ast::I),
                    "G" if self.peek() == Some(b'[') => Ok(Ast::Moment(self.indices()?)),
                    "F" if self.peek() == Some(b'[') => Ok(Ast::F(self.indices()?)),
                    "qhat" | "phat" => {
                        self.expect(b'(')?;
                        let k = self.small()? as usize;
                        self.expect(b')')?;
                        if k >= MAX_PAIRS {
                            return Err(self.err("pair index out of range"));
                        }
                        Ok(Ast::Hat(k, if id == "qhat" { Canon::Q } else { Canon::P }))
                    }
                    _ => Ok(Ast::Ident(id)),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }
}

/// Evaluate a syntax tree into the scalar ring.
pub fn eval_scalar(ast: &Ast, labels: &Labels) -> Result<ScalarExpr, Error> {
    Ok(match ast {
        Ast::Num(n) => ScalarExpr::constant(GaussianRational::from_rational(BigRational::from_integer(n.clone()))),
        Ast::I => ScalarExpr::i(),
        Ast::Ident(s) => {
            ScalarExpr::var(labels.resolve(s).ok_or_else(|| Error::Parse(format!("unknown symbol {s:?}")))?)
        }
        Ast::Moment(e) => moment_or_constant(*e),
        Ast::F(e) => ScalarExpr::var(Var::F(*e)),
        Ast::Hat(..) => return Err(Error::Parse("operator in scalar expression".into())),
        Ast::Bracket(..) => return Err(Error::Parse("bracket needs the moment space evaluator".into())),
        Ast::Add(a, b) => eval_scalar(a, labels)?.add(&eval_scalar(b, labels)?),
        Ast::Sub(a, b) => eval_scalar(a, labels)?.sub(&eval_scalar(b, labels)?),
        Ast::Mul(a, b) => eval_scalar(a, labels)?.mul(&eval_scalar(b, labels)?),
        Ast::Div(a, b) => eval_scalar(a, labels)?.div(&eval_scalar(b, labels)?)?,
        Ast::Neg(a) => eval_scalar(a, labels)?.neg(),
        Ast::Pow(a, k) => {
            let b = eval_scalar(a, labels)?;
            if *k >= 0 {
                b.pow(*k as u32)
            } else {
                b.pow((-k) as u32).inv()?
            }
        }
    })
}

/// Moments of order 0 and 1 are the constants 1 and 0.
pub fn moment_or_constant(e: Exps) -> ScalarExpr {
    match e.order() {
        0 => ScalarExpr::one(),
        1 => ScalarExpr::zero(),
        _ => ScalarExpr::var(Var::Moment(e)),
    }
}

/// Parse a scalar expression in the canonical grammar.
pub fn parse_expr(text: &str, labels: &Labels) -> Result<ScalarExpr, Error> {
    eval_scalar(&parse_ast(text)?, labels)
}
