//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" exponent)?
//! atom  := number | ident primes? "(" args ")" | ident "[" ints "]" "(" args ")"
//!        | ident | jetvar | "(" expr ")"
//! ```
//!
//! Exponents are integers, optionally signed or parenthesized. Decimal
//! literals are read as exact rationals.

use std::sync::Arc;

use num_bigint::BigInt;

use super::atom::Builtin;
use super::error::{ExprError, Result};
use super::jet::JetVar;
use super::poly::Q;
use super::tree::Expr;

/// Names that look like elementary functions but are not supported.
const UNSUPPORTED: &[&str] = &[
    "log", "ln", "tan", "cot", "sec", "csc", "sqrt", "abs", "asin", "acos", "atan", "tanh",
    "coth", "asinh", "acosh", "atanh", "pow", "sign",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = digits.parse().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: "bad number".into(),
            })?;
            let d = BigInt::from(10u32).pow(frac_part.len() as u32);
            out.push((start, Tok::Num(Q::new(n, d))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()',[]".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
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
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(ExprError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.pow(-1));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn integer(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(n)) if n.is_integer() => {
                self.pos += 1;
                let v: i64 = n
                    .numer()
                    .try_into()
                    .or_else(|_| self.err("integer too large"))?;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = if self.eat('(') {
            let e = self.integer()?;
            self.expect(')')?;
            e
        } else {
            self.integer()?
        };
        let e = i32::try_from(e).or_else(|_| self.err("exponent too large"))?;
        Ok(base.pow(e))
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.ident(name, start)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn ident(&mut self, name: String, start: usize) -> Result<Expr> {
        if let Some(j) = JetVar::from_name(&name) {
            return match j {
                Ok(j) => Ok(Expr::Jet(j)),
                Err(()) => Err(ExprError::MalformedJet(name)),
            };
        }
        let mut primes = 0u32;
        while self.eat('\'') {
            primes += 1;
        }
        let mut derivs: Option<Vec<u32>> = None;
        if primes == 0 && self.eat('[') {
            let mut ds = Vec::new();
            loop {
                let d = self.integer()?;
                ds.push(u32::try_from(d).or_else(|_| self.err("negative derivative order"))?);
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(']')?;
            derivs = Some(ds);
        }
        let called = self.peek() == Some(&Tok::Sym('('));
        if !called {
            if primes > 0 || derivs.is_some() {
                return self.err("derivative notation requires an argument list");
            }
            if Builtin::from_name(&name).is_some() || UNSUPPORTED.contains(&name.as_str()) {
                return self.err(format!("`{name}` requires an argument"));
            }
            return Ok(Expr::Param(Arc::from(name.as_str())));
        }
        if UNSUPPORTED.contains(&name.as_str()) {
            return Err(ExprError::UnknownBuiltin(name));
        }
        let args = self.args()?;
        if let Some(b) = Builtin::from_name(&name) {
            if primes > 0 || derivs.is_some() || args.len() != 1 {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("`{name}` takes exactly one argument and no derivative marks"),
                });
            }
            return Ok(Expr::Builtin(b, Box::new(args.into_iter().next().unwrap())));
        }
        let derivs = match derivs {
            Some(ds) if ds.len() != args.len() => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("`{name}` has {} derivative orders for {} arguments", ds.len(), args.len()),
                })
            }
            Some(ds) => ds,
            None if primes > 0 && args.len() != 1 => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: "primes are only allowed on one-argument functions".into(),
                })
            }
            None if primes > 0 => vec![primes],
            None => vec![0; args.len()],
        };
        Ok(Expr::Func {
            name: Arc::from(name.as_str()),
            derivs,
            args,
        })
    }
}

/// Parses one expression.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::context::Context;

    fn norm(s: &str) -> String {
        parse(s).unwrap().normalize(&Context::new()).unwrap().to_string()
    }

    #[test]
    fn simple_polynomial() {
        let e = parse("z1^2 - z*z2").unwrap();
        assert_eq!(e.to_ratfn().unwrap().to_string(), norm("-(z*z2) + z1*z1"));
    }

    #[test]
    fn primes_and_composite_arguments() {
        let e = parse("h''(z)*z1 + h'(z)*z2").unwrap();
        let Expr::Add(ts) = e else { panic!() };
        assert!(matches!(&ts[0], Expr::Mul(f) if matches!(&f[0], Expr::Func { derivs, .. } if derivs == &vec![2])));
        let phi = parse("phi'(lam*z1^2 - z^2)").unwrap();
        assert!(matches!(phi, Expr::Func { ref derivs, ref args, .. } if derivs == &vec![1] && args.len() == 1));
    }

    #[test]
    fn multi_argument_derivatives() {
        let e = parse("psi[1,0,2](z, z1, z2)").unwrap();
        assert!(matches!(e, Expr::Func { ref derivs, .. } if derivs == &vec![1, 0, 2]));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("z1 +"), Err(ExprError::Syntax { pos: 4, .. })));
        assert_eq!(parse("log(z)"), Err(ExprError::UnknownBuiltin("log".into())));
        assert_eq!(parse("z01"), Err(ExprError::MalformedJet("z01".into())));
        assert_eq!(parse("z1tt"), Err(ExprError::MalformedJet("z1tt".into())));
        assert!(parse("sin").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(norm("0.25*z"), norm("z/4"));
    }

    #[test]
    fn negative_exponents() {
        assert_eq!(norm("eta^-2"), norm("1/(eta*eta)"));
        assert_eq!(norm("eta^(-2)"), norm("1/eta^2"));
    }
}
