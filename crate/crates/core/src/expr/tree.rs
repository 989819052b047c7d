//! The user-facing expression tree. Computation happens on the canonical
//! rational-function form; the tree is what parsing produces and what
//! normalization hands back.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Builtin, Var};
use super::context::Context;
use super::diff::{self, Partial, TotalDt, TotalDx};
use super::error::Result;
use super::eval::NumEnv;
use super::func;
use super::jet::JetVar;
use super::poly::{Monomial, Poly, Q};
use super::ratfn::RatFn;
use super::subst::{self, Bindings};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Q),
    Param(Arc<str>),
    Jet(JetVar),
    /// Formal function differentiated `derivs[j]` times in argument j.
    Func {
        name: Arc<str>,
        derivs: Vec<u32>,
        args: Vec<Expr>,
    },
    Builtin(Builtin, Box<Expr>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn num(n: i64) -> Self {
        Expr::Num(Q::from_integer(n.into()))
    }

    pub fn rational(c: Q) -> Self {
        Expr::Num(c)
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(Arc::from(name))
    }

    pub fn jet(order: u32) -> Self {
        Expr::Jet(JetVar::x(order))
    }

    pub fn jet_t(order: u32) -> Self {
        Expr::Jet(JetVar::t(order))
    }

    pub fn func(name: &str, order: u32, arg: Expr) -> Self {
        Expr::Func {
            name: Arc::from(name),
            derivs: vec![order],
            args: vec![arg],
        }
    }

    pub fn builtin(f: Builtin, arg: Expr) -> Self {
        Expr::Builtin(f, Box::new(arg))
    }

    pub fn pow(self, e: i32) -> Self {
        Expr::Pow(Box::new(self), e)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_zero())
    }

    /// Converts to the canonical rational form without any context.
    pub fn to_ratfn(&self) -> Result<RatFn> {
        Ok(match self {
            Expr::Num(c) => RatFn::constant(c.clone()),
            Expr::Param(p) => RatFn::param(p),
            Expr::Jet(j) => RatFn::var(Var::Jet(*j)),
            Expr::Func { name, derivs, args } => {
                let args = args.iter().map(|a| a.to_ratfn()).collect::<Result<Vec<_>>>()?;
                func::func(name, derivs.clone(), args)
            }
            Expr::Builtin(f, arg) => func::builtin(*f, arg.to_ratfn()?)?,
            Expr::Add(xs) => {
                let parts = xs.iter().map(|x| x.to_ratfn()).collect::<Result<Vec<_>>>()?;
                RatFn::sum(parts.iter())
            }
            Expr::Mul(xs) => {
                let mut acc = RatFn::one();
                for x in xs {
                    acc = &acc * &x.to_ratfn()?;
                }
                acc
            }
            Expr::Pow(b, e) => b.to_ratfn()?.pow(*e)?,
        })
    }

    /// Tree form of a canonical rational function.
    pub fn from_ratfn(r: &RatFn) -> Expr {
        let num = poly_tree(r.num());
        if r.den().is_empty() {
            return num;
        }
        let mut factors = vec![num];
        for (f, k) in r.den() {
            factors.push(Expr::Pow(Box::new(poly_tree(f)), -(*k as i32)));
        }
        Expr::Mul(factors)
    }

    pub fn normalize(&self, ctx: &Context) -> Result<Expr> {
        Ok(Expr::from_ratfn(&ctx.reduce(&self.to_ratfn()?)?))
    }

    pub fn partial(&self, v: &Expr, ctx: &Context) -> Result<Expr> {
        let var = v.as_var()?;
        let r = diff::derive(&self.to_ratfn()?, &Partial(&var))?;
        Ok(Expr::from_ratfn(&ctx.reduce(&r)?))
    }

    pub fn total_dx(&self, ctx: &Context) -> Result<Expr> {
        let d = TotalDx {
            max_order: ctx.max_jet_order,
        };
        let r = diff::derive(&self.to_ratfn()?, &d)?;
        Ok(Expr::from_ratfn(&ctx.reduce(&r)?))
    }

    pub fn total_dt(&self, ctx: &Context) -> Result<Expr> {
        let r = diff::derive(&self.to_ratfn()?, &TotalDt)?;
        Ok(Expr::from_ratfn(&ctx.reduce(&r)?))
    }

    pub fn substitute(&self, b: &Bindings, ctx: &Context) -> Result<Expr> {
        let r = subst::substitute(&self.to_ratfn()?, b)?;
        Ok(Expr::from_ratfn(&ctx.reduce(&r)?))
    }

    pub fn eval(&self, env: &NumEnv) -> Result<f64> {
        env.eval(&self.to_ratfn()?)
    }

    /// The variable named by a leaf (parameter, jet variable or atom).
    pub fn as_var(&self) -> Result<Var> {
        let r = self.to_ratfn()?;
        r.as_var().cloned().ok_or_else(|| {
            super::error::ExprError::InvalidRule(format!("`{self}` is not a single variable"))
        })
    }
}

fn var_tree(v: &Var) -> Expr {
    match v {
        Var::Jet(j) => Expr::Jet(*j),
        Var::Param(p) => Expr::Param(p.clone()),
        Var::Atom(a) => match &**a {
            Atom::Func { name, derivs, args } => Expr::Func {
                name: name.clone(),
                derivs: derivs.clone(),
                args: args.iter().map(Expr::from_ratfn).collect(),
            },
            Atom::Builtin { f, arg } => Expr::Builtin(*f, Box::new(Expr::from_ratfn(arg))),
        },
    }
}

fn monomial_tree(m: &Monomial, c: &Q) -> Expr {
    let mut factors = Vec::new();
    if !c.is_one() || m.is_one() {
        factors.push(Expr::Num(c.clone()));
    }
    for (v, e) in m.factors() {
        let base = var_tree(v);
        factors.push(if *e == 1 { base } else { base.pow(*e as i32) });
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    }
}

fn poly_tree(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::num(0);
    }
    let mut terms: Vec<Expr> = p.terms().rev().map(|(m, c)| monomial_tree(m, c)).collect();
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Add(terms)
    }
}

impl From<&RatFn> for Expr {
    fn from(r: &RatFn) -> Self {
        Expr::from_ratfn(r)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::num(n)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Add(mut xs) => {
                xs.push(rhs);
                Expr::Add(xs)
            }
            s => Expr::Add(vec![s, rhs]),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match self {
            Expr::Mul(mut xs) => {
                xs.push(rhs);
                Expr::Mul(xs)
            }
            s => Expr::Mul(vec![s, rhs]),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        self * rhs.pow(-1)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(-c),
            s => Expr::Mul(vec![Expr::num(-1), s]),
        }
    }
}

// Precedence levels: sum 1, product 2, unary minus 3, power 4, leaf 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) => 1,
        Expr::Mul(_) => 2,
        Expr::Num(c) if c.is_negative() || !c.is_integer() => 2,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Splits a leading negative numeric factor off a product.
fn negated(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(c) if c.is_negative() => Some(Expr::Num(-c)),
        Expr::Mul(xs) => match xs.first() {
            Some(Expr::Num(c)) if c.is_negative() => {
                let mut rest = xs.clone();
                if (-c).is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Num(-c);
                }
                Some(if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) })
            }
            _ => None,
        },
        _ => None,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Expr::Param(p) => f.write_str(p),
            Expr::Jet(j) => write!(f, "{j}"),
            Expr::Func { name, derivs, args } => {
                if derivs.len() == 1 {
                    write!(f, "{name}{}({})", "'".repeat(derivs[0] as usize), args[0])
                } else {
                    if derivs.iter().any(|d| *d > 0) {
                        let ds: Vec<String> = derivs.iter().map(|d| d.to_string()).collect();
                        write!(f, "{name}[{}]", ds.join(","))?;
                    } else {
                        f.write_str(name)?;
                    }
                    let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                    write!(f, "({})", a.join(", "))
                }
            }
            Expr::Builtin(b, arg) => write!(f, "{}({arg})", b.name()),
            Expr::Add(xs) => {
                if xs.is_empty() {
                    return f.write_str("0");
                }
                for (i, x) in xs.iter().enumerate() {
                    match (i, negated(x)) {
                        (0, Some(n)) => {
                            f.write_str("-")?;
                            write_wrapped(f, &n, 2)?;
                        }
                        (0, None) => write_wrapped(f, x, 1)?,
                        (_, Some(n)) => {
                            f.write_str(" - ")?;
                            write_wrapped(f, &n, 2)?;
                        }
                        (_, None) => {
                            f.write_str(" + ")?;
                            write_wrapped(f, x, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Mul(xs) => {
                if xs.is_empty() {
                    return f.write_str("1");
                }
                if let Some(n) = negated(self) {
                    f.write_str("-")?;
                    return write_wrapped(f, &n, 2);
                }
                let (num, den): (Vec<&Expr>, Vec<&Expr>) =
                    xs.iter().partition(|x| !matches!(x, Expr::Pow(_, e) if *e < 0));
                if num.is_empty() {
                    f.write_str("1")?;
                }
                for (i, x) in num.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write_wrapped(f, x, 3)?;
                }
                for x in den {
                    let Expr::Pow(b, e) = x else { unreachable!() };
                    f.write_str("/")?;
                    if *e == -1 {
                        write_wrapped(f, b, 4)?;
                    } else {
                        write_wrapped(f, b, 5)?;
                        write!(f, "^{}", -e)?;
                    }
                }
                Ok(())
            }
            Expr::Pow(b, e) => {
                write_wrapped(f, b, 5)?;
                if *e < 0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_cancels() {
        let z = Expr::jet(0);
        let z1 = Expr::jet(1);
        let e = (z.clone() + z1.clone()).pow(2)
            - z.clone().pow(2)
            - Expr::num(2) * z.clone() * z1.clone()
            - z1.pow(2);
        assert!(e.normalize(&Context::new()).unwrap().is_zero());
    }

    #[test]
    fn numeric_example() {
        let e = Expr::jet(1).pow(2) - Expr::jet(0) * Expr::jet(2);
        let env = NumEnv::new().jet(0, 1.0).jet(1, 2.0).jet(2, 3.0);
        assert_eq!(e.eval(&env).unwrap(), 1.0);
    }

    #[test]
    fn display_is_reparseable_shape() {
        let e = Expr::jet(0) / (Expr::param("a") + Expr::num(1));
        assert_eq!(e.to_string(), "z/(a + 1)");
        let n = -(Expr::param("a") * Expr::jet(1));
        assert_eq!(n.to_string(), "-a*z1");
    }
}
