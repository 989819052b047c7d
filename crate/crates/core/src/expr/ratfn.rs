//! Rational functions in canonical form: an expanded numerator over a sorted
//! list of primitive denominator factors.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::atom::Var;
use super::error::{ExprError, Result};
use super::poly::{Poly, Q};

/// `num / prod(f^k for (f, k) in den)`.
///
/// Invariants: every denominator factor is non-constant, has coprime integer
/// coefficients and a positive leading coefficient; single-variable monomial
/// factors are split into one factor per variable; no factor divides `num`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RatFn {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

/// Primitive factorization of a polynomial into content, variable factors and
/// one primitive cofactor.
fn split_factor(p: &Poly) -> (Q, Vec<(Poly, u32)>) {
    let mono = p.monomial_gcd();
    let rest = if mono.is_one() {
        p.clone()
    } else {
        let mut r = Poly::zero();
        for (m, c) in p.terms() {
            r.add_term(m.div(&mono).expect("gcd divides"), c.clone());
        }
        r
    };
    let content = rest.content();
    let rest = rest.scale(&content.recip());
    let mut factors: Vec<(Poly, u32)> = mono
        .factors()
        .iter()
        .map(|(v, e)| (Poly::var(v.clone()), *e))
        .collect();
    if !rest.is_one() {
        factors.push((rest, 1));
    }
    (content, factors)
}

fn divide_out(num: &Poly, f: &Poly) -> Option<Poly> {
    if f.len() == 1 {
        let (fm, fc) = f.leading().unwrap();
        let mut out = Poly::zero();
        for (m, c) in num.terms() {
            out.add_term(m.div(fm)?, c / fc);
        }
        return Some(out);
    }
    num.div_exact(f)
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn::default()
    }

    pub fn one() -> Self {
        RatFn::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        RatFn::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        RatFn::constant(super::poly::q(n))
    }

    pub fn from_poly(num: Poly) -> Self {
        RatFn { num, den: Vec::new() }
    }

    pub fn var(v: Var) -> Self {
        RatFn::from_poly(Poly::var(v))
    }

    pub fn param(name: &str) -> Self {
        RatFn::var(Var::param(name))
    }

    pub fn jet(order: u32) -> Self {
        RatFn::var(Var::jet(order))
    }

    pub fn jet_t(order: u32) -> Self {
        RatFn::var(Var::jet_t(order))
    }

    /// Builds `num / prod(den)` from arbitrary (non-canonical) factors.
    pub fn from_parts(num: Poly, den: Vec<(Poly, u32)>) -> Result<Self> {
        let mut num = num;
        let mut merged: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, k) in den {
            if k == 0 {
                continue;
            }
            if f.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            let (c, fs) = split_factor(&f);
            num = num.scale(&c.recip().pow(k as i32));
            for (g, e) in fs {
                *merged.entry(g).or_insert(0) += e * k;
            }
        }
        let mut r = RatFn {
            num,
            den: merged.into_iter().collect(),
        };
        r.cancel();
        Ok(r)
    }

    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        for (f, k) in self.den.iter_mut() {
            while *k > 0 {
                match divide_out(&self.num, f) {
                    Some(q) => {
                        self.num = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, k)| *k > 0);
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn den_poly(&self) -> Poly {
        self.den
            .iter()
            .fold(Poly::one(), |acc, (f, k)| acc.mul(&f.pow(*k)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.is_empty().then_some(&self.num)
    }

    pub fn as_var(&self) -> Option<&Var> {
        if !self.den.is_empty() || self.num.len() != 1 {
            return None;
        }
        let (m, c) = self.num.leading()?;
        match m.factors() {
            [(v, 1)] if c.is_one() => Some(v),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// True if `v` occurs anywhere, including inside atom arguments.
    pub fn contains_var(&self, v: &Var) -> bool {
        let in_poly =
            |p: &Poly| p.terms().any(|(m, _)| m.factors().iter().any(|(w, _)| w.depends_on(v)));
        in_poly(&self.num) || self.den.iter().any(|(f, _)| in_poly(f))
    }

    /// Top-level variables of numerator and denominator.
    pub fn top_vars(&self) -> Vec<Var> {
        let mut vs = self.num.vars();
        for (f, _) in &self.den {
            vs.extend(f.vars());
        }
        vs.sort();
        vs.dedup();
        vs
    }

    /// Every variable, descending into atom arguments.
    pub fn all_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        fn walk(r: &RatFn, out: &mut Vec<Var>) {
            for v in r.top_vars() {
                if let Var::Atom(a) = &v {
                    for arg in a.args() {
                        walk(arg, out);
                    }
                }
                out.push(v);
            }
        }
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn scale(&self, c: &Q) -> RatFn {
        if c.is_zero() {
            return RatFn::zero();
        }
        RatFn {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFn {
        let mut r = RatFn {
            num: self.num.mul(p),
            den: self.den.clone(),
        };
        r.cancel();
        r
    }

    pub fn recip(&self) -> Result<RatFn> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let num = self.den_poly();
        RatFn::from_parts(num, vec![(self.num.clone(), 1)])
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn> {
        Ok(self * &other.recip()?)
    }

    pub fn pow(&self, e: i32) -> Result<RatFn> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        let e = e as u32;
        if e == 0 {
            return Ok(RatFn::one());
        }
        Ok(RatFn {
            num: self.num.pow(e),
            den: self.den.iter().map(|(f, k)| (f.clone(), k * e)).collect(),
        })
    }

    fn add_impl(&self, other: &RatFn) -> RatFn {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let mut r = RatFn {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            };
            r.cancel();
            return r;
        }
        let mut lcm: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, k) in self.den.iter().chain(other.den.iter()) {
            let e = lcm.entry(f.clone()).or_insert(0);
            *e = (*e).max(*k);
        }
        let lift = |r: &RatFn| -> Poly {
            let mut p = r.num.clone();
            for (f, k) in &lcm {
                let have = r
                    .den
                    .iter()
                    .find(|(g, _)| g == f)
                    .map(|(_, e)| *e)
                    .unwrap_or(0);
                if *k > have {
                    p = p.mul(&f.pow(k - have));
                }
            }
            p
        };
        let mut r = RatFn {
            num: lift(self).add(&lift(other)),
            den: lcm.into_iter().collect(),
        };
        r.cancel();
        r
    }

    fn mul_impl(&self, other: &RatFn) -> RatFn {
        if self.is_zero() || other.is_zero() {
            return RatFn::zero();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return RatFn::from_poly(self.num.mul(&other.num));
        }
        let mut merged: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, k) in self.den.iter().chain(other.den.iter()) {
            *merged.entry(f.clone()).or_insert(0) += k;
        }
        let mut r = RatFn {
            num: self.num.mul(&other.num),
            den: merged.into_iter().collect(),
        };
        r.cancel();
        r
    }

    /// Sum of many terms, grouping equal denominators first.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a RatFn>) -> RatFn {
        let mut groups: BTreeMap<Vec<(Poly, u32)>, Poly> = BTreeMap::new();
        for r in items {
            if r.is_zero() {
                continue;
            }
            let slot = groups.entry(r.den.clone()).or_default();
            *slot = slot.add(&r.num);
        }
        let mut acc = RatFn::zero();
        for (den, num) in groups {
            let mut r = RatFn { num, den };
            r.cancel();
            acc = acc.add_impl(&r);
        }
        acc
    }

    /// Rebuilds from raw pieces without re-normalizing factors; callers
    /// must already satisfy the invariants except cancellation.
    pub(crate) fn from_canonical_parts(num: Poly, den: Vec<(Poly, u32)>) -> RatFn {
        let mut r = RatFn { num, den };
        r.cancel();
        r
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        self.add_impl(rhs)
    }
}

impl Add for RatFn {
    type Output = RatFn;
    fn add(self, rhs: RatFn) -> RatFn {
        self.add_impl(&rhs)
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self.add_impl(&-rhs)
    }
}

impl Sub for RatFn {
    type Output = RatFn;
    fn sub(self, rhs: RatFn) -> RatFn {
        self.add_impl(&-&rhs)
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        self.mul_impl(rhs)
    }
}

impl Mul for RatFn {
    type Output = RatFn;
    fn mul(self, rhs: RatFn) -> RatFn {
        self.mul_impl(&rhs)
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        -&self
    }
}

impl From<Poly> for RatFn {
    fn from(p: Poly) -> Self {
        RatFn::from_poly(p)
    }
}

impl From<Var> for RatFn {
    fn from(v: Var) -> Self {
        RatFn::var(v)
    }
}

impl From<i64> for RatFn {
    fn from(n: i64) -> Self {
        RatFn::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> RatFn {
        RatFn::param(n)
    }

    #[test]
    fn common_denominators_cancel() {
        let a = p("a");
        let b = p("b");
        // a/(a+b) + b/(a+b) == 1
        let s = &a + &b;
        let x = a.div(&s).unwrap() + b.div(&s).unwrap();
        assert!(x.is_one());
        // (a^2 - b^2)/(a - b) == a + b
        let d = (&(&a * &a) - &(&b * &b)).div(&(&a - &b)).unwrap();
        assert_eq!(d, s);
    }

    #[test]
    fn monomial_denominators_split() {
        let a = p("a");
        let b = p("b");
        let r = RatFn::one().div(&(&a * &b).scale(&super::super::poly::q(6))).unwrap();
        assert_eq!(r.den().len(), 2);
        let back = r.recip().unwrap();
        assert_eq!(back, (&a * &b).scale(&super::super::poly::q(6)));
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(RatFn::one().div(&RatFn::zero()), Err(ExprError::DivisionByZero));
    }
}
