//! Normalization context: side relations for radicals, linear ODE rules for
//! formal functions, and the trigonometric/hyperbolic square relations.

use std::collections::HashMap;
use std::sync::Arc;

use super::atom::{Atom, Builtin, Var};
use super::diff::{derive, Partial};
use super::error::{ExprError, Result};
use super::func;
use super::poly::{Monomial, Poly};
use super::ratfn::RatFn;
use super::subst::{map_poly, rebuild_atom};

/// `symbol^2 = square`.
#[derive(Clone, Debug, PartialEq)]
pub struct SideRelation {
    pub symbol: Arc<str>,
    pub square: RatFn,
}

/// `f^(order) = sum_j coeffs[j] * f^(j)` for a one-argument function `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeRule {
    pub function: Arc<str>,
    pub order: u32,
    pub coeffs: Vec<RatFn>,
}

impl OdeRule {
    /// Reads the coefficients off a right-hand side that is linear in the
    /// lower derivatives of `function` (any argument) with constant
    /// coefficients.
    pub fn from_rhs(function: &str, order: u32, rhs: &RatFn) -> Result<Self> {
        if order == 0 {
            return Err(ExprError::InvalidRule(format!("order of `{function}` must be positive")));
        }
        let atoms: Vec<Var> = rhs
            .top_vars()
            .into_iter()
            .filter(|v| matches!(v.as_atom(), Some(Atom::Func { name, .. }) if &**name == function))
            .collect();
        let mut coeffs = vec![RatFn::zero(); order as usize];
        let mut rest = rhs.clone();
        for v in &atoms {
            let Some(Atom::Func { derivs, .. }) = v.as_atom() else {
                unreachable!()
            };
            if derivs.len() != 1 || derivs[0] >= order {
                return Err(ExprError::InvalidRule(format!(
                    "right-hand side for `{function}` must use derivatives below order {order}"
                )));
            }
            let c = derive(rhs, &Partial(v))?;
            if !c.is_constant() && c.all_vars().iter().any(|w| !matches!(w, Var::Param(_))) {
                return Err(ExprError::InvalidRule(format!(
                    "coefficients for `{function}` must be constants or parameters"
                )));
            }
            rest = &rest - &(&c * &RatFn::var(v.clone()));
            coeffs[derivs[0] as usize] = &coeffs[derivs[0] as usize] + &c;
        }
        if !rest.is_zero() {
            return Err(ExprError::InvalidRule(format!(
                "right-hand side for `{function}` is not linear homogeneous"
            )));
        }
        Ok(OdeRule {
            function: Arc::from(function),
            order,
            coeffs,
        })
    }
}

/// Everything `reduce` needs; passed explicitly, never global.
#[derive(Clone, Debug)]
pub struct Context {
    pub side_relations: Vec<SideRelation>,
    pub ode_rules: Vec<OdeRule>,
    pub max_jet_order: u32,
    /// Applies `sin^2 -> 1 - cos^2` and `cosh^2 -> 1 + sinh^2`.
    pub trig: bool,
}

impl Default for Context {
    fn default() -> Self {
        Context {
            side_relations: Vec::new(),
            ode_rules: Vec::new(),
            max_jet_order: 8,
            trig: true,
        }
    }
}

const MAX_PASSES: usize = 64;

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_side_relation(mut self, symbol: &str, square: RatFn) -> Self {
        self.add_side_relation(symbol, square);
        self
    }

    pub fn add_side_relation(&mut self, symbol: &str, square: RatFn) {
        self.side_relations.retain(|s| &*s.symbol != symbol);
        self.side_relations.push(SideRelation {
            symbol: Arc::from(symbol),
            square,
        });
    }

    pub fn with_ode_rule(mut self, rule: OdeRule) -> Self {
        self.add_ode_rule(rule);
        self
    }

    pub fn add_ode_rule(&mut self, rule: OdeRule) {
        self.ode_rules.retain(|r| r.function != rule.function);
        self.ode_rules.push(rule);
    }

    /// Union of two contexts; entries of `other` win on conflicts.
    pub fn merged(&self, other: &Context) -> Context {
        let mut out = self.clone();
        for s in &other.side_relations {
            out.add_side_relation(&s.symbol, s.square.clone());
        }
        for r in &other.ode_rules {
            out.add_ode_rule(r.clone());
        }
        out.max_jet_order = self.max_jet_order.max(other.max_jet_order);
        out
    }

    fn relation(&self, v: &Var) -> Option<&SideRelation> {
        let name = v.as_param()?;
        self.side_relations.iter().find(|s| &*s.symbol == name)
    }

    fn is_radical(&self, v: &Var) -> bool {
        self.relation(v).is_some()
    }

    /// Canonical form modulo every registered relation.
    pub fn reduce(&self, r: &RatFn) -> Result<RatFn> {
        let mut memo = HashMap::new();
        let mut cur = self.reduce_atoms(r, &mut memo)?;
        for _ in 0..MAX_PASSES {
            let next = self.reduce_step(&cur)?;
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// `reduce(r) == 0`.
    pub fn is_zero(&self, r: &RatFn) -> Result<bool> {
        Ok(self.reduce(r)?.is_zero())
    }

    pub fn equal(&self, a: &RatFn, b: &RatFn) -> Result<bool> {
        self.is_zero(&(a - b))
    }

    fn reduce_atoms(&self, r: &RatFn, memo: &mut HashMap<Var, Option<RatFn>>) -> Result<RatFn> {
        if self.ode_rules.is_empty() && self.side_relations.is_empty() && !self.trig {
            return Ok(r.clone());
        }
        if !r.top_vars().iter().any(|v| matches!(v, Var::Atom(_))) {
            return Ok(r.clone());
        }
        let mut img = |v: &Var| self.atom_image(v, memo);
        super::subst::map_ratfn(r, &mut img)
    }

    fn atom_image(&self, v: &Var, memo: &mut HashMap<Var, Option<RatFn>>) -> Result<Option<RatFn>> {
        let Var::Atom(a) = v else {
            return Ok(None);
        };
        if let Some(hit) = memo.get(v) {
            return Ok(hit.clone());
        }
        let mut changed = false;
        let mut args = Vec::new();
        for arg in a.args() {
            let n = self.reduce(arg)?;
            changed |= &n != arg;
            args.push(n);
        }
        let out = match &**a {
            Atom::Func { name, derivs, .. } if derivs.len() == 1 => {
                match self.ode_rules.iter().find(|r| r.function == *name) {
                    Some(rule) if derivs[0] >= rule.order => {
                        Some(self.expand_ode(rule, derivs[0], &args[0])?)
                    }
                    _ if changed => Some(rebuild_atom(a, args)?),
                    _ => None,
                }
            }
            _ if changed => Some(rebuild_atom(a, args)?),
            _ => None,
        };
        memo.insert(v.clone(), out.clone());
        Ok(out)
    }

    /// `f^(k)(arg)` rewritten in derivatives below the rule's order.
    fn expand_ode(&self, rule: &OdeRule, k: u32, arg: &RatFn) -> Result<RatFn> {
        // coefficients on f, f', ..., f^(n-1)
        let n = rule.order as usize;
        let mut coeffs = rule.coeffs.clone();
        for _ in rule.order..k {
            // differentiate: shift up, then fold the top back through the rule
            let top = coeffs[n - 1].clone();
            let mut next = vec![RatFn::zero()];
            next.extend(coeffs[..n - 1].iter().cloned());
            for j in 0..n {
                next[j] = &next[j] + &(&top * &rule.coeffs[j]);
            }
            coeffs = next;
        }
        let parts: Vec<RatFn> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c * &func::func(&rule.function, vec![j as u32], vec![arg.clone()]))
            .collect();
        Ok(RatFn::sum(parts.iter()))
    }

    fn monomial_rewrite(&self, v: &Var, e: u32) -> Option<(u32, RatFn)> {
        if e < 2 {
            return None;
        }
        if let Some(rel) = self.relation(v) {
            return Some((e % 2, rel.square.clone()));
        }
        if !self.trig {
            return None;
        }
        let Atom::Builtin { f, arg } = v.as_atom()? else {
            return None;
        };
        let (other, sign) = match f {
            Builtin::Sin => (Builtin::Cos, -1),
            Builtin::Cosh => (Builtin::Sinh, 1),
            _ => return None,
        };
        let o = func::builtin(other, arg.clone()).ok()?;
        let o2 = (&o * &o).scale(&super::poly::q(sign));
        Some((e % 2, &RatFn::one() + &o2))
    }

    /// Rewrites even powers of radicals and of `sin`/`cosh` atoms.
    pub fn reduce_poly(&self, p: &Poly) -> Result<RatFn> {
        let needs = p
            .terms()
            .any(|(m, _)| m.factors().iter().any(|(v, e)| self.monomial_rewrite(v, *e).is_some()));
        if !needs {
            return Ok(RatFn::from_poly(p.clone()));
        }
        let mut cache: HashMap<(Var, u32), RatFn> = HashMap::new();
        let mut kept = Poly::zero();
        let mut parts = Vec::new();
        for (m, c) in p.terms() {
            let mut fixed = Vec::new();
            let mut factor: Option<RatFn> = None;
            for (v, e) in m.factors() {
                match self.monomial_rewrite(v, *e) {
                    None => fixed.push((v.clone(), *e)),
                    Some((rem, base)) => {
                        if rem > 0 {
                            fixed.push((v.clone(), rem));
                        }
                        let key = (v.clone(), e / 2);
                        let pw = match cache.get(&key) {
                            Some(x) => x.clone(),
                            None => {
                                let x = base.pow((e / 2) as i32)?;
                                cache.insert(key, x.clone());
                                x
                            }
                        };
                        factor = Some(match factor {
                            None => pw,
                            Some(f) => &f * &pw,
                        });
                    }
                }
            }
            let mono = Monomial::from_factors(fixed);
            match factor {
                None => kept.add_term(mono, c.clone()),
                Some(f) => parts.push(f.mul_poly(&Poly::term(mono, c.clone()))),
            }
        }
        parts.push(RatFn::from_poly(kept));
        Ok(RatFn::sum(parts.iter()))
    }

    fn reduce_step(&self, r: &RatFn) -> Result<RatFn> {
        let mut out = self.reduce_poly(r.num())?;
        for (f, k) in r.den() {
            let g = self.reduce_poly(f)?;
            if g.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            out = out.div(&g.pow(*k as i32)?)?;
        }
        self.rationalise(&out)
    }

    /// Clears one radical from one denominator factor by multiplying with
    /// its conjugate.
    fn rationalise(&self, r: &RatFn) -> Result<RatFn> {
        for (i, (f, k)) in r.den().iter().enumerate() {
            let Some(s) = f.vars().into_iter().find(|v| self.is_radical(v)) else {
                continue;
            };
            let cs = f.coefficients_in(&s);
            if cs.len() != 2 {
                continue;
            }
            let a = RatFn::from_poly(cs[0].clone());
            let b = RatFn::from_poly(cs[1].clone());
            let conj = &a - &(&b * &RatFn::var(s.clone()));
            let square = &self.relation(&s).unwrap().square;
            let norm = &(&a * &a) - &(&(&b * &b) * square);
            if norm.is_zero() {
                continue;
            }
            let mut rest = r.den().to_vec();
            rest.remove(i);
            let lifted = RatFn::from_canonical_parts(r.num().clone(), rest);
            let num = &lifted * &conj.pow(*k as i32)?;
            return num.div(&norm.pow(*k as i32)?);
        }
        Ok(r.clone())
    }

    /// Replaces variables through `img` and reduces.
    pub fn map_and_reduce(
        &self,
        p: &Poly,
        img: &mut dyn FnMut(&Var) -> Result<Option<RatFn>>,
    ) -> Result<RatFn> {
        self.reduce(&map_poly(p, img)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::q;

    fn p(n: &str) -> RatFn {
        RatFn::param(n)
    }

    #[test]
    fn radical_squares_reduce() {
        let square = &p("gamma") + &(&p("delta") * &(&p("sigma") * &p("sigma")));
        let ctx = Context::new().with_side_relation("s", square.clone());
        let s = p("s");
        assert_eq!(ctx.reduce(&(&s * &s)).unwrap(), square);
        let cube = ctx.reduce(&s.pow(3).unwrap()).unwrap();
        assert_eq!(cube, &square * &s);
    }

    #[test]
    fn radical_denominators_are_rationalised() {
        // 1/(1+s) with s^2 = 2 is s - 1
        let ctx = Context::new().with_side_relation("s", RatFn::int(2));
        let s = p("s");
        let r = RatFn::one().div(&(&RatFn::one() + &s)).unwrap();
        assert_eq!(ctx.reduce(&r).unwrap(), &s - &RatFn::one());
    }

    #[test]
    fn pythagorean_relation() {
        let ctx = Context::new();
        let z = RatFn::jet(0);
        let s = func::builtin(Builtin::Sin, z.clone()).unwrap();
        let c = func::builtin(Builtin::Cos, z.clone()).unwrap();
        assert!(ctx.reduce(&(&(&s * &s) + &(&c * &c))).unwrap().is_one());
        let sh = func::builtin(Builtin::Sinh, z.clone()).unwrap();
        let ch = func::builtin(Builtin::Cosh, z).unwrap();
        assert!(ctx.reduce(&(&(&ch * &ch) - &(&sh * &sh))).unwrap().is_one());
    }

    #[test]
    fn ode_rule_rewrites_second_derivative() {
        // phi'' = -(r^2 - delta) phi
        let z1 = RatFn::jet(1);
        let k = &(&p("r") * &p("r")) - &p("delta");
        let phi0 = func::func("phi", vec![0], vec![z1.clone()]);
        let rhs = -&(&k * &phi0);
        let rule = OdeRule::from_rhs("phi", 2, &rhs).unwrap();
        let ctx = Context::new().with_ode_rule(rule);
        let phi2 = func::func("phi", vec![2], vec![z1.clone()]);
        assert_eq!(ctx.reduce(&phi2).unwrap(), rhs);
        // phi''' = -(r^2 - delta) phi'
        let phi3 = func::func("phi", vec![3], vec![z1.clone()]);
        let phi1 = func::func("phi", vec![1], vec![z1]);
        assert_eq!(ctx.reduce(&phi3).unwrap(), -&(&k * &phi1));
        let _ = q(0);
    }

    #[test]
    fn nonlinear_ode_rules_are_rejected() {
        let z = RatFn::jet(0);
        let f = func::func("f", vec![0], vec![z]);
        assert!(OdeRule::from_rhs("f", 2, &(&f * &f)).is_err());
    }
}
