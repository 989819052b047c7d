//! Variable mapping and simultaneous substitution.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::atom::{Atom, Var};
use super::diff::{derive, Partial};
use super::error::{ExprError, Result};
use super::func;
use super::poly::{Monomial, Poly};
use super::ratfn::RatFn;

/// Replaces top-level variables through `img`; `None` keeps a variable.
pub(crate) fn map_poly(
    p: &Poly,
    img: &mut dyn FnMut(&Var) -> Result<Option<RatFn>>,
) -> Result<RatFn> {
    let mut kept = Poly::zero();
    let mut parts = Vec::new();
    for (m, c) in p.terms() {
        let mut fixed = Vec::new();
        let mut factor: Option<RatFn> = None;
        for (v, e) in m.factors() {
            match img(v)? {
                None => fixed.push((v.clone(), *e)),
                Some(r) => {
                    let rp = r.pow(*e as i32)?;
                    factor = Some(match factor {
                        None => rp,
                        Some(f) => &f * &rp,
                    });
                }
            }
        }
        let base = Monomial::from_factors(fixed);
        match factor {
            None => kept.add_term(base, c.clone()),
            Some(f) => parts.push(f.mul_poly(&Poly::term(base, c.clone()))),
        }
    }
    parts.push(RatFn::from_poly(kept));
    Ok(RatFn::sum(parts.iter()))
}

/// Applies `map_poly` to numerator and every denominator factor.
pub(crate) fn map_ratfn(
    r: &RatFn,
    img: &mut dyn FnMut(&Var) -> Result<Option<RatFn>>,
) -> Result<RatFn> {
    let mut out = map_poly(r.num(), img)?;
    for (f, k) in r.den() {
        let g = map_poly(f, img)?;
        if g.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        out = out.div(&g.pow(*k as i32)?)?;
    }
    Ok(out)
}

/// Rebuilds an atom from new arguments, re-canonicalizing builtins.
pub(crate) fn rebuild_atom(a: &Atom, args: Vec<RatFn>) -> Result<RatFn> {
    match a {
        Atom::Func { name, derivs, .. } => Ok(func::func(name, derivs.clone(), args)),
        Atom::Builtin { f, .. } => func::builtin(*f, args.into_iter().next().unwrap()),
    }
}

/// A function binding: `body` written in the placeholders `u` (one argument)
/// or `u1, u2, ...` (several arguments).
#[derive(Clone, Debug)]
pub struct FunctionBinding {
    pub arity: usize,
    pub body: RatFn,
}

impl FunctionBinding {
    pub fn new(arity: usize, body: RatFn) -> Self {
        FunctionBinding { arity, body }
    }

    pub fn placeholder(arity: usize, j: usize) -> Var {
        if arity == 1 {
            Var::param("u")
        } else {
            Var::param(&format!("u{}", j + 1))
        }
    }

    fn derivative(&self, derivs: &[u32]) -> Result<RatFn> {
        let mut r = self.body.clone();
        for (j, d) in derivs.iter().enumerate() {
            let u = Self::placeholder(self.arity, j);
            for _ in 0..*d {
                r = derive(&r, &Partial(&u))?;
            }
        }
        Ok(r)
    }
}

/// Simultaneous bindings for variables and formal functions.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    pub vars: BTreeMap<Var, RatFn>,
    pub functions: BTreeMap<Arc<str>, FunctionBinding>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(mut self, v: Var, r: RatFn) -> Self {
        self.vars.insert(v, r);
        self
    }

    pub fn param(self, name: &str, r: RatFn) -> Self {
        self.var(Var::param(name), r)
    }

    pub fn function(mut self, name: &str, arity: usize, body: RatFn) -> Self {
        self.functions
            .insert(Arc::from(name), FunctionBinding::new(arity, body));
        self
    }

    fn key_name(v: &Var) -> String {
        v.to_string()
    }

    /// Rejects bindings whose right-hand sides refer back to bound keys
    /// (directly or through a chain).
    fn check_acyclic(&self) -> Result<()> {
        let mut edges: HashMap<String, Vec<String>> = HashMap::new();
        let refs = |r: &RatFn| -> Vec<String> {
            let mut out = Vec::new();
            for v in r.all_vars() {
                if self.vars.contains_key(&v) {
                    out.push(Self::key_name(&v));
                }
                if let Var::Atom(a) = &v {
                    if let Atom::Func { name, .. } = &**a {
                        if self.functions.contains_key(name) {
                            out.push(format!("{name}()"));
                        }
                    }
                }
            }
            out
        };
        for (k, r) in &self.vars {
            edges.insert(Self::key_name(k), refs(r));
        }
        for (k, b) in &self.functions {
            edges.insert(format!("{k}()"), refs(&b.body));
        }
        // depth-first search with colors
        let mut color: HashMap<&str, u8> = HashMap::new();
        fn visit<'a>(
            n: &'a str,
            edges: &'a HashMap<String, Vec<String>>,
            color: &mut HashMap<&'a str, u8>,
        ) -> Result<()> {
            match color.get(n) {
                Some(1) => return Err(ExprError::CyclicBinding(n.trim_end_matches("()").into())),
                Some(2) => return Ok(()),
                _ => {}
            }
            color.insert(n, 1);
            if let Some(next) = edges.get(n) {
                for m in next {
                    visit(m, edges, color)?;
                }
            }
            color.insert(n, 2);
            Ok(())
        }
        for k in edges.keys() {
            visit(k, &edges, &mut color)?;
        }
        Ok(())
    }
}

struct Substituter<'a> {
    b: &'a Bindings,
    memo: HashMap<Var, Option<RatFn>>,
}

impl Substituter<'_> {
    fn image(&mut self, v: &Var) -> Result<Option<RatFn>> {
        if let Some(hit) = self.memo.get(v) {
            return Ok(hit.clone());
        }
        let out = if let Some(r) = self.b.vars.get(v) {
            Some(r.clone())
        } else if let Var::Atom(a) = v {
            let mut changed = false;
            let mut args = Vec::new();
            for arg in a.args() {
                let n = self.apply(arg)?;
                changed |= &n != arg;
                args.push(n);
            }
            match &**a {
                Atom::Func { name, derivs, .. } if self.b.functions.contains_key(name) => {
                    let fb = &self.b.functions[name];
                    if fb.arity != args.len() {
                        return Err(ExprError::InvalidRule(format!(
                            "function `{name}` bound with {} arguments, used with {}",
                            fb.arity,
                            args.len()
                        )));
                    }
                    let d = fb.derivative(derivs)?;
                    let place = Bindings {
                        vars: args
                            .into_iter()
                            .enumerate()
                            .map(|(j, r)| (FunctionBinding::placeholder(fb.arity, j), r))
                            .collect(),
                        functions: BTreeMap::new(),
                    };
                    Some(
                        Substituter {
                            b: &place,
                            memo: HashMap::new(),
                        }
                        .apply(&d)?,
                    )
                }
                _ if changed => Some(rebuild_atom(a, args)?),
                _ => None,
            }
        } else {
            None
        };
        self.memo.insert(v.clone(), out.clone());
        Ok(out)
    }

    fn apply(&mut self, r: &RatFn) -> Result<RatFn> {
        let mut img = |v: &Var| self.image(v);
        map_ratfn(r, &mut img)
    }
}

/// Simultaneous substitution. The result is not reduced by any context.
pub fn substitute(r: &RatFn, b: &Bindings) -> Result<RatFn> {
    b.check_acyclic()?;
    Substituter {
        b,
        memo: HashMap::new(),
    }
    .apply(r)
}

/// Simultaneous substitution that allows a key to occur in its own image,
/// for coordinate changes such as `z1 -> -z1`.
pub fn change_coordinates(r: &RatFn, b: &Bindings) -> Result<RatFn> {
    Substituter {
        b,
        memo: HashMap::new(),
    }
    .apply(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::q;

    #[test]
    fn zeroing_a_jet_variable() {
        let z1 = RatFn::jet(1);
        let b = Bindings::new().var(Var::jet(1), RatFn::zero());
        assert!(substitute(&(&z1 * &z1), &b).unwrap().is_zero());
    }

    #[test]
    fn function_binding_collapses_derivatives() {
        // h(z) -> z + m : h' -> 1, h'' -> 0
        let z = RatFn::jet(0);
        let h1 = func::func("h", vec![1], vec![z.clone()]);
        let h2 = func::func("h", vec![2], vec![z.clone()]);
        let h0 = func::func("h", vec![0], vec![z.clone()]);
        let body = &RatFn::param("u") + &RatFn::param("m");
        let b = Bindings::new().function("h", 1, body);
        assert!(substitute(&h1, &b).unwrap().is_one());
        assert!(substitute(&h2, &b).unwrap().is_zero());
        assert_eq!(substitute(&h0, &b).unwrap(), &z + &RatFn::param("m"));
    }

    #[test]
    fn simultaneous_not_sequential() {
        let a = RatFn::param("a");
        let b = RatFn::param("b");
        let bind = Bindings::new()
            .param("a", RatFn::int(1))
            .param("b", RatFn::int(0));
        let psi = RatFn::param("psi");
        let e = &(&a * &psi) + &(&b * &(&RatFn::jet(0) - &RatFn::jet(2)));
        assert_eq!(substitute(&e, &bind).unwrap(), psi);
        let _ = q(0);
    }

    #[test]
    fn cycles_are_rejected() {
        let bind = Bindings::new()
            .param("a", RatFn::param("b"))
            .param("b", &RatFn::param("a") + &RatFn::int(1));
        assert!(matches!(
            substitute(&RatFn::param("a"), &bind),
            Err(ExprError::CyclicBinding(_))
        ));
        let selfloop = Bindings::new().param("a", &RatFn::param("a") + &RatFn::int(1));
        assert!(substitute(&RatFn::param("a"), &selfloop).is_err());
    }

    #[test]
    fn substitution_reaches_inside_atom_arguments() {
        let z = RatFn::jet(0);
        let s = func::builtin(crate::expr::atom::Builtin::Sin, z.clone()).unwrap();
        let b = Bindings::new().var(Var::jet(0), -&RatFn::jet(1));
        let expect = -&func::builtin(crate::expr::atom::Builtin::Sin, RatFn::jet(1)).unwrap();
        assert_eq!(substitute(&s, &b).unwrap(), expect);
    }
}
