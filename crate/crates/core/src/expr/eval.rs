//! Floating-point evaluation of canonical expressions.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::atom::{Atom, Builtin, Var};
use super::error::{ExprError, Result};
use super::jet::JetVar;
use super::poly::Poly;
use super::ratfn::RatFn;

/// Numeric stand-in for a formal function: values of its partial
/// derivatives `derivs` at `args`, or `None` past what it can supply.
pub trait NumericFunction: Send + Sync {
    fn call(&self, derivs: &[u32], args: &[f64]) -> Option<f64>;
}

/// A one-argument function given by a closure returning the `k`-th
/// derivative, with a fixed maximum order.
pub struct Univariate<F> {
    pub max_order: u32,
    pub f: F,
}

impl<F> NumericFunction for Univariate<F>
where
    F: Fn(u32, f64) -> f64 + Send + Sync,
{
    fn call(&self, derivs: &[u32], args: &[f64]) -> Option<f64> {
        match (derivs, args) {
            ([k], [x]) if *k <= self.max_order => Some((self.f)(*k, *x)),
            _ => None,
        }
    }
}

fn jet_index(j: JetVar) -> usize {
    2 * j.order as usize + j.t as usize
}

/// Numeric bindings for parameters, jet variables and formal functions.
#[derive(Clone, Default)]
pub struct NumEnv {
    params: HashMap<String, f64>,
    jets: Vec<Option<f64>>,
    functions: HashMap<String, Arc<dyn NumericFunction>>,
}

impl NumEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn param(mut self, name: &str, v: f64) -> Self {
        self.set_param(name, v);
        self
    }

    pub fn jet(mut self, order: u32, v: f64) -> Self {
        self.set_jet(JetVar::x(order), v);
        self
    }

    pub fn jet_t(mut self, order: u32, v: f64) -> Self {
        self.set_jet(JetVar::t(order), v);
        self
    }

    pub fn function(mut self, name: &str, f: Arc<dyn NumericFunction>) -> Self {
        self.functions.insert(name.to_string(), f);
        self
    }

    pub fn set_param(&mut self, name: &str, v: f64) {
        self.params.insert(name.to_string(), v);
    }

    pub fn set_jet(&mut self, j: JetVar, v: f64) {
        let i = jet_index(j);
        if self.jets.len() <= i {
            self.jets.resize(i + 1, None);
        }
        self.jets[i] = Some(v);
    }

    pub fn get_param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn get_jet(&self, j: JetVar) -> Option<f64> {
        self.jets.get(jet_index(j)).copied().flatten()
    }

    pub fn eval(&self, r: &RatFn) -> Result<f64> {
        Compiled::new(r).eval(self)
    }
}

enum Slot {
    Param(Arc<str>),
    Jet(JetVar),
    Func {
        name: Arc<str>,
        derivs: Vec<u32>,
        args: Vec<Compiled>,
    },
    Builtin(Builtin, Box<Compiled>),
}

struct CPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

/// A rational function with coefficients converted to `f64` once, for
/// repeated evaluation on grids.
pub struct Compiled {
    slots: Vec<Slot>,
    num: CPoly,
    den: Vec<(CPoly, i32)>,
}

impl Compiled {
    pub fn new(r: &RatFn) -> Self {
        let mut index: HashMap<Var, usize> = HashMap::new();
        let mut slots = Vec::new();
        let mut comp = |p: &Poly| -> CPoly {
            let terms = p
                .terms()
                .map(|(m, c)| {
                    let fs = m
                        .factors()
                        .iter()
                        .map(|(v, e)| {
                            let i = *index.entry(v.clone()).or_insert_with(|| {
                                slots.push(slot_for(v));
                                slots.len() - 1
                            });
                            (i, *e as i32)
                        })
                        .collect();
                    (c.to_f64().unwrap_or(f64::NAN), fs)
                })
                .collect();
            CPoly { terms }
        };
        let num = comp(r.num());
        let den = r.den().iter().map(|(f, k)| (comp(f), *k as i32)).collect();
        Compiled { slots, num, den }
    }

    pub fn eval(&self, env: &NumEnv) -> Result<f64> {
        let mut vals = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            vals.push(match s {
                Slot::Param(p) => env
                    .get_param(p)
                    .ok_or_else(|| ExprError::Unbound(p.to_string()))?,
                Slot::Jet(j) => env.get_jet(*j).ok_or_else(|| ExprError::Unbound(j.to_string()))?,
                Slot::Builtin(f, arg) => f.eval(arg.eval(env)?),
                Slot::Func { name, derivs, args } => {
                    let f = env
                        .functions
                        .get(&**name)
                        .ok_or_else(|| ExprError::Unbound(name.to_string()))?;
                    let xs = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>>>()?;
                    f.call(derivs, &xs).ok_or_else(|| ExprError::DerivativeOrder {
                        name: name.to_string(),
                        order: derivs.iter().sum(),
                        max: derivs.iter().sum::<u32>().saturating_sub(1),
                    })?
                }
            });
        }
        let ev = |p: &CPoly| -> f64 {
            p.terms
                .iter()
                .map(|(c, fs)| fs.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e)))
                .sum()
        };
        let mut out = ev(&self.num);
        for (p, k) in &self.den {
            let d = ev(p).powi(*k);
            if d.abs() < 1e-300 {
                return Err(ExprError::NumericDivision);
            }
            out /= d;
        }
        Ok(out)
    }
}

fn slot_for(v: &Var) -> Slot {
    match v {
        Var::Param(p) => Slot::Param(p.clone()),
        Var::Jet(j) => Slot::Jet(*j),
        Var::Atom(a) => match &**a {
            Atom::Func { name, derivs, args } => Slot::Func {
                name: name.clone(),
                derivs: derivs.clone(),
                args: args.iter().map(Compiled::new).collect(),
            },
            Atom::Builtin { f, arg } => Slot::Builtin(*f, Box::new(Compiled::new(arg))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::func;

    #[test]
    fn sine_over_eta() {
        let z = RatFn::jet(0);
        let r = func::builtin(Builtin::Sin, z)
            .unwrap()
            .div(&RatFn::param("eta"))
            .unwrap();
        let env = NumEnv::new().jet(0, std::f64::consts::FRAC_PI_2).param("eta", 2.0);
        assert!((env.eval(&r).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unbound_and_order_errors() {
        let r = RatFn::param("q");
        assert_eq!(NumEnv::new().eval(&r), Err(ExprError::Unbound("q".into())));
        let h3 = func::func("h", vec![3], vec![RatFn::jet(0)]);
        let env = NumEnv::new().jet(0, 0.1).function(
            "h",
            Arc::new(Univariate {
                max_order: 2,
                f: |_k: u32, x: f64| x,
            }),
        );
        assert!(matches!(env.eval(&h3), Err(ExprError::DerivativeOrder { .. })));
    }

    #[test]
    fn tiny_divisor_is_an_error() {
        let r = RatFn::one().div(&RatFn::param("eps")).unwrap();
        let env = NumEnv::new().param("eps", 1e-320);
        assert_eq!(env.eval(&r), Err(ExprError::NumericDivision));
    }
}
