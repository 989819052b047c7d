//! Derivations on rational functions: partial derivatives and total
//! derivatives over the jet coordinates, with the chain rule through atoms.

use std::collections::HashMap;


use super::atom::{Atom, Var};
use super::error::{ExprError, Result};
use super::func;
use super::jet::JetVar;
use super::poly::{q, Poly};
use super::ratfn::RatFn;

/// A derivation is fixed by its value on the independent variables; atoms
/// are handled by the chain rule unless `atom_override` claims them.
pub trait Derivation {
    /// Image of a jet variable or parameter. `None` means zero.
    fn image(&self, v: &Var) -> Result<Option<RatFn>>;

    /// Lets a derivation treat a whole atom as an independent variable.
    fn atom_override(&self, _atom: &Var) -> Option<Option<RatFn>> {
        None
    }
}

/// `d/dv` with every other variable held fixed.
pub struct Partial<'a>(pub &'a Var);

impl Derivation for Partial<'_> {
    fn image(&self, v: &Var) -> Result<Option<RatFn>> {
        Ok((v == self.0).then(RatFn::one))
    }

    fn atom_override(&self, atom: &Var) -> Option<Option<RatFn>> {
        (atom == self.0).then(|| Some(RatFn::one()))
    }
}

/// Total x-derivative: `z_k -> z_{k+1}`, `z_{kt} -> z_{(k+1)t}`.
pub struct TotalDx {
    pub max_order: u32,
}

impl Derivation for TotalDx {
    fn image(&self, v: &Var) -> Result<Option<RatFn>> {
        match v {
            Var::Jet(j) => {
                let next = j.dx();
                if next.order > self.max_order {
                    return Err(ExprError::JetOrderExceeded {
                        order: next.order,
                        max: self.max_order,
                    });
                }
                Ok(Some(RatFn::var(Var::Jet(next))))
            }
            _ => Ok(None),
        }
    }
}

/// Formal vertical t-derivative: `z_k -> z_{kt}`.
pub struct TotalDt;

impl Derivation for TotalDt {
    fn image(&self, v: &Var) -> Result<Option<RatFn>> {
        match v {
            Var::Jet(j) if j.t => Err(ExprError::SecondLevelT(*j)),
            Var::Jet(j) => Ok(Some(RatFn::var(Var::Jet(JetVar::t(j.order))))),
            _ => Ok(None),
        }
    }
}

/// A derivation given by a closure on the independent variables.
pub struct FnDerivation<F>(pub F);

impl<F> Derivation for FnDerivation<F>
where
    F: Fn(&Var) -> Result<Option<RatFn>>,
{
    fn image(&self, v: &Var) -> Result<Option<RatFn>> {
        (self.0)(v)
    }
}

struct Engine<'a> {
    d: &'a dyn Derivation,
    memo: HashMap<Var, Option<RatFn>>,
}

impl Engine<'_> {
    fn var_image(&mut self, v: &Var) -> Result<Option<RatFn>> {
        if let Some(hit) = self.memo.get(v) {
            return Ok(hit.clone());
        }
        let img = match v {
            Var::Atom(a) => match self.d.atom_override(v) {
                Some(o) => o,
                None => self.atom_image(a)?,
            },
            _ => self.d.image(v)?,
        };
        let img = img.filter(|r| !r.is_zero());
        self.memo.insert(v.clone(), img.clone());
        Ok(img)
    }

    fn atom_image(&mut self, a: &Atom) -> Result<Option<RatFn>> {
        match a {
            Atom::Func { name, derivs, args } => {
                let mut parts = Vec::new();
                for (j, arg) in args.iter().enumerate() {
                    let da = self.derive(arg)?;
                    if da.is_zero() {
                        continue;
                    }
                    let mut ds = derivs.clone();
                    ds[j] += 1;
                    let f = func::func(name, ds, args.clone());
                    parts.push(&f * &da);
                }
                Ok(Some(RatFn::sum(parts.iter())))
            }
            Atom::Builtin { f, arg } => {
                let da = self.derive(arg)?;
                if da.is_zero() {
                    return Ok(None);
                }
                Ok(Some(&func::builtin_derivative(*f, arg)? * &da))
            }
        }
    }

    fn derive_poly(&mut self, p: &Poly) -> Result<RatFn> {
        let mut poly_part = Poly::zero();
        let mut rational_parts = Vec::new();
        for (m, c) in p.terms() {
            for (w, e) in m.factors() {
                let Some(img) = self.var_image(w)? else {
                    continue;
                };
                let rest = m.without(w, 1);
                let coeff = c * q(*e as i64);
                match img.as_poly() {
                    Some(ip) => poly_part.add_assign_scaled(ip, &coeff, &rest),
                    None => rational_parts.push(img.mul_poly(&Poly::term(rest, coeff))),
                }
            }
        }
        rational_parts.push(RatFn::from_poly(poly_part));
        Ok(RatFn::sum(rational_parts.iter()))
    }

    fn derive(&mut self, r: &RatFn) -> Result<RatFn> {
        let dn = self.derive_poly(r.num())?;
        if r.den().is_empty() {
            return Ok(dn);
        }
        let inv_den = RatFn::from_canonical_parts(Poly::one(), r.den().to_vec());
        let mut parts = vec![&dn * &inv_den];
        for (i, (f, k)) in r.den().iter().enumerate() {
            let df = self.derive_poly(f)?;
            if df.is_zero() {
                continue;
            }
            let mut den = r.den().to_vec();
            den[i].1 += 1;
            let base = RatFn::from_canonical_parts(r.num().scale(&q(-(*k as i64))), den);
            parts.push(&base * &df);
        }
        Ok(RatFn::sum(parts.iter()))
    }
}

/// Applies a derivation. The result is not reduced by any context.
pub fn derive(r: &RatFn, d: &dyn Derivation) -> Result<RatFn> {
    Engine {
        d,
        memo: HashMap::new(),
    }
    .derive(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::atom::Builtin;

    #[test]
    fn product_rule_on_jets() {
        // D_x(z*z1) = z1^2 + z*z2
        let z = RatFn::jet(0);
        let z1 = RatFn::jet(1);
        let r = derive(&(&z * &z1), &TotalDx { max_order: 8 }).unwrap();
        let expect = &(&z1 * &z1) + &(&z * &RatFn::jet(2));
        assert_eq!(r, expect);
    }

    #[test]
    fn chain_rule_through_composite_argument() {
        let z = RatFn::jet(0);
        let z1 = RatFn::jet(1);
        let lam = RatFn::param("lam");
        let arg = &(&lam * &(&z1 * &z1)) - &(&z * &z);
        let phi = func::func("phi", vec![0], vec![arg.clone()]);
        let d = derive(&phi, &Partial(&Var::jet(1))).unwrap();
        let expect = &func::func("phi", vec![1], vec![arg]) * &(&lam * &z1).scale(&q(2));
        assert_eq!(d, expect);
    }

    #[test]
    fn quotient_rule() {
        let z = RatFn::jet(0);
        let eta = RatFn::param("eta");
        let s = func::builtin(Builtin::Sin, z.clone()).unwrap();
        let r = s.div(&eta).unwrap();
        let d = derive(&r, &TotalDx { max_order: 8 }).unwrap();
        let c = func::builtin(Builtin::Cos, z).unwrap();
        assert_eq!(d, (&c * &RatFn::jet(1)).div(&eta).unwrap());
        // d/deta (sin z / eta) = -sin z / eta^2
        let de = derive(&r, &Partial(&Var::param("eta"))).unwrap();
        assert_eq!(de, (-&s).div(&(&eta * &eta)).unwrap());
    }

    #[test]
    fn t_derivative_rejects_second_level() {
        let err = derive(&RatFn::jet_t(1), &TotalDt).unwrap_err();
        assert_eq!(err, ExprError::SecondLevelT(JetVar::t(1)));
    }

    #[test]
    fn max_order_is_enforced() {
        let err = derive(&RatFn::jet(8), &TotalDx { max_order: 8 }).unwrap_err();
        assert!(matches!(err, ExprError::JetOrderExceeded { order: 9, max: 8 }));
    }
}
