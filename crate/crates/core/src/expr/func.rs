//! Canonical construction of atoms.

use std::sync::Arc;

use num_traits::{One, Signed};

use super::atom::{Atom, AtomRef, Builtin, Var};
use super::error::Result;
use super::poly::{Poly, Q};
use super::ratfn::RatFn;

/// `name^(derivs)(args)` as a rational function (a single variable).
pub fn func(name: &str, derivs: Vec<u32>, args: Vec<RatFn>) -> RatFn {
    debug_assert_eq!(derivs.len(), args.len());
    RatFn::var(Var::Atom(AtomRef::new(Atom::Func {
        name: Arc::from(name),
        derivs,
        args,
    })))
}

fn atom_var(f: Builtin, arg: RatFn) -> RatFn {
    RatFn::var(Var::Atom(AtomRef::new(Atom::Builtin { f, arg })))
}

fn leading_negative(r: &RatFn) -> bool {
    r.num().leading().is_some_and(|(_, c)| c.is_negative())
}

/// `f(arg)` in canonical form: odd/even symmetry moves a negative leading
/// coefficient out of the argument, zero arguments evaluate, and `exp` of a
/// polynomial is split into one atom per monomial.
pub fn builtin(f: Builtin, arg: RatFn) -> Result<RatFn> {
    if arg.is_zero() {
        return Ok(match f {
            Builtin::Sin | Builtin::Sinh => RatFn::zero(),
            Builtin::Cos | Builtin::Cosh | Builtin::Exp => RatFn::one(),
        });
    }
    match f {
        Builtin::Sin | Builtin::Sinh => {
            if leading_negative(&arg) {
                Ok(-atom_var(f, -arg))
            } else {
                Ok(atom_var(f, arg))
            }
        }
        Builtin::Cos | Builtin::Cosh => {
            if leading_negative(&arg) {
                Ok(atom_var(f, -arg))
            } else {
                Ok(atom_var(f, arg))
            }
        }
        Builtin::Exp => exp_split(arg),
    }
}

fn exp_split(arg: RatFn) -> Result<RatFn> {
    let Some(p) = arg.as_poly() else {
        return Ok(atom_var(Builtin::Exp, arg));
    };
    let mut acc = RatFn::one();
    for (m, c) in p.terms() {
        let (k, unit) = split_coefficient(c);
        let base = atom_var(Builtin::Exp, RatFn::from_poly(Poly::term(m.clone(), unit)));
        acc = &acc * &base.pow(k)?;
    }
    Ok(acc)
}

/// `c = k * unit` with `k` a nonzero integer and `unit = 1/q`, `q > 0`.
fn split_coefficient(c: &Q) -> (i32, Q) {
    let den = c.denom().clone();
    let unit = Q::new(One::one(), den);
    let k: i64 = c.numer().try_into().unwrap_or(i64::MAX);
    (k.clamp(i32::MIN as i64, i32::MAX as i64) as i32, unit)
}

/// Derivative of a builtin with respect to its argument.
pub fn builtin_derivative(f: Builtin, arg: &RatFn) -> Result<RatFn> {
    Ok(match f {
        Builtin::Sin => builtin(Builtin::Cos, arg.clone())?,
        Builtin::Cos => -builtin(Builtin::Sin, arg.clone())?,
        Builtin::Sinh => builtin(Builtin::Cosh, arg.clone())?,
        Builtin::Cosh => builtin(Builtin::Sinh, arg.clone())?,
        Builtin::Exp => builtin(Builtin::Exp, arg.clone())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_and_even_symmetry() {
        let z = RatFn::jet(0);
        let s = builtin(Builtin::Sin, -z.clone()).unwrap();
        assert_eq!(s, -builtin(Builtin::Sin, z.clone()).unwrap());
        let c = builtin(Builtin::Cos, -z.clone()).unwrap();
        assert_eq!(c, builtin(Builtin::Cos, z).unwrap());
    }

    #[test]
    fn exp_products_collapse() {
        let z = RatFn::jet(0);
        let a = builtin(Builtin::Exp, z.scale(&super::super::poly::q(2))).unwrap();
        let b = builtin(Builtin::Exp, z.scale(&super::super::poly::q(-2))).unwrap();
        assert!((&a * &b).is_one());
        let sq = builtin(Builtin::Exp, z.clone()).unwrap().pow(2).unwrap();
        assert_eq!(a, sq);
    }
}
