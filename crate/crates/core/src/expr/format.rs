//! Text and LaTeX rendering of canonical rational functions.
//!
//! The text form is accepted back by the parser.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::atom::{Atom, Builtin, Var};
use super::jet::JetVar;
use super::poly::{Monomial, Poly, Q};
use super::ratfn::RatFn;

pub(crate) fn atom_to_string(a: &Atom) -> String {
    match a {
        Atom::Builtin { f, arg } => format!("{}({arg})", f.name()),
        Atom::Func { name, derivs, args } => {
            let args_s: Vec<String> = args.iter().map(|r| r.to_string()).collect();
            if derivs.len() == 1 {
                format!("{name}{}({})", "'".repeat(derivs[0] as usize), args_s[0])
            } else if derivs.iter().all(|d| *d == 0) {
                format!("{name}({})", args_s.join(", "))
            } else {
                let ds: Vec<String> = derivs.iter().map(|d| d.to_string()).collect();
                format!("{name}[{}]({})", ds.join(","), args_s.join(", "))
            }
        }
    }
}

/// Parameters first, then jet variables, then atoms.
fn print_order(m: &Monomial) -> Vec<&(Var, u32)> {
    let f = m.factors();
    let mut out: Vec<&(Var, u32)> = f.iter().filter(|(v, _)| matches!(v, Var::Param(_))).collect();
    out.extend(f.iter().filter(|(v, _)| !matches!(v, Var::Param(_))));
    out
}

fn write_monomial(out: &mut String, m: &Monomial) {
    for (i, (v, e)) in print_order(m).into_iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        let _ = write!(out, "{v}");
        if *e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
}

fn write_q(out: &mut String, c: &Q) {
    if c.is_integer() {
        let _ = write!(out, "{}", c.numer());
    } else {
        let _ = write!(out, "{}/{}", c.numer(), c.denom());
    }
}

/// Terms in descending monomial order, `a - b` for negative coefficients.
fn poly_to_string(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            write_q(&mut out, &abs);
        } else {
            if !abs.is_one() {
                write_q(&mut out, &abs);
                out.push('*');
            }
            write_monomial(&mut out, m);
        }
    }
    out
}

fn needs_parens(p: &Poly) -> bool {
    p.len() > 1 || p.terms().any(|(m, c)| !c.is_one() && !m.is_one())
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = poly_to_string(self.num());
        if self.den().is_empty() {
            return f.write_str(&num);
        }
        let mut den = String::new();
        for (i, (g, k)) in self.den().iter().enumerate() {
            if i > 0 {
                den.push('*');
            }
            let s = poly_to_string(g);
            if needs_parens(g) {
                let _ = write!(den, "({s})");
            } else {
                den.push_str(&s);
            }
            if *k > 1 {
                let _ = write!(den, "^{k}");
            }
        }
        write!(f, "({num})/({den})")
    }
}

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega", "Phi", "Psi",
];

fn latex_name(name: &str) -> String {
    let split = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (stem, digits) = name.split_at(split);
    let stem = match stem {
        "lam" => "\\lambda".to_string(),
        "ell" => "\\ell".to_string(),
        s if GREEK.contains(&s) => format!("\\{s}"),
        s if s.chars().count() == 1 => s.to_string(),
        s => format!("\\mathrm{{{s}}}"),
    };
    if digits.is_empty() {
        stem
    } else {
        format!("{stem}_{{{digits}}}")
    }
}

fn latex_jet(j: &JetVar) -> String {
    match (j.order, j.t) {
        (0, false) => "z".into(),
        (0, true) => "z_t".into(),
        (k, false) => format!("z_{{{k}}}"),
        (k, true) => format!("z_{{{k}t}}"),
    }
}

fn latex_var(v: &Var) -> String {
    match v {
        Var::Jet(j) => latex_jet(j),
        Var::Param(p) => latex_name(p),
        Var::Atom(a) => match &**a {
            Atom::Builtin { f: Builtin::Exp, arg } => format!("e^{{{}}}", to_latex(arg)),
            Atom::Builtin { f, arg } => format!("\\{}\\left({}\\right)", f.name(), to_latex(arg)),
            Atom::Func { name, derivs, args } => {
                let args_s: Vec<String> = args.iter().map(to_latex).collect();
                let head = if derivs.len() == 1 {
                    format!("{}{}", latex_name(name), "'".repeat(derivs[0] as usize))
                } else if derivs.iter().all(|d| *d == 0) {
                    latex_name(name)
                } else {
                    let ds: Vec<String> = derivs.iter().map(|d| d.to_string()).collect();
                    format!("{}^{{({})}}", latex_name(name), ds.join(","))
                };
                format!("{head}\\left({}\\right)", args_s.join(", "))
            }
        },
    }
}

fn latex_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if !abs.is_one() || m.is_one() {
            if abs.is_integer() {
                let _ = write!(out, "{}", abs.numer());
            } else {
                let _ = write!(out, "\\frac{{{}}}{{{}}}", abs.numer(), abs.denom());
            }
        }
        for (v, e) in print_order(m) {
            if !out.is_empty() && !out.ends_with(' ') && !out.ends_with('-') {
                out.push_str("\\,");
            }
            let s = latex_var(v);
            if *e > 1 {
                let _ = write!(out, "{{{s}}}^{{{e}}}");
            } else {
                out.push_str(&s);
            }
        }
    }
    out
}

/// LaTeX rendering with `\frac` for denominators.
pub fn to_latex(r: &RatFn) -> String {
    let num = latex_poly(r.num());
    if r.den().is_empty() {
        return num;
    }
    let den: Vec<String> = r
        .den()
        .iter()
        .map(|(g, k)| {
            let s = latex_poly(g);
            let s = if g.len() > 1 { format!("\\left({s}\\right)") } else { s };
            if *k > 1 {
                format!("{{{s}}}^{{{k}}}")
            } else {
                s
            }
        })
        .collect();
    format!("\\frac{{{num}}}{{{}}}", den.join("\\,"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::func;

    #[test]
    fn descending_terms_with_signs() {
        let z = RatFn::jet(0);
        let z1 = RatFn::jet(1);
        let z2 = RatFn::jet(2);
        let e = &(&z1 * &z1) - &(&z * &z2);
        assert_eq!(e.to_string(), "-z*z2 + z1^2");
    }

    #[test]
    fn quotient_form() {
        let eta = RatFn::param("eta");
        let s = func::builtin(Builtin::Sin, RatFn::jet(0)).unwrap();
        assert_eq!(s.div(&eta).unwrap().to_string(), "(sin(z))/(eta)");
        let half = RatFn::jet(1).scale(&super::super::poly::q_frac(1, 2));
        assert_eq!(half.to_string(), "1/2*z1");
    }

    #[test]
    fn derivative_atoms_print_with_primes() {
        let arg = &(&RatFn::param("lam") * &RatFn::jet(1).pow(2).unwrap()) - &RatFn::jet(0).pow(2).unwrap();
        let a = func::func("phi", vec![1], vec![arg]);
        assert_eq!(a.to_string(), "phi'(lam*z1^2 - z^2)");
    }

    #[test]
    fn latex_uses_greek_and_subscripts() {
        let r = &RatFn::param("sigma2") * &RatFn::jet(2);
        assert_eq!(to_latex(&r), "\\sigma_{2}\\,z_{2}");
    }
}
