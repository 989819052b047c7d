use super::*;
use crate::coframe::{lemma1_check, lemma1star_check, structure_residuals};
use crate::expr::parse_ratfn;

fn p(s: &str) -> RatFn {
    parse_ratfn(s).unwrap()
}

fn closes(inst: &FamilyInstance) -> bool {
    let r = structure_residuals(&inst.coframe, &inst.equation).unwrap();
    if !r.is_zero() {
        eprintln!("{}: {} | {} | {}", inst.name, r.0[0], r.0[1], r.0[2]);
    }
    r.is_zero()
}

#[test]
fn every_branch_closes() {
    for b in Branch::ALL {
        for &d in b.deltas() {
            for s in Sign::BOTH {
                let inst = construct(&BranchSpec::new(b, s, d)).unwrap();
                assert!(closes(&inst), "{b} {s:?} delta={d}");
            }
        }
    }
}

#[test]
fn every_branch_passes_its_list() {
    for b in Branch::ALL {
        for &d in b.deltas() {
            let inst = construct(&BranchSpec::new(b, Sign::Upper, d)).unwrap();
            let rep = match b.class() {
                EqClass::A => lemma1_check(&inst.coframe, &inst.equation, None),
                _ => lemma1star_check(&inst.coframe, &inst.equation, None),
            }
            .unwrap();
            assert!(rep.pass(), "{b} delta={d}: {:?}", rep.failed());
        }
    }
}

#[test]
fn delta_and_parameter_errors() {
    let e = construct(&BranchSpec::new(Branch::T32II, Sign::Upper, -1)).unwrap_err();
    assert!(matches!(e, FamilyError::Delta { .. }));
    let e = construct(&BranchSpec::new(Branch::T33, Sign::Upper, 1).param("nope", RatFn::one())).unwrap_err();
    assert!(matches!(e, FamilyError::UnknownParameter { .. }));
    let e = construct(&BranchSpec::new(Branch::T32II, Sign::Upper, 1).param("alpha", RatFn::zero())).unwrap_err();
    assert!(matches!(e, FamilyError::Constraint(_)));
    let e = construct(&BranchSpec::new(Branch::T33sI, Sign::Upper, 1).param("r", RatFn::one())).unwrap_err();
    assert_eq!(e, FamilyError::DegenerateRegime);
    let e = construct(&BranchSpec::new(Branch::T33, Sign::Upper, 1).closed("psi", p("z"))).unwrap_err();
    assert!(matches!(e, FamilyError::UnknownFunction { .. }));
    let e = construct(&BranchSpec::new(Branch::T32I, Sign::Upper, 1).param("a", RatFn::int(2))).unwrap_err();
    assert!(matches!(e, FamilyError::Constraint(_)));
}

#[test]
fn closed_forms_specialise() {
    let spec = BranchSpec::new(Branch::T32II, Sign::Upper, 1).closed("h", p("z^2"));
    let inst = construct(&spec).unwrap();
    assert!(closes(&inst));
    assert!(!inst.coframe.f[0][1].all_vars().iter().any(|v| v.as_atom().is_some()));

    let spec = BranchSpec::new(Branch::T33, Sign::Lower, -1).closed("phi", p("exp(u)"));
    assert!(closes(&construct(&spec).unwrap()));
}

#[test]
fn regime_phi_is_trig_or_hyperbolic() {
    for (r, d) in [(2, 1), (0, 1), (1, -1)] {
        let mut spec = BranchSpec::new(Branch::T33sI, Sign::Upper, d)
            .param("r", RatFn::int(r))
            .closed("psi", p("z*z2"));
        spec.functions.insert(
            "phi".into(),
            FunctionSpec::Regime {
                a: RatFn::one(),
                b: RatFn::int(2),
            },
        );
        let inst = construct(&spec).unwrap();
        assert!(closes(&inst), "r={r} delta={d}");
    }
}

#[test]
fn catalog_entries_close() {
    for name in CATALOG {
        let inst = catalog(name).unwrap();
        assert!(closes(&inst), "{name}");
    }
    assert!(matches!(catalog("nls"), Err(FamilyError::OutOfScope(_))));
    assert!(matches!(catalog("burgers"), Err(FamilyError::UnknownEntry(_))));
}

#[test]
fn explicit_laws_match() {
    let ch = catalog("camassa-holm").unwrap();
    assert_eq!(ch.equation.lambda, RatFn::one());
    assert_eq!(ch.equation.rhs(), p("z*z3 + 2*z1*z2 - 3*z*z1 - z1"));
    let kdv = catalog("kdv").unwrap();
    assert_eq!(kdv.equation.rhs(), p("z3 - 3*z*z1"));
    let k = catalog("kraenkel").unwrap();
    assert_eq!(k.equation.rhs(), p("alpha*z*z3 + 3*alpha*z1*z2 + beta*z1"));
    let l = catalog("liouville-linked").unwrap();
    assert_eq!(l.equation.rhs(), p("exp(z1)"));
    assert_eq!(l.flags, vec![Flag::Reflected]);
}

#[test]
fn built_chr_matches_written_out() {
    for s in Sign::BOTH {
        let built = construct(
            &BranchSpec::new(Branch::T32II, s, 1)
                .param("m", RatFn::zero())
                .closed("h", p("z + m")),
        );
        // `m` is not a branch parameter; it only appears inside h
        assert!(matches!(built, Err(FamilyError::UnknownParameter { .. })));
        let built = construct(&BranchSpec::new(Branch::T32II, s, 1).closed("h", p("z + m"))).unwrap();
        let written = explicit_chr(s, p("lam"), p("m")).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(built.coframe.f[i][j], written.coframe.f[i][j], "{s:?} f{}{}", i + 1, j + 1);
            }
        }
        assert_eq!(built.equation.rhs(), written.equation.rhs());
    }
}

#[test]
fn alt_chr_sign_variant_fails() {
    // flipping the sign of q^2 in the dt-coefficient of the second form
    // breaks closure; the branch-derived one closes
    for s in Sign::BOTH {
        let variant = alt_chr_sign_variant(s).unwrap();
        let r = structure_residuals(&variant.coframe, &variant.equation).unwrap();
        assert!(!r.is_zero());
    }
    let alt = catalog("alt-ch-r").unwrap();
    assert_eq!(
        alt.equation.rhs(),
        alt.equation
            .ctx
            .reduce(&p("-(z3*h[1](z) + 3*z1*z2*h[2](z) + z1^3*h[3](z)) - z3*h(z) - (z2 - r)*z1*h[1](z) - z2*z1*h[1](z)"))
            .unwrap()
    );
}

#[test]
fn rescaled_flat_closes() {
    for s in Sign::BOTH {
        assert!(closes(&rescaled_flat_instance(s).unwrap()));
    }
}

#[test]
fn reflection_is_an_involution() {
    let inst = construct(&BranchSpec::new(Branch::T35sI, Sign::Upper, 1)).unwrap();
    let twice = reflect_x(&reflect_x(&inst.coframe).unwrap()).unwrap();
    assert_eq!(twice.f, inst.coframe.f);
}
