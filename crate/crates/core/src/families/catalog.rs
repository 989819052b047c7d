//! Named equations, each with a coframe that closes on it.

use super::{construct, reflect_x, Branch, BranchSpec, FamilyError, FamilyInstance, FamilyResult, Flag, Sign};
use crate::coframe::{split_ab, Coframe, EquationSpec, Rule};
use crate::expr::{parse_ratfn, Context, JetVar, RatFn};

pub const CATALOG: &[&str] = &[
    "sine-gordon",
    "camassa-holm",
    "kdv",
    "ch-r",
    "alt-ch-r",
    "kraenkel",
    "deep-water",
    "hunter-saxton",
    "calogero",
    "tzitzeica",
    "bullough-dodd",
    "dodd-bullough-mikhailov",
    "tzitzeica-dodd-bullough",
    "rabelo",
    "liouville-linked",
];

/// Known names that need vector-valued fields or nonlocal variables.
const OUT_OF_SCOPE: &[&str] = &["nls", "vector-nls", "two-component-camassa-holm", "nonlocal-ch-r"];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.to_vec()
}

fn p(s: &str) -> RatFn {
    parse_ratfn(s).expect("catalog literal")
}

pub fn catalog(name: &str) -> FamilyResult<FamilyInstance> {
    let key = name.to_ascii_lowercase();
    if OUT_OF_SCOPE.contains(&key.as_str()) {
        return Err(FamilyError::OutOfScope(name.to_string()));
    }
    let mut inst = match key.as_str() {
        "sine-gordon" => sine_gordon(),
        "ch-r" => explicit_chr(Sign::Upper, p("lam"), p("m"))?,
        "camassa-holm" => explicit_chr(Sign::Upper, RatFn::one(), RatFn::one())?,
        "kdv" => explicit_chr(Sign::Lower, RatFn::zero(), RatFn::zero())?,
        "alt-ch-r" => alt_chr(Sign::Upper)?,
        "kraenkel" => kraenkel(p("alpha"), p("beta"))?,
        "deep-water" => {
            let i = kraenkel(p("-3*k/(4*q)"), p("k^2/(2*q)"))?;
            with_relation(i, "q", p("k/g"))?
        }
        "hunter-saxton" => first_order("-z*z2 - z1^2/2")?,
        "calogero" => first_order("-z*z2 - Phi(z1)")?,
        "tzitzeica" => first_order("exp(z) - exp(-2*z)")?,
        "bullough-dodd" => first_order("-exp(-z) + exp(2*z)")?,
        "dodd-bullough-mikhailov" => first_order("-exp(z) - exp(-2*z)")?,
        "tzitzeica-dodd-bullough" => first_order("exp(-z) + exp(-2*z)")?,
        "rabelo" => first_order("z + z*z1^2 + z^2*z2/2")?,
        "liouville-linked" => liouville_linked()?,
        _ => return Err(FamilyError::UnknownEntry(name.to_string())),
    };
    inst.name = key;
    Ok(inst)
}

fn sine_gordon() -> FamilyInstance {
    let coframe = Coframe::new(
        [
            [RatFn::zero(), p("sin(z)/eta")],
            [p("eta"), p("cos(z)/eta")],
            [p("z1"), RatFn::zero()],
        ],
        1,
    );
    FamilyInstance {
        name: String::new(),
        equation: EquationSpec::generic(JetVar::t(1), p("sin(z)")),
        coframe,
        flags: Vec::new(),
        first_order: None,
        branch: None,
    }
}

/// The `h = z + m` instance of the second class-a branch, written out
/// directly rather than built, so it can be compared with the builder.
pub fn explicit_chr(sign: Sign, lam: RatFn, m: RatFn) -> FamilyResult<FamilyInstance> {
    let (pm, mp) = (sign.pm(), sign.mp());
    let (eta, alpha) = (p("eta"), p("alpha"));
    let (z, z1, z2) = (RatFn::jet(0), RatFn::jet(1), RatFn::jet(2));
    let h = &z + &m;
    let w = &z - &(&lam * &z2);
    let half = p("1/2");
    let e2 = &(&eta * &eta) * &half;
    let a2 = &(&alpha * &alpha) * &half;
    let low = &(&w + &(&pm * &e2)) + &(&mp * &a2);
    let high = &(&w + &(&pm * &e2)) + &(&pm * &a2);
    let dt_part = |shift: &RatFn| &(&(&mp * &z2) - &(&eta * &z1)) - &(shift * &h);
    let f = [
        [eta.clone(), &(&mp * &z1) - &(&eta * &h)],
        [low.div(&alpha)?, dt_part(&low).div(&alpha)?],
        [&pm * &high.div(&alpha)?, &pm * &dt_part(&high).div(&alpha)?],
    ];
    let a = &(&lam * &h) + &mp;
    let b = &(&(&(&RatFn::int(2) * &lam) * &(&z1 * &z2)) - &(&RatFn::int(3) * &(&z * &z1))) - &(&m * &z1);
    Ok(FamilyInstance {
        name: String::new(),
        equation: EquationSpec::class_a(lam, a, b),
        coframe: Coframe::new(f, 1),
        flags: Vec::new(),
        first_order: None,
        branch: None,
    })
}

/// The `alpha = 0`, `beta = +-q` instance of the second class-b branch with
/// `q^2 = r - eta^2`; the coframe is built from the branch formulas.
fn alt_chr(sign: Sign) -> FamilyResult<FamilyInstance> {
    let spec = BranchSpec::new(Branch::T32sII, sign, 1)
        .param("alpha", RatFn::zero())
        .param("beta", &sign.pm() * &p("q"));
    let inst = construct(&spec)?;
    with_relation(inst, "q", p("r - eta^2"))
}

/// The same instance with the opposite sign in the dt-coefficient of the
/// second form, `(+-h'' + eta h' + (z2 +- q^2) h) / q`; it does not close.
pub fn alt_chr_sign_variant(sign: Sign) -> FamilyResult<FamilyInstance> {
    let mut inst = alt_chr(sign)?;
    let pm = sign.pm();
    let h = p("h(z)");
    let dh = p("z1*h[1](z)");
    let d2h = p("z2*h[1](z) + z1^2*h[2](z)");
    let num = &(&(&pm * &d2h) + &(&p("eta") * &dh)) + &(&(&p("z2") + &(&pm * &p("r - eta^2"))) * &h);
    inst.coframe.f[1][1] = inst.coframe.ctx.reduce(&num.div(&p("q"))?)?;
    Ok(inst)
}

/// Adds `symbol^2 = square` to both contexts and re-reduces.
fn with_relation(mut inst: FamilyInstance, symbol: &str, square: RatFn) -> FamilyResult<FamilyInstance> {
    inst.coframe.ctx.add_side_relation(symbol, square.clone());
    inst.equation.ctx.add_side_relation(symbol, square);
    inst.coframe = inst.coframe.reduced()?;
    let ctx = inst.equation.ctx.clone();
    inst.equation.a = ctx.reduce(&inst.equation.a)?;
    inst.equation.b = ctx.reduce(&inst.equation.b)?;
    Ok(inst)
}

fn kraenkel(alpha: RatFn, beta: RatFn) -> FamilyResult<FamilyInstance> {
    let psi = &(&alpha * &p("z*z2 + z1^2")) + &(&beta * &p("z"));
    let spec = BranchSpec::new(Branch::T33sI, Sign::Upper, 1).closed("psi", psi);
    construct(&spec)
}

/// `z_{1t} = psi`, carried by its x-derivative.
fn first_order(psi: &str) -> FamilyResult<FamilyInstance> {
    let psi = p(psi);
    let spec = BranchSpec::new(Branch::T33sI, Sign::Upper, 1).closed("psi", psi.clone());
    let mut inst = construct(&spec)?;
    inst.flags.push(Flag::DifferentialConsequence);
    inst.first_order = Some(Rule {
        var: JetVar::t(1),
        rhs: psi,
    });
    Ok(inst)
}

/// The exponential instance of the first exponential class-b branch, pulled
/// back along `x -> -x` so that the law reads `z_{2t} = exp(z1)`.
fn liouville_linked() -> FamilyResult<FamilyInstance> {
    let spec = BranchSpec::new(Branch::T35sI, Sign::Upper, 1)
        .param("r", RatFn::one())
        .param("rho", p("1/(2*eta^2)"))
        .closed("phi", p("(exp(-z1) + exp(z1))/(2*eta^2)"));
    let inst = construct(&spec)?;
    let coframe = reflect_x(&inst.coframe)?;
    let equation = EquationSpec::class_b(RatFn::zero(), p("exp(z1)")).with_context(inst.equation.ctx.clone());
    Ok(FamilyInstance {
        name: String::new(),
        equation,
        coframe,
        flags: vec![Flag::Reflected],
        first_order: None,
        branch: Some(spec),
    })
}

/// `z_{2t} = D_x psi` with the rescaled flat coframe; `eta` never enters
/// the law.
pub fn rescaled_flat_instance(sign: Sign) -> FamilyResult<FamilyInstance> {
    let (pm, mp) = (sign.pm(), sign.mp());
    let psi = p("psi(z,z1,z2)");
    let eta = p("eta");
    let f22 = &eta * &(&(&psi + &(&mp * &p("m*eta*z1^2/2"))) + &(&mp * &p("n*z1")));
    let f = [
        [RatFn::zero(), p("m*eta*z1 + n")],
        [&eta * &p("z2"), f22.clone()],
        [&pm * &(&eta * &p("z2")), &(&pm * &f22) - &p("m")],
    ];
    let dpsi = crate::expr::derive(&psi, &crate::expr::TotalDx { max_order: 8 })?;
    let (a, b) = split_ab(&dpsi)?;
    Ok(FamilyInstance {
        name: "rescaled-flat".into(),
        equation: EquationSpec::class_b(a, b),
        coframe: Coframe::new(f, 1).with_context(Context::new()),
        flags: Vec::new(),
        first_order: None,
        branch: None,
    })
}
