//! The eleven branch formulas. Each returns the right-hand side of the
//! evolution law and the coefficient matrix, still in formal functions.

use super::{second_order_rule, Branch, Builder, Draft, FamilyError, FamilyResult, FunctionSpec};
use crate::expr::{builtin, func, Builtin, RatFn};

fn z(k: u32) -> RatFn {
    RatFn::jet(k)
}

fn int(n: i64) -> RatFn {
    RatFn::int(n)
}

fn half() -> RatFn {
    RatFn::constant(crate::expr::q_frac(1, 2))
}

fn div(a: &RatFn, b: &RatFn) -> FamilyResult<RatFn> {
    Ok(a.div(b)?)
}

pub(crate) fn build(b: &mut Builder) -> FamilyResult<Draft> {
    match b.spec.branch {
        Branch::T32I => t32_i(b),
        Branch::T32II => t32_ii(b),
        Branch::T33 => t33(b),
        Branch::T35I => t35_i(b),
        Branch::T35II => t35_ii(b),
        Branch::T32sI => t32s_i(b),
        Branch::T32sII => t32s_ii(b),
        Branch::T33sI => t33s_i(b),
        Branch::T33sII => t33s_ii(b),
        Branch::T35sI => t35s_i(b),
        Branch::T35sII => t35s_ii(b),
    }
}

/// `z - lam z2`.
fn slow(b: &Builder) -> RatFn {
    &z(0) - &(&b.p("lam") * &z(2))
}

fn t32_i(b: &mut Builder) -> FamilyResult<Draft> {
    let (a, bb) = (b.p("a"), b.p("b"));
    let psi = b.f("psi", 0);
    let w = slow(b);
    b.binary(a.clone(), "a");
    b.binary(bb.clone(), "b");
    b.nonzero(&(&a * &a) + &(&bb * &bb), "a^2 + b^2");
    b.nonzero(&(&a * &psi) + &(&bb * &w), "a*psi + b*(z - lam*z2)");
    let rhs = &(&b.dx(&psi)? + &(&a * &psi)) + &(&bb * &w);
    let pm = b.pm();
    Ok(Draft {
        rhs,
        f: [
            [&b.mp() * &a, &pm * &bb],
            [w.clone(), psi.clone()],
            [&pm * &w, &pm * &psi],
        ],
    })
}

fn t32_ii(b: &mut Builder) -> FamilyResult<Draft> {
    let (eta, alpha) = (b.p("eta"), b.p("alpha"));
    let h = b.f("h", 0);
    b.nonzero(alpha.clone(), "alpha");
    b.nonzero(b.f("h", 1), "h'");
    let w = slow(b);
    let (pm, mp) = (b.pm(), b.mp());
    let dh = b.dx(&h)?;
    let d2h = b.dx(&dh)?;
    let d3h = b.dx(&d2h)?;
    let rhs = &(&(&mp * &d3h) - &b.dx(&(&w * &h))?) - &(&w * &dh);
    let shift = &(&(&pm * &(&eta * &eta)) - &(&pm * &(&alpha * &alpha))) * &half();
    let pp = &w + &shift;
    let f21 = div(&pp, &alpha)?;
    let f22 = div(&(&(&(&mp * &d2h) - &(&eta * &dh)) - &(&pp * &h)), &alpha)?;
    Ok(Draft {
        rhs,
        f: [
            [eta.clone(), &(&mp * &dh) - &(&eta * &h)],
            [f21.clone(), f22.clone()],
            [&(&pm * &f21) + &alpha, &(&pm * &f22) - &(&alpha * &h)],
        ],
    })
}

fn t33(b: &mut Builder) -> FamilyResult<Draft> {
    let (r, gamma, sigma) = (b.p("r"), b.p("gamma"), b.p("sigma"));
    let delta = b.delta();
    let square = &gamma + &(&delta * &(&sigma * &sigma));
    b.nonzero(&r * &gamma, "r*gamma");
    b.nonnegative(square.clone(), "gamma + delta*sigma^2");
    b.nonzero(b.f("phi", 1), "phi'");
    let s = b.radical("s", square);
    let phi = b.f("phi", 0);
    let dphi = b.f("phi", 1);
    let w = slow(b);
    let pm = b.pm();
    let z1dphi = &z(1) * &dphi;
    let rhs = &(&b.dxn(&(&(&int(2) * &gamma) * &z1dphi), 2)? - &b.dx(&(&w * &phi))?)
        - &(&(&int(2) * &(&delta * &(&r * &r))) * &z1dphi);
    let d2 = b.dx(&(&int(2) * &z1dphi))?;
    let sg = div(&sigma, &gamma)?;
    let rs = div(&(&r * &s), &gamma)?;
    let sr = div(&s, &gamma)?;
    let dsr = div(&(&delta * &(&sigma * &r)), &gamma)?;
    let f21 = &(&sg * &w) + &(&pm * &rs);
    let f22 = &(&sigma * &d2) + &(&(&(&(-&sg) * &w) - &(&pm * &rs)) * &phi);
    // the inner +- of the third row meets the outer one
    let f31 = &(&pm * &(&sr * &w)) + &dsr;
    let f32 = &(&pm * &(&(&s * &d2) - &(&(&sr * &w) * &phi))) - &(&dsr * &phi);
    Ok(Draft {
        rhs,
        f: [
            [RatFn::zero(), &(&int(-2) * &r) * &z1dphi],
            [f21, f22],
            [f31, f32],
        ],
    })
}

fn t35_i(b: &mut Builder) -> FamilyResult<Draft> {
    let (eta, rho) = (b.p("eta"), b.p("rho"));
    b.nonzero(eta.clone(), "eta");
    b.nonzero(rho.clone(), "rho");
    let square = &(&rho * &rho) - &int(1);
    b.nonnegative(square.clone(), "rho^2 - 1");
    let phi = b.f("phi", 0);
    let dphi = b.dx(&phi)?;
    b.nonzero(dphi.clone(), "D_x phi");
    let s = b.radical("s", square);
    let w = slow(b);
    let (pm, mp) = (b.pm(), b.mp());
    let rhs = &b.dx(&dphi)? - &b.dx(&(&w * &phi))?;
    let es = &eta * &s;
    let f21 = &(&(-&rho) * &w) + &(&pm * &es);
    let f22 = &(&(-&rho) * &dphi) + &(&(&(&rho * &w) - &(&pm * &es)) * &phi);
    let f31 = &(&mp * &(&s * &w)) + &(&rho * &eta);
    let f32 = &(&mp * &(&s * &dphi)) + &(&(&(&pm * &(&s * &w)) - &(&eta * &rho)) * &phi);
    Ok(Draft {
        rhs,
        f: [[eta.clone(), -&(&eta * &phi)], [f21, f22], [f31, f32]],
    })
}

/// Numerators shared by the two ell-branches.
struct EllParts {
    /// `(2 eta gamma z1 ell' + k1 r ell) / (gamma eta^2 + r^2)`
    p: RatFn,
    /// `(k2 r z1 ell' + eta ell) / (gamma eta^2 + r^2)`
    q: RatFn,
    z1dl: RatFn,
}

fn ell_parts(b: &mut Builder, k1: i64, k2: i64) -> FamilyResult<EllParts> {
    let (eta, r, gamma) = (b.p("eta"), b.p("r"), b.p("gamma"));
    let den = &(&gamma * &(&eta * &eta)) + &(&r * &r);
    b.nonzero(&(&den * &eta) * &gamma, "(gamma*eta^2 + r^2)*eta*gamma");
    b.nonzero(b.f("ell", 1), "ell'");
    let ell = b.f("ell", 0);
    let z1dl = &z(1) * &b.f("ell", 1);
    let p = div(
        &(&(&(&int(2) * &eta) * &(&gamma * &z1dl)) + &(&(&int(k1) * &r) * &ell)),
        &den,
    )?;
    let q = div(&(&(&(&int(k2) * &r) * &z1dl) + &(&eta * &ell)), &den)?;
    Ok(EllParts { p, q, z1dl })
}

fn t35_ii(b: &mut Builder) -> FamilyResult<Draft> {
    let (eta, r, gamma, sigma) = (b.p("eta"), b.p("r"), b.p("gamma"), b.p("sigma"));
    let delta = b.delta();
    let square = &gamma + &(&delta * &(&sigma * &sigma));
    b.nonnegative(square.clone(), "gamma + delta*sigma^2");
    let EllParts { p, q, z1dl } = ell_parts(b, 1, -2)?;
    let s = b.radical("s", square);
    let w = slow(b);
    let (pm, mp) = (b.pm(), b.mp());
    let inv_eta = div(&int(1), &eta)?;
    let rhs = &(&(&inv_eta * &b.dxn(&(-&p), 2)?) + &(&inv_eta * &b.dx(&(&q * &w))?))
        + &(&(&int(2) * &delta) * &z1dl);
    let dp = b.dx(&p)?;
    let eg = &eta * &gamma;
    let f21 = &(&div(&sigma, &gamma)? * &w) + &(&mp * &div(&(&r * &s), &gamma)?);
    let f22 = &(&(&(-&div(&sigma, &eg)?) * &dp) + &(&(&div(&sigma, &eg)? * &q) * &w))
        + &(&mp * &(&div(&s, &gamma)? * &p));
    let f31 = &(&pm * &(&div(&s, &gamma)? * &w)) - &div(&(&delta * &(&sigma * &r)), &gamma)?;
    let f32 = &(&pm * &(&(&(-&div(&s, &eg)?) * &dp) + &(&(&div(&s, &eg)? * &q) * &w)))
        - &(&div(&(&delta * &sigma), &gamma)? * &p);
    Ok(Draft {
        rhs,
        f: [[eta.clone(), q.clone()], [f21, f22], [f31, f32]],
    })
}

fn t32s_i(b: &mut Builder) -> FamilyResult<Draft> {
    let (a, bb, alpha, m, n) = (b.p("a"), b.p("b"), b.p("alpha"), b.p("m"), b.p("n"));
    let psi = b.f("psi", 0);
    let one_a = &int(1) - &a;
    b.binary(a.clone(), "a");
    b.binary(bb.clone(), "b");
    b.zero(&(&(&a - &int(1)) * &alpha) * &m, "(a - 1)*alpha*m");
    b.zero(&(&a - &int(1)) * &bb, "(a - 1)*b");
    b.nonzero(
        &(&(&a * &psi) + &(&bb * &z(2))) + &(&(&m * &m) + &(&n * &n)),
        "a*psi + b*z2 + m^2 + n^2",
    );
    let (pm, mp) = (b.pm(), b.mp());
    let rhs = &(&(&b.dx(&psi)? + &(&a * &psi)) + &(&bb * &z(2))) + &(&pm * &(&n * &(&one_a * &alpha)));
    let f12 = &(&one_a * &(&(&m * &z(1)) + &n)) + &(&pm * &bb);
    let quad = &(&(&half() * &m) * &(&z(1) * &z(1))) + &(&n * &z(1));
    let f22 = &(&psi + &(&mp * &(&one_a * &quad))) - &(&alpha * &bb);
    let f21 = &z(2) + &alpha;
    Ok(Draft {
        rhs,
        f: [
            [&mp * &a, f12],
            [f21.clone(), f22.clone()],
            [&pm * &f21, &(&pm * &f22) - &(&one_a * &m)],
        ],
    })
}

fn t32s_ii(b: &mut Builder) -> FamilyResult<Draft> {
    let (alpha, beta, eta) = (b.p("alpha"), b.p("beta"), b.p("eta"));
    let (pm, mp) = (b.pm(), b.mp());
    let k = &alpha + &(&mp * &beta);
    b.nonzero(k.clone(), "alpha -+ beta");
    b.nonzero(b.f("h", 1), "h'");
    let m = &pm * &(&(&(&alpha * &alpha) - &(&beta * &beta)) - &(&eta * &eta));
    let h = b.f("h", 0);
    let dh = b.dx(&h)?;
    let d2h = b.dx(&dh)?;
    let d3h = b.dx(&d2h)?;
    let rhs = &(&(&mp * &d3h) - &b.dx(&(&(&z(2) + &m) * &h))?) - &(&z(2) * &dh);
    let zk = div(&z(2), &k)?;
    let f22 = &div(&(&(&mp * &d2h) - &(&eta * &dh)), &k)? - &(&(&zk + &beta) * &h);
    let f32 = &div(&(&(-&d2h) + &(&mp * &(&eta * &dh))), &k)?
        + &(&mp * &(&(&zk + &(&pm * &alpha)) * &h));
    Ok(Draft {
        rhs,
        f: [
            [eta.clone(), &(&mp * &dh) - &(&eta * &h)],
            [&zk + &beta, f22],
            [&(&pm * &zk) + &alpha, f32],
        ],
    })
}

fn t33s_i(b: &mut Builder) -> FamilyResult<Draft> {
    let r = b.p("r");
    let delta = b.delta();
    let gap = &(&r * &r) - &delta;
    if gap.is_zero() {
        return Err(FamilyError::DegenerateRegime);
    }
    let psi = b.f("psi", 0);
    let phi = b.f("phi", 0);
    let dphi = b.f("phi", 1);
    b.nonzero(phi.clone(), "phi");
    // psi not constant
    b.nonzero(b.dx(&psi)?, "D_x psi");
    match b.spec.functions.get("phi") {
        None | Some(FunctionSpec::Formal) => b.ctx.add_ode_rule(second_order_rule("phi", -&gap)),
        Some(FunctionSpec::Closed(_)) => {
            let d2 = func("phi", vec![2], vec![z(1)]);
            b.zero(&d2 + &(&gap * &phi), "phi'' + (r^2 - delta)*phi");
        }
        Some(FunctionSpec::Regime { a, b: bcoef }) => {
            let (a, bcoef) = (a.clone(), bcoef.clone());
            let body = regime_body(b, &gap, &a, &bcoef)?;
            b.closed.insert("phi".into(), body);
        }
    }
    let pm = b.pm();
    let rhs = b.dx(&psi)?;
    Ok(Draft {
        rhs,
        f: [
            [RatFn::zero(), -&dphi],
            [z(2), &psi + &(&pm * &(&r * &phi))],
            [&pm * &(&r * &z(2)), &(&pm * &(&r * &psi)) + &(&delta * &phi)],
        ],
    })
}

fn t33s_ii(b: &mut Builder) -> FamilyResult<Draft> {
    let (m, r, gamma, mu) = (b.p("m"), b.p("r"), b.p("gamma"), b.p("mu"));
    let delta = b.delta();
    let square = &gamma + &(&delta * &(&mu * &mu));
    b.nonzero(gamma.clone(), "gamma");
    b.nonnegative(square.clone(), "gamma + delta*mu^2");
    b.nonzero(b.f("phi", 1), "phi'");
    let s = b.radical("s", square);
    let phi = b.f("phi", 0);
    let z1dphi = &z(1) * &b.f("phi", 1);
    let v = &z(2) + &m;
    let (pm, mp) = (b.pm(), b.mp());
    let rhs = &(&(-&b.dxn(&(&(&int(2) * &gamma) * &z1dphi), 2)?) - &b.dx(&(&v * &phi))?)
        + &(&(&int(2) * &(&delta * &(&r * &r))) * &z1dphi);
    let d2 = b.dx(&(&int(2) * &z1dphi))?;
    let mg = div(&mu, &gamma)?;
    let rs = div(&(&r * &s), &gamma)?;
    let sg = div(&s, &gamma)?;
    let drm = div(&(&delta * &(&r * &mu)), &gamma)?;
    let f21 = &(&mg * &v) + &(&mp * &rs);
    let f22 = &(&(-&mu) * &d2) + &(&(&(&(-&mg) * &v) + &(&pm * &rs)) * &phi);
    let f31 = &(&pm * &(&sg * &v)) - &drm;
    let f32 = &(&mp * &(&s * &d2)) + &(&(&(&mp * &(&sg * &v)) + &drm) * &phi);
    Ok(Draft {
        rhs,
        f: [
            [RatFn::zero(), &(&int(-2) * &r) * &z1dphi],
            [f21, f22],
            [f31, f32],
        ],
    })
}

fn t35s_i(b: &mut Builder) -> FamilyResult<Draft> {
    let (eta, rho, r) = (b.p("eta"), b.p("rho"), b.p("r"));
    b.nonzero(eta.clone(), "eta");
    let square = &(&rho * &rho) - &int(1);
    b.nonnegative(square.clone(), "rho^2 - 1");
    let phi = b.f("phi", 0);
    let dphi = b.dx(&phi)?;
    b.nonzero(dphi.clone(), "D_x phi");
    let s = b.radical("s", square);
    let decay = builtin(Builtin::Exp, -&z(1))?;
    let shifted = &phi - &(&div(&r, &(&eta * &eta))? * &decay);
    let (pm, mp) = (b.pm(), b.mp());
    let rhs = &(&b.dxn(&shifted, 2)? - &b.dx(&(&z(2) * &phi))?) + &(&r * &decay);
    let es = &eta * &s;
    let f21 = &(&(-&rho) * &z(2)) + &(&pm * &es);
    let f22 = &(&(-&rho) * &dphi) + &(&(&(&rho * &z(2)) - &(&pm * &es)) * &shifted);
    let f31 = &(&mp * &(&s * &z(2))) + &(&eta * &rho);
    let f32 = &(&mp * &(&s * &dphi)) + &(&(&(&pm * &(&s * &z(2))) - &(&eta * &rho)) * &shifted);
    Ok(Draft {
        rhs,
        f: [[eta.clone(), -&(&eta * &phi)], [f21, f22], [f31, f32]],
    })
}

fn t35s_ii(b: &mut Builder) -> FamilyResult<Draft> {
    let (eta, r, gamma, mu, m) = (b.p("eta"), b.p("r"), b.p("gamma"), b.p("mu"), b.p("m"));
    let delta = b.delta();
    let square = &gamma + &(&delta * &(&mu * &mu));
    b.nonnegative(square.clone(), "gamma + delta*mu^2");
    let EllParts { p, q, z1dl } = ell_parts(b, -1, 2)?;
    let s = b.radical("s", square);
    let v = &z(2) + &m;
    let (pm, mp) = (b.pm(), b.mp());
    let inv_eta = div(&int(1), &eta)?;
    let rhs = &(&(&inv_eta * &b.dxn(&p, 2)?) + &(&inv_eta * &b.dx(&(&q * &v))?))
        - &(&(&int(2) * &delta) * &z1dl);
    let dp = b.dx(&p)?;
    let eg = &eta * &gamma;
    let f21 = &(&div(&mu, &gamma)? * &v) + &(&mp * &div(&(&r * &s), &gamma)?);
    let f22 = &(&(&div(&mu, &eg)? * &dp) + &(&(&div(&mu, &eg)? * &q) * &v))
        + &(&pm * &(&div(&s, &gamma)? * &p));
    let f31 = &(&pm * &(&div(&s, &gamma)? * &v)) - &div(&(&delta * &(&mu * &r)), &gamma)?;
    let f32 = &(&pm * &(&(&div(&s, &eg)? * &dp) + &(&(&div(&s, &eg)? * &q) * &v)))
        + &(&div(&(&delta * &mu), &gamma)? * &p);
    Ok(Draft {
        rhs,
        f: [[eta.clone(), q.clone()], [f21, f22], [f31, f32]],
    })
}

/// `a cos(k z1) + b sin(k z1)` with `k^2 = r^2 - delta > 0`, or the
/// hyperbolic pair with `k^2 = delta - r^2 > 0`.
fn regime_body(b: &mut Builder, gap: &RatFn, a: &RatFn, bcoef: &RatFn) -> FamilyResult<RatFn> {
    let Some(g) = b.ctx.reduce(gap)?.as_constant() else {
        return Err(FamilyError::Constraint(
            "the regime of phi needs a numeric r^2 - delta".into(),
        ));
    };
    b.nonzero(&(a * a) + &(bcoef * bcoef), "a^2 + b^2");
    let zero = crate::expr::q(0);
    let (k, c, s) = if g > zero {
        (b.radical("k", gap.clone()), Builtin::Cos, Builtin::Sin)
    } else {
        (b.radical("k", -gap), Builtin::Cosh, Builtin::Sinh)
    };
    let arg = &k * &z(1);
    Ok(&(a * &builtin(c, arg.clone())?) + &(bcoef * &builtin(s, arg)?))
}
