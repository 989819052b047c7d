use super::*;
use crate::families::catalog;
use crate::expr::{parse_ratfn, JetVar};

fn p(s: &str) -> RatFn {
    parse_ratfn(s).unwrap()
}

#[test]
fn sine_gordon_angle_equation() {
    let sg = catalog("sine-gordon").unwrap();
    let (rx, rt) = pfaffian(&sg.coframe, false).unwrap();
    assert_eq!(rx, p("z1 + eta*cos(rho)"));
    assert_eq!(rt, p("(sin(rho)*sin(z) + cos(rho)*cos(z))/eta"));
    let zero = Coframe::new(Default::default(), 1);
    assert_eq!(pfaffian(&zero, false).unwrap(), (RatFn::zero(), RatFn::zero()));
    let mut ss = sg.coframe.clone();
    ss.delta = -1;
    assert_eq!(pfaffian(&ss, false).unwrap_err(), ConservationError::Spherical);
}

#[test]
fn closed_form_on_sine_gordon() {
    let sg = catalog("sine-gordon").unwrap();
    let rep = closed_form_check(&sg.coframe, &sg.equation).unwrap();
    assert!(rep.pass, "{rep:?}");
    // rho -> rho + pi maps one sign convention onto the other
    let flipped = closed_form_check_signed(&sg.coframe, &sg.equation, -1, false).unwrap();
    assert!(flipped.pass);
    let mut broken = sg.coframe.clone();
    broken.f[0][1] = RatFn::zero();
    assert!(!closed_form_check(&broken, &sg.equation).unwrap().pass);
}

#[test]
fn standard_sine_gordon_pair() {
    let sg = catalog("sine-gordon").unwrap();
    let ctx = Context::new();
    assert!(verify_conserved(&p("z1^2/2"), &p("-cos(z)"), &sg.equation, &ctx));
    let kdv_like = EquationSpec::generic(JetVar::t(0), p("z3"));
    assert!(!verify_conserved(&p("z"), &p("z"), &kdv_like, &ctx));
}

#[test]
fn sine_gordon_series() {
    let sg = catalog("sine-gordon").unwrap();
    let pairs = series_densities(&sg.coframe, &sg.equation, "eta", Center::Infinity, 2).unwrap();
    assert_eq!(pairs.len(), 2);
    assert!(pairs.iter().all(|q| q.verified && !q.trivial));
    assert_eq!(pairs[0].density, p("z1^2/2"));
    let more = series_densities(&sg.coframe, &sg.equation, "eta", Center::Infinity, 3).unwrap();
    let stripped = strip_exact(&more[2], &sg.equation, &Context::new()).unwrap();
    assert!(stripped.verified);
    assert_eq!(stripped.density, p("z1^4/8 - z2^2/2"));
    let exact = strip_exact(&more[1], &sg.equation, &Context::new()).unwrap();
    assert!(exact.trivial);
}

#[test]
fn constant_coframe_gives_trivial_pairs() {
    let c = Coframe::new(
        [
            [p("eta"), RatFn::zero()],
            [RatFn::zero(), p("eta")],
            [RatFn::zero(), RatFn::zero()],
        ],
        1,
    );
    let pairs = series_densities(&c, &EquationSpec::none(), "eta", Center::Infinity, 2).unwrap();
    assert!(!pairs.is_empty());
    assert!(pairs.iter().all(|q| q.trivial));
}

#[test]
fn kdv_needs_a_spectral_parameter() {
    let kdv = catalog("kdv").unwrap();
    let direct = series_densities(&kdv.coframe, &kdv.equation, "eta", Center::Infinity, 2);
    assert!(matches!(direct, Err(ConservationError::Unsolved(_))), "{direct:?}");

    let boosted = galilean_pullback(&kdv.coframe, &p("2*k^2"), &p("6*k^2")).unwrap();
    let r = crate::coframe::structure_residuals(&boosted, &kdv.equation).unwrap();
    assert!(r.is_zero(), "{:?}", r);
    let pairs = series_densities(&boosted, &kdv.equation, "k", Center::Infinity, 2).unwrap();
    assert_eq!(pairs.len(), 2);
    for q in &pairs {
        assert!(q.verified, "{q:?}");
    }
    assert_eq!(pairs[0].density, p("-z/2"));
    assert_eq!(pairs[0].flux, p("3/4*z^2 - z2/2"));
}

#[test]
fn exact_terms_keep_the_law() {
    let sg = catalog("sine-gordon").unwrap();
    // z1^2/2 + D_x(z1^2), flux corrected by T_t(z1^2) = 2 z1 sin(z)
    let density = p("z1^2/2 + 2*z1*z2");
    let flux = p("-cos(z) + 2*z1*sin(z)");
    assert!(verify_conserved(&density, &flux, &sg.equation, &Context::new()));
    let pair = ConservedPair {
        order: 1,
        density,
        flux,
        trivial: false,
        verified: true,
    };
    let s = strip_exact(&pair, &sg.equation, &Context::new()).unwrap();
    assert!(s.verified);
}

#[test]
fn order_bounds() {
    let sg = catalog("sine-gordon").unwrap();
    for bad in [0, 7] {
        assert!(matches!(
            series_densities(&sg.coframe, &sg.equation, "eta", Center::Infinity, bad),
            Err(ConservationError::Order { .. })
        ));
    }
}
