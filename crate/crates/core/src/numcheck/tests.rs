use super::*;
use crate::expr::parse_ratfn;
use crate::families::{catalog, construct, Branch, BranchSpec, FamilyInstance, Sign};

fn p(s: &str) -> RatFn {
    parse_ratfn(s).unwrap()
}

fn eta_one() -> NumEnv {
    NumEnv::new().param("eta", 1.0)
}

/// `h = z`, `eta = alpha = 1`, `lam = 0` in the second class-a branch.
fn kdv_branch() -> FamilyInstance {
    construct(
        &BranchSpec::new(Branch::T32II, Sign::Lower, 1)
            .param("lam", RatFn::zero())
            .param("eta", RatFn::one())
            .param("alpha", RatFn::one())
            .closed("h", p("z")),
    )
    .unwrap()
}

#[test]
fn fixtures_have_known_curvature() {
    for fx in Fixture::ALL {
        let m = fx.sample(fx.grid());
        let k = brioschi_curvature(&m).unwrap();
        let tol = if fx == Fixture::Flat { 1e-9 } else { 1e-6 };
        assert!(k.max_deviation(fx.curvature()) <= tol, "{fx:?}: {}", k.max_deviation(fx.curvature()));
    }
}

#[test]
fn samplers_solve_their_equations() {
    let g = Grid::new((-2.0, 2.0), (-1.0, 1.0), 41, 21).unwrap();
    let sg = catalog("sine-gordon").unwrap();
    for a in [1.0, 0.5, 2.0] {
        let rep = certify_solution(&SolutionSampler::kink(a), &sg.equation, &g, &NumEnv::new()).unwrap();
        assert!(rep.pass, "a={a}: {rep:?}");
    }
    let kdv = catalog("kdv").unwrap();
    for c in [1.0, 0.3] {
        let rep = certify_solution(&SolutionSampler::kdv_soliton(c), &kdv.equation, &g, &NumEnv::new()).unwrap();
        assert!(rep.pass, "c={c}: {rep:?}");
    }
    assert!(certify_solution(&SolutionSampler::zero(), &kdv.equation, &g, &NumEnv::new()).unwrap().pass);
    // a kink is not a KdV solution
    assert!(!certify_solution(&SolutionSampler::kink(1.0), &kdv.equation, &g, &NumEnv::new()).unwrap().pass);
}

#[test]
fn profile_derivatives_match_differences() {
    let s = SolutionSampler::kdv_soliton(1.0);
    let h = 1e-5;
    for k in 0..4 {
        for xi in [-1.3, 0.2, 0.9] {
            let fd = (s.profile(k, xi + h).unwrap() - s.profile(k, xi - h).unwrap()) / (2.0 * h);
            assert!((fd - s.profile(k + 1, xi).unwrap()).abs() < 1e-6);
        }
    }
    assert!(matches!(s.jets(0.0, 0.0, 20), Err(NumError::DerivativeOrder { .. })));
}

#[test]
fn sine_gordon_metric() {
    let sg = catalog("sine-gordon").unwrap();
    let g = Grid::new((0.5, 2.5), (0.0, 2.0), 16, 16).unwrap();
    let m = metric(&sg.coframe, &SolutionSampler::kink(1.0), &g, &eta_one()).unwrap();
    assert!(m.g.iter().all(|v| (v - 1.0).abs() < 1e-12));
    for k in 0..m.e.len() {
        if m.mask[k] {
            assert!(m.e[k] * m.g[k] - m.f[k] * m.f[k] > 0.0);
        }
    }
    let zero = metric(&sg.coframe, &SolutionSampler::zero(), &g, &eta_one()).unwrap();
    assert_eq!(zero.mask_fraction(), 0.0);
    assert_eq!(brioschi_curvature(&zero).unwrap_err(), NumError::MaskEmpty);
    assert!(matches!(
        metric(&sg.coframe, &SolutionSampler::kink(1.0), &g, &NumEnv::new()),
        Err(NumError::Expr(_))
    ));
}

#[test]
fn constant_coframe_metric() {
    let c = Coframe::new(
        [
            [RatFn::one(), RatFn::zero()],
            [RatFn::zero(), RatFn::one()],
            [RatFn::zero(), RatFn::zero()],
        ],
        1,
    );
    let g = Grid::new((0.0, 1.0), (0.0, 1.0), 8, 8).unwrap();
    let m = metric(&c, &SolutionSampler::zero(), &g, &NumEnv::new()).unwrap();
    assert!(m.e.iter().chain(&m.g).all(|v| *v == 1.0));
    assert!(m.f.iter().all(|v| *v == 0.0));
}

#[test]
fn kink_curvature_converges() {
    let sg = catalog("sine-gordon").unwrap();
    let s = SolutionSampler::kink(1.0);
    let g = s.default_grid(400, 400).unwrap();
    let coarse = curvature_report(&sg.coframe, &sg.equation, &s, &g, &eta_one()).unwrap();
    assert!(coarse.pass, "{coarse:?}");
    let fine = curvature_report(&sg.coframe, &sg.equation, &s, &g.refined(), &eta_one()).unwrap();
    assert!(coarse.max_abs_k_plus_delta >= 3.0 * fine.max_abs_k_plus_delta, "{coarse:?} {fine:?}");
}

#[test]
fn kdv_soliton_curvature() {
    let inst = kdv_branch();
    let s = SolutionSampler::kdv_soliton(1.0);
    let g = s.default_grid(400, 400).unwrap();
    let rep = curvature_report(&inst.coframe, &inst.equation, &s, &g, &NumEnv::new()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.mask_fraction, 1.0);
    let fine = curvature_report(&inst.coframe, &inst.equation, &s, &g.refined(), &NumEnv::new()).unwrap();
    assert!(rep.max_abs_k_plus_delta >= 3.0 * fine.max_abs_k_plus_delta, "{rep:?} {fine:?}");
}

#[test]
fn wrong_delta_is_reported() {
    let mut sg = catalog("sine-gordon").unwrap();
    sg.coframe.delta = -1;
    let s = SolutionSampler::kink(1.0);
    let rep = curvature_report(&sg.coframe, &sg.equation, &s, &s.default_grid(100, 100).unwrap(), &eta_one()).unwrap();
    assert!(!rep.pass);
    assert!((rep.max_abs_k_plus_delta - 2.0).abs() < 1e-2);
}

#[test]
fn non_solutions_are_refused() {
    let kdv = catalog("kdv").unwrap();
    let s = SolutionSampler::kink(1.0);
    let env = NumEnv::new().param("eta", 1.0).param("alpha", 1.0);
    let g = s.default_grid(20, 20).unwrap();
    assert!(matches!(
        curvature_report(&kdv.coframe, &kdv.equation, &s, &g, &env),
        Err(NumError::NotASolution(_))
    ));
    assert_eq!(Grid::new((0.0, 1.0), (0.0, 1.0), 7, 8), Err(NumError::Grid));
    assert_eq!(
        SolutionSampler::preset("breather").unwrap_err(),
        NumError::UnknownSolution("breather".into())
    );
}

#[test]
fn report_json_keys() {
    let r = CurvatureReport {
        max_abs_k_plus_delta: 0.5,
        mask_fraction: 1.0,
        nx: 8,
        nt: 9,
        pass: false,
    };
    let j = r.to_json();
    for key in ["max_abs_K_plus_delta", "mask_fraction", "nx", "nt"] {
        assert!(j.get(key).is_some(), "{key}");
    }
}

