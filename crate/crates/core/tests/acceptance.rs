//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single `PASS`/`FAIL` line (visible with `--nocapture`) before asserting.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pssforge::coframe::{
    coframe_zcr_residual, gauge_transform, joint_context, lemma1_check, lemma1star_check, structure_residuals,
    zcr_matrices, zcr_residual, Coframe, EqClass, EquationSpec, LemmaReport, Mat2,
};
use pssforge::conservation::{
    closed_form_check, galilean_pullback, series_densities, verify_conserved, Center, ConservationError,
};
use pssforge::expr::{
    derive, parse_ratfn, Compiled, Context, JetVar, NumEnv, Partial, RatFn, TotalDt, TotalDx, Univariate, Var,
};
use pssforge::families::{catalog, construct, rescaled_flat_instance, Branch, BranchSpec, FamilyInstance, Sign};
use pssforge::numcheck::{brioschi_curvature, curvature_report, Fixture, SolutionSampler};

fn p(s: &str) -> RatFn {
    parse_ratfn(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn report(criterion: u8, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn closes(c: &Coframe, eq: &EquationSpec) -> bool {
    structure_residuals(c, eq).map(|r| r.is_zero()).unwrap_or(false)
}

fn zcr_vanishes(c: &Coframe, eq: &EquationSpec) -> bool {
    coframe_zcr_residual(c, eq).map(|m| m.is_zero()).unwrap_or(false)
}

fn list_check(c: &Coframe, eq: &EquationSpec, class: EqClass) -> LemmaReport {
    match class {
        EqClass::A => lemma1_check(c, eq, None),
        _ => lemma1star_check(c, eq, None),
    }
    .unwrap()
}

#[test]
fn criterion_1_branch_soundness() {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut n = 0;
    for b in Branch::ALL {
        for &d in b.deltas() {
            for s in Sign::BOTH {
                n += 1;
                let inst = construct(&BranchSpec::new(b, s, d)).unwrap();
                if !closes(&inst.coframe, &inst.equation) {
                    bad.push(format!("{b} {} delta={d}", s.symbol()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = bad.is_empty() && secs < 120.0;
    report(1, ok, &format!("{n} instances, {secs:.1}s, failing: {bad:?}"));
    assert!(ok);
}

fn random_rational(rng: &mut ChaCha8Rng) -> RatFn {
    let num = loop {
        let v: i64 = rng.gen_range(-6..=6);
        if v != 0 {
            break v;
        }
    };
    let den: i64 = rng.gen_range(1..=4);
    &RatFn::int(num) * &RatFn::int(den).recip().unwrap()
}

fn random_binding(b: Branch, rng: &mut ChaCha8Rng) -> BranchSpec {
    let deltas = b.deltas();
    let d = deltas[rng.gen_range(0..deltas.len())];
    let s = Sign::BOTH[rng.gen_range(0..2)];
    let mut spec = BranchSpec::new(b, s, d);
    for (name, default) in b.parameters() {
        let v = if default.is_some() {
            RatFn::int(rng.gen_range(0..=1))
        } else {
            random_rational(rng)
        };
        spec = spec.param(name, v);
    }
    spec
}

/// The three verdicts: structure equations, zero curvature, condition list.
fn verdicts(inst: &FamilyInstance, class: EqClass) -> [bool; 3] {
    [
        closes(&inst.coframe, &inst.equation),
        zcr_vanishes(&inst.coframe, &inst.equation),
        list_check(&inst.coframe, &inst.equation, class).pass(),
    ]
}

fn mutations(c: &Coframe) -> Vec<(&'static str, Coframe)> {
    let mut out = Vec::new();
    let mut m = c.clone();
    m.f[1][0] = &m.f[1][0] + &p("z2");
    out.push(("f21 + z2", m));
    let mut m = c.clone();
    m.f[0][1] = &m.f[0][1] + &p("z1");
    out.push(("f12 + z1", m));
    let mut m = c.clone();
    m.f[2][1] = &m.f[2][1] * &RatFn::int(2);
    out.push(("2 f32", m));
    let mut m = c.clone();
    m.f[2][0] = &m.f[2][0] + &RatFn::one();
    out.push(("f31 + 1", m));
    out
}

#[test]
fn criterion_2_oracle_triangle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut problems = Vec::new();
    let mut bound = 0;
    let mut mutated = 0;
    for b in Branch::ALL {
        for &d in b.deltas() {
            for s in Sign::BOTH {
                let inst = construct(&BranchSpec::new(b, s, d)).unwrap();
                let v = verdicts(&inst, b.class());
                if v != [true; 3] {
                    problems.push(format!("{b} {} delta={d} formal: {v:?}", s.symbol()));
                }
                for (name, c) in mutations(&inst.coframe) {
                    mutated += 1;
                    let m = FamilyInstance {
                        coframe: c,
                        ..inst.clone()
                    };
                    let v = verdicts(&m, b.class());
                    if v != [false; 3] {
                        problems.push(format!("{b} {} delta={d} mutation `{name}`: {v:?}", s.symbol()));
                    }
                }
            }
        }
        let mut got = 0;
        let mut tries = 0;
        while got < 20 && tries < 400 {
            tries += 1;
            let spec = random_binding(b, &mut rng);
            let Ok(inst) = construct(&spec) else { continue };
            got += 1;
            let v = verdicts(&inst, b.class());
            if v != [true; 3] {
                problems.push(format!("{b} bound {:?}: {v:?}", spec.params));
            }
        }
        bound += got;
        if got < 20 {
            problems.push(format!("{b}: only {got} admissible bindings"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = problems.is_empty();
    report(
        2,
        ok,
        &format!("{bound} bound instances, {mutated} mutants, {secs:.1}s, disagreements: {problems:?}"),
    );
    assert!(ok);
}

fn hx(e: &RatFn, k: u32) -> RatFn {
    let d = TotalDx { max_order: 10 };
    (0..k).fold(e.clone(), |acc, _| derive(&acc, &d).unwrap())
}

#[test]
fn criterion_3_catalog_fidelity() {
    let mut fails = Vec::new();
    let mut expect = |name: &str, lambda: RatFn, rhs: RatFn| {
        let inst = catalog(name).unwrap();
        let ctx = joint_context(&inst.coframe, &inst.equation);
        let got = ctx.reduce(&inst.equation.rhs()).unwrap();
        let want = ctx.reduce(&rhs).unwrap();
        if got != want || inst.equation.lambda != lambda {
            fails.push(format!("{name}: {got} vs {want}"));
        }
    };
    // z_t - lam z_{2t} = (lam z + lam m - 1) z3 + 2 lam z1 z2 - 3 z z1 - m z1
    expect(
        "ch-r",
        p("lam"),
        p("(lam*z + lam*m - 1)*z3 + 2*lam*z1*z2 - 3*z*z1 - m*z1"),
    );
    expect("camassa-holm", RatFn::one(), p("z*z3 + 2*z1*z2 - 3*z*z1 - z1"));
    expect("kdv", RatFn::zero(), p("z3 - 3*z*z1"));
    expect("kraenkel", RatFn::zero(), p("alpha*z*z3 + 3*alpha*z1*z2 + beta*z1"));
    let h = p("h(z)");
    let alt = &(&(-&hx(&h, 3)) - &hx(&(&(&p("z2") - &p("r")) * &h), 1)) - &(&p("z2") * &hx(&h, 1));
    expect("alt-ch-r", RatFn::zero(), alt);

    let built = construct(&BranchSpec::new(Branch::T32II, Sign::Upper, 1).closed("h", p("z + m"))).unwrap();
    let written = catalog("ch-r").unwrap();
    if built.coframe.f != written.coframe.f || built.equation.rhs() != written.equation.rhs() {
        fails.push("T32-II with h = z + m differs from ch-r".into());
    }
    let ok = fails.is_empty();
    report(3, ok, &format!("5 laws + specialisation; mismatches: {fails:?}"));
    assert!(ok);
}

fn mentions(e: &RatFn, name: &str) -> bool {
    e.all_vars().contains(&Var::param(name))
}

#[test]
fn criterion_4_free_parameters() {
    let mut cases: Vec<(String, FamilyInstance, &str)> = Vec::new();
    for n in ["ch-r", "camassa-holm", "kdv"] {
        cases.push((n.into(), catalog(n).unwrap(), "alpha"));
    }
    for s in Sign::BOTH {
        cases.push((format!("rescaled flat {}", s.symbol()), rescaled_flat_instance(s).unwrap(), "eta"));
    }
    cases.push(("alt-ch-r".into(), catalog("alt-ch-r").unwrap(), "eta"));
    cases.push(("kraenkel".into(), catalog("kraenkel").unwrap(), "r"));
    let mut fails = Vec::new();
    for (label, inst, param) in &cases {
        let ctx = joint_context(&inst.coframe, &inst.equation);
        let reduced = inst.coframe.reduced().unwrap();
        let in_forms = reduced.f.iter().flatten().any(|e| mentions(e, param));
        let (a, b) = inst.equation.as_ab();
        let in_law = [a, b].iter().any(|e| mentions(&ctx.reduce(e).unwrap(), param));
        if !in_forms || in_law {
            fails.push(format!("{label}/{param}: in forms {in_forms}, in A/B {in_law}"));
        }
    }
    let ok = fails.is_empty();
    report(4, ok, &format!("{} instances; failures: {fails:?}", cases.len()));
    assert!(ok);
}

/// `[[1, f], [0, 1]] [[1, 0], [g, 1]]` with `f, g` random in `z, z1`.
fn random_unimodular(rng: &mut ChaCha8Rng) -> Mat2 {
    let pieces = ["z", "z1", "z^2", "z*z1", "sin(z)", "exp(z)"];
    let entry = |rng: &mut ChaCha8Rng| {
        let c: i64 = rng.gen_range(-3..=3);
        let k: i64 = rng.gen_range(-2..=2);
        p(&format!("{c} + {k}*{}", pieces[rng.gen_range(0..pieces.len())]))
    };
    let (f, g) = (entry(rng), entry(rng));
    let upper = Mat2::real(RatFn::one(), f, RatFn::zero(), RatFn::one());
    let lower = Mat2::real(RatFn::one(), RatFn::zero(), g, RatFn::one());
    upper.mul(&lower)
}

#[test]
fn criterion_5_gauge_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sg = catalog("sine-gordon").unwrap();
    let t35 = construct(
        &BranchSpec::new(Branch::T35II, Sign::Upper, 1)
            .param("lam", p("2"))
            .param("eta", p("3/2"))
            .param("r", p("2"))
            .param("gamma", p("1"))
            .param("sigma", p("1/2")),
    )
    .unwrap();
    let mut fails = Vec::new();
    let mut n = 0;
    for inst in [&sg, &t35] {
        let pair = zcr_matrices(&inst.coframe);
        let ctx = joint_context(&inst.coframe, &inst.equation);
        for _ in 0..5 {
            n += 1;
            let s = random_unimodular(&mut rng);
            let g = gauge_transform(&pair, &s, &inst.equation, &ctx).unwrap();
            // on solutions the transformed pair is again flat
            let on_shell = zcr_residual(&g, &inst.equation, &ctx).unwrap().is_zero();
            // off solutions the curvature is conjugated: R' = S R S^-1
            let free = EquationSpec::none();
            let g_free = gauge_transform(&pair, &s, &free, &ctx).unwrap();
            let r = zcr_residual(&pair, &free, &ctx).unwrap();
            let r_new = zcr_residual(&g_free, &free, &ctx).unwrap();
            let conj = s.mul(&r).mul(&s.adjugate()).reduce(&ctx).unwrap();
            let off_shell = r_new.sub(&conj).reduce(&ctx).unwrap().is_zero() && !r.is_zero();
            if !(on_shell && off_shell) {
                fails.push(format!("{}: on {on_shell}, off {off_shell}", inst.name));
            }
        }
    }
    let ok = fails.is_empty();
    report(5, ok, &format!("{n} gauge matrices; failures: {fails:?}"));
    assert!(ok);
}

#[test]
fn criterion_6_conservation_pipeline() {
    let start = Instant::now();
    let sg = catalog("sine-gordon").unwrap();
    let closed = closed_form_check(&sg.coframe, &sg.equation).unwrap().pass;
    let sg_pairs = series_densities(&sg.coframe, &sg.equation, "eta", Center::Infinity, 2).unwrap();
    let sg_ok = sg_pairs.len() == 2
        && sg_pairs
            .iter()
            .all(|q| q.verified && verify_conserved(&q.density, &q.flux, &sg.equation, &Context::new()));

    // The KdV forms carry no spectral parameter (the eigenvalues of the
    // x-matrix are +-sqrt(z/2)), so the eta-series stops at an ODE. The
    // parameter is restored by the Galilean symmetry z -> z + 2k^2.
    let kdv = catalog("kdv").unwrap();
    let direct = series_densities(&kdv.coframe, &kdv.equation, "eta", Center::Infinity, 2);
    let direct_unsolved = matches!(direct, Err(ConservationError::Unsolved(_)));
    let boosted = galilean_pullback(&kdv.coframe, &p("2*k^2"), &p("6*k^2")).unwrap();
    let boosted_closes = closes(&boosted, &kdv.equation);
    let kdv_pairs = series_densities(&boosted, &kdv.equation, "k", Center::Infinity, 2).unwrap();
    let kdv_ok = kdv_pairs.len() == 2
        && kdv_pairs
            .iter()
            .all(|q| q.verified && verify_conserved(&q.density, &q.flux, &kdv.equation, &Context::new()));
    let secs = start.elapsed().as_secs_f64();
    let ok = closed && sg_ok && boosted_closes && kdv_ok && secs < 60.0;
    report(
        6,
        ok,
        &format!(
            "closed form {closed}; sine-Gordon pairs {sg_ok}; KdV pairs via Galilean pullback {kdv_ok} \
             (direct eta-series unsolved: {direct_unsolved}); {secs:.1}s"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_numerical_geometry() {
    let start = Instant::now();
    let mut fixture_dev = Vec::new();
    let mut fixtures_ok = true;
    for fx in Fixture::ALL {
        let k = brioschi_curvature(&fx.sample(fx.grid())).unwrap();
        let dev = k.max_deviation(fx.curvature());
        let tol = if fx == Fixture::Flat { 1e-9 } else { 1e-6 };
        fixtures_ok &= dev <= tol;
        fixture_dev.push(dev);
    }
    let sg = catalog("sine-gordon").unwrap();
    let kdv = construct(
        &BranchSpec::new(Branch::T32II, Sign::Lower, 1)
            .param("lam", RatFn::zero())
            .param("eta", RatFn::one())
            .param("alpha", RatFn::one())
            .closed("h", p("z")),
    )
    .unwrap();
    let runs = [
        ("kink", &sg, SolutionSampler::kink(1.0), NumEnv::new().param("eta", 1.0)),
        ("kdv-soliton", &kdv, SolutionSampler::kdv_soliton(1.0), NumEnv::new()),
    ];
    let mut pipeline_ok = true;
    let mut details = Vec::new();
    for (name, inst, s, env) in &runs {
        let g = s.default_grid(400, 400).unwrap();
        let coarse = curvature_report(&inst.coframe, &inst.equation, s, &g, env).unwrap();
        let fine = curvature_report(&inst.coframe, &inst.equation, s, &g.refined(), env).unwrap();
        let ratio = coarse.max_abs_k_plus_delta / fine.max_abs_k_plus_delta;
        pipeline_ok &= coarse.pass && g.hx() <= 1e-2 && g.ht() <= 1e-2 && ratio >= 3.0;
        details.push(format!("{name}: {:.2e} -> {:.2e} (x{ratio:.1})", coarse.max_abs_k_plus_delta, fine.max_abs_k_plus_delta));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = fixtures_ok && pipeline_ok && secs < 120.0;
    report(7, ok, &format!("fixtures {:?}; {details:?}; {secs:.1}s", fixture_dev.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()));
    assert!(ok);
}

const PIECES: [&str; 10] = ["z", "z1", "z2", "z3", "sin(z)", "cos(z1)", "exp(z)", "eta", "h(z)", "h(z1)"];

fn random_expr(rng: &mut ChaCha8Rng, allow_den: bool) -> RatFn {
    let term = |rng: &mut ChaCha8Rng| {
        let mut t = format!("({}/{})", rng.gen_range(-5..=5), rng.gen_range(1..=3));
        for _ in 0..rng.gen_range(0..=2) {
            t.push_str(&format!("*{}^{}", PIECES[rng.gen_range(0..PIECES.len())], rng.gen_range(1..=2)));
        }
        t
    };
    let num = (0..3).map(|_| term(rng)).collect::<Vec<_>>().join(" + ");
    if allow_den && rng.gen_bool(0.4) {
        let den = format!("{} + {}^2", rng.gen_range(1..=3), PIECES[rng.gen_range(0..PIECES.len())]);
        p(&format!("({num})/({den})"))
    } else {
        p(&num)
    }
}

/// `z = sin(x) + x^2/3` and its x-derivatives.
fn curve(k: u32, x: f64) -> f64 {
    let s = match k % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    };
    s + match k {
        0 => x * x / 3.0,
        1 => 2.0 * x / 3.0,
        2 => 2.0 / 3.0,
        _ => 0.0,
    }
}

fn curve_env(x: f64) -> NumEnv {
    let mut env = NumEnv::new().param("eta", 1.3).function(
        "h",
        Arc::new(Univariate {
            max_order: 6,
            f: |k: u32, u: f64| {
                // h(u) = exp(u/2)
                0.5f64.powi(k as i32) * (u / 2.0).exp()
            },
        }),
    );
    for k in 0..=6 {
        env.set_jet(JetVar::x(k), curve(k, x));
    }
    env
}

#[test]
fn criterion_8_kernel_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dx = TotalDx { max_order: 12 };
    let (mut leibniz, mut commute, mut round_trip, mut partials) = (0, 0, 0, 0);
    let cases = 1000;
    for _ in 0..cases {
        let (f, g) = (random_expr(&mut rng, true), random_expr(&mut rng, true));
        let lhs = derive(&(&f * &g), &dx).unwrap();
        let rhs = &(&derive(&f, &dx).unwrap() * &g) + &(&f * &derive(&g, &dx).unwrap());
        leibniz += (lhs == rhs) as usize;

        let a = derive(&derive(&f, &TotalDt).unwrap(), &dx).unwrap();
        let b = derive(&derive(&f, &dx).unwrap(), &TotalDt).unwrap();
        commute += (a == b) as usize;

        let (z, z1) = (Var::jet(0), Var::jet(1));
        let a = derive(&derive(&f, &Partial(&z)).unwrap(), &Partial(&z1)).unwrap();
        let b = derive(&derive(&f, &Partial(&z1)).unwrap(), &Partial(&z)).unwrap();
        partials += (a == b) as usize;

        round_trip += (parse_ratfn(&f.to_string()).ok() == Some(f.clone())) as usize;
    }

    // symbolic D_x against a central difference along a curve
    let mut worst = 0f64;
    let points = 100;
    for _ in 0..points {
        let f = random_expr(&mut rng, true);
        let df = Compiled::new(&derive(&f, &dx).unwrap());
        let cf = Compiled::new(&f);
        let x = rng.gen_range(-1.5..1.5);
        let h = 1e-5;
        let fd = (cf.eval(&curve_env(x + h)).unwrap() - cf.eval(&curve_env(x - h)).unwrap()) / (2.0 * h);
        let exact = df.eval(&curve_env(x)).unwrap();
        worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
    }
    let ok = leibniz == cases && commute == cases && partials == cases && round_trip == cases && worst <= 1e-6;
    report(
        8,
        ok,
        &format!(
            "Leibniz {leibniz}/{cases}, D_x D_t {commute}/{cases}, partials {partials}/{cases}, \
             round trip {round_trip}/{cases}; chain rule worst relative error {worst:.1e} on {points} points"
        ),
    );
    assert!(ok);
}
