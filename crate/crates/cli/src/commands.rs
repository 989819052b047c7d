use std::collections::BTreeMap;

use serde_json::{json, Value};

use pssforge::coframe::{lemma1_check, lemma1star_check, verify_describes_surface, Coframe, EqClass, EquationSpec};
use pssforge::conservation::{
    closed_form_check_signed, galilean_pullback, series_densities, strip_exact, Center, ConservationError,
};
use pssforge::expr::{parse_ratfn, to_latex, Atom, Context, ExprError, NumEnv, RatFn, Var};
use pssforge::families::{catalog, CATALOG};
use pssforge::numcheck::{curvature_report, Grid, NumError, SolutionSampler, MAX_SPACING};

use crate::source::{Loaded, SourceArgs};
use crate::{CenterArg, CliError, Format};

type Out = Result<(String, bool), CliError>;

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn expr_err(e: ExprError) -> CliError {
    CliError::failed(e.to_string())
}

pub fn verify(source: &SourceArgs, lemma: bool, format: Format) -> Out {
    let inst = source.load()?;
    let surface = verify_describes_surface(&inst.coframe, &inst.equation).map_err(expr_err)?;
    let mut pass = surface.pass;
    let lemma_report = if lemma {
        let rep = match inst.equation.class {
            EqClass::A => Some(lemma1_check(&inst.coframe, &inst.equation, None)),
            EqClass::B => Some(lemma1star_check(&inst.coframe, &inst.equation, None)),
            EqClass::Generic => None,
        };
        match rep {
            Some(r) => {
                let r = r.map_err(expr_err)?;
                pass &= r.pass();
                r.to_json()
            }
            None => Value::Null,
        }
    } else {
        Value::Null
    };
    let report = json!({
        "name": inst.name,
        "equation": inst.equation.display(),
        "flags": inst.flags,
        "surface": surface.to_json(),
        "lemma": lemma_report,
        "pass": pass,
    });
    let text = match format {
        Format::Json => pretty(&report),
        _ => {
            let mut s = format!("{}: {}\n", inst.name, inst.equation.display());
            for (i, r) in surface.residuals.0.iter().enumerate() {
                s.push_str(&format!("residual {}: {}\n", i + 1, r));
            }
            s.push_str(&format!("nondegeneracy: {}\n", surface.nondegeneracy));
            s.push_str(if pass { "pass\n" } else { "FAIL\n" });
            s
        }
    };
    Ok((text, pass))
}

pub fn catalog_list() -> Out {
    let mut s = String::new();
    for name in CATALOG {
        s.push_str(name);
        s.push('\n');
    }
    Ok((s, true))
}

fn forms_text(c: &Coframe) -> String {
    (1..=3)
        .map(|i| format!("w{i} = ({}) dx + ({}) dt\n", c.at(i, 1), c.at(i, 2)))
        .collect()
}

pub fn catalog_show(name: &str, format: Format) -> Out {
    let inst = catalog(name).map_err(|e| CliError::usage(e.to_string()))?;
    let loaded = Loaded {
        name: name.to_string(),
        flags: inst.flags.iter().map(|f| f.name()).collect(),
        coframe: inst.coframe.clone(),
        equation: inst.equation.clone(),
    };
    let text = match format {
        Format::Latex => latex_document(&loaded),
        Format::Json => pretty(&json!({
            "name": name,
            "equation": inst.equation.to_json(),
            "display": inst.equation.display(),
            "coframe": inst.coframe.to_json(),
            "flags": loaded.flags,
            "first_order": inst.first_order.as_ref().map(|r| format!("{} = {}", r.var, r.rhs)),
        })),
        Format::Text => {
            let mut s = format!("{name}\n{}\n", inst.equation.display());
            if let Some(r) = &inst.first_order {
                s.push_str(&format!("first-order law: {} = {}\n", r.var, r.rhs));
            }
            s.push_str(&forms_text(&inst.coframe));
            s.push_str(&format!("delta = {}\n", inst.coframe.delta));
            for f in &loaded.flags {
                s.push_str(&format!("flag: {f}\n"));
            }
            s
        }
    };
    Ok((text, true))
}

pub struct ConservationArgs<'a> {
    pub source: &'a SourceArgs,
    pub param: &'a str,
    pub center: CenterArg,
    pub order: usize,
    pub strip: bool,
    pub boost: Option<(String, String)>,
    pub experimental_ss: bool,
}

fn conservation_err(e: ConservationError) -> CliError {
    match e {
        ConservationError::Order { .. } | ConservationError::ParameterInEquation(_) => CliError::usage(e.to_string()),
        _ => CliError::failed(e.to_string()),
    }
}

pub fn conservation(a: &ConservationArgs) -> Out {
    let inst = a.source.load()?;
    let mut coframe = inst.coframe.clone();
    if let Some((shift, speed)) = &a.boost {
        let parse = |s: &str| parse_ratfn(s).map_err(|e| CliError::usage(format!("{s}: {e}")));
        coframe = galilean_pullback(&coframe, &parse(shift)?, &parse(speed)?).map_err(conservation_err)?;
    }
    let closed = closed_form_check_signed(&coframe, &inst.equation, 1, a.experimental_ss).map_err(conservation_err)?;
    let run = |center| series_densities(&coframe, &inst.equation, a.param, center, a.order);
    let (center, pairs) = match a.center {
        CenterArg::Zero => (Center::Zero, run(Center::Zero)),
        CenterArg::Infinity => (Center::Infinity, run(Center::Infinity)),
        CenterArg::Auto => match run(Center::Infinity) {
            Err(ConservationError::Unsolved(_) | ConservationError::NonLaurent(_)) => (Center::Zero, run(Center::Zero)),
            other => (Center::Infinity, other),
        },
    };
    let mut pairs = pairs.map_err(conservation_err)?;
    if a.strip {
        pairs = pairs
            .iter()
            .map(|p| strip_exact(p, &inst.equation, &Context::new()))
            .collect::<Result<_, _>>()
            .map_err(conservation_err)?;
    }
    let pass = closed.pass && pairs.iter().all(|p| p.verified);
    let report = json!({
        "name": inst.name,
        "equation": inst.equation.display(),
        "parameter": a.param,
        "center": match center { Center::Zero => "zero", Center::Infinity => "infinity" },
        "closed_form": closed.to_json(),
        "pairs": pairs.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        "pass": pass,
    });
    Ok((pretty(&report), pass))
}

/// Parameters and formal functions left in the coframe and equation.
fn free_symbols(c: &Coframe, eq: &EquationSpec) -> (Vec<String>, Vec<String>) {
    let mut params = Vec::new();
    let mut funcs = Vec::new();
    let rules = eq.rules.iter().map(|r| &r.rhs);
    for e in c.f.iter().flatten().chain(rules) {
        for v in e.all_vars() {
            match v {
                Var::Param(p) => params.push(p.to_string()),
                Var::Atom(a) => {
                    if let Atom::Func { name, .. } = &*a {
                        funcs.push(name.to_string());
                    }
                }
                Var::Jet(_) => {}
            }
        }
    }
    params.sort();
    params.dedup();
    funcs.sort();
    funcs.dedup();
    (params, funcs)
}

pub fn curvature(
    source: &SourceArgs,
    solution: &str,
    nx: usize,
    nt: usize,
    bounds: Option<&[f64]>,
    set: &[String],
    tol: f64,
) -> Out {
    let inst = source.load()?;
    let sampler = SolutionSampler::preset(solution).map_err(|e| CliError::usage(e.to_string()))?;
    let grid = match bounds {
        Some([x0, x1, t0, t1]) => Grid::new((*x0, *x1), (*t0, *t1), nx, nt),
        Some(_) => return Err(CliError::usage("--box takes x0,x1,t0,t1")),
        None => sampler.default_grid(nx, nt),
    }
    .map_err(|e| CliError::usage(e.to_string()))?;
    let (params, funcs) = free_symbols(&inst.coframe, &inst.equation);
    if let Some(f) = funcs.first() {
        return Err(CliError::usage(format!(
            "formal function `{f}` has no numeric value; give it a body with --closed"
        )));
    }
    let mut bindings: BTreeMap<String, f64> = params.into_iter().map(|p| (p, 1.0)).collect();
    for s in set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected NAME=VALUE, got `{s}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::usage(format!("not a number: `{v}`")))?;
        bindings.insert(k.trim().to_string(), v);
    }
    let mut env = NumEnv::new();
    for (k, v) in &bindings {
        env.set_param(k, *v);
    }
    let rep = curvature_report(&inst.coframe, &inst.equation, &sampler, &grid, &env).map_err(|e| match e {
        NumError::NotASolution(_) | NumError::MaskEmpty => CliError::failed(e.to_string()),
        _ => CliError::usage(e.to_string()),
    })?;
    let pass = rep.max_abs_k_plus_delta <= tol && grid.hx() <= MAX_SPACING && grid.ht() <= MAX_SPACING;
    let mut report = rep.to_json();
    report["pass"] = json!(pass);
    report["tol"] = json!(tol);
    report["solution"] = json!(solution);
    report["bindings"] = json!(bindings);
    report["box"] = json!([grid.x0, grid.x1, grid.t0, grid.t1]);
    Ok((pretty(&report), pass))
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        match ch {
            '#' | '$' | '%' | '&' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(ch);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(ch),
        }
    }
    out
}

fn equation_latex(eq: &EquationSpec) -> Vec<String> {
    let lhs = match eq.class {
        EqClass::A if eq.lambda.is_zero() => Some("z_t".to_string()),
        EqClass::A if eq.lambda.den().is_empty() && eq.lambda.num().len() == 1 => {
            let t = to_latex(&(&RatFn::zero() - &(&eq.lambda * &RatFn::jet_t(2))));
            Some(match t.strip_prefix('-') {
                Some(rest) => format!("z_t - {rest}"),
                None => format!("z_t + {t}"),
            })
        }
        EqClass::A => Some(format!("z_t - \\left({}\\right)z_{{2t}}", to_latex(&eq.lambda))),
        EqClass::B => Some("z_{2t}".to_string()),
        EqClass::Generic => None,
    };
    match lhs {
        Some(l) => vec![format!("{l} &= {}", to_latex(&eq.rhs()))],
        None => eq
            .rules
            .iter()
            .map(|r| format!("{} &= {}", to_latex(&RatFn::var(Var::Jet(r.var))), to_latex(&r.rhs)))
            .collect(),
    }
}

fn one_form(dx: &RatFn, dt: &RatFn) -> String {
    let part = |e: &RatFn, d: &str| -> Option<String> {
        if e.is_zero() {
            None
        } else if e.is_one() {
            Some(format!("\\,{d}"))
        } else {
            Some(format!("\\left({}\\right){d}", to_latex(e)))
        }
    };
    match (part(dx, "dx"), part(dt, "dt")) {
        (None, None) => "0".into(),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (Some(a), Some(b)) => format!("{a} + {b}"),
    }
}

/// Standalone document: the equation, then the three forms.
pub fn latex_document(inst: &Loaded) -> String {
    let c = &inst.coframe;
    let mut s = String::new();
    s.push_str("\\documentclass{article}\n\\usepackage{amsmath}\n\\begin{document}\n");
    s.push_str(&format!("\\section*{{{}}}\n", latex_escape(&inst.name)));
    s.push_str("\\begin{align*}\n");
    s.push_str(&equation_latex(&inst.equation).join(" \\\\\n"));
    s.push_str("\n\\end{align*}\n\\begin{align*}\n");
    let rows: Vec<String> = (1..=3)
        .map(|i| format!("\\omega_{i} &= {}", one_form(c.at(i, 1), c.at(i, 2))))
        .collect();
    s.push_str(&rows.join(" \\\\\n"));
    s.push_str("\n\\end{align*}\n");
    s.push_str(&format!("with $\\delta = {}$.\n", c.delta));
    for f in &inst.flags {
        s.push_str(&format!("\\par Flag: \\texttt{{{}}}\n", latex_escape(f)));
    }
    s.push_str("\\end{document}\n");
    s
}

pub fn export(source: &SourceArgs, format: Format) -> Out {
    let inst = source.load()?;
    let text = match format {
        Format::Latex => latex_document(&inst),
        Format::Json => pretty(&json!({
            "name": inst.name,
            "coframe": inst.coframe.to_json(),
            "equation": inst.equation.to_json(),
            "flags": inst.flags,
        })),
        Format::Text => format!("{}\n{}\n{}", inst.name, inst.equation.display(), forms_text(&inst.coframe)),
    };
    Ok((text, true))
}
