//! Constructors for the classified branches and a catalog of named
//! equations built from them.

mod branches;
mod catalog;
mod spec;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::coframe::{split_ab, Coframe, EqClass, EquationSpec, Rule};
use crate::expr::{
    change_coordinates, derive, func, substitute, Bindings, Context, ExprError, FunctionBinding, JetVar, OdeRule,
    RatFn, TotalDx, Var,
};

pub use catalog::{alt_chr_sign_variant, catalog, catalog_names, explicit_chr, rescaled_flat_instance, CATALOG};
pub use spec::{BranchSpecJson, FunctionJson};

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("branch {branch} only exists for delta = {allowed}")]
    Delta { branch: &'static str, allowed: &'static str },
    #[error("unknown branch `{0}`")]
    UnknownBranch(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("`{0}` is outside the supported catalog (vector-valued or nonlocal)")]
    OutOfScope(String),
    #[error("branch {branch} has no parameter `{name}`")]
    UnknownParameter { branch: &'static str, name: String },
    #[error("branch {branch} has no function `{name}`")]
    UnknownFunction { branch: &'static str, name: String },
    #[error("function `{name}` must take the argument {expected}")]
    FunctionArgument { name: String, expected: String },
    #[error("the trigonometric and hyperbolic regimes exclude r^2 - delta = 0")]
    DegenerateRegime,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type FamilyResult<T> = Result<T, FamilyError>;

/// The eleven classified branches. The first five are of the form
/// `z_t - lam z_{2t} = A z3 + B`, the rest `z_{2t} = A z3 + B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    T32I,
    T32II,
    T33,
    T35I,
    T35II,
    T32sI,
    T32sII,
    T33sI,
    T33sII,
    T35sI,
    T35sII,
}

impl Branch {
    pub const ALL: [Branch; 11] = [
        Branch::T32I,
        Branch::T32II,
        Branch::T33,
        Branch::T35I,
        Branch::T35II,
        Branch::T32sI,
        Branch::T32sII,
        Branch::T33sI,
        Branch::T33sII,
        Branch::T35sI,
        Branch::T35sII,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Branch::T32I => "T32-I",
            Branch::T32II => "T32-II",
            Branch::T33 => "T33",
            Branch::T35I => "T35-I",
            Branch::T35II => "T35-II",
            Branch::T32sI => "T32s-I",
            Branch::T32sII => "T32s-II",
            Branch::T33sI => "T33s-I",
            Branch::T33sII => "T33s-II",
            Branch::T35sI => "T35s-I",
            Branch::T35sII => "T35s-II",
        }
    }

    pub fn from_id(s: &str) -> FamilyResult<Branch> {
        Branch::ALL
            .into_iter()
            .find(|b| b.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| FamilyError::UnknownBranch(s.to_string()))
    }

    pub fn class(self) -> EqClass {
        match self {
            Branch::T32I | Branch::T32II | Branch::T33 | Branch::T35I | Branch::T35II => EqClass::A,
            _ => EqClass::B,
        }
    }

    /// Admissible curvature signs.
    pub fn deltas(self) -> &'static [i8] {
        match self {
            Branch::T33 | Branch::T35II | Branch::T33sI | Branch::T33sII | Branch::T35sII => &[1, -1],
            _ => &[1],
        }
    }

    /// Parameter names with their default values; `None` means symbolic.
    pub fn parameters(self) -> &'static [(&'static str, Option<i64>)] {
        match self {
            Branch::T32I => &[("lam", None), ("a", Some(1)), ("b", Some(1))],
            Branch::T32II => &[("lam", None), ("eta", None), ("alpha", None)],
            Branch::T33 => &[("lam", None), ("r", None), ("gamma", None), ("sigma", None)],
            Branch::T35I => &[("lam", None), ("eta", None), ("rho", None)],
            Branch::T35II => &[("lam", None), ("eta", None), ("r", None), ("gamma", None), ("sigma", None)],
            Branch::T32sI => &[("a", Some(1)), ("b", Some(1)), ("alpha", None), ("m", None), ("n", None)],
            Branch::T32sII => &[("alpha", None), ("beta", None), ("eta", None)],
            Branch::T33sI => &[("r", None)],
            Branch::T33sII => &[("m", None), ("r", None), ("gamma", None), ("mu", None)],
            Branch::T35sI => &[("eta", None), ("rho", None), ("r", None)],
            Branch::T35sII => &[("eta", None), ("r", None), ("gamma", None), ("mu", None), ("m", None)],
        }
    }

    /// Arbitrary functions of the branch with their canonical arguments.
    pub fn functions(self) -> Vec<(&'static str, Vec<RatFn>)> {
        let z = || RatFn::jet(0);
        let z1 = || RatFn::jet(1);
        let z2 = || RatFn::jet(2);
        let lam = || RatFn::param("lam");
        let m = || RatFn::param("m");
        let lam_arg = || &(&lam() * &(&z1() * &z1())) - &(&z() * &z());
        let m_arg = || &(&RatFn::int(2) * &(&m() * &z())) + &(&z1() * &z1());
        match self {
            Branch::T32I | Branch::T32sI => vec![("psi", vec![z(), z1(), z2()])],
            Branch::T32II | Branch::T32sII => vec![("h", vec![z()])],
            Branch::T33 => vec![("phi", vec![lam_arg()])],
            Branch::T35II => vec![("ell", vec![lam_arg()])],
            Branch::T35I | Branch::T35sI => vec![("phi", vec![z(), z1()])],
            Branch::T33sI => vec![("psi", vec![z(), z1(), z2()]), ("phi", vec![z1()])],
            Branch::T33sII => vec![("phi", vec![m_arg()])],
            Branch::T35sII => vec![("ell", vec![m_arg()])],
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Which of the coupled `+-` readings to take: `Upper` reads every `+-` as
/// `+` and every `-+` as `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Upper,
    Lower,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Upper, Sign::Lower];

    /// Value of `+-`.
    pub fn pm(self) -> RatFn {
        match self {
            Sign::Upper => RatFn::one(),
            Sign::Lower => RatFn::int(-1),
        }
    }

    /// Value of `-+`.
    pub fn mp(self) -> RatFn {
        -&self.pm()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Upper => "+",
            Sign::Lower => "-",
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" | "upper" => Some(Sign::Upper),
            "-" | "lower" => Some(Sign::Lower),
            _ => None,
        }
    }
}

/// How an arbitrary function is realised.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Formal,
    /// Body in the function's own jet arguments when those are distinct
    /// jet coordinates, otherwise in `u` (or `u1, u2, ...`).
    Closed(RatFn),
    /// `a cos + b sin` (or `cosh`, `sinh`) solution of a constant
    /// coefficient second-order law; the branch picks the regime.
    Regime { a: RatFn, b: RatFn },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchSpec {
    pub branch: Branch,
    pub sign: Sign,
    pub delta: i8,
    pub params: BTreeMap<String, RatFn>,
    pub functions: BTreeMap<String, FunctionSpec>,
}

impl BranchSpec {
    pub fn new(branch: Branch, sign: Sign, delta: i8) -> Self {
        BranchSpec {
            branch,
            sign,
            delta,
            params: BTreeMap::new(),
            functions: BTreeMap::new(),
        }
    }

    pub fn param(mut self, name: &str, value: RatFn) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn closed(mut self, name: &str, body: RatFn) -> Self {
        self.functions.insert(name.to_string(), FunctionSpec::Closed(body));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    /// The coframe closes modulo `D_x` of the first-order law, not the law
    /// itself.
    DifferentialConsequence,
    /// The instance is an x-reflection of a branch instance.
    Reflected,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::DifferentialConsequence => "ZCR-for-differential-consequence",
            Flag::Reflected => "x-reflected",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub name: String,
    pub equation: EquationSpec,
    pub coframe: Coframe,
    pub flags: Vec<Flag>,
    /// The first-order law `z_{1t} = psi` when the equation is its
    /// x-derivative.
    pub first_order: Option<Rule>,
    pub branch: Option<BranchSpec>,
}

impl FamilyInstance {
    pub fn class(&self) -> EqClass {
        self.equation.class
    }
}

/// `A = d rhs/d z3`, `B = rhs - A z3`.
pub fn as_ab(rhs: &RatFn) -> FamilyResult<(RatFn, RatFn)> {
    Ok(split_ab(rhs)?)
}

pub(crate) enum Check {
    NonZero(RatFn, &'static str),
    NonNegative(RatFn, &'static str),
    Zero(RatFn, &'static str),
    Binary(RatFn, &'static str),
}

/// Shared state while one branch is being assembled.
pub(crate) struct Builder<'a> {
    pub(crate) spec: &'a BranchSpec,
    pub(crate) ctx: Context,
    pub(crate) checks: Vec<Check>,
    /// Closed-form bodies, keyed by function name.
    pub(crate) closed: BTreeMap<String, RatFn>,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a BranchSpec) -> Self {
        let closed = spec
            .functions
            .iter()
            .filter_map(|(k, f)| match f {
                FunctionSpec::Closed(body) => Some((k.clone(), body.clone())),
                _ => None,
            })
            .collect();
        Builder {
            spec,
            ctx: Context::new(),
            checks: Vec::new(),
            closed,
        }
    }

    pub(crate) fn delta(&self) -> RatFn {
        RatFn::int(self.spec.delta as i64)
    }

    pub(crate) fn pm(&self) -> RatFn {
        self.spec.sign.pm()
    }

    pub(crate) fn mp(&self) -> RatFn {
        self.spec.sign.mp()
    }

    pub(crate) fn p(&self, name: &str) -> RatFn {
        self.spec
            .params
            .get(name)
            .cloned()
            .or_else(|| {
                self.spec
                    .branch
                    .parameters()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .and_then(|(_, d)| d.map(RatFn::int))
            })
            .unwrap_or_else(|| RatFn::param(name))
    }

    /// Registers `symbol^2 = square` and returns the symbol.
    pub(crate) fn radical(&mut self, symbol: &str, square: RatFn) -> RatFn {
        self.ctx.add_side_relation(symbol, square);
        RatFn::param(symbol)
    }

    pub(crate) fn dx(&self, e: &RatFn) -> FamilyResult<RatFn> {
        let d = TotalDx {
            max_order: self.ctx.max_jet_order,
        };
        Ok(self.ctx.reduce(&derive(e, &d)?)?)
    }

    pub(crate) fn dxn(&self, e: &RatFn, n: u32) -> FamilyResult<RatFn> {
        let mut r = e.clone();
        for _ in 0..n {
            r = self.dx(&r)?;
        }
        Ok(r)
    }

    /// The formal function `name` at the branch's argument, differentiated
    /// `order` times (one-argument functions only).
    pub(crate) fn f(&self, name: &str, order: u32) -> RatFn {
        let (_, args) = self
            .spec
            .branch
            .functions()
            .into_iter()
            .find(|(n, _)| *n == name)
            .expect("function declared by the branch");
        let mut derivs = vec![0; args.len()];
        if order > 0 {
            derivs[0] = order;
        }
        let args = args.into_iter().map(|a| self.bind_params(&a)).collect();
        func(name, derivs, args)
    }

    fn bind_params(&self, e: &RatFn) -> RatFn {
        let mut b = Bindings::new();
        for (k, v) in &self.spec.params {
            b = b.param(k, v.clone());
        }
        if b.vars.is_empty() {
            e.clone()
        } else {
            substitute(e, &b).unwrap_or_else(|_| e.clone())
        }
    }

    pub(crate) fn nonzero(&mut self, e: RatFn, label: &'static str) {
        self.checks.push(Check::NonZero(e, label));
    }

    pub(crate) fn nonnegative(&mut self, e: RatFn, label: &'static str) {
        self.checks.push(Check::NonNegative(e, label));
    }

    pub(crate) fn zero(&mut self, e: RatFn, label: &'static str) {
        self.checks.push(Check::Zero(e, label));
    }

    pub(crate) fn binary(&mut self, e: RatFn, label: &'static str) {
        self.checks.push(Check::Binary(e, label));
    }

}

/// Raw branch output before function specialisation.
pub(crate) struct Draft {
    pub rhs: RatFn,
    pub f: [[RatFn; 2]; 3],
}

fn check_functions(spec: &BranchSpec) -> FamilyResult<()> {
    let declared = spec.branch.functions();
    for (name, fs) in &spec.functions {
        if !declared.iter().any(|(n, _)| n == name) {
            return Err(FamilyError::UnknownFunction {
                branch: spec.branch.id(),
                name: name.clone(),
            });
        }
        if matches!(fs, FunctionSpec::Regime { .. }) && (spec.branch, name.as_str()) != (Branch::T33sI, "phi") {
            return Err(FamilyError::Constraint(format!(
                "`{name}` has no trigonometric regime in branch {}",
                spec.branch
            )));
        }
    }
    Ok(())
}

fn function_bindings(branch: Branch, closed: &BTreeMap<String, RatFn>) -> FamilyResult<Bindings> {
    let declared = branch.functions();
    let mut b = Bindings::new();
    for (name, body) in closed {
        let (_, args) = declared
            .iter()
            .find(|(n, _)| n == name)
            .expect("checked against the branch");
        let arity = args.len();
        let plain: Option<Vec<Var>> = args.iter().map(|a| a.as_var().cloned()).collect();
        let body = match plain {
            Some(vars) if vars.iter().all(|v| matches!(v, Var::Jet(_))) => {
                let mut rename = Bindings::new();
                for (j, v) in vars.iter().enumerate() {
                    rename = rename.var(v.clone(), RatFn::var(FunctionBinding::placeholder(arity, j)));
                }
                substitute(body, &rename)?
            }
            _ => body.clone(),
        };
        b = b.function(name, arity, body);
    }
    Ok(b)
}

fn run_checks(checks: &[Check], ctx: &Context) -> FamilyResult<()> {
    for c in checks {
        match c {
            Check::NonZero(e, label) => {
                if ctx.reduce(e)?.is_zero() {
                    return Err(FamilyError::Constraint(format!("{label} must be nonzero")));
                }
            }
            Check::Zero(e, label) => {
                if !ctx.reduce(e)?.is_zero() {
                    return Err(FamilyError::Constraint(format!("{label} must vanish")));
                }
            }
            Check::NonNegative(e, label) => {
                if let Some(v) = ctx.reduce(e)?.as_constant() {
                    if v < crate::expr::q(0) {
                        return Err(FamilyError::Constraint(format!("{label} must be nonnegative")));
                    }
                }
            }
            Check::Binary(e, label) => {
                let ok = ctx
                    .reduce(e)?
                    .as_constant()
                    .is_some_and(|v| v == crate::expr::q(0) || v == crate::expr::q(1));
                if !ok {
                    return Err(FamilyError::Constraint(format!("{label} must be 0 or 1")));
                }
            }
        }
    }
    Ok(())
}

/// Builds the equation and coframe of a branch.
pub fn construct(spec: &BranchSpec) -> FamilyResult<FamilyInstance> {
    let b = spec.branch;
    if !b.deltas().contains(&spec.delta) {
        return Err(FamilyError::Delta {
            branch: b.id(),
            allowed: if b.deltas().len() == 2 { "+1 or -1" } else { "+1" },
        });
    }
    for name in spec.params.keys() {
        if !b.parameters().iter().any(|(n, _)| n == name) {
            return Err(FamilyError::UnknownParameter {
                branch: b.id(),
                name: name.clone(),
            });
        }
    }
    check_functions(spec)?;
    let mut builder = Builder::new(spec);
    let draft = branches::build(&mut builder).map_err(|e| match e {
        FamilyError::Expr(ExprError::DivisionByZero) => {
            FamilyError::Constraint("a parameter that must be nonzero vanishes".into())
        }
        e => e,
    })?;
    let fb = function_bindings(b, &builder.closed)?;
    let ctx = builder.ctx.clone();
    let special = |e: &RatFn| -> FamilyResult<RatFn> {
        let e = if fb.functions.is_empty() {
            e.clone()
        } else {
            substitute(e, &fb)?
        };
        Ok(ctx.reduce(&e)?)
    };
    let rhs = special(&draft.rhs)?;
    let mut f: [[RatFn; 2]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..2 {
            f[i][j] = special(&draft.f[i][j])?;
        }
    }
    let checks: Vec<Check> = builder
        .checks
        .iter()
        .map(|c| {
            Ok(match c {
                Check::NonZero(e, l) => Check::NonZero(special(e)?, l),
                Check::Zero(e, l) => Check::Zero(special(e)?, l),
                Check::NonNegative(e, l) => Check::NonNegative(special(e)?, l),
                Check::Binary(e, l) => Check::Binary(special(e)?, l),
            })
        })
        .collect::<FamilyResult<_>>()?;
    run_checks(&checks, &ctx)?;
    let (a, bb) = as_ab(&rhs)?;
    let equation = match b.class() {
        EqClass::A => EquationSpec::class_a(builder.p("lam"), a, bb),
        _ => EquationSpec::class_b(a, bb),
    }
    .with_context(ctx.clone());
    let coframe = Coframe::new(f, spec.delta).with_context(ctx);
    Ok(FamilyInstance {
        name: format!("{}{}", b.id(), spec.sign.symbol()),
        equation,
        coframe,
        flags: Vec::new(),
        first_order: None,
        branch: Some(spec.clone()),
    })
}

/// The ODE rule `name'' = coeff * name`.
pub(crate) fn second_order_rule(name: &str, coeff: RatFn) -> OdeRule {
    OdeRule {
        function: std::sync::Arc::from(name),
        order: 2,
        coeffs: vec![coeff, RatFn::zero()],
    }
}

/// Pulls a coframe back along `x -> -x`: `z_k -> (-1)^k z_k`, `dx -> -dx`.
pub fn reflect_x(c: &Coframe) -> FamilyResult<Coframe> {
    let b = reflection_bindings(c.ctx.max_jet_order);
    let mut f = c.f.clone();
    for row in f.iter_mut() {
        row[0] = -&c.ctx.reduce(&change_coordinates(&row[0], &b)?)?;
        row[1] = c.ctx.reduce(&change_coordinates(&row[1], &b)?)?;
    }
    Ok(Coframe {
        f,
        delta: c.delta,
        ctx: c.ctx.clone(),
    })
}

pub(crate) fn reflection_bindings(max: u32) -> Bindings {
    let mut b = Bindings::new();
    for k in (1..=max).step_by(2) {
        b = b
            .var(Var::jet(k), -&RatFn::jet(k))
            .var(Var::Jet(JetVar::t(k)), -&RatFn::jet_t(k));
    }
    b
}

#[cfg(test)]
mod tests;
