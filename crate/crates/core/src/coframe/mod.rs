//! Coframes, evolution rules and the structure-equation residuals.

mod io;
mod lemma;
mod zcr;

use std::cell::RefCell;
use std::collections::HashMap;

use crate::expr::{
    derive, Bindings, Context, Derivation, ExprError, JetVar, Partial, RatFn, Result, TotalDx, Var,
};

pub use io::{CoframeJson, EquationJson, IoError, OdeRuleJson, RuleJson, SideRelationJson};
pub use lemma::{lemma1_check, lemma1star_check, Constraint, Decomposition, LemmaReport};
pub use zcr::{
    coframe_zcr_residual, gauge_transform, zcr_matrices, zcr_residual, Algebra, Cx, Mat2, ZcrPair,
};

/// The 3x2 coefficient matrix of the 1-forms, `f[i][0]` multiplying `dx` and
/// `f[i][1]` multiplying `dt`, with the curvature sign `delta`.
#[derive(Clone, Debug)]
pub struct Coframe {
    pub f: [[RatFn; 2]; 3],
    pub delta: i8,
    pub ctx: Context,
}

impl Coframe {
    pub fn new(f: [[RatFn; 2]; 3], delta: i8) -> Self {
        Coframe {
            f,
            delta,
            ctx: Context::new(),
        }
    }

    pub fn with_context(mut self, ctx: Context) -> Self {
        self.ctx = ctx;
        self
    }

    /// Entry `f_{ij}` with the 1-based indices used in formulas.
    pub fn at(&self, i: usize, j: usize) -> &RatFn {
        &self.f[i - 1][j - 1]
    }

    pub fn delta_ratfn(&self) -> RatFn {
        RatFn::int(self.delta as i64)
    }

    /// `f11 f22 - f12 f21`, reduced.
    pub fn nondegeneracy(&self) -> Result<RatFn> {
        let w = &(self.at(1, 1) * self.at(2, 2)) - &(self.at(1, 2) * self.at(2, 1));
        self.ctx.reduce(&w)
    }

    /// The `dx` coefficients must not mention t-derivatives.
    pub fn validate(&self) -> Result<()> {
        if self.delta != 1 && self.delta != -1 {
            return Err(ExprError::InvalidRule(format!("delta must be +1 or -1, got {}", self.delta)));
        }
        for i in 0..3 {
            if self.f[i][0].all_vars().iter().any(|v| matches!(v, Var::Jet(j) if j.t)) {
                return Err(ExprError::InvalidRule(format!(
                    "f{}1 contains a t-derivative",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn map(&self, mut g: impl FnMut(&RatFn) -> Result<RatFn>) -> Result<Coframe> {
        let mut f = self.f.clone();
        for row in f.iter_mut() {
            for e in row.iter_mut() {
                *e = g(e)?;
            }
        }
        Ok(Coframe {
            f,
            delta: self.delta,
            ctx: self.ctx.clone(),
        })
    }

    pub fn reduced(&self) -> Result<Coframe> {
        let ctx = self.ctx.clone();
        self.map(|e| ctx.reduce(e))
    }

    pub fn substitute(&self, b: &Bindings) -> Result<Coframe> {
        let ctx = self.ctx.clone();
        self.map(|e| ctx.reduce(&crate::expr::substitute(e, b)?))
    }
}

/// Classes of third-order evolution laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqClass {
    /// `z_t - lam z_{2t} = A z3 + B`; only `z_t` is eliminated.
    A,
    /// `z_{2t} = A z3 + B`, prolonged by x-differentiation.
    B,
    /// A rule for some `z_{kt}`, prolonged by x-differentiation.
    Generic,
}

impl EqClass {
    pub fn name(self) -> &'static str {
        match self {
            EqClass::A => "a",
            EqClass::B => "b",
            EqClass::Generic => "generic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub var: JetVar,
    pub rhs: RatFn,
}

/// An evolution law as substitution rules for t-derivatives.
#[derive(Clone, Debug)]
pub struct EquationSpec {
    pub class: EqClass,
    pub rules: Vec<Rule>,
    pub a: RatFn,
    pub b: RatFn,
    pub lambda: RatFn,
    pub ctx: Context,
}

impl EquationSpec {
    pub fn class_a(lambda: RatFn, a: RatFn, b: RatFn) -> Self {
        let rhs = &(&lambda * &RatFn::jet_t(2)) + &(&(&a * &RatFn::jet(3)) + &b);
        EquationSpec {
            class: EqClass::A,
            rules: vec![Rule {
                var: JetVar::t(0),
                rhs,
            }],
            a,
            b,
            lambda,
            ctx: Context::new(),
        }
    }

    pub fn class_b(a: RatFn, b: RatFn) -> Self {
        let rhs = &(&a * &RatFn::jet(3)) + &b;
        EquationSpec {
            class: EqClass::B,
            rules: vec![Rule {
                var: JetVar::t(2),
                rhs,
            }],
            a,
            b,
            lambda: RatFn::zero(),
            ctx: Context::new(),
        }
    }

    /// `z_{kt} = rhs`. `A` and `B` are filled in when `rhs` is linear in
    /// `z3` and free of higher jets; otherwise `A = 0`, `B = rhs`.
    pub fn generic(var: JetVar, rhs: RatFn) -> Self {
        let (a, b) = split_ab(&rhs).unwrap_or_else(|_| (RatFn::zero(), rhs.clone()));
        EquationSpec {
            class: EqClass::Generic,
            rules: vec![Rule { var, rhs }],
            a,
            b,
            lambda: RatFn::zero(),
            ctx: Context::new(),
        }
    }

    /// No rules at all: every t-derivative stays formal.
    pub fn none() -> Self {
        EquationSpec {
            class: EqClass::Generic,
            rules: Vec::new(),
            a: RatFn::zero(),
            b: RatFn::zero(),
            lambda: RatFn::zero(),
            ctx: Context::new(),
        }
    }

    pub fn with_context(mut self, ctx: Context) -> Self {
        self.ctx = ctx;
        self
    }

    /// `A z3 + B`.
    pub fn rhs(&self) -> RatFn {
        &(&self.a * &RatFn::jet(3)) + &self.b
    }

    /// Class A with `lambda = 0` is an ordinary evolution law.
    fn prolongs(&self) -> bool {
        self.class != EqClass::A || self.lambda.is_zero()
    }

    /// The rule-reduced image of `z_k` under the t-derivative.
    ///
    /// For class A with `lambda != 0` the free t-coordinates are `z_t` and
    /// `z_{1t}`; higher ones are eliminated through
    /// `z_{kt} = (z_{(k-2)t} - D_x^{k-2}(A z3 + B)) / lambda`.
    pub fn t_image(&self, k: u32, ctx: &Context) -> Result<RatFn> {
        if !self.prolongs() {
            if k < 2 {
                return Ok(RatFn::jet_t(k));
            }
            let d = TotalDx {
                max_order: ctx.max_jet_order,
            };
            let mut src = self.rhs();
            for _ in 0..k - 2 {
                src = ctx.reduce(&derive(&src, &d)?)?;
            }
            let lower = self.t_image(k - 2, ctx)?;
            let inv = self.lambda.recip()?;
            return ctx.reduce(&(&(&lower - &src) * &inv));
        }
        let exact = self.rules.iter().find(|r| r.var == JetVar::t(k));
        if let Some(r) = exact {
            return Ok(r.rhs.clone());
        }
        if self.prolongs() {
            let base = self
                .rules
                .iter()
                .filter(|r| r.var.order <= k)
                .max_by_key(|r| r.var.order);
            if let Some(r) = base {
                let d = TotalDx {
                    max_order: ctx.max_jet_order,
                };
                let mut e = r.rhs.clone();
                for _ in r.var.order..k {
                    e = ctx.reduce(&derive(&e, &d)?)?;
                }
                return Ok(e);
            }
        }
        Ok(RatFn::jet_t(k))
    }

    /// `T_t e`: the vertical t-derivative with every rule applied.
    pub fn dt(&self, e: &RatFn, ctx: &Context) -> Result<RatFn> {
        let d = EvolutionDt {
            eq: self,
            ctx,
            cache: RefCell::new(HashMap::new()),
        };
        ctx.reduce(&derive(e, &d)?)
    }

    /// Applies the rules to t-derivative symbols already present in `e`.
    pub fn apply_rules(&self, e: &RatFn, ctx: &Context) -> Result<RatFn> {
        let mut b = Bindings::new();
        for v in e.all_vars() {
            if let Var::Jet(j) = v {
                if j.t {
                    let img = self.t_image(j.order, ctx)?;
                    if img != RatFn::jet_t(j.order) {
                        b = b.var(Var::Jet(j), img);
                    }
                }
            }
        }
        if b.vars.is_empty() {
            return Ok(e.clone());
        }
        ctx.reduce(&crate::expr::substitute(e, &b)?)
    }

    /// Returns `(A, B)` in canonical form.
    pub fn as_ab(&self) -> (&RatFn, &RatFn) {
        (&self.a, &self.b)
    }

    /// Display form `lhs = rhs`.
    pub fn display(&self) -> String {
        match self.class {
            EqClass::A => {
                if self.lambda.is_zero() {
                    format!("zt = {}", self.rhs())
                } else {
                    format!("zt - ({})*z2t = {}", self.lambda, self.rhs())
                }
            }
            EqClass::B => format!("z2t = {}", self.rhs()),
            EqClass::Generic => self
                .rules
                .iter()
                .map(|r| format!("{} = {}", r.var, r.rhs))
                .collect::<Vec<_>>()
                .join(", "),
        }
    }
}

struct EvolutionDt<'a> {
    eq: &'a EquationSpec,
    ctx: &'a Context,
    cache: RefCell<HashMap<u32, RatFn>>,
}

impl Derivation for EvolutionDt<'_> {
    fn image(&self, v: &Var) -> Result<Option<RatFn>> {
        match v {
            Var::Jet(j) if j.t => Err(ExprError::SecondLevelT(*j)),
            Var::Jet(j) => {
                if let Some(hit) = self.cache.borrow().get(&j.order) {
                    return Ok(Some(hit.clone()));
                }
                let img = self.eq.t_image(j.order, self.ctx)?;
                self.cache.borrow_mut().insert(j.order, img.clone());
                Ok(Some(img))
            }
            _ => Ok(None),
        }
    }
}

/// Splits `rhs = A z3 + B` with `A`, `B` free of `z3` and higher jets.
pub fn split_ab(rhs: &RatFn) -> Result<(RatFn, RatFn)> {
    let z3 = Var::jet(3);
    for v in rhs.all_vars() {
        if let Var::Jet(j) = v {
            if !j.t && j.order > 3 {
                return Err(ExprError::InvalidRule(format!(
                    "right-hand side depends on {j}, beyond z3"
                )));
            }
        }
    }
    let a = derive(rhs, &Partial(&z3))?;
    if a.contains_var(&z3) {
        return Err(ExprError::InvalidRule("right-hand side is not linear in z3".into()));
    }
    let b = rhs - &(&a * &RatFn::jet(3));
    if b.contains_var(&z3) {
        return Err(ExprError::InvalidRule("right-hand side is not linear in z3".into()));
    }
    if a.is_zero() && b.is_zero() {
        return Err(ExprError::InvalidRule("A and B are both identically zero".into()));
    }
    Ok((a, b))
}

/// `(R1, R2, R3)` of the structure equations modulo the evolution law.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals(pub [RatFn; 3]);

impl Residuals {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(RatFn::is_zero)
    }
}

/// The combined reduction context for a coframe and an equation.
pub fn joint_context(c: &Coframe, eq: &EquationSpec) -> Context {
    c.ctx.merged(&eq.ctx)
}

pub fn structure_residuals(c: &Coframe, eq: &EquationSpec) -> Result<Residuals> {
    c.validate()?;
    let ctx = joint_context(c, eq);
    let dx = TotalDx {
        max_order: ctx.max_jet_order,
    };
    let f = |i: usize, j: usize| c.at(i, j);
    let d = c.delta_ratfn();
    let tt = |e: &RatFn| eq.dt(e, &ctx);
    let xx = |e: &RatFn| -> Result<RatFn> { eq.apply_rules(&derive(e, &dx)?, &ctx) };
    let r1 = &(&xx(f(1, 2))? - &tt(f(1, 1))?) + &(&(f(3, 2) * f(2, 1)) - &(f(3, 1) * f(2, 2)));
    let r2 = &(&xx(f(2, 2))? - &tt(f(2, 1))?) + &(&(f(3, 1) * f(1, 2)) - &(f(1, 1) * f(3, 2)));
    let r3 = &(&xx(f(3, 2))? - &tt(f(3, 1))?)
        + &(&d * &(&(f(2, 1) * f(1, 2)) - &(f(1, 1) * f(2, 2))));
    Ok(Residuals([ctx.reduce(&r1)?, ctx.reduce(&r2)?, ctx.reduce(&r3)?]))
}

#[derive(Clone, Debug)]
pub struct SurfaceReport {
    pub residuals: Residuals,
    pub nondegeneracy: RatFn,
    pub pass: bool,
}

impl SurfaceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pass": self.pass,
            "residuals": self.residuals.0.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "nondegeneracy": self.nondegeneracy.to_string(),
        })
    }
}

/// Passes when every residual vanishes and the nondegeneracy witness does
/// not. The witness is generic: it may still vanish on special solutions.
pub fn verify_describes_surface(c: &Coframe, eq: &EquationSpec) -> Result<SurfaceReport> {
    let residuals = structure_residuals(c, eq)?;
    let ctx = joint_context(c, eq);
    let w = &(c.at(1, 1) * c.at(2, 2)) - &(c.at(1, 2) * c.at(2, 1));
    let nondegeneracy = ctx.reduce(&w)?;
    let pass = residuals.is_zero() && !nondegeneracy.is_zero();
    Ok(SurfaceReport {
        residuals,
        nondegeneracy,
        pass,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::{builtin, parse_ratfn, Builtin};

    pub(crate) fn sine_gordon() -> Coframe {
        let p = |s: &str| parse_ratfn(s).unwrap();
        Coframe::new(
            [
                [RatFn::zero(), p("sin(z)/eta")],
                [p("eta"), p("cos(z)/eta")],
                [p("z1"), RatFn::zero()],
            ],
            1,
        )
    }

    #[test]
    fn sine_gordon_without_rules() {
        let r = structure_residuals(&sine_gordon(), &EquationSpec::none()).unwrap();
        assert!(r.0[0].is_zero());
        assert!(r.0[1].is_zero());
        let expect = &builtin(Builtin::Sin, RatFn::jet(0)).unwrap() - &RatFn::jet_t(1);
        assert_eq!(r.0[2], expect);
    }

    #[test]
    fn sine_gordon_with_rule() {
        let eq = EquationSpec::generic(JetVar::t(1), builtin(Builtin::Sin, RatFn::jet(0)).unwrap());
        let rep = verify_describes_surface(&sine_gordon(), &eq).unwrap();
        assert!(rep.pass, "{:?}", rep.residuals);
    }

    #[test]
    fn broken_coframe_fails() {
        let mut c = sine_gordon();
        c.f[0][1] = RatFn::zero();
        let eq = EquationSpec::generic(JetVar::t(1), builtin(Builtin::Sin, RatFn::jet(0)).unwrap());
        let rep = verify_describes_surface(&c, &eq).unwrap();
        assert!(!rep.pass);
        assert!(!rep.residuals.0[0].is_zero());
    }

    #[test]
    fn prolongation_differentiates_the_rule() {
        let eq = EquationSpec::generic(JetVar::t(1), builtin(Builtin::Sin, RatFn::jet(0)).unwrap());
        let img = eq.t_image(2, &Context::new()).unwrap();
        let expect = &builtin(Builtin::Cos, RatFn::jet(0)).unwrap() * &RatFn::jet(1);
        assert_eq!(img, expect);
        // z_t stays formal below the rule's order
        assert_eq!(eq.t_image(0, &Context::new()).unwrap(), RatFn::jet_t(0));
    }

    #[test]
    fn split_ab_rejects_nonlinear() {
        let (a, b) = split_ab(&parse_ratfn("z3").unwrap()).unwrap();
        assert!(a.is_one() && b.is_zero());
        assert!(split_ab(&parse_ratfn("z3^2").unwrap()).is_err());
        assert!(split_ab(&parse_ratfn("z4").unwrap()).is_err());
        assert!(split_ab(&RatFn::zero()).is_err());
    }
}
