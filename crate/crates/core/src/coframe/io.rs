//! JSON forms of coframes and evolution laws.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{split_ab, Coframe, EqClass, EquationSpec, Rule};
use crate::expr::{derive, parse_ratfn, Context, ExprError, JetVar, OdeRule, Partial, RatFn, Var};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in field `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ExprError,
    },
    #[error("{0}")]
    Invalid(String),
}

fn expr(field: impl Into<String>, text: &str) -> Result<RatFn, IoError> {
    parse_ratfn(text).map_err(|source| IoError::Expr {
        field: field.into(),
        source,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideRelationJson {
    pub symbol: String,
    pub square: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeRuleJson {
    #[serde(rename = "fn")]
    pub function: String,
    pub order: u32,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoframeJson {
    pub delta: i8,
    pub f: [[String; 2]; 3],
    #[serde(default)]
    pub side_relations: Vec<SideRelationJson>,
    #[serde(default)]
    pub ode_rules: Vec<OdeRuleJson>,
}

fn context_from(
    side: &[SideRelationJson],
    odes: &[OdeRuleJson],
) -> Result<Context, IoError> {
    let mut ctx = Context::new();
    for s in side {
        ctx.add_side_relation(&s.symbol, expr(format!("side_relations.{}", s.symbol), &s.square)?);
    }
    for o in odes {
        let field = format!("ode_rules.{}", o.function);
        let rhs = expr(&field, &o.rhs)?;
        let rule = OdeRule::from_rhs(&o.function, o.order, &rhs)
            .map_err(|source| IoError::Expr { field, source })?;
        ctx.add_ode_rule(rule);
    }
    Ok(ctx)
}

fn context_to(ctx: &Context) -> (Vec<SideRelationJson>, Vec<OdeRuleJson>) {
    let side = ctx
        .side_relations
        .iter()
        .map(|s| SideRelationJson {
            symbol: s.symbol.to_string(),
            square: s.square.to_string(),
        })
        .collect();
    let odes = ctx
        .ode_rules
        .iter()
        .map(|r| {
            let terms: Vec<RatFn> = r
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let f = crate::expr::func(&r.function, vec![k as u32], vec![RatFn::param("u")]);
                    c * &f
                })
                .collect();
            OdeRuleJson {
                function: r.function.to_string(),
                order: r.order,
                rhs: RatFn::sum(terms.iter()).to_string(),
            }
        })
        .collect();
    (side, odes)
}

impl CoframeJson {
    pub fn to_coframe(&self) -> Result<Coframe, IoError> {
        if self.delta != 1 && self.delta != -1 {
            return Err(IoError::Invalid(format!("delta must be 1 or -1, got {}", self.delta)));
        }
        let mut f: [[RatFn; 2]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..2 {
                f[i][j] = expr(format!("f{}{}", i + 1, j + 1), &self.f[i][j])?;
            }
        }
        let ctx = context_from(&self.side_relations, &self.ode_rules)?;
        let c = Coframe::new(f, self.delta).with_context(ctx);
        c.validate().map_err(|source| IoError::Expr {
            field: "f".into(),
            source,
        })?;
        Ok(c)
    }

    pub fn from_coframe(c: &Coframe) -> Self {
        let (side_relations, ode_rules) = context_to(&c.ctx);
        let s = |i: usize, j: usize| c.f[i][j].to_string();
        CoframeJson {
            delta: c.delta,
            f: [[s(0, 0), s(0, 1)], [s(1, 0), s(1, 1)], [s(2, 0), s(2, 1)]],
            side_relations,
            ode_rules,
        }
    }
}

impl Coframe {
    pub fn from_json(text: &str) -> Result<Coframe, IoError> {
        serde_json::from_str::<CoframeJson>(text)?.to_coframe()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CoframeJson::from_coframe(self)).expect("serializable")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleJson {
    pub var: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationJson {
    pub class: String,
    #[serde(default)]
    pub rules: Vec<RuleJson>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side_relations: Vec<SideRelationJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ode_rules: Vec<OdeRuleJson>,
}

fn rule_var(text: &str) -> Result<JetVar, IoError> {
    match JetVar::from_name(text) {
        Some(Ok(j)) if j.t => Ok(j),
        _ => Err(IoError::Invalid(format!("rule variable `{text}` is not a t-derivative jet"))),
    }
}

impl EquationJson {
    pub fn to_spec(&self) -> Result<EquationSpec, IoError> {
        let ctx = context_from(&self.side_relations, &self.ode_rules)?;
        let mut rules = Vec::new();
        for (k, r) in self.rules.iter().enumerate() {
            rules.push(Rule {
                var: rule_var(&r.var)?,
                rhs: expr(format!("rules[{k}].rhs"), &r.rhs)?,
            });
        }
        let opt = |name: &str, v: &Option<String>| v.as_deref().map(|t| expr(name, t)).transpose();
        let a = opt("A", &self.a)?;
        let b = opt("B", &self.b)?;
        let lambda = opt("lambda", &self.lambda)?;
        let bad = |e: ExprError| IoError::Expr {
            field: "rules".into(),
            source: e,
        };
        let spec = match self.class.as_str() {
            "a" => {
                if let Some(r) = rules.first() {
                    if rules.len() != 1 || r.var != JetVar::t(0) {
                        return Err(IoError::Invalid("class a takes exactly one rule, for zt".into()));
                    }
                    let lam = derive(&r.rhs, &Partial(&Var::jet_t(2))).map_err(bad)?;
                    let rest = &r.rhs - &(&lam * &RatFn::jet_t(2));
                    let (a, b) = split_ab(&rest).map_err(bad)?;
                    EquationSpec::class_a(lam, a, b)
                } else {
                    let (a, b) = ab_fields(a, b)?;
                    EquationSpec::class_a(lambda.unwrap_or_else(RatFn::zero), a, b)
                }
            }
            "b" => {
                if let Some(r) = rules.first() {
                    if rules.len() != 1 || r.var != JetVar::t(2) {
                        return Err(IoError::Invalid("class b takes exactly one rule, for z2t".into()));
                    }
                    let (a, b) = split_ab(&r.rhs).map_err(bad)?;
                    EquationSpec::class_b(a, b)
                } else {
                    let (a, b) = ab_fields(a, b)?;
                    EquationSpec::class_b(a, b)
                }
            }
            "generic" => {
                if rules.is_empty() {
                    return Err(IoError::Invalid("generic class needs at least one rule".into()));
                }
                let mut s = EquationSpec::generic(rules[0].var, rules[0].rhs.clone());
                s.rules = rules;
                s
            }
            other => return Err(IoError::Invalid(format!("unknown class `{other}`"))),
        };
        Ok(spec.with_context(ctx))
    }

    pub fn from_spec(eq: &EquationSpec) -> Self {
        let (side_relations, ode_rules) = context_to(&eq.ctx);
        EquationJson {
            class: eq.class.name().to_string(),
            rules: eq
                .rules
                .iter()
                .map(|r| RuleJson {
                    var: r.var.to_string(),
                    rhs: r.rhs.to_string(),
                })
                .collect(),
            a: Some(eq.a.to_string()),
            b: Some(eq.b.to_string()),
            lambda: (eq.class == EqClass::A).then(|| eq.lambda.to_string()),
            side_relations,
            ode_rules,
        }
    }
}

fn ab_fields(a: Option<RatFn>, b: Option<RatFn>) -> Result<(RatFn, RatFn), IoError> {
    let a = a.unwrap_or_else(RatFn::zero);
    let b = b.unwrap_or_else(RatFn::zero);
    let rhs = &(&a * &RatFn::jet(3)) + &b;
    split_ab(&rhs).map_err(|source| IoError::Expr {
        field: "A/B".into(),
        source,
    })
}

impl EquationSpec {
    pub fn from_json(text: &str) -> Result<EquationSpec, IoError> {
        serde_json::from_str::<EquationJson>(text)?.to_spec()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EquationJson::from_spec(self)).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coframe::verify_describes_surface;

    const SG: &str = r#"{"delta": 1,
        "f": [["0", "sin(z)/eta"], ["eta", "cos(z)/eta"], ["z1", "0"]]}"#;

    #[test]
    fn sine_gordon_round_trip() {
        let c = Coframe::from_json(SG).unwrap();
        let eq = EquationSpec::from_json(r#"{"class":"generic","rules":[{"var":"z1t","rhs":"sin(z)"}]}"#)
            .unwrap();
        assert!(verify_describes_surface(&c, &eq).unwrap().pass);
        let back = Coframe::from_json(&c.to_json().to_string()).unwrap();
        assert_eq!(back.f, c.f);
        let eq2 = EquationSpec::from_json(&eq.to_json().to_string()).unwrap();
        assert_eq!(eq2.rules, eq.rules);
    }

    #[test]
    fn class_a_from_rule() {
        let eq = EquationSpec::from_json(
            r#"{"class":"a","rules":[{"var":"zt","rhs":"lam*z2t + z*z3 + 2*lam*z1*z2 - 3*z*z1"}]}"#,
        )
        .unwrap();
        assert_eq!(eq.lambda, RatFn::param("lam"));
        assert_eq!(eq.a, RatFn::jet(0));
    }

    #[test]
    fn ode_rules_survive_round_trip() {
        let text = r#"{"delta": -1, "f": [["eta","0"],["z","0"],["0","phi(z1)"]],
            "side_relations":[{"symbol":"s","square":"gamma + delta*sigma^2"}],
            "ode_rules":[{"fn":"phi","order":2,"rhs":"-r^2*phi(u)"}]}"#;
        let c = Coframe::from_json(text).unwrap();
        assert_eq!(c.ctx.ode_rules[0].coeffs[0], crate::expr::parse_ratfn("-r^2").unwrap());
        let back = Coframe::from_json(&c.to_json().to_string()).unwrap();
        assert_eq!(back.ctx.ode_rules, c.ctx.ode_rules);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(Coframe::from_json("{"), Err(IoError::Json(_))));
        let bad = r#"{"delta": 1, "f": [["0","log(z)"],["0","0"],["0","0"]]}"#;
        assert!(matches!(Coframe::from_json(bad), Err(IoError::Expr { .. })));
        let t_in_dx = r#"{"delta": 1, "f": [["zt","0"],["0","0"],["0","0"]]}"#;
        assert!(Coframe::from_json(t_in_dx).is_err());
        assert!(EquationSpec::from_json(r#"{"class":"q","rules":[]}"#).is_err());
    }
}
