//! JSON form of a branch specification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Branch, BranchSpec, FamilyError, FamilyResult, FunctionSpec, Sign};
use crate::expr::parse_ratfn;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpecJson {
    pub branch: String,
    #[serde(default = "upper")]
    pub sign: String,
    #[serde(default = "one")]
    pub delta: i8,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionJson>,
}

fn upper() -> String {
    "+".into()
}

fn one() -> i8 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionJson {
    Formal,
    Closed { body: String },
    Regime { a: String, b: String },
}

impl BranchSpecJson {
    pub fn from_json(text: &str) -> FamilyResult<BranchSpec> {
        let raw: BranchSpecJson =
            serde_json::from_str(text).map_err(|e| FamilyError::Constraint(format!("bad branch spec: {e}")))?;
        raw.to_spec()
    }

    pub fn to_spec(&self) -> FamilyResult<BranchSpec> {
        let branch = Branch::from_id(&self.branch)?;
        let sign = Sign::parse(&self.sign)
            .ok_or_else(|| FamilyError::Constraint(format!("sign must be + or -, got `{}`", self.sign)))?;
        let mut spec = BranchSpec::new(branch, sign, self.delta);
        for (k, v) in &self.params {
            spec = spec.param(k, parse_ratfn(v)?);
        }
        for (k, f) in &self.functions {
            let fs = match f {
                FunctionJson::Formal => FunctionSpec::Formal,
                FunctionJson::Closed { body } => FunctionSpec::Closed(parse_ratfn(body)?),
                FunctionJson::Regime { a, b } => FunctionSpec::Regime {
                    a: parse_ratfn(a)?,
                    b: parse_ratfn(b)?,
                },
            };
            spec.functions.insert(k.clone(), fs);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_closed_and_regime() {
        let s = BranchSpecJson::from_json(
            r#"{"branch":"t33s-i","sign":"-","delta":-1,"params":{"r":"2"},
                "functions":{"psi":{"mode":"closed","body":"z*z2"},"phi":{"mode":"regime","a":"1","b":"0"}}}"#,
        )
        .unwrap();
        assert_eq!(s.branch, Branch::T33sI);
        assert_eq!(s.sign, Sign::Lower);
        assert_eq!(s.delta, -1);
        assert!(matches!(s.functions["phi"], FunctionSpec::Regime { .. }));
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(BranchSpecJson::from_json(r#"{"branch":"T33","colour":1}"#).is_err());
        assert!(BranchSpecJson::from_json(r#"{"branch":"T99"}"#).is_err());
    }
}
