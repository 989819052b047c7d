use thiserror::Error;

use super::jet::JetVar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("malformed jet variable `{0}`")]
    MalformedJet(String),
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("jet order {order} exceeds the configured maximum {max}")]
    JetOrderExceeded { order: u32, max: u32 },
    #[error("t-derivative of `{0}` is a second-level t-derivative, which is not supported")]
    SecondLevelT(JetVar),
    #[error("cyclic binding involving `{0}`")]
    CyclicBinding(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("function `{name}` was asked for derivative order {order}, but its routine supplies at most {max}")]
    DerivativeOrder { name: String, order: u32, max: u32 },
    #[error("division by a value of magnitude below 1e-300")]
    NumericDivision,
    #[error("invalid rule: {0}")]
    InvalidRule(String),
}

pub type Result<T, E = ExprError> = std::result::Result<T, E>;
