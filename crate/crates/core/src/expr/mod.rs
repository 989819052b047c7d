//! Exact symbolic kernel over jet coordinates, parameters and formal
//! function atoms.

mod atom;
mod context;
mod diff;
mod error;
mod eval;
mod format;
mod func;
mod jet;
mod parse;
mod poly;
mod ratfn;
mod subst;
mod tree;

pub use atom::{Atom, AtomRef, Builtin, Var};
pub use context::{Context, OdeRule, SideRelation};
pub use diff::{derive, Derivation, FnDerivation, Partial, TotalDt, TotalDx};
pub use error::{ExprError, Result};
pub use eval::{Compiled, NumEnv, NumericFunction, Univariate};
pub use format::to_latex;
pub use func::{builtin, func};
pub use jet::JetVar;
pub use parse::parse;
pub use poly::{q, q_frac, Monomial, Poly, Q};
pub use ratfn::RatFn;
pub use subst::{change_coordinates, substitute, Bindings, FunctionBinding};
pub use tree::Expr;

/// Parses and converts to canonical form without reduction.
pub fn parse_ratfn(text: &str) -> Result<RatFn> {
    parse(text)?.to_ratfn()
}
