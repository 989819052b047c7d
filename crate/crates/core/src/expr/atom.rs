use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::jet::JetVar;
use super::ratfn::RatFn;

/// Elementary functions known to the kernel.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Builtin {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Sinh => "sinh",
            Builtin::Cosh => "cosh",
            Builtin::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "sinh" => Builtin::Sinh,
            "cosh" => Builtin::Cosh,
            "exp" => Builtin::Exp,
            _ => return None,
        })
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Builtin::Sin => x.sin(),
            Builtin::Cos => x.cos(),
            Builtin::Sinh => x.sinh(),
            Builtin::Cosh => x.cosh(),
            Builtin::Exp => x.exp(),
        }
    }
}

/// An opaque factor of a monomial: an application of a formal function or
/// of a builtin to normalized arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    /// `name` differentiated `derivs[j]` times in its j-th argument.
    Func {
        name: Arc<str>,
        derivs: Vec<u32>,
        args: Vec<RatFn>,
    },
    Builtin { f: Builtin, arg: RatFn },
}

impl Atom {
    pub fn args(&self) -> &[RatFn] {
        match self {
            Atom::Func { args, .. } => args,
            Atom::Builtin { arg, .. } => std::slice::from_ref(arg),
        }
    }

    /// True when `v` occurs anywhere inside the arguments.
    pub fn contains(&self, v: &Var) -> bool {
        self.args().iter().any(|a| a.contains_var(v))
    }

    pub fn total_derivative_order(&self) -> u32 {
        match self {
            Atom::Func { derivs, .. } => derivs.iter().sum(),
            Atom::Builtin { .. } => 0,
        }
    }
}

/// Shared handle to an atom; comparisons short-circuit on pointer identity.
#[derive(Clone, Debug)]
pub struct AtomRef(pub Arc<Atom>);

impl AtomRef {
    pub fn new(a: Atom) -> Self {
        AtomRef(Arc::new(a))
    }
}

impl std::ops::Deref for AtomRef {
    type Target = Atom;
    fn deref(&self) -> &Atom {
        &self.0
    }
}

impl PartialEq for AtomRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for AtomRef {}

impl PartialOrd for AtomRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomRef {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl Hash for AtomRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

/// An indeterminate of the polynomial layer. The variant order fixes the
/// monomial ordering: jet variables, then atoms, then parameters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Jet(JetVar),
    Atom(AtomRef),
    Param(Arc<str>),
}

impl Var {
    pub fn param(name: &str) -> Self {
        Var::Param(Arc::from(name))
    }

    pub fn jet(order: u32) -> Self {
        Var::Jet(JetVar::x(order))
    }

    pub fn jet_t(order: u32) -> Self {
        Var::Jet(JetVar::t(order))
    }

    pub fn as_jet(&self) -> Option<JetVar> {
        match self {
            Var::Jet(j) => Some(*j),
            _ => None,
        }
    }

    pub fn as_param(&self) -> Option<&str> {
        match self {
            Var::Param(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Var::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// True when the variable is `v` or mentions `v` inside an atom argument.
    pub fn depends_on(&self, v: &Var) -> bool {
        self == v || matches!(self, Var::Atom(a) if a.contains(v))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Jet(j) => write!(f, "{j}"),
            Var::Param(p) => f.write_str(p),
            Var::Atom(a) => write!(f, "{}", super::format::atom_to_string(a)),
        }
    }
}
