use std::sync::Arc;

use super::{Grid, NumError, NumResult};
use crate::expr::{derive, parse_ratfn, Compiled, NumEnv, Partial, Var};

/// Preset names accepted by [`SolutionSampler::preset`].
pub const SOLUTIONS: [&str; 3] = ["kink", "kdv-soliton", "zero"];

const PROFILE_VAR: &str = "xi";
const MAX_ORDER: u32 = 10;

/// A travelling wave `z = Z(a x + b t)`. `Z^(k)` for `k >= base_order` are
/// exact derivatives of a symbolic expression in `xi`; lower orders come
/// from `value`.
#[derive(Clone)]
pub struct SolutionSampler {
    pub name: String,
    pub a: f64,
    pub b: f64,
    value: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    base_order: u32,
    derivs: Arc<Vec<Compiled>>,
    consts: Vec<(String, f64)>,
}

impl std::fmt::Debug for SolutionSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SolutionSampler({}, a={}, b={})", self.name, self.a, self.b)
    }
}

impl SolutionSampler {
    fn new(name: &str, a: f64, b: f64, base: &str, base_order: u32) -> SolutionSampler {
        let xi = Var::param(PROFILE_VAR);
        let mut e = parse_ratfn(base).expect("preset profile parses");
        let mut derivs = Vec::new();
        for _ in base_order..=MAX_ORDER {
            derivs.push(Compiled::new(&e));
            e = derive(&e, &Partial(&xi)).expect("profile is differentiable");
        }
        SolutionSampler {
            name: name.into(),
            a,
            b,
            value: None,
            base_order,
            derivs: Arc::new(derivs),
            consts: Vec::new(),
        }
    }

    /// `4 atan(exp(a x + t/a))`, a solution of `z_xt = sin z`.
    pub fn kink(a: f64) -> SolutionSampler {
        let mut s = Self::new("kink", a, 1.0 / a, "4*exp(xi)/(exp(2*xi) + 1)", 1);
        s.value = Some(Arc::new(|xi: f64| 4.0 * xi.exp().atan()));
        s
    }

    /// `-c sech^2(sqrt(c)/2 (x + c t))`, a solution of `z_t = z3 - 3 z z1`.
    pub fn kdv_soliton(c: f64) -> SolutionSampler {
        let mut s = Self::new(
            "kdv-soliton",
            1.0,
            c,
            "-4*c*exp(2*kappa*xi)/(exp(2*kappa*xi) + 1)^2",
            0,
        );
        s.consts = vec![("c".into(), c), ("kappa".into(), c.sqrt() / 2.0)];
        s
    }

    pub fn zero() -> SolutionSampler {
        Self::new("zero", 1.0, 0.0, "0", 0)
    }

    pub fn preset(name: &str) -> NumResult<SolutionSampler> {
        match name {
            "kink" => Ok(Self::kink(1.0)),
            "kdv-soliton" => Ok(Self::kdv_soliton(1.0)),
            "zero" => Ok(Self::zero()),
            _ => Err(NumError::UnknownSolution(name.into())),
        }
    }

    /// A box where the preset's induced metric stays away from the
    /// degenerate locus.
    pub fn default_grid(&self, nx: usize, nt: usize) -> NumResult<Grid> {
        match self.name.as_str() {
            "kink" => Grid::new((0.5, 2.5), (0.0, 2.0), nx, nt),
            "kdv-soliton" => Grid::new((-1.5, 0.0), (0.0, 0.5), nx, nt),
            _ => Grid::new((-1.0, 1.0), (-1.0, 1.0), nx, nt),
        }
    }

    pub fn max_order(&self) -> u32 {
        MAX_ORDER - 1
    }

    /// `d^k Z / d xi^k`.
    pub fn profile(&self, k: u32, xi: f64) -> NumResult<f64> {
        if k < self.base_order {
            let v = self.value.as_ref().expect("presets with a symbolic base above 0 carry a value");
            return Ok(v(xi));
        }
        let c = self.derivs.get((k - self.base_order) as usize).ok_or(NumError::DerivativeOrder {
            needed: k,
            max: MAX_ORDER,
        })?;
        let mut env = NumEnv::new().param(PROFILE_VAR, xi);
        for (n, v) in &self.consts {
            env.set_param(n, *v);
        }
        Ok(c.eval(&env)?)
    }

    /// `(z_k, z_kt)` for `k = 0..=order`.
    pub fn jets(&self, x: f64, t: f64, order: u32) -> NumResult<(Vec<f64>, Vec<f64>)> {
        if order > self.max_order() {
            return Err(NumError::DerivativeOrder {
                needed: order + 1,
                max: MAX_ORDER,
            });
        }
        let xi = self.a * x + self.b * t;
        let mut zx = Vec::with_capacity(order as usize + 1);
        let mut zt = Vec::with_capacity(order as usize + 1);
        let mut scale = 1.0;
        for k in 0..=order {
            zx.push(scale * self.profile(k, xi)?);
            zt.push(self.b * scale * self.profile(k + 1, xi)?);
            scale *= self.a;
        }
        Ok((zx, zt))
    }
}
