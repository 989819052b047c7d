//! Numerical cross-checks: evaluate a coframe on an exact solution, form the
//! induced metric `E dx^2 + 2F dx dt + G dt^2` and recover its Gaussian
//! curvature by finite differences (Brioschi), independently of `w3`.

mod sampler;

use thiserror::Error;

use crate::coframe::{Coframe, EquationSpec};
use crate::expr::{Compiled, ExprError, JetVar, NumEnv, RatFn, Var};

pub use sampler::{SolutionSampler, SOLUTIONS};

/// Pointwise nondegeneracy threshold on `EG - F^2`.
pub const MASK_THRESHOLD: f64 = 1e-10;
/// Largest residual accepted from a sampler.
pub const CERTIFY_TOL: f64 = 1e-8;
/// Largest `|K + delta|` accepted by a curvature report.
pub const CURVATURE_TOL: f64 = 1e-3;
/// Largest grid spacing for which a curvature report may pass.
pub const MAX_SPACING: f64 = 1e-2;
/// Cells left out on each side of the grid.
pub const MARGIN: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum NumError {
    #[error("grid needs at least 8 points per axis and increasing bounds")]
    Grid,
    #[error("the sampler supplies derivatives up to order {max}, {needed} needed")]
    DerivativeOrder { needed: u32, max: u32 },
    #[error("the sampled field does not solve the equation (residual {0:e})")]
    NotASolution(f64),
    #[error("no interior grid point passes the nondegeneracy mask")]
    MaskEmpty,
    #[error("unknown solution preset `{0}`")]
    UnknownSolution(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type NumResult<T> = Result<T, NumError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Grid {
    pub fn new(x: (f64, f64), t: (f64, f64), nx: usize, nt: usize) -> NumResult<Grid> {
        let ok = nx >= 8 && nt >= 8 && x.1 > x.0 && t.1 > t.0 && [x.0, x.1, t.0, t.1].iter().all(|v| v.is_finite());
        if !ok {
            return Err(NumError::Grid);
        }
        Ok(Grid {
            x0: x.0,
            x1: x.1,
            t0: t.0,
            t1: t.1,
            nx,
            nt,
        })
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn ht(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.ht()
    }

    /// Same box, spacing halved in both directions.
    pub fn refined(&self) -> Grid {
        Grid {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt - 1,
            ..*self
        }
    }

    fn len(&self) -> usize {
        self.nx * self.nt
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (MARGIN..self.nt - MARGIN).flat_map(move |j| (MARGIN..self.nx - MARGIN).map(move |i| (i, j)))
    }
}

/// Highest x-order of a jet variable anywhere in `r`, counting a
/// t-derivative as one more.
pub fn jet_order(r: &RatFn) -> u32 {
    r.all_vars()
        .iter()
        .filter_map(|v| match v {
            Var::Jet(j) => Some(j.order + j.t as u32),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn load_jets(env: &mut NumEnv, s: &SolutionSampler, x: f64, t: f64, order: u32) -> NumResult<()> {
    let (zx, zt) = s.jets(x, t, order)?;
    for (k, (a, b)) in zx.iter().zip(&zt).enumerate() {
        env.set_jet(JetVar::x(k as u32), *a);
        env.set_jet(JetVar::t(k as u32), *b);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyReport {
    pub max_residual: f64,
    pub pass: bool,
}

/// Max-norm over the grid of `z_kt - rhs` for every rule of `eq`.
pub fn certify_solution(s: &SolutionSampler, eq: &EquationSpec, g: &Grid, env: &NumEnv) -> NumResult<CertifyReport> {
    let residuals: Vec<(JetVar, Compiled)> = eq.rules.iter().map(|r| (r.var, Compiled::new(&r.rhs))).collect();
    let order = eq
        .rules
        .iter()
        .map(|r| jet_order(&r.rhs).max(r.var.order + 1))
        .max()
        .unwrap_or(0);
    let mut env = env.clone();
    let mut worst = 0f64;
    for j in 0..g.nt {
        for i in 0..g.nx {
            load_jets(&mut env, s, g.x(i), g.t(j), order)?;
            for (var, rhs) in &residuals {
                let lhs = env.get_jet(*var).expect("loaded above");
                let r = (lhs - rhs.eval(&env)?).abs();
                worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
            }
        }
    }
    Ok(CertifyReport {
        max_residual: worst,
        pass: worst <= CERTIFY_TOL,
    })
}

/// First fundamental form sampled on a grid, row-major in `t`.
#[derive(Clone, Debug)]
pub struct MetricSample {
    pub grid: Grid,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `EG - F^2 > MASK_THRESHOLD`.
    pub mask: Vec<bool>,
}

impl MetricSample {
    pub fn from_fn(grid: Grid, mut efg: impl FnMut(f64, f64) -> (f64, f64, f64)) -> MetricSample {
        let n = grid.len();
        let (mut e, mut f, mut g) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for j in 0..grid.nt {
            for i in 0..grid.nx {
                let (a, b, c) = efg(grid.x(i), grid.t(j));
                e.push(a);
                f.push(b);
                g.push(c);
            }
        }
        let mask = (0..n).map(|k| e[k] * g[k] - f[k] * f[k] > MASK_THRESHOLD).collect();
        MetricSample { grid, e, f, g, mask }
    }

    /// Fraction of interior points inside the mask.
    pub fn mask_fraction(&self) -> f64 {
        let g = &self.grid;
        let (mut inside, mut total) = (0usize, 0usize);
        for (i, j) in g.interior() {
            total += 1;
            inside += self.mask[g.index(i, j)] as usize;
        }
        inside as f64 / total.max(1) as f64
    }
}

/// `E = f11^2 + f21^2`, `F = f11 f12 + f21 f22`, `G = f12^2 + f22^2` along
/// the sampled solution. `env` binds every parameter and formal function.
pub fn metric(c: &Coframe, s: &SolutionSampler, g: &Grid, env: &NumEnv) -> NumResult<MetricSample> {
    let order = c.f.iter().flatten().map(jet_order).max().unwrap_or(0);
    let entries: Vec<Compiled> = [c.at(1, 1), c.at(1, 2), c.at(2, 1), c.at(2, 2)]
        .into_iter()
        .map(Compiled::new)
        .collect();
    let mut env = env.clone();
    let mut vals = Vec::with_capacity(g.len());
    for j in 0..g.nt {
        for i in 0..g.nx {
            load_jets(&mut env, s, g.x(i), g.t(j), order)?;
            let mut v = [0f64; 4];
            for (slot, e) in v.iter_mut().zip(&entries) {
                *slot = e.eval(&env)?;
            }
            vals.push(v);
        }
    }
    let mut k = 0;
    Ok(MetricSample::from_fn(*g, |_, _| {
        let [f11, f12, f21, f22] = vals[k];
        k += 1;
        (f11 * f11 + f21 * f21, f11 * f12 + f21 * f22, f12 * f12 + f22 * f22)
    }))
}

/// Gaussian curvature at interior masked points (`None` elsewhere).
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub grid: Grid,
    pub k: Vec<Option<f64>>,
}

impl CurvatureField {
    pub fn max_deviation(&self, target: f64) -> f64 {
        self.k
            .iter()
            .flatten()
            .map(|k| (k - target).abs())
            .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Brioschi's formula with second-order central differences, `u = x`,
/// `v = t`.
pub fn brioschi_curvature(m: &MetricSample) -> NumResult<CurvatureField> {
    let g = &m.grid;
    let (hu, hv) = (g.hx(), g.ht());
    let mut out = vec![None; g.len()];
    let mut any = false;
    for (i, j) in g.interior() {
        let at = g.index(i, j);
        if !m.mask[at] {
            continue;
        }
        let field = |a: &Vec<f64>, di: isize, dj: isize| a[g.index((i as isize + di) as usize, (j as isize + dj) as usize)];
        let du = |a: &Vec<f64>| (field(a, 1, 0) - field(a, -1, 0)) / (2.0 * hu);
        let dv = |a: &Vec<f64>| (field(a, 0, 1) - field(a, 0, -1)) / (2.0 * hv);
        let duu = |a: &Vec<f64>| (field(a, 1, 0) - 2.0 * a[at] + field(a, -1, 0)) / (hu * hu);
        let dvv = |a: &Vec<f64>| (field(a, 0, 1) - 2.0 * a[at] + field(a, 0, -1)) / (hv * hv);
        let duv =
            |a: &Vec<f64>| (field(a, 1, 1) - field(a, 1, -1) - field(a, -1, 1) + field(a, -1, -1)) / (4.0 * hu * hv);
        let (e, f, gg) = (m.e[at], m.f[at], m.g[at]);
        let (eu, ev, fu, fv, gu, gv) = (du(&m.e), dv(&m.e), du(&m.f), dv(&m.f), du(&m.g), dv(&m.g));
        let a = [
            [-0.5 * dvv(&m.e) + duv(&m.f) - 0.5 * duu(&m.g), 0.5 * eu, fu - 0.5 * ev],
            [fv - 0.5 * gu, e, f],
            [0.5 * gv, f, gg],
        ];
        let b = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, gg]];
        let w = e * gg - f * f;
        out[at] = Some((det3(a) - det3(b)) / (w * w));
        any = true;
    }
    if !any {
        return Err(NumError::MaskEmpty);
    }
    Ok(CurvatureField { grid: *g, k: out })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub max_abs_k_plus_delta: f64,
    pub mask_fraction: f64,
    pub nx: usize,
    pub nt: usize,
    pub pass: bool,
}

impl CurvatureReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "max_abs_K_plus_delta": self.max_abs_k_plus_delta,
            "mask_fraction": self.mask_fraction,
            "nx": self.nx,
            "nt": self.nt,
            "pass": self.pass,
        })
    }
}

/// Certifies the sampler, then measures `max |K + delta|` over the mask.
pub fn curvature_report(
    c: &Coframe,
    eq: &EquationSpec,
    s: &SolutionSampler,
    g: &Grid,
    env: &NumEnv,
) -> NumResult<CurvatureReport> {
    let cert = certify_solution(s, eq, g, env)?;
    if !cert.pass {
        return Err(NumError::NotASolution(cert.max_residual));
    }
    let m = metric(c, s, g, env)?;
    let k = brioschi_curvature(&m)?;
    let dev = k.max_deviation(-(c.delta as f64));
    Ok(CurvatureReport {
        max_abs_k_plus_delta: dev,
        mask_fraction: m.mask_fraction(),
        nx: g.nx,
        nt: g.nt,
        pass: dev <= CURVATURE_TOL && g.hx() <= MAX_SPACING && g.ht() <= MAX_SPACING,
    })
}

/// Analytic first fundamental forms with known constant curvature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// `dx^2 + dt^2`
    Flat,
    /// `dx^2 + sin(x)^2 dt^2`
    Sphere,
    /// `dx^2 + e^{2x} dt^2`
    Hyperbolic,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::Flat, Fixture::Sphere, Fixture::Hyperbolic];

    pub fn curvature(self) -> f64 {
        match self {
            Fixture::Flat => 0.0,
            Fixture::Sphere => 1.0,
            Fixture::Hyperbolic => -1.0,
        }
    }

    /// Fine in `x`, where the metric varies; `t` only needs the stencil.
    pub fn grid(self) -> Grid {
        let x = match self {
            Fixture::Sphere => (0.5, std::f64::consts::PI - 0.5),
            _ => (0.0, 1.0),
        };
        Grid::new(x, (0.0, 1.0), 8001, 9).expect("fixed bounds")
    }

    pub fn sample(self, grid: Grid) -> MetricSample {
        match self {
            Fixture::Flat => MetricSample::from_fn(grid, |_, _| (1.0, 0.0, 1.0)),
            Fixture::Sphere => MetricSample::from_fn(grid, |x, _| (1.0, 0.0, x.sin().powi(2))),
            Fixture::Hyperbolic => MetricSample::from_fn(grid, |x, _| (1.0, 0.0, (2.0 * x).exp())),
        }
    }
}

#[cfg(test)]
mod tests;
