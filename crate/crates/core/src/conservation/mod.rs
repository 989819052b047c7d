//! Conservation laws from the angle `rho` solving
//! `d rho = w3 + sin(rho) w1 + cos(rho) w2`: the 1-form
//! `cos(rho) w1 - sin(rho) w2` is then closed, and expanding `rho` in a
//! parameter yields a sequence of density/flux pairs.

mod series;

use thiserror::Error;

use crate::coframe::{joint_context, Coframe, EquationSpec};
use crate::expr::{
    builtin, change_coordinates, derive, Bindings, Builtin, Context, ExprError, Partial, RatFn, TotalDx, Var,
};

pub use series::{series_densities, strip_exact, Center};

#[derive(Debug, Error, PartialEq)]
pub enum ConservationError {
    #[error("the angle equation is only set up for delta = 1 (pass the experimental flag for delta = -1)")]
    Spherical,
    #[error("leading-order relation has no solution among the supported angles: {0}")]
    Unsolved(String),
    #[error("coframe entry is not a Laurent polynomial in `{0}`")]
    NonLaurent(String),
    #[error("the equation depends on the expansion parameter `{0}`")]
    ParameterInEquation(String),
    #[error("order must be between 1 and {max}, got {got}")]
    Order { got: usize, max: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type ConservationResult<T> = Result<T, ConservationError>;

/// Name of the parameter standing for the angle.
pub const ANGLE: &str = "rho";

pub fn angle() -> Var {
    Var::param(ANGLE)
}

pub fn sin_angle() -> RatFn {
    builtin(Builtin::Sin, RatFn::param(ANGLE)).expect("sin of a parameter")
}

pub fn cos_angle() -> RatFn {
    builtin(Builtin::Cos, RatFn::param(ANGLE)).expect("cos of a parameter")
}

/// `(rho_x, rho_t)` in terms of the jet and `sin(rho)`, `cos(rho)`.
pub fn pfaffian(c: &Coframe, experimental_ss: bool) -> ConservationResult<(RatFn, RatFn)> {
    pfaffian_signed(c, 1, experimental_ss)
}

/// Same, with `sign = -1` giving `d rho = w3 - sin(rho) w1 - cos(rho) w2`.
pub fn pfaffian_signed(c: &Coframe, sign: i64, experimental_ss: bool) -> ConservationResult<(RatFn, RatFn)> {
    if c.delta != 1 && !experimental_ss {
        return Err(ConservationError::Spherical);
    }
    let (s, co) = (sin_angle(), cos_angle());
    let k = RatFn::int(sign);
    let col = |j: usize| -> ConservationResult<RatFn> {
        let e = c.at(3, j) + &(&k * &(&(&s * c.at(1, j)) + &(&co * c.at(2, j))));
        Ok(c.ctx.reduce(&e)?)
    };
    Ok((col(1)?, col(2)?))
}

/// Total derivatives that also move the angle.
struct AngleCalculus<'a> {
    eq: &'a EquationSpec,
    ctx: Context,
    rho_x: RatFn,
    rho_t: RatFn,
}

impl AngleCalculus<'_> {
    fn dx(&self, e: &RatFn) -> ConservationResult<RatFn> {
        let d = TotalDx {
            max_order: self.ctx.max_jet_order,
        };
        let jet = self.eq.apply_rules(&derive(e, &d)?, &self.ctx)?;
        let by_angle = derive(e, &Partial(&angle()))?;
        Ok(self.ctx.reduce(&(&jet + &(&by_angle * &self.rho_x)))?)
    }

    fn dt(&self, e: &RatFn) -> ConservationResult<RatFn> {
        let jet = self.eq.dt(e, &self.ctx)?;
        let by_angle = derive(e, &Partial(&angle()))?;
        Ok(self.ctx.reduce(&(&jet + &(&by_angle * &self.rho_t)))?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormReport {
    /// `D_t rho_x - D_x rho_t`.
    pub integrability: RatFn,
    /// dx^dt coefficient of `d(cos(rho) w1 - sin(rho) w2)`.
    pub closedness: RatFn,
    pub pass: bool,
}

impl ClosedFormReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "integrability": self.integrability.to_string(),
            "closedness": self.closedness.to_string(),
            "pass": self.pass,
        })
    }
}

pub fn closed_form_check(c: &Coframe, eq: &EquationSpec) -> ConservationResult<ClosedFormReport> {
    closed_form_check_signed(c, eq, 1, false)
}

pub fn closed_form_check_signed(
    c: &Coframe,
    eq: &EquationSpec,
    sign: i64,
    experimental_ss: bool,
) -> ConservationResult<ClosedFormReport> {
    let (rho_x, rho_t) = pfaffian_signed(c, sign, experimental_ss)?;
    let calc = AngleCalculus {
        eq,
        ctx: joint_context(c, eq),
        rho_x,
        rho_t,
    };
    let integrability = calc.ctx.reduce(&(&calc.dt(&calc.rho_x)? - &calc.dx(&calc.rho_t)?))?;
    let (s, co) = (sin_angle(), cos_angle());
    let a = &(&co * c.at(1, 1)) - &(&s * c.at(2, 1));
    let b = &(&co * c.at(1, 2)) - &(&s * c.at(2, 2));
    let closedness = calc.ctx.reduce(&(&calc.dx(&b)? - &calc.dt(&a)?))?;
    Ok(ClosedFormReport {
        pass: integrability.is_zero() && closedness.is_zero(),
        integrability,
        closedness,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedPair {
    pub order: i32,
    pub density: RatFn,
    pub flux: RatFn,
    /// Constant density.
    pub trivial: bool,
    pub verified: bool,
}

impl ConservedPair {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "density": self.density.to_string(),
            "flux": self.flux.to_string(),
            "verified": self.verified,
        })
    }
}

/// `T_t(density) - D_x(flux)` reduces to zero modulo the equation.
pub fn verify_conserved(density: &RatFn, flux: &RatFn, eq: &EquationSpec, ctx: &Context) -> bool {
    let ctx = ctx.merged(&eq.ctx);
    let d = TotalDx {
        max_order: ctx.max_jet_order,
    };
    let run = || -> crate::expr::Result<bool> {
        let lhs = eq.dt(density, &ctx)?;
        let rhs = eq.apply_rules(&derive(flux, &d)?, &ctx)?;
        ctx.is_zero(&(&lhs - &rhs))
    };
    run().unwrap_or(false)
}

/// Pullback along `z -> z + shift`, `x -> x - speed t`: the new dt-column
/// is `f_i2 + speed f_i1`, both evaluated at the shifted field. When the
/// pair is a symmetry of the equation the result describes the same
/// equation, with `shift` and `speed` as new parameters.
pub fn galilean_pullback(c: &Coframe, shift: &RatFn, speed: &RatFn) -> ConservationResult<Coframe> {
    let b = Bindings::new().var(Var::jet(0), &RatFn::jet(0) + shift);
    let mut f = c.f.clone();
    for row in f.iter_mut() {
        let x = change_coordinates(&row[0], &b)?;
        let t = change_coordinates(&row[1], &b)?;
        row[1] = c.ctx.reduce(&(&t + &(speed * &x)))?;
        row[0] = c.ctx.reduce(&x)?;
    }
    Ok(Coframe {
        f,
        delta: c.delta,
        ctx: c.ctx.clone(),
    })
}

#[cfg(test)]
mod tests;
