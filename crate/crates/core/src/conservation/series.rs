//! Order-by-order expansion of the angle and of the closed form.

use super::{verify_conserved, ConservationError, ConservationResult, ConservedPair};
use crate::coframe::{joint_context, Coframe, EquationSpec};
use crate::expr::{derive, substitute, Bindings, Context, JetVar, Partial, Q, RatFn, TotalDx, Var};

/// Where the parameter is sent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    Zero,
    Infinity,
}

pub const MAX_ORDER: usize = 6;

/// How many extra powers are scanned past the last requested pair.
const SCAN: i32 = 10;

const STEP: &str = "series_s";

fn step() -> Var {
    Var::param(STEP)
}

fn placeholder(k: i32) -> RatFn {
    RatFn::param(&format!("series_r{k}"))
}

fn placeholder_dx(k: i32) -> RatFn {
    RatFn::param(&format!("series_rx{k}"))
}

fn is_placeholder(v: &Var) -> bool {
    v.as_param().is_some_and(|p| p.starts_with("series_r"))
}

/// Truncated Laurent series `sum c[i] s^(lo + i)`.
#[derive(Clone, Debug)]
struct Series {
    lo: i32,
    c: Vec<RatFn>,
}

impl Series {
    fn zero() -> Self {
        Series { lo: 0, c: Vec::new() }
    }

    fn constant(r: RatFn) -> Self {
        Series { lo: 0, c: vec![r] }
    }

    fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    fn at(&self, n: i32) -> RatFn {
        let i = n - self.lo;
        if i < 0 || i as usize >= self.c.len() {
            RatFn::zero()
        } else {
            self.c[i as usize].clone()
        }
    }

    /// Lowest power with a nonzero coefficient, if any.
    fn valuation(&self) -> Option<i32> {
        self.c.iter().position(|x| !x.is_zero()).map(|i| self.lo + i as i32)
    }

    fn add(&self, o: &Series, hi: i32) -> Series {
        if self.c.is_empty() {
            return o.truncate(hi);
        }
        if o.c.is_empty() {
            return self.truncate(hi);
        }
        let lo = self.lo.min(o.lo);
        let top = self.hi().max(o.hi()).min(hi);
        let c = (lo..=top).map(|n| &self.at(n) + &o.at(n)).collect();
        Series { lo, c }
    }

    fn scale(&self, r: &RatFn) -> Series {
        Series {
            lo: self.lo,
            c: self.c.iter().map(|x| x * r).collect(),
        }
    }

    fn mul(&self, o: &Series, hi: i32, ctx: &Context) -> ConservationResult<Series> {
        if self.c.is_empty() || o.c.is_empty() {
            return Ok(Series::zero());
        }
        let lo = self.lo + o.lo;
        let mut c = Vec::new();
        for n in lo..=hi.min(self.hi() + o.hi()) {
            let mut acc = RatFn::zero();
            for (i, a) in self.c.iter().enumerate() {
                let j = n - self.lo - i as i32 - o.lo;
                if j < 0 || j as usize >= o.c.len() {
                    continue;
                }
                acc = &acc + &(a * &o.c[j as usize]);
            }
            c.push(ctx.reduce(&acc)?);
        }
        Ok(Series { lo, c })
    }

    fn truncate(&self, hi: i32) -> Series {
        let keep = (hi - self.lo + 1).max(0) as usize;
        Series {
            lo: self.lo,
            c: self.c.iter().take(keep).cloned().collect(),
        }
    }
}

fn laurent(e: &RatFn, param: &str, center: Center, ctx: &Context) -> ConservationResult<Series> {
    let s = RatFn::var(step());
    let image = match center {
        Center::Zero => s.clone(),
        Center::Infinity => s.recip()?,
    };
    let r = ctx.reduce(&substitute(e, &Bindings::new().param(param, image))?)?;
    let sv = step();
    let mut lo = 0i32;
    for (f, k) in r.den() {
        if !f.vars().contains(&sv) && !f.vars().iter().any(|v| v.depends_on(&sv)) {
            continue;
        }
        if *f == crate::expr::Poly::var(sv.clone()) {
            lo -= *k as i32;
        } else {
            return Err(ConservationError::NonLaurent(param.to_string()));
        }
    }
    let num = r.num();
    if num.vars().iter().any(|v| v != &sv && v.depends_on(&sv)) {
        return Err(ConservationError::NonLaurent(param.to_string()));
    }
    let rest: Vec<_> = r.den().iter().filter(|(f, _)| !f.vars().contains(&sv)).cloned().collect();
    let den = RatFn::from_parts(crate::expr::Poly::one(), rest)?;
    let c = num
        .coefficients_in(&sv)
        .into_iter()
        .map(|p| ctx.reduce(&(&RatFn::from_poly(p) * &den)))
        .collect::<crate::expr::Result<Vec<_>>>()?;
    Ok(Series { lo, c })
}

/// `(cos e, sin e)` for a series without constant term.
fn trig(e: &Series, hi: i32, ctx: &Context) -> ConservationResult<(Series, Series)> {
    let mut cos = Series::constant(RatFn::one());
    let mut sin = Series::zero();
    let mut pow = Series::constant(RatFn::one());
    let mut fact = Q::from_integer(1.into());
    let depth = e.valuation().map_or(0, |v| if v > 0 { hi / v } else { 0 });
    for j in 1..=depth.max(0) {
        pow = pow.mul(e, hi, ctx)?;
        fact *= Q::from_integer(j.into());
        let term = pow.scale(&RatFn::constant(fact.recip()));
        match j % 4 {
            1 => sin = sin.add(&term, hi),
            2 => cos = cos.add(&term.scale(&RatFn::int(-1)), hi),
            3 => sin = sin.add(&term.scale(&RatFn::int(-1)), hi),
            _ => cos = cos.add(&term, hi),
        }
    }
    Ok((cos.truncate(hi), sin.truncate(hi)))
}

/// Quarter-turn values `(sin rho0, cos rho0)` tried for the leading order.
const QUARTERS: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

struct Expansion<'a> {
    /// f31, f11, f21, then f12, f22.
    cols: [Series; 5],
    top: i32,
    s0: RatFn,
    c0: RatFn,
    known: Vec<RatFn>,
    ctx: &'a Context,
    eq: &'a EquationSpec,
}

impl Expansion<'_> {
    fn epsilon(&self, upto: i32) -> Series {
        let c = (1..=upto.max(0))
            .map(|k| self.known.get(k as usize - 1).cloned().unwrap_or_else(|| placeholder(k)))
            .collect();
        Series { lo: 1, c }
    }

    /// `(sin rho, cos rho)` up to `hi` using `upto` coefficients of the angle.
    fn angle(&self, upto: i32, hi: i32) -> ConservationResult<(Series, Series)> {
        let eps = self.epsilon(upto);
        let (ce, se) = trig(&eps, hi, self.ctx)?;
        let sin = ce.scale(&self.s0).add(&se.scale(&self.c0), hi);
        let cos = ce.scale(&self.c0).add(&se.scale(&-&self.s0), hi);
        Ok((sin, cos))
    }

    /// Residual of the angle equation at power `n`.
    fn residual(&self, n: i32) -> ConservationResult<RatFn> {
        let upto = n - self.top;
        let hi = n - self.top.min(0);
        let (sin, cos) = self.angle(upto, hi)?;
        let [f31, f11, f21, _, _] = &self.cols;
        let rhs = f31
            .add(&sin.mul(f11, n, self.ctx)?, n)
            .add(&cos.mul(f21, n, self.ctx)?, n)
            .at(n);
        let lhs = if n >= 1 {
            match self.known.get(n as usize - 1) {
                Some(r) => {
                    let d = TotalDx {
                        max_order: self.ctx.max_jet_order,
                    };
                    self.eq.apply_rules(&derive(r, &d)?, self.ctx)?
                }
                None => placeholder_dx(n),
            }
        } else {
            RatFn::zero()
        };
        Ok(self.ctx.reduce(&(&lhs - &rhs))?)
    }

    /// Processes the equation at power `n`, fixing at most one coefficient.
    fn solve_at(&mut self, n: i32) -> ConservationResult<()> {
        let e = self.residual(n)?;
        let unknown: Vec<Var> = e.all_vars().into_iter().filter(is_placeholder).collect();
        if unknown.is_empty() {
            if e.is_zero() {
                return Ok(());
            }
            return Err(ConservationError::Unsolved(format!("{e} = 0")));
        }
        let next = self.known.len() as i32 + 1;
        let target = placeholder(next);
        let tv = target.as_var().unwrap().clone();
        if unknown.iter().any(|v| v != &tv) {
            return Err(ConservationError::Unsolved(format!("{e} = 0")));
        }
        let root = solve_polynomial(&e, &tv, self.ctx)?;
        self.known.push(root);
        Ok(())
    }
}

fn solve_polynomial(e: &RatFn, v: &Var, ctx: &Context) -> ConservationResult<RatFn> {
    let unsolved = || ConservationError::Unsolved(format!("{e} = 0"));
    if e.den().iter().any(|(f, _)| f.vars().contains(v)) {
        return Err(unsolved());
    }
    if e.num().vars().iter().any(|w| w != v && w.depends_on(v)) {
        return Err(unsolved());
    }
    let cs: Vec<RatFn> = e.num().coefficients_in(v).into_iter().map(RatFn::from_poly).collect();
    match cs.len() {
        2 => Ok(ctx.reduce(&(-&cs[0]).div(&cs[1])?)?),
        3 => {
            let (c, b, a) = (&cs[0], &cs[1], &cs[2]);
            let disc = ctx.reduce(&(&(b * b) - &(&RatFn::int(4) * &(a * c))))?;
            let root = exact_sqrt(&disc).ok_or_else(unsolved)?;
            Ok(ctx.reduce(&(&(-b) + &root).div(&(&RatFn::int(2) * a))?)?)
        }
        _ => Err(unsolved()),
    }
}

fn sqrt_q(q: &Q) -> Option<Q> {
    if q < &Q::from_integer(0.into()) {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    let r = Q::new(n, d);
    (&r * &r == *q).then_some(r)
}

/// Square root of a monomial ratio with a square rational coefficient.
fn exact_sqrt(r: &RatFn) -> Option<RatFn> {
    if r.is_zero() {
        return Some(RatFn::zero());
    }
    let half = |p: &crate::expr::Poly| -> Option<RatFn> {
        if p.len() != 1 {
            return None;
        }
        let (m, c) = p.leading()?;
        let c = sqrt_q(c)?;
        let mut out = RatFn::constant(c);
        for (v, e) in m.factors() {
            if e % 2 != 0 {
                return None;
            }
            out = &out * &RatFn::var(v.clone()).pow((e / 2) as i32).ok()?;
        }
        Some(out)
    };
    let mut out = half(r.num())?;
    for (f, k) in r.den() {
        if k % 2 != 0 {
            return None;
        }
        let base = RatFn::from_poly(f.clone());
        out = out.div(&base.pow((k / 2) as i32).ok()?).ok()?;
    }
    Some(out)
}

fn mentions(eq: &EquationSpec, param: &str) -> bool {
    let v = Var::param(param);
    let hit = |r: &RatFn| r.all_vars().contains(&v);
    hit(&eq.a) || hit(&eq.b) || hit(&eq.lambda) || eq.rules.iter().any(|r| hit(&r.rhs))
}

/// Expands the angle in `param` about `center` and returns the first
/// `order` pairs whose density is not constant (or, when there are none,
/// the first `order` constant ones).
pub fn series_densities(
    c: &Coframe,
    eq: &EquationSpec,
    param: &str,
    center: Center,
    order: usize,
) -> ConservationResult<Vec<ConservedPair>> {
    if order == 0 || order > MAX_ORDER {
        return Err(ConservationError::Order {
            got: order,
            max: MAX_ORDER,
        });
    }
    if c.delta != 1 {
        return Err(ConservationError::Spherical);
    }
    if mentions(eq, param) {
        return Err(ConservationError::ParameterInEquation(param.to_string()));
    }
    let ctx = joint_context(c, eq);
    let l = |i, j| laurent(c.at(i, j), param, center, &ctx);
    let cols = [l(3, 1)?, l(1, 1)?, l(2, 1)?, l(1, 2)?, l(2, 2)?];
    let top = cols[..3].iter().filter_map(Series::valuation).min().unwrap_or(0).min(0);
    let floor = cols.iter().filter_map(Series::valuation).min().unwrap_or(0).min(top);

    let mut exp = None;
    let mut last_err = None;
    for (s0, c0) in QUARTERS {
        let cand = Expansion {
            cols: cols.clone(),
            top,
            s0: RatFn::int(s0),
            c0: RatFn::int(c0),
            known: Vec::new(),
            ctx: &ctx,
            eq,
        };
        match cand.residual(top) {
            Ok(r) if r.is_zero() => {
                exp = Some(cand);
                break;
            }
            Ok(r) => last_err = Some(ConservationError::Unsolved(format!("{r} = 0"))),
            Err(e) => last_err = Some(e),
        }
    }
    let Some(mut exp) = exp else {
        return Err(last_err.unwrap_or_else(|| ConservationError::Unsolved("no leading relation".into())));
    };

    let mut pairs = Vec::new();
    let mut trivial = Vec::new();
    let mut n_eq = top + 1;
    let mut n = floor;
    let stop = floor + order as i32 + SCAN;
    while pairs.len() < order && n <= stop {
        // every angle coefficient that can reach power n
        let need = n - floor;
        while (exp.known.len() as i32) < need {
            if n_eq > top + need + SCAN {
                return Err(ConservationError::Unsolved(format!(
                    "angle coefficient {} is not fixed algebraically",
                    exp.known.len() + 1
                )));
            }
            exp.solve_at(n_eq)?;
            n_eq += 1;
        }
        let (sin, cos) = exp.angle(need, n - floor)?;
        let [_, f11, f21, f12, f22] = &exp.cols;
        let a = cos.mul(f11, n, &ctx)?.add(&sin.mul(f21, n, &ctx)?.scale(&RatFn::int(-1)), n);
        let b = cos.mul(f12, n, &ctx)?.add(&sin.mul(f22, n, &ctx)?.scale(&RatFn::int(-1)), n);
        let density = ctx.reduce(&a.at(n))?;
        let flux = ctx.reduce(&b.at(n))?;
        let constant = !density.all_vars().iter().any(|v| matches!(v, Var::Jet(_)));
        let pair = ConservedPair {
            order: n,
            verified: verify_conserved(&density, &flux, eq, &ctx),
            density,
            flux,
            trivial: constant,
        };
        if constant {
            trivial.push(pair);
        } else {
            pairs.push(pair);
        }
        n += 1;
    }
    if pairs.is_empty() {
        trivial.truncate(order);
        return Ok(trivial);
    }
    Ok(pairs)
}

/// Removes `D_x`-exact parts of the density by integrating its top jet
/// coordinate, correcting the flux by the matching `T_t` term.
pub fn strip_exact(pair: &ConservedPair, eq: &EquationSpec, ctx: &Context) -> ConservationResult<ConservedPair> {
    let ctx = ctx.merged(&eq.ctx);
    let d = TotalDx {
        max_order: ctx.max_jet_order,
    };
    let mut density = pair.density.clone();
    let mut flux = pair.flux.clone();
    for _ in 0..4 * ctx.max_jet_order {
        let Some(g) = exact_part(&density)? else {
            break;
        };
        density = ctx.reduce(&(&density - &derive(&g, &d)?))?;
        flux = ctx.reduce(&(&flux - &eq.dt(&g, &ctx)?))?;
    }
    let constant = !density.all_vars().iter().any(|v| matches!(v, Var::Jet(_)));
    Ok(ConservedPair {
        order: pair.order,
        verified: verify_conserved(&density, &flux, eq, &ctx),
        density,
        flux,
        trivial: constant,
    })
}

/// `G` with `D_x G` carrying the part of `r` linear in its top jet.
fn exact_part(r: &RatFn) -> ConservationResult<Option<RatFn>> {
    let top = r
        .all_vars()
        .into_iter()
        .filter_map(|v| match v {
            Var::Jet(JetVar { t: false, order }) => Some(order),
            _ => None,
        })
        .max();
    let Some(k) = top.filter(|&k| k >= 1) else {
        return Ok(None);
    };
    let zk = Var::jet(k);
    let below = Var::jet(k - 1);
    let inside = |x: &RatFn, v: &Var| x.all_vars().iter().any(|w| w != v && w.depends_on(v));
    if r.den().iter().any(|(f, _)| f.vars().contains(&zk)) || inside(r, &zk) {
        return Ok(None);
    }
    let cs = r.num().coefficients_in(&zk);
    if cs.len() != 2 {
        return Ok(None);
    }
    let den = RatFn::from_parts(crate::expr::Poly::one(), r.den().to_vec())?;
    let a = &RatFn::from_poly(cs[1].clone()) * &den;
    if a.den().iter().any(|(f, _)| f.vars().contains(&below)) || inside(&a, &below) {
        return Ok(None);
    }
    let mut g = RatFn::zero();
    let pieces = a.num().coefficients_in(&below);
    let a_den = RatFn::from_parts(crate::expr::Poly::one(), a.den().to_vec())?;
    for (j, p) in pieces.into_iter().enumerate() {
        let lift = RatFn::var(below.clone()).pow(j as i32 + 1)?;
        let c = RatFn::constant(Q::new((1).into(), (j as i64 + 1).into()));
        g = &g + &(&(&RatFn::from_poly(p) * &lift) * &c);
    }
    let g = &g * &a_den;
    let check = derive(&g, &Partial(&below))?;
    if check != a {
        return Ok(None);
    }
    Ok(Some(g))
}
