//! Zero-curvature representations in sl(2,R) and su(2), and gauge action.

use std::fmt;

use super::{joint_context, Coframe, EquationSpec};
use crate::expr::{derive, Context, ExprError, RatFn, Result, TotalDx, q_frac};

/// `re + i*im` with both parts exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: RatFn,
    pub im: RatFn,
}

impl Cx {
    pub fn real(re: RatFn) -> Self {
        Cx {
            re,
            im: RatFn::zero(),
        }
    }

    pub fn imag(im: RatFn) -> Self {
        Cx {
            re: RatFn::zero(),
            im,
        }
    }

    pub fn zero() -> Self {
        Cx::real(RatFn::zero())
    }

    pub fn one() -> Self {
        Cx::real(RatFn::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Cx) -> Cx {
        Cx {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Cx) -> Cx {
        Cx {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn neg(&self) -> Cx {
        Cx {
            re: -&self.re,
            im: -&self.im,
        }
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        if self.im.is_zero() && o.im.is_zero() {
            return Cx::real(&self.re * &o.re);
        }
        Cx {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn scale(&self, r: &RatFn) -> Cx {
        Cx {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    pub fn map(&self, mut g: impl FnMut(&RatFn) -> Result<RatFn>) -> Result<Cx> {
        Ok(Cx {
            re: g(&self.re)?,
            im: if self.im.is_zero() {
                RatFn::zero()
            } else {
                g(&self.im)?
            },
        })
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "i*({})", self.im),
            _ => write!(f, "{} + i*({})", self.re, self.im),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mat2(pub [[Cx; 2]; 2]);

impl Mat2 {
    pub fn real(a: RatFn, b: RatFn, c: RatFn, d: RatFn) -> Self {
        Mat2([[Cx::real(a), Cx::real(b)], [Cx::real(c), Cx::real(d)]])
    }

    pub fn identity() -> Self {
        Mat2::real(RatFn::one(), RatFn::zero(), RatFn::zero(), RatFn::one())
    }

    fn zip(&self, o: &Mat2, g: impl Fn(&Cx, &Cx) -> Cx) -> Mat2 {
        let e = |i: usize, j: usize| g(&self.0[i][j], &o.0[i][j]);
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        self.zip(o, Cx::add)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        self.zip(o, Cx::sub)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn scale(&self, r: &RatFn) -> Mat2 {
        let e = |i: usize, j: usize| self.0[i][j].scale(r);
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn commutator(&self, o: &Mat2) -> Mat2 {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn det(&self) -> Cx {
        let a = &self.0;
        a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]))
    }

    /// Inverse of a unimodular matrix.
    pub fn adjugate(&self) -> Mat2 {
        let a = &self.0;
        Mat2([
            [a[1][1].clone(), a[0][1].neg()],
            [a[1][0].neg(), a[0][0].clone()],
        ])
    }

    pub fn map(&self, mut g: impl FnMut(&RatFn) -> Result<RatFn>) -> Result<Mat2> {
        let mut out = self.0.clone();
        for row in out.iter_mut() {
            for e in row.iter_mut() {
                *e = e.map(&mut g)?;
            }
        }
        Ok(Mat2(out))
    }

    pub fn reduce(&self, ctx: &Context) -> Result<Mat2> {
        self.map(|e| ctx.reduce(e))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Cx::is_zero)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", a[0][0], a[0][1], a[1][0], a[1][1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    /// sl(2,R), for `delta = 1`.
    Sl2,
    /// su(2), for `delta = -1`.
    Su2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZcrPair {
    pub algebra: Algebra,
    pub x: Mat2,
    pub t: Mat2,
}

fn block(algebra: Algebra, a: &RatFn, b: &RatFn, c: &RatFn) -> Mat2 {
    // a, b, c are the first, second and third row of one column
    let h = q_frac(1, 2);
    let (a, b, c) = (a.scale(&h), b.scale(&h), c.scale(&h));
    match algebra {
        Algebra::Sl2 => Mat2::real(b.clone(), &a - &c, &a + &c, -&b),
        Algebra::Su2 => Mat2([
            [Cx::imag(b.clone()), Cx { re: a.clone(), im: c.clone() }],
            [Cx { re: -&a, im: c }, Cx::imag(-&b)],
        ]),
    }
}

/// The Lie-algebra valued pair attached to the coframe.
pub fn zcr_matrices(c: &Coframe) -> ZcrPair {
    let algebra = if c.delta == 1 { Algebra::Sl2 } else { Algebra::Su2 };
    let x = block(algebra, c.at(1, 1), c.at(2, 1), c.at(3, 1));
    let t = block(algebra, c.at(1, 2), c.at(2, 2), c.at(3, 2));
    ZcrPair { algebra, x, t }
}

/// `D_t X - D_x T + [X, T]`, reduced modulo the equation.
pub fn zcr_residual(p: &ZcrPair, eq: &EquationSpec, ctx: &Context) -> Result<Mat2> {
    let ctx = ctx.merged(&eq.ctx);
    let dx = TotalDx {
        max_order: ctx.max_jet_order,
    };
    let dtx = p.x.map(|e| eq.dt(e, &ctx))?;
    let dxt = p.t.map(|e| eq.apply_rules(&derive(e, &dx)?, &ctx))?;
    dtx.sub(&dxt).add(&p.x.commutator(&p.t)).reduce(&ctx)
}

/// Convenience wrapper using the coframe's own relations.
pub fn coframe_zcr_residual(c: &Coframe, eq: &EquationSpec) -> Result<Mat2> {
    zcr_residual(&zcr_matrices(c), eq, &joint_context(c, eq))
}

/// `X' = S X S^-1 + (D_x S) S^-1`, `T' = S T S^-1 + (D_t S) S^-1`.
/// `S` must have determinant one and be free of t-derivatives.
pub fn gauge_transform(p: &ZcrPair, s: &Mat2, eq: &EquationSpec, ctx: &Context) -> Result<ZcrPair> {
    let ctx = ctx.merged(&eq.ctx);
    let det = s.det().map(|e| ctx.reduce(e))?;
    if !(det.re.is_one() && det.im.is_zero()) {
        return Err(ExprError::InvalidRule(format!(
            "gauge matrix must have determinant 1, got {det}"
        )));
    }
    let inv = s.adjugate();
    let dx = TotalDx {
        max_order: ctx.max_jet_order,
    };
    let dxs = s.map(|e| derive(e, &dx))?;
    let dts = s.map(|e| eq.dt(e, &ctx))?;
    let x = s.mul(&p.x).mul(&inv).add(&dxs.mul(&inv)).reduce(&ctx)?;
    let t = s.mul(&p.t).mul(&inv).add(&dts.mul(&inv)).reduce(&ctx)?;
    Ok(ZcrPair {
        algebra: p.algebra,
        x,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coframe::tests::sine_gordon;
    use crate::expr::{builtin, parse_ratfn, Builtin, JetVar};

    fn sg_eq() -> EquationSpec {
        EquationSpec::generic(JetVar::t(1), builtin(Builtin::Sin, RatFn::jet(0)).unwrap())
    }

    #[test]
    fn sine_gordon_x_matrix() {
        let p = zcr_matrices(&sine_gordon());
        let h = |s: &str| parse_ratfn(s).unwrap();
        assert_eq!(p.x, Mat2::real(h("eta/2"), h("-z1/2"), h("z1/2"), h("-eta/2")));
        assert!(coframe_zcr_residual(&sine_gordon(), &sg_eq()).unwrap().is_zero());
        assert!(!coframe_zcr_residual(&sine_gordon(), &EquationSpec::none())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn gauge_preserves_flatness() {
        let c = sine_gordon();
        let p = zcr_matrices(&c);
        let s = Mat2::real(
            RatFn::one(),
            parse_ratfn("z^2 + z1").unwrap(),
            RatFn::zero(),
            RatFn::one(),
        );
        let g = gauge_transform(&p, &s, &sg_eq(), &c.ctx).unwrap();
        assert!(zcr_residual(&g, &sg_eq(), &c.ctx).unwrap().is_zero());
        let bad = Mat2::real(RatFn::int(2), RatFn::zero(), RatFn::zero(), RatFn::one());
        assert!(gauge_transform(&p, &bad, &sg_eq(), &c.ctx).is_err());
    }

    #[test]
    fn su2_agrees_with_structure_equations() {
        let mut c = sine_gordon();
        c.delta = -1;
        let s = crate::coframe::structure_residuals(&c, &sg_eq()).unwrap();
        assert!(!s.is_zero());
        assert!(!coframe_zcr_residual(&c, &sg_eq()).unwrap().is_zero());
        c.f[0][1] = parse_ratfn("-sin(z)/eta").unwrap();
        c.f[1][1] = parse_ratfn("-cos(z)/eta").unwrap();
        let p = zcr_matrices(&c);
        assert_eq!(p.algebra, Algebra::Su2);
        assert!(crate::coframe::structure_residuals(&c, &sg_eq()).unwrap().is_zero());
        assert!(zcr_residual(&p, &sg_eq(), &c.ctx).unwrap().is_zero());
    }
}
