use alloc::vec::Vec;

use num_complex::Complex64;

use super::sphere::cdiv;
use super::{poly_roots, Polynomial, SpherePoint};
use crate::{Error, Result};

/// Shared roots closer than this (relative residual) are divided out.
const COMMON_ROOT_TOL: f64 = 1e-8;

/// Ratio of two coprime polynomials, normalized to a monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
}

impl RationalMap {
    /// Builds `num/den`, dividing out common roots and making `den` monic.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (num, den) = if den.degree() > 0 && num.degree() > 0 {
            reduce(num, den)?
        } else {
            (num, den)
        };
        let lead = den.leading().inv();
        Ok(RationalMap {
            num: num.scale(lead),
            den: den.scale(lead),
        })
    }

    pub fn zero() -> Self {
        RationalMap {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        RationalMap {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn polynomial(p: Polynomial) -> Self {
        RationalMap {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree() == 0 && self.den.degree() == 0
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        RationalMap {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Value on the sphere; poles map to `∞`, `∞` maps to the limit.
    pub fn eval(&self, w: SpherePoint) -> SpherePoint {
        match w {
            SpherePoint::Infinity => self.at_infinity(),
            SpherePoint::Finite(z) => self.eval_finite(z),
        }
    }

    pub fn eval_finite(&self, z: Complex64) -> SpherePoint {
        if z.norm() <= 1.0 {
            let d = self.den.eval(z);
            if d.re == 0.0 && d.im == 0.0 {
                return SpherePoint::Infinity;
            }
            SpherePoint::new(cdiv(self.num.eval(z), d))
        } else {
            // w^{dn−dd} · rev_num(1/w) / rev_den(1/w) keeps large arguments accurate
            let u = super::sphere::cinv(z);
            let rd = self.den.eval_reversed(u);
            if rd.re == 0.0 && rd.im == 0.0 {
                return SpherePoint::Infinity;
            }
            let ratio = cdiv(self.num.eval_reversed(u), rd);
            let shift = self.num.degree() as i32 - self.den.degree() as i32;
            if ratio.re == 0.0 && ratio.im == 0.0 {
                return SpherePoint::ZERO;
            }
            SpherePoint::new(ratio * z.powi(shift))
        }
    }

    pub fn at_infinity(&self) -> SpherePoint {
        let (dn, dd) = (self.num.degree(), self.den.degree());
        if self.num.is_zero() || dn < dd {
            SpherePoint::ZERO
        } else if dn > dd {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(self.num.leading() / self.den.leading())
        }
    }

    /// Quotient-rule derivative, reduced.
    pub fn derivative(&self) -> Self {
        if self.num.degree() == 0 && self.den.degree() == 0 {
            return Self::zero();
        }
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        let d = &self.den * &self.den;
        Self::new(n, d).expect("square of a nonzero denominator")
    }

    /// `t ↦ Φ(1/t)`, the map in the chart at infinity.
    pub fn invert_variable(&self) -> Self {
        let n = self.degree();
        Self::new(self.num.reversed(n), self.den.reversed(n)).expect("reversed denominator")
    }

    /// Distinct roots of the denominator with multiplicity.
    pub fn poles(&self) -> Vec<(SpherePoint, usize)> {
        if self.den.degree() == 0 {
            return Vec::new();
        }
        poly_roots(&self.den).unwrap_or_default()
    }
}

fn reduce(num: Polynomial, den: Polynomial) -> Result<(Polynomial, Polynomial)> {
    let roots = poly_roots(&den)?;
    let mut num = num;
    let mut kept: Vec<Complex64> = Vec::new();
    let mut removed = false;
    for (r, m) in roots {
        let r = r.finite().expect("polynomial roots are finite");
        let mut left = m;
        while left > 0 && num.degree() > 0 {
            let resid = num.eval(r).norm();
            if resid > COMMON_ROOT_TOL * num.eval_abs(r.norm()).max(f64::MIN_POSITIVE) {
                break;
            }
            num = num.deflate(r);
            left -= 1;
            removed = true;
        }
        kept.extend(core::iter::repeat_n(r, left));
    }
    if !removed {
        return Ok((num, den));
    }
    let den = Polynomial::from_roots(&kept).scale(den.leading());
    Ok((num, den))
}
