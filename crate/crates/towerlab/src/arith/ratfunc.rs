//! Reduced fractions of multivariate polynomials: the elements of K.

use super::poly::{poly_gcd, MultiPoly};
use super::FieldSpec;
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// An element of K = F_p(x_1,...,x_N), stored as a reduced fraction with a
/// monic denominator. Structural equality decides field equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.spec() != den.spec() {
            return Err(Error::SpecMismatch);
        }
        if num.is_zero() {
            return Ok(RatFunc {
                den: MultiPoly::one(num.spec()),
                num,
            });
        }
        let g = poly_gcd(&num, &den)?;
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        // Monic denominator under graded lex.
        let lc = den.leading().expect("nonzero").1;
        if lc != 1 {
            let inv = den.spec().fp_inv(lc);
            num = num.scale(inv);
            den = den.scale(inv);
        }
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: MultiPoly) -> RatFunc {
        let den = MultiPoly::one(p.spec());
        RatFunc { num: p, den }
    }

    pub fn zero(spec: &Arc<FieldSpec>) -> RatFunc {
        Self::from_poly(MultiPoly::zero(spec))
    }

    pub fn one(spec: &Arc<FieldSpec>) -> RatFunc {
        Self::from_poly(MultiPoly::one(spec))
    }

    pub fn constant(spec: &Arc<FieldSpec>, c: u32) -> RatFunc {
        Self::from_poly(MultiPoly::constant(spec, c))
    }

    pub fn var(spec: &Arc<FieldSpec>, i: usize) -> RatFunc {
        Self::from_poly(MultiPoly::var(spec, i))
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.num.spec()
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> Result<RatFunc> {
        let n = self
            .num
            .mul(&other.den)?
            .add(&other.num.mul(&self.den)?)?;
        RatFunc::new(n, self.den.mul(&other.den)?)
    }

    pub fn sub(&self, other: &RatFunc) -> Result<RatFunc> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> Result<RatFunc> {
        RatFunc::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.num.mul(&other.den)?, self.den.mul(&other.num)?)
    }

    pub fn inv(&self) -> Result<RatFunc> {
        RatFunc::one(self.spec()).div(self)
    }

    pub fn scale(&self, c: u32) -> RatFunc {
        RatFunc::new(self.num.scale(c), self.den.clone()).expect("den nonzero")
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// Quotient-rule partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> RatFunc {
        let n = self
            .num
            .derivative(i)
            .mul(&self.den)
            .and_then(|t| t.sub(&self.num.mul(&self.den.derivative(i))?))
            .expect("same spec");
        RatFunc::new(n, self.den.mul(&self.den).expect("same spec")).expect("den nonzero")
    }

    /// f^(p^m), applied to numerator and denominator.
    pub fn pth_power(&self, m: u32) -> RatFunc {
        RatFunc {
            num: self.num.pth_power(m),
            den: self.den.pth_power(m),
        }
    }

    /// The p^m-th root when f lies in K^(p^m), else `Error::NotAPower`.
    pub fn pth_root(&self, m: u32) -> Result<RatFunc> {
        if m == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        let q = self.spec().p().pow(m);
        // f = (num * den^(q-1)) / den^q; the denominator root is den itself.
        let shifted = self
            .num
            .mul(&self.den.pow(q - 1))
            .expect("same spec");
        match shifted.pth_root(m) {
            Some(r) => RatFunc::new(r, self.den.clone()),
            None => Err(Error::NotAPower(m)),
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
