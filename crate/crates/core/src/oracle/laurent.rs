//! Exact Laurent polynomials with big-integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::real::Real;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

/// Outcome of a sign evaluation at an inexact point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    /// Exactly zero: the polynomial vanishes identically, or the point is
    /// exact (`rel_err = 0`) and a root.
    Zero,
    Positive,
    /// The value is too close to zero to certify at the available precision.
    Uncertain,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0)
    }

    pub fn monomial(coeff: impl Into<BigInt>, exp: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff.into());
        p
    }

    /// From `(exponent, coefficient)` pairs; repeated exponents accumulate.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    pub fn add_term(&mut self, exp: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Sum of coefficients, i.e. the value at 1.
    pub fn at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, c * k)).collect(),
        }
    }

    /// Euler operator `x d/dx`.
    pub fn euler(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, c)| (e, c * BigInt::from(e))))
    }

    /// Ordinary derivative `d/dx`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, c)| (e - 1, c * BigInt::from(e))))
    }

    /// Substitute `x -> x^k`.
    pub fn compose_power(&self, k: i64) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, c)| (e * k, c.clone())))
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&e, c) in &self.terms {
            let xe = if e >= 0 {
                num_traits::pow(x.clone(), e as usize)
            } else {
                num_traits::pow(x.recip(), (-e) as usize)
            };
            acc += BigRational::from_integer(c.clone()) * xe;
        }
        acc
    }

    pub fn eval(&self, x: Real) -> Real {
        self.terms
            .iter()
            .map(|(&e, c)| Real::from_bigint(c) * x.powi(e as i32))
            .sum()
    }

    /// Sign of the value at a point known only to relative precision
    /// `rel_err`. The point is replaced by the nearest rational, the
    /// polynomial is evaluated exactly there, and the result is certified when
    /// it exceeds a derivative bound over the uncertainty interval.
    pub fn certified_sign(&self, x: Real, rel_err: f64) -> Sign {
        if self.is_zero() {
            return Sign::Zero;
        }
        let r = x.to_rational();
        let value = self.eval_rational(&r);
        let xf = x.to_f64();
        let delta = xf.abs() * rel_err;
        let lo = (xf.abs() - delta).max(f64::MIN_POSITIVE);
        let hi = xf.abs() + delta;
        // |p'(ξ)| <= Σ |e c| max(lo^{e-1}, hi^{e-1})
        let mut lip = 0.0f64;
        for (&e, c) in &self.terms {
            let cf = c.abs().to_f64().unwrap_or(f64::INFINITY);
            let pow = (e - 1) as i32;
            lip += (e.unsigned_abs() as f64) * cf * lo.powi(pow).max(hi.powi(pow));
        }
        let slack = lip * delta * 1.01;
        let vf = value.to_f64().unwrap_or(0.0);
        if rel_err == 0.0 {
            return if value.is_zero() {
                Sign::Zero
            } else if value.is_positive() {
                Sign::Positive
            } else {
                Sign::Negative
            };
        }
        if value.is_zero() || !slack.is_finite() || vf.abs() <= slack {
            Sign::Uncertain
        } else if vf > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, -c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &rhs.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }
}

macro_rules! by_value {
    ($tr:ident, $f:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $f(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in self.terms.iter().rev() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match e {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}x")?,
                _ => write!(f, "{a}x^{e}")?,
            }
        }
        Ok(())
    }
}
