//! Double-double floating point: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi) / 2`, giving about 106 significant bits.
//!
//! Used for every path where `cosh`, `sinh`, `tanh` or `exp` enter a
//! probability or a partition function, so that identities checked at
//! `1e-10` are limited by the mathematics rather than by rounding.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Real {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Real = Real {
    hi: 6.931_471_805_599_452_862e-1,
    lo: 2.319_046_813_846_299_558e-17,
};

impl Real {
    pub const ZERO: Real = Real { hi: 0.0, lo: 0.0 };
    pub const ONE: Real = Real { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Real {
        Real { hi: x, lo: 0.0 }
    }

    pub fn from_parts(hi: f64, lo: f64) -> Real {
        let (hi, lo) = quick_two_sum(hi, lo);
        Real { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Real {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Real) -> Real {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Real) -> Real {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Exact conversion of an integer of any size, rounded to ~106 bits.
    pub fn from_bigint(n: &BigInt) -> Real {
        let hi = n.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Real::from_f64(hi);
        }
        // remainder is exactly representable once hi is subtracted
        let rest = n - BigInt::from_f64(hi).unwrap_or_default();
        let lo = rest.to_f64().unwrap_or(0.0);
        Real::from_parts(hi, lo)
    }

    pub fn from_rational(q: &BigRational) -> Real {
        Real::from_bigint(q.numer()) / Real::from_bigint(q.denom())
    }

    /// Exact rational value of this double-double.
    pub fn to_rational(self) -> BigRational {
        let h = BigRational::from_float(self.hi).unwrap_or_else(BigRational::zero);
        let l = BigRational::from_float(self.lo).unwrap_or_else(BigRational::zero);
        h + l
    }

    pub fn mul_f64(self, b: f64) -> Real {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        Real::from_parts(p, e)
    }

    pub fn powi(self, mut n: i32) -> Real {
        if n < 0 {
            return Real::ONE / self.powi(-n);
        }
        let mut base = self;
        let mut acc = Real::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }

    pub fn sqr(self) -> Real {
        self * self
    }

    /// `exp(x) - 1` for `|x| <= ~0.5`, accurate for tiny arguments.
    fn expm1_small(self) -> Real {
        // scale down by 2^10, sum the series, then undo with (1+s)^2 = 1 + (2s + s^2)
        let r = self.mul_f64(1.0 / 1024.0);
        let mut term = r;
        let mut sum = r;
        let mut k = 2.0;
        loop {
            term = (term * r) / Real::from_f64(k);
            sum += term;
            if term.hi.abs() < 1e-36 * sum.hi.abs().max(1e-300) || k > 40.0 {
                break;
            }
            k += 1.0;
        }
        for _ in 0..10 {
            sum = sum.mul_f64(2.0) + sum * sum;
        }
        sum
    }

    pub fn exp(self) -> Real {
        if self.hi > 709.0 {
            return Real::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Real::ZERO;
        }
        if self.hi.abs() < 0.5 {
            return self.expm1_small() + Real::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        let e = r.expm1_small() + Real::ONE;
        Real {
            hi: e.hi * 2f64.powi(k as i32),
            lo: e.lo * 2f64.powi(k as i32),
        }
    }

    pub fn expm1(self) -> Real {
        if self.hi.abs() < 0.5 {
            self.expm1_small()
        } else {
            self.exp() - Real::ONE
        }
    }

    /// Natural logarithm by Newton iteration on `exp`.
    pub fn ln(self) -> Real {
        if self.hi <= 0.0 {
            return Real::from_f64(f64::NAN);
        }
        let mut y = Real::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Real::ONE;
        }
        y
    }

    pub fn sinh(self) -> Real {
        if self.hi.abs() < 0.5 {
            let a = self.expm1_small();
            let b = (-self).expm1_small();
            return (a - b).mul_f64(0.5);
        }
        let e = self.exp();
        (e - Real::ONE / e).mul_f64(0.5)
    }

    pub fn cosh(self) -> Real {
        let e = self.exp();
        (e + Real::ONE / e).mul_f64(0.5)
    }

    pub fn tanh(self) -> Real {
        if self.hi > 40.0 {
            return Real::ONE - (self.mul_f64(-2.0)).exp().mul_f64(2.0);
        }
        if self.hi < -40.0 {
            return -(-self).tanh();
        }
        // tanh x = expm1(2x) / (expm1(2x) + 2)
        let m = self.mul_f64(2.0).expm1();
        m / (m + Real::from_f64(2.0))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

impl From<u64> for Real {
    fn from(x: u64) -> Self {
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        Real::from_parts(hi, lo)
    }
}

impl From<i64> for Real {
    fn from(x: i64) -> Self {
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        Real::from_parts(hi, lo)
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, b: Real) -> Real {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Real { hi, lo }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, b: Real) -> Real {
        self + (-b)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, b: Real) -> Real {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Real { hi, lo }
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, b: Real) -> Real {
        // long division, three quotient digits
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Real { hi: q1, lo: q2 } + Real::from_f64(q3)
    }
}

impl AddAssign for Real {
    fn add_assign(&mut self, b: Real) {
        *self = *self + b;
    }
}

impl SubAssign for Real {
    fn sub_assign(&mut self, b: Real) {
        *self = *self - b;
    }
}

impl MulAssign for Real {
    fn mul_assign(&mut self, b: Real) {
        *self = *self * b;
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Real> for Real {
    fn sum<I: Iterator<Item = &'a Real>>(iter: I) -> Real {
        iter.fold(Real::ZERO, |a, b| a + *b)
    }
}

impl Product for Real {
    fn product<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::ONE, |a, b| a * b)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = f.precision() {
            write!(f, "{:.*e}", p, self.to_f64())
        } else {
            write!(f, "{:e}", self.to_f64())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    // 40-digit references
    const E_STR: &str = "2.718281828459045235360287471352662497757";

    fn rel(a: Real, b: Real) -> f64 {
        ((a - b) / b).abs().to_f64()
    }

    fn parse(s: &str) -> Real {
        // digit-by-digit so the reference does not go through f64
        let (int, frac) = s.split_once('.').unwrap();
        let mut v = Real::from(int.parse::<u64>().unwrap());
        let mut scale = Real::ONE;
        for c in frac.chars() {
            scale = scale / Real::from_f64(10.0);
            v += scale.mul_f64(c.to_digit(10).unwrap() as f64);
        }
        v
    }

    #[test]
    fn exp_one_matches_reference() {
        assert!(rel(Real::ONE.exp(), parse(E_STR)) < 1e-30);
    }

    #[test]
    fn exp_ln_round_trip() {
        for x in [0.001, 0.3, 1.0, 2.5, 17.0, -3.25] {
            let x = Real::from_f64(x);
            assert!(rel(x.exp().ln(), x) < 1e-29, "{x}");
        }
    }

    #[test]
    fn hyperbolic_identities() {
        for x in [1e-6, 0.05, 0.2, 0.6, 1.0, 2.0, 8.0] {
            let x = Real::from_f64(x);
            let c = x.cosh();
            let s = x.sinh();
            assert!(((c * c - s * s) - Real::ONE).abs().to_f64() < 1e-28 * c.to_f64().powi(2));
            assert!(rel(x.tanh(), s / c) < 1e-29);
            assert!(rel(s + c, x.exp()) < 1e-29);
        }
    }

    #[test]
    fn exp_of_sum_is_product() {
        let a = Real::from_f64(0.37);
        let b = Real::from_f64(1.91);
        assert!(rel((a + b).exp(), a.exp() * b.exp()) < 1e-29);
    }

    #[test]
    fn rational_round_trip_is_exact() {
        let x = Real::from_f64(0.3).exp();
        assert_eq!(Real::from_rational(&x.to_rational()), x);
        let big = BigInt::one() << 200u32;
        let r = Real::from_bigint(&(big.clone() + BigInt::from(7)));
        assert_eq!(r.hi(), 2f64.powi(200));
    }

    #[test]
    fn division_and_powers() {
        let three = Real::from_f64(3.0);
        let third = Real::ONE / three;
        assert!(((third * three) - Real::ONE).abs().to_f64() < 1e-31);
        assert!(rel(Real::from_f64(1.5).powi(20), Real::from_f64(1.5f64.powi(20))) < 1e-30);
    }
}
