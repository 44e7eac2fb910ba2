use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact dyadic rational `numerator / 2^exponent`.
///
/// Canonical: the numerator is odd unless the exponent is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: BigInt,
    exp: u32,
}

impl DyadicRational {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut r = Self { num, exp };
        r.normalize();
        r
    }

    pub fn from_parts(num: i64, exp: u32) -> Self {
        Self::new(BigInt::from(num), exp)
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_parts(v, 0)
    }

    pub fn zero() -> Self {
        Self {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `2^k` for any signed `k`.
    pub fn pow2(k: i32) -> Self {
        Self::one().mul_pow2(k)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        if self.exp == 0 {
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64) as u32;
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: i32) -> Self {
        if k >= 0 {
            let k = k as u32;
            if k <= self.exp {
                Self::new(self.num.clone(), self.exp - k)
            } else {
                Self::new(&self.num << (k - self.exp), 0)
            }
        } else {
            Self::new(self.num.clone(), self.exp + k.unsigned_abs())
        }
    }

    /// Fractional part `x - ⌊x⌋ ∈ [0, 1)`.
    pub fn fract(&self) -> Self {
        if self.exp == 0 {
            return Self::zero();
        }
        let modulus = BigInt::one() << self.exp;
        Self::new(self.num.mod_floor(&modulus), self.exp)
    }

    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&(BigInt::one() << self.exp))
    }

    /// Binary digit `η_i` (`i ≥ 1`) of a value in `[0, 1)`.
    pub fn digit(&self, i: u32) -> u8 {
        if i == 0 || i > self.exp {
            return 0;
        }
        self.num.bit((self.exp - i) as u64) as u8
    }

    /// First 64 binary digits of a value in `[0, 1)`, `η_1` in the top bit.
    pub fn digit_word(&self) -> u64 {
        let f = self.fract();
        if f.is_zero() {
            0
        } else if f.exp <= 64 {
            f.num.to_u64().unwrap_or(0) << (64 - f.exp)
        } else {
            (&f.num >> (f.exp - 64)).to_u64().unwrap_or(0)
        }
    }

    pub fn in_unit_interval_open(&self) -> bool {
        !self.is_negative() && self.floor().is_zero()
    }

    pub fn in_unit_interval_closed(&self) -> bool {
        self.in_unit_interval_open() || *self == Self::one()
    }

    pub fn to_f64(&self) -> f64 {
        // Exact for numerators below 2^53; correctly rounded enough otherwise.
        match self.num.to_f64() {
            Some(v) if v.is_finite() => v / (self.exp as f64).exp2(),
            _ => {
                let bits = self.num.bits();
                let shift = bits.saturating_sub(60);
                let head = (&self.num >> shift).to_f64().unwrap_or(0.0);
                head * (shift as f64 - self.exp as f64).exp2()
            }
        }
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        let a = &self.num << (e - self.exp);
        let b = &other.num << (e - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exp.max(rhs.exp);
        let a = &self.num << (e - self.exp);
        let b = &rhs.num << (e - rhs.exp);
        DyadicRational::new(a + b, e)
    }
}

impl<'a> Sub<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exp.max(rhs.exp);
        let a = &self.num << (e - self.exp);
        let b = &rhs.num << (e - rhs.exp);
        DyadicRational::new(a - b, e)
    }
}

impl<'a> Mul<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: DyadicRational) -> DyadicRational {
        &self * &rhs
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -&self.num,
            exp: self.exp,
        }
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |a, b| &a + &b)
    }
}

impl From<i64> for DyadicRational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, e: u32) -> DyadicRational {
        DyadicRational::from_parts(n, e)
    }

    #[test]
    fn canonical_form() {
        assert_eq!(q(4, 3), q(1, 1));
        assert_eq!(q(0, 7).exponent(), 0);
        assert_eq!(q(6, 0).numerator(), &BigInt::from(6));
        assert_eq!(q(3, 2).to_string(), "3/2^2");
    }

    #[test]
    fn arithmetic() {
        assert_eq!(&q(1, 1) + &q(1, 2), q(3, 2));
        assert_eq!(&q(1, 1) - &q(3, 2), q(-1, 2));
        assert_eq!(&q(3, 2) * &q(5, 3), q(15, 5));
        assert_eq!(q(3, 2).mul_pow2(3), q(6, 0));
        assert_eq!(q(3, 0).mul_pow2(-2), q(3, 2));
        assert!(q(3, 2) > q(1, 1));
        assert!(q(-1, 2) < DyadicRational::zero());
    }

    #[test]
    fn fract_and_digits() {
        assert_eq!(q(11, 2).fract(), q(3, 2));
        assert_eq!(q(-1, 2).fract(), q(3, 2));
        let x = q(5, 3); // .101
        assert_eq!((x.digit(1), x.digit(2), x.digit(3), x.digit(4)), (1, 0, 1, 0));
        assert_eq!(x.digit_word() >> 61, 0b101);
        assert!(x.in_unit_interval_open());
        assert!(!DyadicRational::one().in_unit_interval_open());
        assert!(DyadicRational::one().in_unit_interval_closed());
    }

    proptest! {
        #[test]
        fn ring_laws(a in -1000i64..1000, ea in 0u32..20, b in -1000i64..1000, eb in 0u32..20) {
            let (x, y) = (q(a, ea), q(b, eb));
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert_eq!(&x * &y, &y * &x);
            let expect = a as f64 / (ea as f64).exp2() + b as f64 / (eb as f64).exp2();
            prop_assert!(((&x + &y).to_f64() - expect).abs() < 1e-12);
        }
    }
}
