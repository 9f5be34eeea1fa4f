//! Arbitrary-precision rationals, kept reduced with positive denominator.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithError;

/// Exact rational number. Always reduced, denominator always positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self, ArithError> {
        if denom.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// p/q from machine integers; panics on q == 0.
    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Rational(BigRational::new(p.into(), q.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn pow(&self, exp: i32) -> Result<Self, ArithError> {
        if exp < 0 && self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(self.0.pow(exp)))
    }

    pub fn as_inner(&self) -> &BigRational {
        &self.0
    }

    pub fn from_inner(r: BigRational) -> Self {
        Rational(r)
    }

    /// Nearest f64, ties to even. Exact rounding for any operand size.
    pub fn to_f64_nearest(&self) -> Result<f64, ArithError> {
        let sign = match self.0.numer().sign() {
            Sign::NoSign => return Ok(0.0),
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        };
        let n = self.0.numer().magnitude();
        let d = self.0.denom().magnitude();
        let mag = round_ratio_to_f64(n, d).ok_or(ArithError::Overflow)?;
        Ok(sign * mag)
    }
}

/// Round n/d (both positive) to the nearest f64, ties to even.
fn round_ratio_to_f64(n: &BigUint, d: &BigUint) -> Option<f64> {
    let bn = n.bits() as i64;
    let bd = d.bits() as i64;
    // Scale so the integer quotient carries 54..56 significant bits.
    let s = 55 - (bn - bd);
    let (num_sh, den_sh) = if s >= 0 {
        (n << s as u64, d.clone())
    } else {
        (n.clone(), d << (-s) as u64)
    };
    let (q, rem) = num_sh.div_rem(&den_sh);
    let q: u128 = (&q).try_into().expect("scaled quotient fits in 128 bits");
    let sticky = !rem.is_zero();
    let qbits = 128 - q.leading_zeros() as i64;
    // floor(log2 of the value); value lies in [2^e_res, 2^(e_res+1))
    let e_res = qbits - 1 - s;
    if e_res > 1024 {
        return None;
    }
    // Subnormal results keep fewer significand bits.
    let mantissa_bits = if e_res < -1022 { 53 - (-1022 - e_res) } else { 53 };
    if mantissa_bits <= 0 {
        // Below half the smallest subnormal rounds to zero; at exactly half, ties-to-even gives zero.
        if mantissa_bits == 0 {
            let exact_half = q == (1u128 << (qbits - 1)) && !sticky;
            if !exact_half {
                return Some(f64::from_bits(1));
            }
        }
        return Some(0.0);
    }
    let drop = qbits - mantissa_bits; // >= 1 since qbits >= 54
    let keep = q >> drop;
    let dropped = q & ((1u128 << drop) - 1);
    let half = 1u128 << (drop - 1);
    let round_up = dropped > half || (dropped == half && (sticky || keep & 1 == 1));
    let mut m = keep + round_up as u128;
    let mut e2 = drop - s;
    if 128 - m.leading_zeros() as i64 > mantissa_bits {
        m >>= 1;
        e2 += 1;
    }
    // m < 2^53, result = m * 2^e2 exactly (or overflow).
    let mut x = m as f64;
    let mut e = e2;
    while e > 0 {
        let step = e.min(1023);
        x *= f64::from_bits(((1023 + step) as u64) << 52);
        e -= step;
        if x.is_infinite() {
            return None;
        }
    }
    while e < 0 {
        let step = (-e).min(1022);
        x *= f64::from_bits(((1023 - step) as u64) << 52);
        e += step;
    }
    Some(x)
}

/// Distance to the next representable f64 above |x|.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::from_bits(1);
    }
    f64::from_bits(a.to_bits() + 1) - a
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |msg: &str| ArithError::Parse { msg: msg.into(), at: 0 };
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad("invalid numerator"))?;
                let q: BigInt = q.trim().parse().map_err(|_| bad("invalid denominator"))?;
                Rational::new(p, q)
            }
            None => {
                let p: BigInt = s.parse().map_err(|_| bad("invalid integer"))?;
                Ok(Rational::from_int(p))
            }
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl ToPrimitive for Rational {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.to_f64_nearest().ok()
    }
}
