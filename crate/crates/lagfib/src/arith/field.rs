//! Exact arithmetic in Q(sqrt(d), i) for a square-free positive integer d.
//!
//! Every element is stored as a + b*sqrt(d) + (c + e*sqrt(d))*i with rational
//! components. For d = 1 the radical collapses and b = e = 0 canonically, so
//! plain Q(i) values have a single representation that unifies with any wider
//! context.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use super::rational::Rational;
use super::ArithError;

/// Field descriptor: which square root the coefficients may use.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct FieldContext {
    d: u64,
}

impl FieldContext {
    pub fn new(d: u64) -> Result<Self, ArithError> {
        if d == 0 || !is_square_free(d) {
            return Err(ArithError::NotSquareFree(d));
        }
        Ok(FieldContext { d })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn element(&self, a: Rational, b: Rational, c: Rational, e: Rational) -> FieldElement {
        FieldElement::from_parts(a, b, c, e, self.d)
    }

    pub fn from_rational(&self, a: Rational) -> FieldElement {
        self.element(a, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn sqrt_d(&self) -> FieldElement {
        self.element(Rational::zero(), Rational::one(), Rational::zero(), Rational::zero())
    }

    pub fn i(&self) -> FieldElement {
        self.element(Rational::zero(), Rational::zero(), Rational::one(), Rational::zero())
    }

    pub fn parse(&self, input: &str) -> Result<FieldElement, ArithError> {
        super::parse::parse_in_context(input, self.d)
    }
}

pub fn is_square_free(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut m = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Element of Q(sqrt(d), i): a + b*sqrt(d) + (c + e*sqrt(d))*i.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    a: Rational,
    b: Rational,
    c: Rational,
    e: Rational,
    d: u64,
}

impl FieldElement {
    /// Canonical constructor. Folds sqrt(1) = 1 into the rational parts, and
    /// drops to the trivial context when no radical component survives, so
    /// equal values always have equal representations.
    pub fn from_parts(a: Rational, b: Rational, c: Rational, e: Rational, d: u64) -> Self {
        if d == 1 {
            FieldElement {
                a: a + b,
                b: Rational::zero(),
                c: c + e,
                e: Rational::zero(),
                d: 1,
            }
        } else if b.is_zero() && e.is_zero() {
            FieldElement { a, b, c, e, d: 1 }
        } else {
            FieldElement { a, b, c, e, d }
        }
    }

    pub fn from_rational(a: Rational) -> Self {
        FieldElement::from_parts(a, Rational::zero(), Rational::zero(), Rational::zero(), 1)
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement::from_rational(Rational::from_int(n))
    }

    pub fn zero() -> Self {
        FieldElement::from_int(0)
    }

    pub fn one() -> Self {
        FieldElement::from_int(1)
    }

    pub fn i() -> Self {
        FieldElement::from_parts(Rational::zero(), Rational::zero(), Rational::one(), Rational::zero(), 1)
    }

    pub fn gaussian(re: Rational, im: Rational) -> Self {
        FieldElement::from_parts(re, Rational::zero(), im, Rational::zero(), 1)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// Components (a, b, c, e) over the basis {1, sqrt(d), i, i*sqrt(d)}.
    pub fn decompose(&self) -> (&Rational, &Rational, &Rational, &Rational) {
        (&self.a, &self.b, &self.c, &self.e)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.e.is_zero()
    }

    /// True when the element lies in Q(i), i.e. both sqrt(d) components vanish.
    pub fn is_gaussian(&self) -> bool {
        self.b.is_zero() && self.e.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.c.is_zero() && self.e.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.b.is_zero() && self.c.is_zero() && self.e.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Common context for a binary operation. d = 1 values sit inside every
    /// Q(sqrt(d), i), so they coerce; distinct nontrivial radicals do not mix.
    fn unify(&self, rhs: &FieldElement) -> Result<u64, ArithError> {
        match (self.d, rhs.d) {
            (x, y) if x == y => Ok(x),
            (1, y) => Ok(y),
            (x, 1) => Ok(x),
            (x, y) => Err(ArithError::ContextMismatch { left: x, right: y }),
        }
    }

    pub fn checked_add(&self, rhs: &FieldElement) -> Result<FieldElement, ArithError> {
        let d = self.unify(rhs)?;
        Ok(FieldElement::from_parts(
            &self.a + &rhs.a,
            &self.b + &rhs.b,
            &self.c + &rhs.c,
            &self.e + &rhs.e,
            d,
        ))
    }

    pub fn checked_sub(&self, rhs: &FieldElement) -> Result<FieldElement, ArithError> {
        self.checked_add(&rhs.neg())
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            e: -&self.e,
            d: self.d,
        }
    }

    pub fn checked_mul(&self, rhs: &FieldElement) -> Result<FieldElement, ArithError> {
        let d = self.unify(rhs)?;
        let dr = Rational::from_int(d as i64);
        // (u1 + v1 i)(u2 + v2 i) with u, v in Q(sqrt(d))
        let (re_a, re_b) = {
            let (pa, pb) = quad_mul(&self.a, &self.b, &rhs.a, &rhs.b, &dr);
            let (qa, qb) = quad_mul(&self.c, &self.e, &rhs.c, &rhs.e, &dr);
            (pa - qa, pb - qb)
        };
        let (im_a, im_b) = {
            let (pa, pb) = quad_mul(&self.a, &self.b, &rhs.c, &rhs.e, &dr);
            let (qa, qb) = quad_mul(&self.c, &self.e, &rhs.a, &rhs.b, &dr);
            (pa + qa, pb + qb)
        };
        Ok(FieldElement::from_parts(re_a, re_b, im_a, im_b, d))
    }

    pub fn checked_div(&self, rhs: &FieldElement) -> Result<FieldElement, ArithError> {
        self.checked_mul(&rhs.inverse()?)
    }

    pub fn inverse(&self) -> Result<FieldElement, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        let dr = Rational::from_int(self.d as i64);
        // |x|^2 = u^2 + v^2 = p + q sqrt(d), real and nonzero
        let (p, q) = self.abs_sq_parts();
        // (p + q sqrt(d))^-1 = (p - q sqrt(d)) / (p^2 - q^2 d)
        let norm = &(&p * &p) - &(&(&q * &q) * &dr);
        debug_assert!(!norm.is_zero(), "norm must not vanish for square-free d");
        let sp = &p / &norm;
        let sq = -&q / norm;
        // x^-1 = conj(x) * |x|^-2
        let conj = self.conj_complex();
        let (ra, rb) = quad_mul(&conj.a, &conj.b, &sp, &sq, &dr);
        let (ia, ib) = quad_mul(&conj.c, &conj.e, &sp, &sq, &dr);
        Ok(FieldElement::from_parts(ra, rb, ia, ib, self.d))
    }

    /// Complex conjugate: negates the i part.
    pub fn conj_complex(&self) -> FieldElement {
        FieldElement {
            a: self.a.clone(),
            b: self.b.clone(),
            c: -&self.c,
            e: -&self.e,
            d: self.d,
        }
    }

    /// Galois conjugate sqrt(d) -> -sqrt(d).
    pub fn conj_sqrt(&self) -> FieldElement {
        FieldElement {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
            e: -&self.e,
            d: self.d,
        }
    }

    /// |x|^2 as (p, q) with |x|^2 = p + q*sqrt(d).
    pub fn abs_sq_parts(&self) -> (Rational, Rational) {
        let dr = Rational::from_int(self.d as i64);
        let (ua, ub) = quad_mul(&self.a, &self.b, &self.a, &self.b, &dr);
        let (va, vb) = quad_mul(&self.c, &self.e, &self.c, &self.e, &dr);
        (ua + va, ub + vb)
    }

    pub fn scale(&self, k: &Rational) -> FieldElement {
        FieldElement::from_parts(&self.a * k, &self.b * k, &self.c * k, &self.e * k, self.d)
    }

    pub fn mul_int(&self, k: &BigInt) -> FieldElement {
        self.scale(&Rational::from_inner(num_rational::BigRational::from_integer(k.clone())))
    }

    pub fn powi(&self, exp: i64) -> Result<FieldElement, ArithError> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut result = FieldElement::one();
        let mut sq = base;
        let mut n = exp.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                result = result.checked_mul(&sq)?;
            }
            sq = sq.checked_mul(&sq)?;
            n >>= 1;
        }
        Ok(result)
    }

    /// Nearest-f64 complex image. Real and imaginary parts are each rounded
    /// from a rational approximation of a + b*sqrt(d) carrying far more
    /// precision than the target, so the result is within 1 ulp per part.
    pub fn embed(&self) -> Result<Complex64, ArithError> {
        let re = embed_quadratic(&self.a, &self.b, self.d)?;
        let im = embed_quadratic(&self.c, &self.e, self.d)?;
        Ok(Complex64::new(re, im))
    }

    /// Exact sign of the real number a + b*sqrt(d); element must be real.
    pub fn real_sign(&self) -> Ordering {
        debug_assert!(self.is_real());
        quad_sign(&self.a, &self.b, self.d)
    }
}

/// (a1 + b1 s)(a2 + b2 s) with s^2 = d.
fn quad_mul(a1: &Rational, b1: &Rational, a2: &Rational, b2: &Rational, d: &Rational) -> (Rational, Rational) {
    (&(a1 * a2) + &(&(b1 * b2) * d), &(a1 * b2) + &(b1 * a2))
}

/// Sign of p + q*sqrt(d), exactly.
pub fn quad_sign(p: &Rational, q: &Rational, d: u64) -> Ordering {
    let sp = p.numer().sign();
    let sq = q.numer().sign();
    use num_bigint::Sign::*;
    match (sp, sq) {
        (NoSign, NoSign) => Ordering::Equal,
        (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
        (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
        (Plus, Minus) | (Minus, Plus) => {
            // compare p^2 with q^2 d; the sign of the larger magnitude wins
            let p2 = p * p;
            let q2d = &(q * q) * &Rational::from_int(d as i64);
            match p2.cmp(&q2d) {
                Ordering::Greater => if sp == Plus { Ordering::Greater } else { Ordering::Less },
                Ordering::Less => if sq == Plus { Ordering::Greater } else { Ordering::Less },
                Ordering::Equal => Ordering::Equal, // only possible when both are zero (d square-free)
            }
        }
    }
}

// Bits of precision carried by the rational sqrt approximation used in embed.
const SQRT_BITS: u64 = 1024;

fn embed_quadratic(a: &Rational, b: &Rational, d: u64) -> Result<f64, ArithError> {
    if b.is_zero() {
        return a.to_f64_nearest();
    }
    let approx = sqrt_rational_approx(d);
    let value = a + &(b * &approx);
    value.to_f64_nearest()
}

/// Rational r with |r - sqrt(d)| < 2^-SQRT_BITS.
fn sqrt_rational_approx(d: u64) -> Rational {
    let scaled = BigUint::from(d) << (2 * SQRT_BITS);
    let root = scaled.sqrt();
    Rational::new(BigInt::from(root), BigInt::from(1u8) << SQRT_BITS).expect("nonzero denominator")
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        if !self.a.is_zero() {
            parts.push((self.a.is_negative(), self.a.abs().to_string()));
        }
        if !self.b.is_zero() {
            parts.push((self.b.is_negative(), format!("{}*sqrt({})", self.b.abs(), self.d)));
        }
        match (self.c.is_zero(), self.e.is_zero()) {
            (true, true) => {}
            (false, true) => parts.push((self.c.is_negative(), format!("{}*i", self.c.abs()))),
            (true, false) => parts.push((self.e.is_negative(), format!("{}*sqrt({})*i", self.e.abs(), self.d))),
            (false, false) => {
                // keep both imaginary components grouped: (c + e*sqrt(d))*i
                let lead_neg = self.c.is_negative();
                let (c, e) = if lead_neg {
                    (self.c.abs(), -&self.e)
                } else {
                    (self.c.clone(), self.e.clone())
                };
                let inner = if e.is_negative() {
                    format!("{} - {}*sqrt({})", c, e.abs(), self.d)
                } else {
                    format!("{} + {}*sqrt({})", c, e, self.d)
                };
                parts.push((lead_neg, format!("({})*i", inner)));
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (neg, body)) in parts.iter().enumerate() {
            if idx == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(body);
        }
        write!(f, "{}", out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::ulp;
    use proptest::prelude::*;

    fn fe(a: (i64, i64), b: (i64, i64), c: (i64, i64), e: (i64, i64), d: u64) -> FieldElement {
        FieldElement::from_parts(
            Rational::ratio(a.0, a.1),
            Rational::ratio(b.0, b.1),
            Rational::ratio(c.0, c.1),
            Rational::ratio(e.0, e.1),
            d,
        )
    }

    #[test]
    fn square_free_detection() {
        assert!(is_square_free(1));
        assert!(is_square_free(2));
        assert!(is_square_free(30));
        assert!(!is_square_free(4));
        assert!(!is_square_free(12));
        assert!(!is_square_free(0));
        assert!(FieldContext::new(18).is_err());
    }

    #[test]
    fn d_one_collapses_radical() {
        let x = fe((1, 1), (2, 1), (3, 1), (4, 1), 1);
        let (a, b, c, e) = x.decompose();
        assert_eq!(a, &Rational::from_int(3));
        assert!(b.is_zero());
        assert_eq!(c, &Rational::from_int(7));
        assert!(e.is_zero());
    }

    #[test]
    fn sqrt_two_squares_to_two() {
        let ctx = FieldContext::new(2).unwrap();
        let s = ctx.sqrt_d();
        assert_eq!(s.checked_mul(&s).unwrap(), ctx.from_rational(Rational::from_int(2)));
    }

    #[test]
    fn inverse_of_one_plus_i() {
        // 1/(1+i) = 1/2 - 1/2 i, by multiplying through by the conjugate
        let x = FieldElement::gaussian(Rational::one(), Rational::one());
        let inv = x.inverse().unwrap();
        assert_eq!(inv, FieldElement::gaussian(Rational::ratio(1, 2), Rational::ratio(-1, 2)));
        assert_eq!(x.checked_mul(&inv).unwrap(), FieldElement::one());
    }

    #[test]
    fn context_mismatch_detected() {
        let x = FieldContext::new(2).unwrap().sqrt_d();
        let y = FieldContext::new(3).unwrap().sqrt_d();
        assert!(matches!(
            x.checked_add(&y),
            Err(ArithError::ContextMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn gaussian_coerces_into_wider_context() {
        let i = FieldElement::i();
        let s = FieldContext::new(2).unwrap().sqrt_d();
        let sum = i.checked_add(&s).unwrap();
        assert_eq!(sum.d(), 2);
        let (a, b, c, e) = sum.decompose();
        assert!(a.is_zero());
        assert_eq!(b, &Rational::one());
        assert_eq!(c, &Rational::one());
        assert!(e.is_zero());
    }

    #[test]
    fn division_by_zero_reported() {
        assert!(matches!(FieldElement::zero().inverse(), Err(ArithError::DivisionByZero)));
    }

    #[test]
    fn embed_one_plus_sqrt2() {
        let ctx = FieldContext::new(2).unwrap();
        let x = FieldElement::one().checked_add(&ctx.sqrt_d()).unwrap();
        let z = x.embed().unwrap();
        let expected = 1.0 + 2.0_f64.sqrt();
        assert!((z.re - expected).abs() <= 4.0 * ulp(expected));
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn embed_exact_on_cancellation() {
        // 2 - sqrt(2)*sqrt(2) = 0 exactly; also check near-cancellation stays accurate
        let ctx = FieldContext::new(2).unwrap();
        let two = ctx.from_rational(Rational::from_int(2));
        let s2 = ctx.sqrt_d().checked_mul(&ctx.sqrt_d()).unwrap();
        assert!(two.checked_sub(&s2).unwrap().embed().unwrap().norm() == 0.0);
        // 1393/985 is a convergent of sqrt(2); the difference is around 3.6e-7,
        // far below the magnitudes being subtracted. Reference value frozen from
        // a 60-digit decimal computation.
        let close = ctx.from_rational(Rational::ratio(1393, 985));
        let diff = ctx.sqrt_d().checked_sub(&close).unwrap().embed().unwrap().re;
        let exact = 3.6440355190159356689679853056587931654e-7;
        assert!((diff - exact).abs() <= 4.0 * ulp(exact), "diff {diff:e} vs {exact:e}");
    }

    #[test]
    fn real_sign_exact() {
        // 99/70 slightly overshoots sqrt(2): 99^2 = 9801 > 9800 = 70^2 * 2
        let x = fe((99, 70), (-1, 1), (0, 1), (0, 1), 2);
        assert_eq!(x.real_sign(), Ordering::Greater);
        let y = fe((-99, 70), (1, 1), (0, 1), (0, 1), 2);
        assert_eq!(y.real_sign(), Ordering::Less);
        assert_eq!(FieldElement::zero().real_sign(), Ordering::Equal);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-40i64..=40, 1i64..=12).prop_map(|(p, q)| Rational::ratio(p, q))
    }

    fn arb_element(d: u64) -> impl Strategy<Value = FieldElement> {
        (arb_rational(), arb_rational(), arb_rational(), arb_rational())
            .prop_map(move |(a, b, c, e)| FieldElement::from_parts(a, b, c, e, d))
    }

    proptest! {
        #[test]
        fn field_axioms_hold(x in arb_element(5), y in arb_element(5), z in arb_element(5)) {
            let xy = x.checked_mul(&y).unwrap();
            let yx = y.checked_mul(&x).unwrap();
            prop_assert_eq!(&xy, &yx);
            let assoc_l = xy.checked_mul(&z).unwrap();
            let assoc_r = x.checked_mul(&y.checked_mul(&z).unwrap()).unwrap();
            prop_assert_eq!(assoc_l, assoc_r);
            let distrib_l = x.checked_mul(&y.checked_add(&z).unwrap()).unwrap();
            let distrib_r = x.checked_mul(&y).unwrap().checked_add(&x.checked_mul(&z).unwrap()).unwrap();
            prop_assert_eq!(distrib_l, distrib_r);
        }

        #[test]
        fn inverse_round_trips(x in arb_element(3)) {
            prop_assume!(!x.is_zero());
            let inv = x.inverse().unwrap();
            prop_assert_eq!(x.checked_mul(&inv).unwrap(), FieldElement::one());
        }

        #[test]
        fn decompose_reconstructs(x in arb_element(7)) {
            let (a, b, c, e) = x.decompose();
            let rebuilt = FieldElement::from_parts(a.clone(), b.clone(), c.clone(), e.clone(), x.d());
            prop_assert_eq!(rebuilt, x);
        }

        #[test]
        fn embed_multiplicative_within_16_ulp(x in arb_element(2), y in arb_element(2)) {
            let exact = x.checked_mul(&y).unwrap().embed().unwrap();
            let approx = x.embed().unwrap() * y.embed().unwrap();
            let bound = 16.0 * ulp(exact.norm());
            prop_assert!((exact - approx).norm() <= bound,
                "|{} - {}| > {}", exact, approx, bound);
        }
    }
}
