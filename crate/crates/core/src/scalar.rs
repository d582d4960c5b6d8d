use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// Arithmetic backend for a whole analysis run: exact big rationals or `f64`.
/// Every geometric predicate in the crate is generic over this trait, so the
/// mode is fixed by the scalar type and never mixed within one computation.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(q: &BigRational) -> Self;

    fn from_int(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// Natural log; `None` in exact mode (the value would be irrational).
    fn ln_opt(&self) -> Option<Self>;

    /// Exponential; `None` in exact mode.
    fn exp_opt(&self) -> Option<Self>;

    /// Exact equality in exact mode, absolute tolerance in float mode.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Zero test used by linear algebra: exact `is_zero`, or `|x| <= tol` scaled.
    fn is_negligible(&self, scale: f64) -> bool;

    /// A strictly positive sample; exact mode draws small-denominator rationals.
    fn sample_positive<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// A nonnegative sample that is exactly zero with positive probability.
    fn sample_nonneg<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// A sample strictly inside (0, 1).
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn ln_opt(&self) -> Option<Self> {
        None
    }

    fn exp_opt(&self) -> Option<Self> {
        None
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn sample_positive<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let num = rng.gen_range(1..=12i64);
        let den = rng.gen_range(1..=12i64);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn sample_nonneg<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen_range(0..4) == 0 {
            BigRational::zero()
        } else {
            Self::sample_positive(rng)
        }
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let den = rng.gen_range(2..=12i64);
        let num = rng.gen_range(1..den);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn ln_opt(&self) -> Option<Self> {
        Some(self.ln())
    }

    fn exp_opt(&self) -> Option<Self> {
        Some(self.exp())
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn is_negligible(&self, scale: f64) -> bool {
        f64::abs(*self) <= 1e-9 * scale.max(1.0)
    }

    fn sample_positive<R: Rng + ?Sized>(rng: &mut R) -> Self {
        // Bounded away from 0 so logs stay well conditioned.
        rng.gen_range(0.05..=10.0)
    }

    fn sample_nonneg<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen_range(0..4) == 0 {
            0.0
        } else {
            Self::sample_positive(rng)
        }
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen_range(0.01..1.0)
    }
}

/// Parse "p/q" or a plain integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational literal".into());
    }
    match s.split_once('/') {
        None => s
            .parse::<BigInt>()
            .map(BigRational::from_integer)
            .map_err(|_| format!("invalid integer literal `{s}`")),
        Some((num, den)) => {
            let num = num
                .trim()
                .parse::<BigInt>()
                .map_err(|_| format!("invalid numerator `{num}`"))?;
            let den = den
                .trim()
                .parse::<BigInt>()
                .map_err(|_| format!("invalid denominator `{den}`"))?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

pub fn min<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_int(3));
        assert_eq!(
            parse_rational("-1/2").unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(2))
        );
        assert_eq!(parse_rational("4/2").unwrap(), BigRational::from_int(2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rational_display_round_trips() {
        let q = BigRational::new(BigInt::from(7), BigInt::from(3));
        assert_eq!(q.to_string(), "7/3");
        assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
        assert_eq!(BigRational::from_int(5).to_string(), "5");
    }

    #[test]
    fn float_mode_flags() {
        assert!(BigRational::EXACT);
        assert!(!f64::EXACT);
        assert!(BigRational::from_int(2).ln_opt().is_none());
        assert!((2.0f64.ln_opt().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
