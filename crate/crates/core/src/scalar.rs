//! Dual-mode scalars: exact rationals for classification and identities,
//! `f64` for quadrature.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Width of the band below an integer in which a float coordinate is
/// snapped up to that integer during lattice reduction.
pub const FLOAT_REDUCTION_BAND: f64 = 1e-9;

/// A constant known exactly, with a cached `f64` image.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub exact: Rational,
    pub approx: f64,
}

impl Constant {
    pub fn new(exact: Rational) -> Self {
        let approx = rational_to_f64(&exact);
        Constant { exact, approx }
    }
}

/// Field operations shared by the exact and floating modes.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_constant(c: &Constant) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Splits `self` into `(frac, n)` with `self = frac + n`, `n` integral and
    /// `frac` in `[0, 1)`. The float implementation snaps values within
    /// [`FLOAT_REDUCTION_BAND`] of the next integer up to it.
    fn split_floor(&self) -> (Self, BigInt);

    /// Exact zero test (rationals) or `|x| <= tol` (floats).
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Scalar for f64 {
    fn from_constant(c: &Constant) -> Self {
        c.approx
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn split_floor(&self) -> (Self, BigInt) {
        let n = (self + FLOAT_REDUCTION_BAND).floor();
        let frac = (self - n).max(0.0);
        (frac, BigInt::from(n as i64))
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Scalar for Rational {
    fn from_constant(c: &Constant) -> Self {
        c.exact.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn split_floor(&self) -> (Self, BigInt) {
        let n = self.floor().to_integer();
        let frac = self - Rational::from_integer(n.clone());
        (frac, n)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let whole_val: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_val: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(whole_val.abs() * &scale + frac_val, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_power_of_three(n: &BigInt) -> bool {
    if !n.is_positive() {
        return false;
    }
    let three = BigInt::from(3);
    let mut n = n.clone();
    while n.is_multiple_of(&three) {
        n /= &three;
    }
    n.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational(" -4/6 ").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("1.5").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn split_floor_modes() {
        let (f, n) = rat(-1, 2).split_floor();
        assert_eq!(f, rat(1, 2));
        assert_eq!(n, BigInt::from(-1));
        let (f, n) = 1.25f64.split_floor();
        assert_eq!((f, n), (0.25, BigInt::from(1)));
        // inside the band below 1: snapped up
        let (f, n) = (1.0f64 - 1e-12).split_floor();
        assert_eq!(n, BigInt::from(1));
        assert_eq!(f, 0.0);
    }

    #[test]
    fn powers_of_three() {
        assert!(is_power_of_three(&BigInt::from(1)));
        assert!(is_power_of_three(&BigInt::from(243)));
        assert!(!is_power_of_three(&BigInt::from(6)));
        assert!(!is_power_of_three(&BigInt::from(0)));
    }
}
