//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Every phase-space and Lax computation is written once over [`Scalar`] and
//! instantiated with [`Rat`] (exact) or `f64`. The two differ only in how
//! tolerances are interpreted: the rational path demands exact zeros.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Exact rational scalar (arbitrary-precision, always reduced, denominator positive).
pub type Rat = BigRational;

/// Coefficient field for the dual exact/float representation.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + num_traits::Zero
    + num_traits::One
{
    /// True for the exact rational instantiation.
    const EXACT: bool;

    fn from_rat(r: &Rat) -> Self;
    fn from_int(i: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Whether `|self| ≤ tol`. The exact path ignores `tol` and requires zero.
    fn within(&self, tol: f64) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_int(i: i64) -> Self {
        i as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn within(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn from_int(i: i64) -> Self {
        Rat::from_integer(BigInt::from(i))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn within(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Shorthand for small rational constants.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses a rational from a decimal or fraction string, without binary rounding.
///
/// Accepted forms: `"3"`, `"-7/12"`, `"0.1"` (exactly 1/10), `"2.5e-3"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n: BigInt = numer.trim().parse().ok()?;
        let d: BigInt = denom.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    let (mantissa, exponent) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['+', '-']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_digits.is_empty() && frac_part.is_empty())
    {
        return None;
    }
    let digits = format!("{int_digits}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rat::from_integer(numer * ten.pow(scale as u32))
    } else {
        Rat::new(numer, ten.pow((-scale) as u32))
    })
}
