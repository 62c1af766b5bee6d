//! Number types for positions and costs.
//!
//! [`Rational`] is an exact `i128`-backed rational used on every audit and
//! fixture path. Every arithmetic operation is overflow-checked and panics
//! instead of wrapping, so a result is either exact or absent. `f64`
//! implements the same [`Scalar`] interface for bulk sweeps, with comparisons
//! made at [`FLOAT_TOLERANCE`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Comparison tolerance for the floating-point mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        Rational(Ratio::new(num, den))
    }

    pub const fn from_integer(v: i128) -> Self {
        Rational(Ratio::new_raw(v, 1))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.denom() == 1
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.numer() == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest integer not above `self`.
    pub fn floor_int(&self) -> i128 {
        Integer::div_floor(&self.numer(), &self.denom())
    }

    /// Exact conversion of a finite `f64` through its shortest decimal form,
    /// so `0.1` becomes `1/10` rather than the binary approximation.
    pub fn from_f64_decimal(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(v.to_string()));
        }
        format!("{v}").parse()
    }

    fn overflow(op: &str) -> ! {
        panic!("rational overflow in {op}")
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v as i128)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_integer(v as i128)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::from_integer(v as i128)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.denom(), other.denom());
        if a == b {
            return self.numer().cmp(&other.numer());
        }
        match (self.numer().checked_mul(b), other.numer().checked_mul(a)) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        if self.denom() == 1 && rhs.denom() == 1 {
            return Rational::from_integer(
                self.numer()
                    .checked_add(rhs.numer())
                    .unwrap_or_else(|| Self::overflow("add")),
            );
        }
        Rational(self.0.checked_add(&rhs.0).unwrap_or_else(|| Self::overflow("add")))
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        if self.denom() == 1 && rhs.denom() == 1 {
            return Rational::from_integer(
                self.numer()
                    .checked_sub(rhs.numer())
                    .unwrap_or_else(|| Self::overflow("sub")),
            );
        }
        Rational(self.0.checked_sub(&rhs.0).unwrap_or_else(|| Self::overflow("sub")))
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0.checked_mul(&rhs.0).unwrap_or_else(|| Self::overflow("mul")))
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0.checked_div(&rhs.0).unwrap_or_else(|| Self::overflow("div")))
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"p/q"`, plain integers, and decimals with optional exponent
/// (`"2.5"`, `"-1e-3"`). Decimal input is converted exactly.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(p, q));
        }
        let lower = s.to_ascii_lowercase();
        if lower.contains("inf") || lower.contains("nan") {
            return Err(Error::NonFiniteValue(s.to_string()));
        }
        let (mantissa, exponent) = match lower.split_once('e') {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
            None => (lower.as_str(), 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all_digits = format!("{int_part}{frac_part}");
        let mut num: i128 = all_digits.trim_start_matches('0').parse().unwrap_or(0);
        if all_digits.trim_start_matches('0').len() > 36 {
            return Err(Error::Parse(format!("too many digits: {s:?}")));
        }
        let scale = exponent - frac_part.len() as i32;
        let pow = |e: u32| 10i128.checked_pow(e).ok_or_else(|| Error::Parse(format!("exponent out of range: {s:?}")));
        let value = if scale >= 0 {
            num = num
                .checked_mul(pow(scale as u32)?)
                .ok_or_else(|| Error::Parse(format!("value out of range: {s:?}")))?;
            Rational::from_integer(num)
        } else {
            Rational::new(num, pow((-scale) as u32)?)
        };
        Ok(if neg { -value } else { value })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => s.parse().map_err(D::Error::custom),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rational::from(i))
                } else {
                    n.to_string().parse().map_err(D::Error::custom)
                }
            }
            other => Err(D::Error::custom(format!("expected number or string, got {other}"))),
        }
    }
}

/// Arithmetic interface shared by the exact and floating modes.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_rational(r: Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self;
    fn is_finite_val(&self) -> bool;
    /// Total order used for sorting. Exact for rationals; `f64::total_cmp` otherwise.
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Equality under the mode's tolerance (exact for rationals).
    fn approx_eq(&self, other: &Self) -> bool;
    /// `self <= other` under the mode's tolerance.
    fn approx_le(&self, other: &Self) -> bool;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    fn max_of(self, other: Self) -> Self {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other.total_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn approx_lt(&self, other: &Self) -> bool {
        !other.approx_le(self)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn from_int(v: i64) -> Self {
        Rational::from(v)
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn is_finite_val(&self) -> bool {
        true
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn approx_le(&self, other: &Self) -> bool {
        self <= other
    }
    fn half(&self) -> Self {
        if self.denom() == 1 && self.numer() % 2 == 0 {
            Rational::from_integer(self.numer() / 2)
        } else {
            *self / Rational::from_integer(2)
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: Rational) -> Self {
        r.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn is_finite_val(&self) -> bool {
        self.is_finite()
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOLERANCE * (1.0f64).max(self.abs()).max(other.abs())
    }
    fn approx_le(&self, other: &Self) -> bool {
        self <= other || self.approx_eq(other)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn is_zero(&self) -> bool {
        self.numer() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("2.5"), Rational::new(5, 2));
        assert_eq!(q("-0.001"), Rational::new(-1, 1000));
        assert_eq!(q("1e-3"), Rational::new(1, 1000));
        assert_eq!(q("1.5E2"), Rational::from_integer(150));
        assert_eq!(q("11/30"), Rational::new(11, 30));
        assert_eq!(q(".5"), Rational::new(1, 2));
        assert_eq!(q("0"), Rational::ZERO);
    }

    #[test]
    fn rejects_garbage() {
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!(matches!("inf".parse::<Rational>(), Err(Error::NonFiniteValue(_))));
        assert!("".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
    }

    #[test]
    fn float_conversion_uses_decimal_form() {
        assert_eq!(Rational::from_f64_decimal(0.1).unwrap(), Rational::new(1, 10));
        assert!(Rational::from_f64_decimal(f64::NAN).is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["3", "-7/2", "11/60", "0"] {
            assert_eq!(q(s).to_string(), s);
        }
    }

    #[test]
    fn ordering_across_denominators() {
        assert!(q("1/3") < q("0.34"));
        assert!(q("-1/2") < q("-1/3"));
        assert_eq!(q("2/4").cmp(&q("1/2")), Ordering::Equal);
    }

    #[test]
    #[should_panic(expected = "rational overflow")]
    fn overflow_panics_instead_of_wrapping() {
        let big = Rational::from_integer(i128::MAX);
        let _ = big + Rational::ONE;
    }

    #[test]
    fn float_tolerance() {
        assert!(1.0f64.approx_eq(&(1.0 + 1e-12)));
        assert!(!1.0f64.approx_eq(&1.001));
        assert!((1.0 + 1e-12f64).approx_le(&1.0));
    }
}
