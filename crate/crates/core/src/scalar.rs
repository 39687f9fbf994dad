//! Number types the solvers are generic over.
//!
//! Every algorithm in this crate is written once against [`Scalar`] and
//! instantiated either with exact rationals ([`Rational`]) or with floats.
//! A single computation never mixes the two.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::ParseError;

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Ordered field used by the threshold computations.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static {
    /// `true` when arithmetic never rounds.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn from_approx(x: f64) -> Self;

    fn approx(&self) -> f64;

    /// Storage size in bits; zero for fixed-width types.
    fn bit_size(&self) -> u64 {
        0
    }

    fn to_value(&self) -> Value;

    /// Saturate to `[0, 1]`.
    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Whether a step/residual counts as converged: exactly zero in exact
    /// mode, below `eps` otherwise.
    fn negligible(&self, eps: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.approx().abs() < eps
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn from_approx(x: f64) -> Self {
        x
    }

    fn approx(&self) -> f64 {
        *self
    }

    fn to_value(&self) -> Value {
        Value::Approx {
            value: *self,
            tolerance: None,
        }
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r) as f32
    }

    fn from_approx(x: f64) -> Self {
        x as f32
    }

    fn approx(&self) -> f64 {
        f64::from(*self)
    }

    fn to_value(&self) -> Value {
        Value::Approx {
            value: f64::from(*self),
            tolerance: None,
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_approx(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }

    fn approx(&self) -> f64 {
        rational_to_f64(self)
    }

    fn bit_size(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    fn to_value(&self) -> Value {
        Value::Exact(self.clone())
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: scale down before dividing.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// A computed number as reported to the outside world.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx { value: f64, tolerance: Option<f64> },
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rational_to_f64(r),
            Value::Approx { value, .. } => *value,
        }
    }

    pub fn with_tolerance(self, tol: f64) -> Self {
        match self {
            Value::Approx { value, .. } => Value::Approx {
                value,
                tolerance: Some(tol),
            },
            exact => exact,
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&format_rational(r)),
            Value::Approx { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => serializer.serialize_str(&format_rational(r)),
            Value::Approx { value, .. } => serializer.serialize_f64(*value),
        }
    }
}

/// Formats a rational as a terminating decimal when it has one, otherwise
/// as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives) as usize;
    let scaled = (r.abs() * Rational::from_integer(BigInt::from(10).pow(digits as u32))).to_integer();
    let s = format!("{:0>width$}", scaled, width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

/// Parses `"p/q"`, integers and decimals (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let t = text.trim();
    let bad = || ParseError::Number(text.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(n);
    if scale >= 0 {
        r *= Rational::from_integer(ten.pow(scale as u32));
    } else {
        r /= Rational::from_integer(ten.pow((-scale) as u32));
    }
    Ok(if negative { -r } else { r })
}

/// Shorthand for `p/q` in code and tests.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact rational from an `f64` (every finite float is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_f64(x).unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("0.0625").unwrap(), ratio(1, 16));
        assert_eq!(parse_rational("-2").unwrap(), int(-2));
        assert_eq!(parse_rational("1e-2").unwrap(), ratio(1, 100));
        assert_eq!(parse_rational("0.4/2").unwrap(), ratio(1, 5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_terminating_decimals() {
        assert_eq!(format_rational(&ratio(9, 32)), "0.28125");
        assert_eq!(format_rational(&ratio(1, 1)), "1");
        assert_eq!(format_rational(&ratio(4, 7)), "4/7");
        assert_eq!(format_rational(&ratio(-1, 4)), "-0.25");
        assert_eq!(format_rational(&ratio(31, 50)), "0.62");
    }

    #[test]
    fn clamp_saturates() {
        assert_eq!(ratio(3, 2).clamp_unit(), int(1));
        assert_eq!((-0.5f64).clamp_unit(), 0.0);
        assert_eq!(0.25f32.clamp_unit(), 0.25);
    }
}
