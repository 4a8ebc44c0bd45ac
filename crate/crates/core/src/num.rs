//! Numeric instantiations shared by every solver.
//!
//! All algorithms are generic over [`Scalar`], an ordered field whose
//! comparisons drive control flow. Two implementations ship: exact
//! [`Rational`] (arbitrary precision) and `f64`, whose comparisons treat
//! values within a relative tolerance of [`FLOAT_TOLERANCE`] as equal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Relative comparison tolerance of the `f64` instantiation.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Whether comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(value: i64) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Total order used by all algorithms. Exact for rationals; for floats,
    /// values within the relative tolerance compare equal.
    fn approx_cmp(&self, other: &Self) -> Ordering;

    /// `self^alpha`. Exact for rationals when `alpha` is integral.
    fn pow_alpha(&self, alpha: f64) -> Self;

    /// Parses a decimal string (`"0.35"`, `"-2"`, `"1e-3"`) or a fraction
    /// (`"7/20"`).
    fn parse_number(text: &str) -> Option<Self>;

    /// Renders the value so that [`Scalar::parse_number`] reads it back
    /// unchanged.
    fn render(&self) -> String;

    fn is_lt(&self, other: &Self) -> bool {
        self.approx_cmp(other) == Ordering::Less
    }
    fn is_le(&self, other: &Self) -> bool {
        self.approx_cmp(other) != Ordering::Greater
    }
    fn is_gt(&self, other: &Self) -> bool {
        self.approx_cmp(other) == Ordering::Greater
    }
    fn is_ge(&self, other: &Self) -> bool {
        self.approx_cmp(other) != Ordering::Less
    }
    fn is_eq(&self, other: &Self) -> bool {
        self.approx_cmp(other) == Ordering::Equal
    }
    fn is_positive_s(&self) -> bool {
        self.is_gt(&Self::zero())
    }
    fn min_s(self, other: Self) -> Self {
        if other.is_lt(&self) {
            other
        } else {
            self
        }
    }
    fn max_s(self, other: Self) -> Self {
        if other.is_gt(&self) {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(value: i64) -> Self {
        value as f64
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_cmp(&self, other: &Self) -> Ordering {
        let scale = 1.0_f64.max(self.abs()).max(other.abs());
        if (self - other).abs() <= FLOAT_TOLERANCE * scale {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    fn pow_alpha(&self, alpha: f64) -> Self {
        if alpha.fract() == 0.0 && alpha.abs() < i32::MAX as f64 {
            self.powi(alpha as i32)
        } else {
            self.powf(alpha)
        }
    }

    fn parse_number(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            return (d != 0.0).then(|| n / d).filter(|v| v.is_finite());
        }
        text.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn approx_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn pow_alpha(&self, alpha: f64) -> Self {
        if alpha.fract() == 0.0 && alpha.abs() < i32::MAX as f64 {
            num_traits::Pow::pow(self, alpha as i32)
        } else {
            // Non-integral exponents have no exact rational value.
            Rational::from_float(Scalar::to_f64(self).powf(alpha)).unwrap_or_else(Zero::zero)
        }
    }

    fn parse_number(text: &str) -> Option<Self> {
        parse_exact(text.trim())
    }

    fn render(&self) -> String {
        render_exact(self)
    }
}

fn parse_exact(text: &str) -> Option<Rational> {
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        return (!d.is_zero()).then(|| Rational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Terminating decimals are written as decimals, everything else as `p/q`.
fn render_exact(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> Rational {
        Rational::parse_number(text).unwrap()
    }

    #[test]
    fn decimal_strings_parse_exactly() {
        assert_eq!(q("0.35"), Rational::from_ratio(7, 20));
        assert_eq!(q("-2"), Rational::from_int(-2));
        assert_eq!(q("1e-3"), Rational::from_ratio(1, 1000));
        assert_eq!(q("2.5E2"), Rational::from_int(250));
        assert_eq!(q("7/21"), Rational::from_ratio(1, 3));
        assert_eq!(q(".5"), Rational::from_ratio(1, 2));
        assert!(Rational::parse_number("abc").is_none());
        assert!(Rational::parse_number("1/0").is_none());
        assert!(Rational::parse_number("").is_none());
    }

    #[test]
    fn rendering_round_trips() {
        for text in ["0.35", "-0.002", "12", "1/3", "-7/6", "0.0625"] {
            let value = q(text);
            assert_eq!(q(&value.render()), value, "{text}");
        }
        assert_eq!(q("0.350").render(), "0.35");
        assert_eq!(Rational::from_ratio(-1, 8).render(), "-0.125");
        assert_eq!(Rational::from_ratio(2, 9).render(), "2/9");
    }

    #[test]
    fn float_tolerance_is_relative() {
        assert!(1.0f64.is_eq(&(1.0 + 1e-12)));
        assert!(1e6f64.is_eq(&(1e6 + 1e-6)));
        assert!(1.0f64.is_lt(&1.001));
        assert_eq!(0.1f64.approx_cmp(&0.2), Ordering::Less);
    }

    #[test]
    fn integral_powers_are_exact() {
        let half = Rational::from_ratio(1, 2);
        assert_eq!(half.pow_alpha(3.0), Rational::from_ratio(1, 8));
        assert_eq!(2.0f64.pow_alpha(2.0), 4.0);
    }
}
