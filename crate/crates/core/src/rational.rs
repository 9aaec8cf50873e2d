//! Exact rational numbers and their textual forms.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational used for every time, duration and coefficient.
pub type Rational = num_rational::BigRational;

/// Failure to read a rational literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds `num / den`. Panics when `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p`, `-p`, `p/q`, or an exact decimal such as `5.001` or `-0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(err)?;
        let den = parse_decimal(den.trim()).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mantissa = BigInt::from_str(&format!("{}{}", if whole.is_empty() { "0" } else { whole }, frac)).ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(mantissa, scale);
    Some(if negative { -value } else { value })
}

/// Canonical text: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer not below `r`.
pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// Lossy conversion for display and timing only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders a rational as an SMT-LIB real literal.
pub fn smt_real(r: &Rational) -> String {
    let magnitude = |n: &BigInt, d: &BigInt| {
        if d.is_one() {
            format!("{}.0", n)
        } else {
            format!("(/ {}.0 {}.0)", n, d)
        }
    };
    let (n, d) = (r.numer().abs(), r.denom().clone());
    let body = magnitude(&n, &d);
    if r.is_negative() {
        format!("(- {})", body)
    } else {
        body
    }
}

/// Renders an integer as an SMT-LIB integer literal.
pub fn smt_int(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_fractions_and_decimals() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("5001/1000").unwrap(), ratio(5001, 1000));
        assert_eq!(parse_rational("5.001").unwrap(), ratio(5001, 1000));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("2.0").unwrap(), int(2));
        assert_eq!(parse_rational("1.5/3").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "0x10", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&ratio(10, 4)), "5/2");
        assert_eq!(format_rational(&int(-7)), "-7");
        assert_eq!(smt_real(&ratio(-1, 2)), "(- (/ 1.0 2.0))");
        assert_eq!(smt_real(&int(4)), "4.0");
    }

    #[test]
    fn ceiling() {
        assert_eq!(ceil(&ratio(5, 2)), BigInt::from(3));
        assert_eq!(ceil(&int(4)), BigInt::from(4));
        assert_eq!(ceil(&ratio(-5, 2)), BigInt::from(-2));
    }
}
