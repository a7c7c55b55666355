//! Exact rational scalars and decimal conversion.
//!
//! Every model coefficient, price, demand and revenue in this crate is a
//! [`Rational`]. Only the logarithm inside the consumer surplus is evaluated
//! in floating point, and only at the final step. Decimal text such as
//! `"0.94"` is parsed to the exact fraction `94/100`, never to a float, so
//! that hyperplane intersections and break-even rates can be compared and
//! deduplicated with exact equality.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Shorthand for a small integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty numeric field")]
    Empty,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses a decimal or fraction literal into an exact rational.
///
/// Accepts `12`, `-3.25`, `.5`, and `93/17`. Decimal digits become an exact
/// power-of-ten denominator: `"0.94"` is `94/100`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim()).ok_or_else(|| ParseRationalError::Invalid(s.into()))?;
        let d = parse_decimal(den.trim()).ok_or_else(|| ParseRationalError::Invalid(s.into()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.into()));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(|| ParseRationalError::Invalid(s.into()))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    if s.is_empty() {
        return None;
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    if digits.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut numer = BigInt::zero();
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer * 10 + (c as u8 - b'0');
    }
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(Rational::new(BigInt::from(sign) * numer, denom))
}

/// Rounds to `precision` decimal places, ties away from zero, exactly.
pub fn round_to_precision(value: &Rational, precision: u32) -> Rational {
    let scale = Rational::from_integer(BigInt::from(10u32).pow(precision));
    let scaled = value * &scale;
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -(-scaled + half).floor()
    } else {
        (scaled + half).floor()
    };
    rounded / scale
}

/// Formats with exactly `precision` decimal places (round half away from zero).
pub fn format_fixed(value: &Rational, precision: u32) -> String {
    let scale = BigInt::from(10u32).pow(precision);
    let scaled = value * Rational::from_integer(scale.clone());
    let half = ratio(1, 2);
    let units = if scaled.is_negative() {
        -(-scaled + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let neg = units.sign() == Sign::Minus;
    let mut digits = units.magnitude().to_string();
    if precision == 0 {
        return if neg { format!("-{digits}") } else { digits };
    }
    let p = precision as usize;
    if digits.len() <= p {
        digits = format!("{}{}", "0".repeat(p + 1 - digits.len()), digits);
    }
    let split = digits.len() - p;
    let body = format!("{}.{}", &digits[..split], &digits[split..]);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Formats exactly: a terminating decimal when the reduced denominator is of
/// the form 2^a·5^b, otherwise `numer/denom`.
pub fn format_exact(value: &Rational) -> String {
    let mut den = value.denom().clone();
    if den.is_one() {
        return value.numer().to_string();
    }
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den.is_one() {
        format_fixed(value, twos.max(fives))
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy conversion for the final floating-point welfare sum.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().expect("rational representable as f64")
}
