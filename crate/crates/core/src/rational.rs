//! Rational number helpers: construction, parsing and canonical formatting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

pub type Rational = BigRational;

/// Maximum number of fractional digits accepted in decimal input.
pub const MAX_DECIMAL_DIGITS: usize = 12;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for ParseRationalError {}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `-?[0-9]+(/[1-9][0-9]*)?` or a decimal `-?[0-9]+.[0-9]{1,12}`.
///
/// The result is always in lowest terms.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let (negative, body) = match input.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, input),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        if !all_digits(num) || !all_digits(den) {
            return Err(err("expected digits around '/'"));
        }
        if den.starts_with('0') {
            return Err(err("denominator must start with a nonzero digit"));
        }
        let n: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
        Rational::new(n, d)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if !all_digits(whole) || !all_digits(frac) {
            return Err(err("expected digits around '.'"));
        }
        if frac.len() > MAX_DECIMAL_DIGITS {
            return Err(err("more than 12 fractional digits"));
        }
        let digits: BigInt = format!("{whole}{frac}")
            .parse()
            .map_err(|_| err("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Rational::new(digits, scale)
    } else {
        if !all_digits(body) {
            return Err(err("expected an integer, p/q or a decimal"));
        }
        Rational::from_integer(body.parse().map_err(|_| err("bad integer"))?)
    };
    Ok(if negative { -value } else { value })
}

/// Canonical `p/q` (or `p` when integral) representation in lowest terms.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}
