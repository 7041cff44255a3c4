//! Numeric flag values.
//!
//! A literal is kept as written until the mode is known: integers,
//! fractions `p/q` and decimals (`1.25`, `3e-2`) are exact rationals;
//! `sqrtN` is an irrational shorthand accepted only in float mode.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Rational(BigRational),
    /// `±sqrt(radicand)`.
    Sqrt { negative: bool, radicand: BigRational },
}

impl Literal {
    pub fn to_f64(&self) -> f64 {
        match self {
            Literal::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Literal::Sqrt { negative, radicand } => {
                let s = radicand.to_f64().unwrap_or(f64::NAN).sqrt();
                if *negative {
                    -s
                } else {
                    s
                }
            }
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Literal::Rational(r) => Some(r),
            Literal::Sqrt { .. } => None,
        }
    }
}

impl FromStr for Literal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if let Some(rad) = body.strip_prefix("sqrt") {
            let rad = rad.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rad);
            let radicand = parse_rational(rad).ok_or_else(|| format!("bad radicand in {s:?}"))?;
            if radicand < BigRational::zero() {
                return Err(format!("negative radicand in {s:?}"));
            }
            return Ok(Literal::Sqrt { negative, radicand });
        }
        let r = parse_rational(body).ok_or_else(|| format!("{s:?} is not a number (use 3, -1/2, 0.25, 1e-3 or sqrt10)"))?;
        Ok(Literal::Rational(if negative { -r } else { r }))
    }
}

/// Unsigned integer, `p/q`, or decimal with optional exponent, exactly.
fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        return (!q.is_zero()).then(|| p / q);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow(scale.unsigned_abs()))
    })
}
