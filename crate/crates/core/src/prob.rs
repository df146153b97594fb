//! Exact rational probabilities.
//!
//! Everything that feeds a sign test (Δ, Γ, flip ratios) is kept as a
//! [`BigRational`] so that ties such as `Δ = 0` are decided exactly.
//! Decimal strings like `"0.35"` are parsed without ever touching `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty numeric literal")]
    Empty,
    #[error("invalid numeric literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error("probability {0} is negative")]
    Negative(String),
    #[error("probability {0} exceeds 1")]
    AboveOne(String),
}

/// Parses a decimal (`"0.35"`, `"-1.5"`, `"2e-3"`) or fraction (`"7/20"`)
/// literal into an exact rational. Both `-` and the unicode minus sign
/// `−` are accepted.
pub fn parse_rational(input: &str) -> Result<BigRational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(input.to_string());

    let (negative, body) = if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('\u{2212}') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    };
    if body.is_empty() {
        return Err(invalid());
    }

    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits(num).ok_or_else(invalid)?;
        let den = parse_digits(den).ok_or_else(invalid)?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(input.to_string()));
        }
        BigRational::new(num, den)
    } else {
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => {
                let exp: i32 = body[i + 1..].parse().map_err(|_| invalid())?;
                (&body[..i], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer = parse_digits(&digits).ok_or_else(invalid)?;
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10u8);
        if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        }
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Renders a rational as a terminating decimal when one exists
/// (denominator of the form 2^i 5^j), otherwise as `num/den`.
pub fn render_rational(r: &BigRational) -> String {
    let mut den = r.denom().clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return r.numer().to_string();
    }
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10u8), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if r.is_negative() { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// `num/den` form, always.
pub fn fraction_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A probability: an exact rational in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(BigRational);

impl Prob {
    pub fn new(value: BigRational) -> Result<Self, ProbError> {
        if value.is_negative() {
            Err(ProbError::Negative(render_rational(&value)))
        } else if value > BigRational::one() {
            Err(ProbError::AboveOne(render_rational(&value)))
        } else {
            Ok(Prob(value))
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self, ProbError> {
        if den == 0 {
            return Err(ParseRationalError::ZeroDenominator(format!("{num}/{den}")).into());
        }
        Prob::new(ratio(num, den))
    }

    pub fn zero() -> Self {
        Prob(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl FromStr for Prob {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prob::new(parse_rational(s)?)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_rational(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.35").unwrap(), ratio(7, 20));
        assert_eq!(parse_rational("0").unwrap(), ratio(0, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1.").unwrap(), ratio(1, 1));
        assert_eq!(parse_rational("-0.15").unwrap(), ratio(-3, 20));
        assert_eq!(parse_rational("\u{2212}0.1").unwrap(), ratio(-1, 10));
        assert_eq!(parse_rational("2.5e-2").unwrap(), ratio(1, 40));
        assert_eq!(parse_rational("3E1").unwrap(), ratio(30, 1));
        assert_eq!(parse_rational("17/29").unwrap(), ratio(17, 29));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "-", "abc", "0.3.4", "1/0", "1e", "0x10", " . "] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn renders_terminating_and_repeating() {
        assert_eq!(render_rational(&ratio(7, 20)), "0.35");
        assert_eq!(render_rational(&ratio(-3, 20)), "-0.15");
        assert_eq!(render_rational(&ratio(13, 50)), "0.26");
        assert_eq!(render_rational(&ratio(2, 1)), "2");
        assert_eq!(render_rational(&ratio(1, 1000)), "0.001");
        assert_eq!(render_rational(&ratio(17, 29)), "17/29");
        assert_eq!(render_rational(&ratio(0, 1)), "0");
    }

    #[test]
    fn prob_bounds() {
        assert!("0.35".parse::<Prob>().is_ok());
        assert!(matches!("-0.1".parse::<Prob>(), Err(ProbError::Negative(_))));
        assert!(matches!("1.01".parse::<Prob>(), Err(ProbError::AboveOne(_))));
        assert_eq!(Prob::from_ratio(3, 4).unwrap().to_f64(), 0.75);
    }

    proptest::proptest! {
        #[test]
        fn render_parse_round_trip(num in -100_000i64..100_000, den in 1i64..5_000) {
            let r = ratio(num, den);
            proptest::prop_assert_eq!(parse_rational(&render_rational(&r)).unwrap(), r);
        }
    }
}
