//! Exact rational numbers used for simulated time, weights and probabilities.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational with a wide integer base. Simulated seconds, fairness
/// weights and error probabilities all use this type so that engine runs are
/// bit-identical across platforms.
pub type Rational = Ratio<i128>;

/// Simulated time in seconds.
pub type Seconds = Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-2"`, `"3/4"` or a finite decimal such as `"0.125"`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num.trim().parse().map_err(|_| err())?;
        let den: i128 = den.trim().parse().map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if frac_part.len() > 30 {
            return Err(err());
        }
        let int_val: i128 = if int_digits.is_empty() {
            0
        } else {
            int_digits.parse().map_err(|_| err())?
        };
        let frac_val: i128 = frac_part.parse().map_err(|_| err())?;
        let scale = 10i128.pow(frac_part.len() as u32);
        let magnitude = int_val
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(err)?;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(signed, scale));
    }
    let v: i128 = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(v))
}

/// Canonical text form: `"n"` for integers, otherwise `"n/d"` in lowest terms.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy conversion for reports.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= value`.
pub fn ceil_to_int(value: &Rational) -> i128 {
    value.ceil().to_integer()
}

/// Wrapper giving a rational a compact [`Display`](fmt::Display).
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

pub(crate) fn is_non_negative(value: &Rational) -> bool {
    !value.is_negative()
}

pub(crate) fn is_positive(value: &Rational) -> bool {
    value.is_positive() && !value.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_rational("3/4").unwrap(), Rational::new(3, 4));
        assert_eq!(parse_rational("0.125").unwrap(), Rational::new(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        for text in ["0", "7", "2/3", "-5/4", "45/32"] {
            let v = parse_rational(text).unwrap();
            assert_eq!(format_rational(&v), text);
        }
        assert_eq!(format_rational(&parse_rational("0.50").unwrap()), "1/2");
    }
}
