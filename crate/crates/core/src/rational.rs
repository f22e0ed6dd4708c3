//! Exact rational weights and their text form.
//!
//! Weights are serialized as `"num/den"` (or a bare integer); decimals such as
//! `"0.5"` are accepted on input and converted exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn pow_int(base: u32, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// `base^exp` for a possibly negative exponent.
pub fn pow_rat(base: &Rational, exp: i64) -> Rational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Always `num/den`, even for integers.
pub fn format_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty rational"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_abs = whole.trim().trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || !whole_abs.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::parse(format!("bad decimal {s:?}")));
        }
        let digits = format!("{whole_abs}{frac}");
        let digits = if digits.is_empty() { "0".to_string() } else { digits };
        let n: BigInt = digits.parse().map_err(|_| Error::parse(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| Error::parse(format!("bad rational {s:?}")))?;
    Ok(Rational::from_integer(n))
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn is_unit_interval_open(r: &Rational) -> bool {
    r.is_positive() && *r < Rational::one()
}

/// Largest dyadic `k / 2^bits` with `(k / 2^bits)^2 <= x`, for `x >= 0`.
pub fn sqrt_floor(x: &Rational, bits: u32) -> Rational {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    let scale = num_traits::pow(BigInt::from(2), 2 * bits as usize);
    let scaled = (x.numer() * &scale) / x.denom();
    let root = scaled.sqrt();
    Rational::new(root, num_traits::pow(BigInt::from(2), bits as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formats() {
        assert_eq!(format_rational(&int(2)), "2");
        assert_eq!(format_fraction(&int(2)), "2/1");
        assert_eq!(format_fraction(&rat(6, 8)), "3/4");
    }

    #[test]
    fn sqrt_floor_brackets() {
        let two = int(2);
        let s = sqrt_floor(&two, 20);
        assert!(&s * &s <= two);
        let step = rat(1, 1 << 20);
        let up = &s + &step;
        assert!(&up * &up > two);
    }
}
