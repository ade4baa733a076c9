//! Exact rational helpers and the `"p/q"` text form.

use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `"p/q"`, or `"p"` for integers.
pub fn format(value: &Rational) -> String {
    // Display on Ratio already omits a unit denominator.
    value.to_string()
}

pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidArgument(alloc::format!("not a rational: {text:?}"));
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Nearest `f64`; only ever used for advisory decimal output.
pub fn to_f64(value: &Rational) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale huge numerators/denominators down before dividing.
    let n = value.numer();
    let d = value.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_reduced() {
        assert_eq!(format(&ratio(2, 6)), "1/3");
        assert_eq!(format(&ratio(4, 2)), "2");
        assert_eq!(format(&ratio(1, -2)), "-1/2");
        assert_eq!(parse("6/-4").unwrap(), ratio(-3, 2));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn decimal_of_large_values() {
        let big = Rational::new(BigInt::from(10).pow(400u32), BigInt::from(3) * BigInt::from(10).pow(400u32));
        assert!((to_f64(&big) - 1.0 / 3.0).abs() < 1e-15);
    }
}
