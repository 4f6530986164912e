//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Parses `p`, `-p` or `p/q`; rejects a zero denominator.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Renders in lowest terms as `p/q`, or `p` when the denominator is 1.
pub fn render(r: &Rational) -> String {
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        assert_eq!(parse("2/4"), Some(ratio(1, 2)));
        assert_eq!(parse(" -3 "), Some(int(-3)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x"), None);
        assert_eq!(render(&ratio(6, 8)), "3/4");
        assert_eq!(render(&ratio(-4, 2)), "-2");
        for r in [ratio(7, 3), ratio(-1, 8), int(0)] {
            assert_eq!(parse(&render(&r)), Some(r));
        }
    }
}
