//! Exact weight parsing.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Parses `"p/q"`, an integer, or a decimal (`"0.125"`, `"2.5e-3"`) into an
/// exact rational. Decimals are expanded digit by digit, never through `f64`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Exact rational value of an `f64`.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Integer weights over a common denominator: `w_j = scaled_j / denom`.
pub(crate) fn common_denominator(weights: &[BigRational]) -> (Vec<BigUint>, BigUint) {
    let mut denom = BigInt::one();
    for w in weights {
        denom = num_integer::Integer::lcm(&denom, w.denom());
    }
    let scaled = weights
        .iter()
        .map(|w| {
            let v = w.numer() * (&denom / w.denom());
            v.to_biguint().expect("weights are positive")
        })
        .collect();
    (scaled, denom.to_biguint().expect("positive denominator"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fractions_and_decimals() {
        assert_eq!(parse_rational("1/3"), Some(r(1, 3)));
        assert_eq!(parse_rational(" 2 / 4 "), Some(r(1, 2)));
        assert_eq!(parse_rational("0.125"), Some(r(1, 8)));
        assert_eq!(parse_rational("0.1"), Some(r(1, 10)));
        assert_eq!(parse_rational("1"), Some(r(1, 1)));
        assert_eq!(parse_rational("2.5e-1"), Some(r(1, 4)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn common_denominator_scales() {
        let (s, d) = common_denominator(&[r(1, 2), r(1, 3), r(1, 6)]);
        assert_eq!(d, BigUint::from(6u32));
        assert_eq!(s, vec![3u32.into(), 2u32.into(), 1u32.into()]);
    }
}
