//! Scalar abstraction shared by the geometry and measure code.
//!
//! Exact work runs on [`BigRational`]; sampling and plotting paths use `f64`
//! (or `f32`) through the same generic functions.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Num + Signed + PartialOrd + Clone + Debug + FromPrimitive {
    /// Converts the exact ratio `num / den` into this scalar type.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn from_count(v: u64) -> Self {
        <Self as FromPrimitive>::from_u64(v).expect("u64 converts into every scalar")
    }

    fn from_rational(q: &BigRational) -> Self {
        Self::from_ratio(q.numer(), q.denom())
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
                BigRational::new(num.clone(), den.clone()).to_f64().unwrap_or(f64::NAN) as $t
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// `base^exp` as an exact unsigned integer.
pub fn upow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

/// `base^exp` as an exact signed integer.
pub fn ipow(base: u64, exp: u64) -> BigInt {
    BigInt::from(upow(base, exp))
}

/// `1 / base^exp` as an exact rational.
pub fn inv_pow(base: u64, exp: u64) -> BigRational {
    BigRational::new(BigInt::one(), ipow(base, exp))
}

/// Formats an exact rational as `p/q` (or `p` when the denominator is 1).
pub fn fmt_ratio(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, `p` or a plain decimal such as `0.125` into an exact rational.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if neg {
            num = -num;
        }
        return Some(BigRational::new(num, ipow(10, frac.len() as u64)));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Exact decimal rendering of `q` with `places` digits after the point,
/// rounded half away from zero.
pub fn fixed_decimal(q: &BigRational, places: u32) -> String {
    let scale = ipow(10, u64::from(places));
    let scaled = q * BigRational::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let two = BigInt::from(2);
    let rounded = (abs.numer() * &two + abs.denom()) / (abs.denom() * &two);
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if neg && !rounded.is_zero() { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn ratio_round_trip() {
        for s in ["3/7", "-5/2", "12", "0"] {
            assert_eq!(fmt_ratio(&parse_ratio(s).unwrap()), s);
        }
        assert_eq!(parse_ratio("0.125"), Some(q(1, 8)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("abc"), None);
    }

    #[test]
    fn fixed_decimal_rounds_half_up() {
        assert_eq!(fixed_decimal(&q(1, 8), 2), "0.13");
        assert_eq!(fixed_decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(fixed_decimal(&q(-1, 3), 1), "-0.3");
        assert_eq!(fixed_decimal(&q(5, 1), 0), "5");
    }

    #[test]
    fn scalars_agree_on_ratios() {
        let (n, d) = (BigInt::from(3), BigInt::from(8));
        assert_eq!(<f64 as Scalar>::from_ratio(&n, &d), 0.375);
        assert_eq!(<f32 as Scalar>::from_ratio(&n, &d), 0.375f32);
        assert_eq!(BigRational::from_ratio(&n, &d), q(3, 8));
    }
}
