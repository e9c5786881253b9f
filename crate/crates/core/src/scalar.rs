//! Exact scalar types used for payoffs, utilities and discount factors.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};

/// An exact ordered field element.
///
/// Model checking compares accumulated utilities for equality and uses them
/// as node identities, so the scalar must be hashable and totally ordered.
/// Every `Ratio<T>` over a signed integer type qualifies; floating point
/// types do not.
pub trait Scalar: Clone + Ord + Hash + Debug + Display + Num + Signed + Send + Sync + 'static {
    fn from_int(value: i64) -> Self;

    /// Parses `"p"`, `"-p"` or `"p/q"`. Returns `None` on malformed input or a
    /// zero denominator.
    fn parse_rational(text: &str) -> Option<Self>;

    /// Returns `true` if the value has denominator one.
    fn is_integral(&self) -> bool;

    fn pow_u(&self, exp: u64) -> Self {
        let mut base = self.clone();
        let mut exp = exp;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Midpoint of two values, used by interval decomposition.
    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / Self::from_int(2)
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + Hash + Debug + Display + FromStr + FromPrimitive + Send + Sync + 'static,
{
    fn from_int(value: i64) -> Self {
        Ratio::from_integer(T::from_i64(value).expect("integer out of range for scalar type"))
    }

    fn parse_rational(text: &str) -> Option<Self> {
        let text = text.trim();
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        if !is_integer_literal(num, true) || !is_integer_literal(den, false) {
            return None;
        }
        let num = T::from_str(num).ok()?;
        let den = T::from_str(den).ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Ratio::new(num, den))
    }

    fn is_integral(&self) -> bool {
        self.denom().is_one()
    }
}

fn is_integer_literal(text: &str, allow_sign: bool) -> bool {
    let digits = match text.strip_prefix('-') {
        Some(rest) if allow_sign => rest,
        Some(_) => return false,
        None => text,
    };
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    type Q = Ratio<BigInt>;

    #[test]
    fn parses_canonical_forms() {
        assert_eq!(Q::parse_rational("3"), Some(Q::from_int(3)));
        assert_eq!(Q::parse_rational("-6/4"), Some(Q::new((-3).into(), 2.into())));
        assert_eq!(Q::parse_rational("0/5"), Some(Q::zero()));
        assert_eq!(Q::parse_rational("1/0"), None);
        assert_eq!(Q::parse_rational("1/-2"), None);
        assert_eq!(Q::parse_rational("1.5"), None);
        assert_eq!(Q::parse_rational(""), None);
    }

    #[test]
    fn display_is_reduced() {
        let q = Q::parse_rational("4/8").unwrap();
        assert_eq!(q.to_string(), "1/2");
        assert_eq!(Q::parse_rational("-10/5").unwrap().to_string(), "-2");
    }

    #[test]
    fn pow_matches_repeated_product() {
        let half = Q::parse_rational("1/2").unwrap();
        assert_eq!(half.pow_u(0), Q::one());
        assert_eq!(half.pow_u(5), Q::parse_rational("1/32").unwrap());
        let small: Ratio<i64> = Ratio::parse_rational("-2/3").unwrap();
        assert_eq!(small.pow_u(3), Ratio::new(-8, 27));
    }
}
