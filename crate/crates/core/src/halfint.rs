//! Exact half-integers for spins, magnetic quantum numbers and register outcomes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A value in `ℤ/2`, stored as twice its value.
///
/// `HalfInt::from_twice(3)` is `3/2`; `HalfInt::from_int(-1)` is `-1`.
/// Renders as an exact fraction (`"1/2"`, `"-3/2"`, `"2"`) and parses the
/// same forms back.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt { twice: 2 * value }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// The integer value, if there is one.
    pub fn to_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// `true` when `self` is a valid projection `m` of spin `spin`:
    /// `|m| ≤ s` and `s − m` integral.
    pub fn is_projection_of(self, spin: HalfInt) -> bool {
        spin.twice >= 0 && self.twice.abs() <= spin.twice && (spin.twice - self.twice) % 2 == 0
    }

    /// Projections `s, s−1, …, −s` of spin `self`, in that order.
    pub fn projections(self) -> impl ExactSizeIterator<Item = HalfInt> + Clone {
        let top = self.twice;
        let count = if top < 0 { 0 } else { top as usize + 1 };
        (0..count).map(move |k| HalfInt::from_twice(top - 2 * k as i64))
    }

    /// Number of projections `2s + 1`, or zero for a negative value.
    pub fn multiplicity(self) -> usize {
        if self.twice < 0 {
            0
        } else {
            self.twice as usize + 1
        }
    }
}

impl Ord for HalfInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.twice.cmp(&other.twice)
    }
}

impl PartialOrd for HalfInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"n"` or `"n/2"` for integer `n`; nothing else.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidArgument(format!("`{text}` is not an integer or half-integer like \"3/2\""));
        let text = text.trim();
        match text.split_once('/') {
            Some((num, "2")) => num.trim().parse::<i64>().map(HalfInt::from_twice).map_err(|_| bad()),
            Some(_) => Err(bad()),
            None => text
                .parse::<i64>()
                .ok()
                .and_then(|v| v.checked_mul(2))
                .map(HalfInt::from_twice)
                .ok_or_else(bad),
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_exact_fractions() {
        assert_eq!(HalfInt::from_twice(1).to_string(), "1/2");
        assert_eq!(HalfInt::from_twice(-3).to_string(), "-3/2");
        assert_eq!(HalfInt::from_twice(4).to_string(), "2");
        assert_eq!(HalfInt::ZERO.to_string(), "0");
    }

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!("1/2".parse::<HalfInt>().unwrap(), HalfInt::HALF);
        assert_eq!("-5/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-5));
        assert_eq!("3".parse::<HalfInt>().unwrap(), HalfInt::from_int(3));
        // n/2 with even n is still the integer n/2
        assert_eq!("4/2".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
    }

    #[test]
    fn rejects_non_half_integers() {
        for bad in ["1.5", "1/3", "", "x", "1/2/2", "0.5"] {
            assert!(bad.parse::<HalfInt>().is_err(), "{bad}");
        }
    }

    #[test]
    fn projections_descend_from_s() {
        let s = HalfInt::from_twice(3);
        let ms: Vec<String> = s.projections().map(|m| m.to_string()).collect();
        assert_eq!(ms, ["3/2", "1/2", "-1/2", "-3/2"]);
        assert!(s.projections().all(|m| m.is_projection_of(s)));
        assert!(!HalfInt::from_int(1).is_projection_of(s));
        assert!(!HalfInt::from_twice(5).is_projection_of(s));
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(twice in -1000i64..1000) {
            let h = HalfInt::from_twice(twice);
            prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
    }
}
