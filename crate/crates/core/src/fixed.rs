//! Fixed six-decimal numbers used for every cost and row count stored in a
//! trace.
//!
//! Planners work in `f64`; when a value is recorded it is rounded to six
//! decimal places and kept as an exact count of millionths. This makes
//! serialization byte-stable, round-trips exact, and sums over plan nodes
//! telescope without floating-point drift. Values can be astronomically
//! large (cartesian products of big relations), hence the big integer.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

const SCALE_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed6 {
    micros: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseFixedError(String);

impl Fixed6 {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Rounds to six decimal places. Non-finite inputs saturate to the
    /// largest finite `f64`.
    pub fn from_f64(value: f64) -> Self {
        let value = if value.is_nan() {
            0.0
        } else if value.is_infinite() {
            f64::MAX.copysign(value)
        } else {
            value
        };
        format!("{value:.SCALE_DIGITS$}")
            .parse()
            .expect("formatted f64 is a valid decimal")
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string()
            .parse()
            .expect("decimal text parses as f64")
    }

    pub fn micros(&self) -> &BigInt {
        &self.micros
    }

    pub fn is_negative(&self) -> bool {
        self.micros < BigInt::default()
    }
}

impl From<f64> for Fixed6 {
    fn from(value: f64) -> Self {
        Self::from_f64(value)
    }
}

impl fmt::Display for Fixed6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.micros.magnitude().to_string();
        let sign = if self.is_negative() { "-" } else { "" };
        let padded = format!("{digits:0>width$}", width = SCALE_DIGITS + 1);
        let (int, frac) = padded.split_at(padded.len() - SCALE_DIGITS);
        write!(f, "{sign}{int}.{frac}")
    }
}

impl FromStr for Fixed6 {
    type Err = ParseFixedError;

    /// Accepts `[-]digits[.digits]` with at most six fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseFixedError(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if int.is_empty() || !all_digits(int) || !all_digits(frac) || frac.len() > SCALE_DIGITS {
            return Err(err());
        }
        if body.ends_with('.') {
            return Err(err());
        }
        let text = format!("{int}{frac:0<SCALE_DIGITS$}");
        let mut micros: BigInt = text.parse().map_err(|_| err())?;
        if negative {
            micros = -micros;
        }
        Ok(Self { micros })
    }
}

impl Add for Fixed6 {
    type Output = Fixed6;
    fn add(self, rhs: Self) -> Self {
        Self {
            micros: self.micros + rhs.micros,
        }
    }
}

impl<'a> Add<&'a Fixed6> for &'a Fixed6 {
    type Output = Fixed6;
    fn add(self, rhs: &Fixed6) -> Fixed6 {
        Fixed6 {
            micros: &self.micros + &rhs.micros,
        }
    }
}

impl Sub for Fixed6 {
    type Output = Fixed6;
    fn sub(self, rhs: Self) -> Self {
        Self {
            micros: self.micros - rhs.micros,
        }
    }
}

impl<'a> Sub<&'a Fixed6> for &'a Fixed6 {
    type Output = Fixed6;
    fn sub(self, rhs: &Fixed6) -> Fixed6 {
        Fixed6 {
            micros: &self.micros - &rhs.micros,
        }
    }
}

impl Sum for Fixed6 {
    fn sum<I: Iterator<Item = Fixed6>>(iter: I) -> Self {
        iter.fold(Fixed6::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Fixed6> for Fixed6 {
    fn sum<I: Iterator<Item = &'a Fixed6>>(iter: I) -> Self {
        iter.fold(Fixed6::zero(), |acc, x| &acc + x)
    }
}

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fixed6 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Box<RawValue> = Deserialize::deserialize(deserializer)?;
        raw.get().parse().map_err(D::Error::custom)
    }
}

/// Serde adapter writing an `f64` field as a six-decimal JSON number.
pub mod decimal6 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Fixed6;

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        Fixed6::from_f64(*value).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        f64::deserialize(deserializer)
    }
}

/// Rounds an `f64` to the value it will have after a six-decimal
/// serialize/parse cycle.
pub fn round6(value: f64) -> f64 {
    Fixed6::from_f64(value).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_with_six_digits() {
        assert_eq!(Fixed6::from_f64(110.0).to_string(), "110.000000");
        assert_eq!(Fixed6::from_f64(0.0025).to_string(), "0.002500");
        assert_eq!(Fixed6::from_f64(-1.5).to_string(), "-1.500000");
        assert_eq!(Fixed6::from_f64(0.0).to_string(), "0.000000");
        assert_eq!(Fixed6::from_f64(1e-7).to_string(), "0.000000");
    }

    #[test]
    fn parses_short_and_rejects_malformed() {
        assert_eq!("8.3".parse::<Fixed6>().unwrap(), Fixed6::from_f64(8.3));
        assert_eq!("42".parse::<Fixed6>().unwrap().to_string(), "42.000000");
        for bad in ["", "1e5", "1.", ".5", "1.1234567", "abc", "--1", "1.2.3"] {
            assert!(bad.parse::<Fixed6>().is_err(), "{bad}");
        }
    }

    #[test]
    fn huge_values_survive() {
        let big = 8.0e94_f64;
        let fixed = Fixed6::from_f64(big);
        assert_eq!(fixed.to_f64(), big);
        assert_eq!(Fixed6::from_f64(f64::INFINITY).to_f64(), f64::MAX);
    }

    #[test]
    fn json_round_trip() {
        let v = Fixed6::from_f64(357.5);
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, "357.500000");
        assert_eq!(serde_json::from_str::<Fixed6>(&text).unwrap(), v);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(x in -1.0e12f64..1.0e12) {
            let v = Fixed6::from_f64(x);
            prop_assert_eq!(v.to_string().parse::<Fixed6>().unwrap(), v.clone());
            prop_assert_eq!(Fixed6::from_f64(v.to_f64()), v);
        }

        #[test]
        fn rounding_is_monotone(a in 0.0f64..1.0e9, b in 0.0f64..1.0e9) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(Fixed6::from_f64(lo) <= Fixed6::from_f64(hi));
        }
    }
}
