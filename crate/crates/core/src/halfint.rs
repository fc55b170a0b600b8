//! Exact half-integer quantum numbers.
//!
//! Spins and magnetic numbers are stored as twice their value so that parity
//! checks, hashing and equality are exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInt { twice: 2 * value }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `m` is a valid magnetic number of spin `self`.
    pub const fn admits(self, m: HalfInt) -> bool {
        self.twice >= 0 && m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    pub fn check_magnetic(self, m: HalfInt) -> Result<()> {
        if self.admits(m) {
            Ok(())
        } else {
            Err(Error::InvalidMagnetic { j: self, m })
        }
    }

    /// Magnetic numbers `j, j-1, ..., -j` (the order used for dense matrices).
    pub fn magnetic_numbers(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.twice;
        (0..=j.max(-1)).map(move |a| HalfInt::from_twice(j - 2 * a))
    }

    /// Dimension `2j + 1` of the spin multiplet.
    pub fn multiplicity(self) -> usize {
        (self.twice + 1).max(0) as usize
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
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

    /// Accepts `"3/2"`, `"-1/2"`, `"2/2"` and decimals such as `"1.5"` or
    /// `"1.0"`. A bare integer is taken as the value itself (`"2"` is 2).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse half-integer from {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            let den: i32 = den.trim().parse().map_err(|_| bad())?;
            return match den {
                1 => Ok(HalfInt::from_int(num)),
                2 => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(v) = s.parse::<i32>() {
            return Ok(HalfInt::from_int(v));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
            return Err(bad());
        }
        Ok(HalfInt::from_twice(twice as i32))
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for HalfInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!("1".parse::<HalfInt>().unwrap(), HalfInt::from_twice(2));
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("4/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(4));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.25".parse::<HalfInt>().is_err());
        assert!("x".parse::<HalfInt>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for t in -7..=7 {
            let h = HalfInt::from_twice(t);
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
    }

    #[test]
    fn magnetic_validity() {
        let j = HalfInt::from_twice(3);
        assert!(j.admits(HalfInt::from_twice(-3)));
        assert!(j.admits(HalfInt::from_twice(1)));
        assert!(!j.admits(HalfInt::from_twice(2)));
        assert!(!j.admits(HalfInt::from_twice(5)));
        assert!(!HalfInt::from_twice(-1).admits(HalfInt::from_twice(-1)));
        let ms: Vec<i32> = j.magnetic_numbers().map(HalfInt::twice).collect();
        assert_eq!(ms, vec![3, 1, -1, -3]);
        assert_eq!(j.multiplicity(), 4);
    }
}
