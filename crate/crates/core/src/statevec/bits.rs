use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Ordered bits `b_1 ... b_N`; `b_1` is the most significant bit of the
/// basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit string {0:?}: expected only '0' and '1'")]
pub struct ParseBitsError(String);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `len` bits of `index`, most significant first.
    pub fn from_index(index: usize, len: usize) -> Self {
        Self((0..len).map(|i| (index >> (len - 1 - i)) & 1 == 1).collect())
    }

    /// `sum_i b_i 2^(N-i)`.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first() {
        assert_eq!("0011".parse::<BitString>().unwrap().index(), 3);
        assert_eq!(BitString::from_index(4, 3).to_string(), "100");
        assert!("01a".parse::<BitString>().is_err());
    }

    proptest! {
        #[test]
        fn index_roundtrip(len in 1usize..16, raw in any::<usize>()) {
            let index = raw % (1 << len);
            let bits = BitString::from_index(index, len);
            prop_assert_eq!(bits.index(), index);
            prop_assert_eq!(bits.to_string().parse::<BitString>().unwrap(), bits.clone());
            prop_assert_eq!(bits.complement().index(), (1 << len) - 1 - index);
        }
    }
}
