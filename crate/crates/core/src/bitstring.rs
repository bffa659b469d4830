//! Fixed-length bit strings, the search space of the EA.
//!
//! Bit `0` is the leftmost character of the textual form, so `"110"` has
//! bits `1, 1, 0` at positions `0, 1, 2`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self::zeros(len);
        for w in &mut x.words {
            *w = u64::MAX;
        }
        x.clear_tail();
        x
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            x.set(i, b);
        }
        x
    }

    /// Bits of `value`, most significant first, as a string of length `len`.
    ///
    /// Used to enumerate the full search space: index `v` of `0..2^len` maps
    /// to the string whose textual form is the binary expansion of `v`.
    pub fn from_index(value: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        let mut x = Self::zeros(len);
        for i in 0..len {
            x.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        x
    }

    pub fn to_index(&self) -> u64 {
        debug_assert!(self.len <= 64);
        (0..self.len).fold(0, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    /// Uniformly random string: every bit is 1 independently with probability 1/2.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter(
                "bit string length must be at least 1".into(),
            ));
        }
        let mut x = Self::zeros(len);
        for w in &mut x.words {
            *w = rng.random();
        }
        x.clear_tail();
        Ok(x)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Length of the maximal all-ones prefix.
    pub fn leading_ones(&self) -> usize {
        let mut total = 0;
        for w in &self.words {
            let run = w.trailing_ones() as usize;
            total += run;
            if run < WORD {
                break;
            }
        }
        total.min(self.len)
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut x = Self::zeros(self.len + other.len);
        for (i, b) in self.iter().chain(other.iter()).enumerate() {
            if b {
                x.set(i, true);
            }
        }
        x
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bit strings contain only 0 and 1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
