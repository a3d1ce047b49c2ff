//! Binary decision vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// An m-dimensional 0/1 decision.
///
/// Ordering is lexicographic with entry 0 most significant, so the
/// enumeration order of [`BinaryVector::from_mask`] matches `Ord`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BinaryVector(Vec<bool>);

impl BinaryVector {
    pub fn zeros(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![true; m])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Builds a vector from integer entries, rejecting anything but 0 and 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::Decision {
                    index: i,
                    value: f64::from(b),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Builds a vector from real entries that must be exactly 0.0 or 1.0.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 0.0 {
                    Ok(false)
                } else if v == 1.0 {
                    Ok(true)
                } else {
                    Err(Error::Decision { index: i, value: v })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Decodes `mask` with entry 0 stored in bit `m - 1`.
    pub fn from_mask(mask: u64, m: usize) -> Self {
        Self((0..m).map(|i| (mask >> (m - 1 - i)) & 1 == 1).collect())
    }

    /// Inverse of [`BinaryVector::from_mask`]. Panics above 64 entries.
    pub fn to_mask(&self) -> u64 {
        assert!(self.0.len() <= 64, "mask encoding holds at most 64 entries");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Indicator vector of `members` (0-based indices).
    pub fn indicator(m: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(m);
        for i in members {
            v.0[i] = true;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut v = self.clone();
        v.0[i] = !v.0[i];
        v
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.0
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// `cᵀα`
    pub fn dot(&self, c: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(c)
            .filter(|(&b, _)| b)
            .map(|(_, &ci)| ci)
            .sum()
    }

    /// `true` if every one of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Decision {
                    index: i,
                    value: f64::NAN,
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl From<Vec<bool>> for BinaryVector {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}
