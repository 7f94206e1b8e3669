//! Ordered bit sequences and their hex form.
//!
//! Hex encoding packs bits most-significant-first into bytes; a trailing
//! partial byte is zero-padded on the right.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-empty, fixed-length sequence of bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Empty("bit string"));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![false; len])
    }

    /// Builds a bit string from 0/1 byte values.
    pub fn from_binary(values: &[u8]) -> Result<Self> {
        let bits = values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > 64 {
            return Err(Error::InvalidParameter(format!("integer bit width must be in 1..=64, got {len}")));
        }
        Self::new((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..len).map(|_| rng.gen::<bool>()).collect())
    }

    /// Parses a hex string holding exactly `len` bits.
    pub fn from_hex(input: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(input.trim())
            .map_err(|e| Error::InvalidHex { input: input.to_string(), reason: e.to_string() })?;
        let needed = len.div_ceil(8);
        if bytes.len() != needed {
            return Err(Error::InvalidHex {
                input: input.to_string(),
                reason: format!("expected {needed} bytes for {len} bits, got {}", bytes.len()),
            });
        }
        let bits: Vec<bool> = (0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1).collect();
        let padding_set = (len..needed * 8).any(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1);
        if padding_set {
            return Err(Error::InvalidHex { input: input.to_string(), reason: "non-zero padding bits".into() });
        }
        Self::new(bits)
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (7 - i % 8);
            }
        }
        hex::encode(bytes)
    }

    /// Interprets the bits as an unsigned integer, most significant first.
    pub fn to_u64(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.bits
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| !b).collect() }
    }

    /// Copy of bits `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidParameter(format!("slice {start}..{end} out of range for {} bits", self.len())));
        }
        Self::new(self.bits[start..end].to_vec())
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(())
    }

    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.distance_unchecked(other))
    }

    pub fn matching_bits(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.len() - self.distance_unchecked(other))
    }

    pub(crate) fn distance_unchecked(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({})", self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<bool>> for BitString {
    type Error = Error;

    fn try_from(bits: Vec<bool>) -> Result<Self> {
        Self::new(bits)
    }
}

/// Serialized as `{"len": n, "hex": "..."}` so non-byte-aligned lengths survive.
impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            len: usize,
            hex: &'a str,
        }
        Repr { len: self.len(), hex: &self.to_hex() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            len: usize,
            hex: String,
        }
        let repr = Repr::deserialize(deserializer)?;
        BitString::from_hex(&repr.hex, repr.len).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(BitString::new(vec![]), Err(Error::Empty(_))));
        assert!(BitString::from_binary(&[0, 2]).is_err());
    }

    #[test]
    fn hex_is_msb_first_and_zero_padded() {
        let b = BitString::from_binary(&[1, 0, 1, 0, 0, 1, 0, 1, 1, 1]).unwrap();
        assert_eq!(b.to_hex(), "a5c0");
        assert_eq!(BitString::from_hex("a5c0", 10).unwrap(), b);
        assert!(BitString::from_hex("a5c1", 10).is_err());
        assert!(BitString::from_hex("a5", 10).is_err());
        assert!(BitString::from_hex("zz", 8).is_err());
    }

    #[test]
    fn integer_conversion() {
        let b = BitString::from_u64(0xA5A5, 16).unwrap();
        assert_eq!(b.to_hex(), "a5a5");
        assert_eq!(b.to_u64(), Some(0xA5A5));
        assert!(BitString::from_u64(1, 0).is_err());
    }

    #[test]
    fn distance_requires_equal_lengths() {
        let a = BitString::zeros(4).unwrap();
        let b = BitString::zeros(5).unwrap();
        assert!(matches!(a.hamming_distance(&b), Err(Error::LengthMismatch { expected: 4, actual: 5 })));
        assert_eq!(a.hamming_distance(&a.complement()).unwrap(), 4);
    }

    proptest! {
        #[test]
        fn hex_and_json_roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let b = BitString::new(bits).unwrap();
            prop_assert_eq!(&BitString::from_hex(&b.to_hex(), b.len()).unwrap(), &b);
            let json = serde_json::to_string(&b).unwrap();
            prop_assert_eq!(serde_json::from_str::<BitString>(&json).unwrap(), b);
        }
    }
}
