//! Finite binary strings, the length-lexicographic numbering of `{0,1}*`,
//! and Cantor pairing.
//!
//! Strings are the common currency of the crate: programs, machine outputs
//! and initial segments of the constructed set are all [`BitString`]s. When
//! a number has to be treated as a string (or back) the canonical
//! identification is [`nth_string`] / [`BitString::index`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseBitsError;

/// A finite word over `{0,1}`.
///
/// The derived `Ord` is the lexicographic order (a proper prefix sorts
/// first). Use [`BitString::cmp_length_lex`] or [`LengthLex`] for the
/// length-lexicographic order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub const fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// Big-endian binary digits of `value`, exactly `width` of them.
    pub fn from_uint(value: u64, width: usize) -> Self {
        debug_assert!(width >= 64 || value >> width == 0);
        let bits = (0..width)
            .rev()
            .map(|k| k < 64 && (value >> k) & 1 == 1)
            .collect();
        BitString { bits }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn as_bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.bits[i] = bit;
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// `self↾n`: the first `min(n, len)` bits.
    pub fn prefix(&self, n: usize) -> BitString {
        BitString {
            bits: self.bits[..n.min(self.len())].to_vec(),
        }
    }

    /// Bits `start..` (empty if `start >= len`).
    pub fn suffix_from(&self, start: usize) -> BitString {
        BitString {
            bits: self.bits[start.min(self.len())..].to_vec(),
        }
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString {
            bits: self.bits[start..end].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        is_prefix(self, other)
    }

    pub fn count_leading_zeros(&self) -> usize {
        self.bits.iter().take_while(|b| !**b).count()
    }

    /// Position of this string in the length-lexicographic enumeration,
    /// the inverse of [`nth_string`]. `None` when the index overflows `u64`.
    pub fn index(&self) -> Option<u64> {
        if self.len() >= 64 {
            return None;
        }
        let mut v: u64 = 1;
        for &b in &self.bits {
            v = (v << 1) | b as u64;
        }
        Some(v - 1)
    }

    pub fn cmp_length_lex(&self, other: &BitString) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }

    /// All strings of exactly `len` bits in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "cannot enumerate strings of length {len}");
        (0..1u64 << len).map(move |v| BitString::from_uint(v, len))
    }

    /// All strings of length at most `max_len`, in length-lex order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }
}

/// Newtype that orders strings length-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LengthLex(pub BitString);

impl PartialOrd for LengthLex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LengthLex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_length_lex(&other.0)
    }
}

/// The `n`th string of `{0,1}*` in length-lex order: write `n+1` in binary
/// and drop the leading one.
pub fn nth_string(n: u64) -> BitString {
    let m = n as u128 + 1;
    let width = 127 - m.leading_zeros() as usize;
    let bits = (0..width).rev().map(|k| (m >> k) & 1 == 1).collect();
    BitString { bits }
}

pub fn is_prefix(a: &BitString, b: &BitString) -> bool {
    a.len() <= b.len() && b.bits[..a.len()] == a.bits[..]
}

/// Cantor pairing `⟨n,s⟩ = (n+s)(n+s+1)/2 + s`. `None` on `u64` overflow.
pub fn pair(n: u64, s: u64) -> Option<u64> {
    let t = (n as u128) + (s as u128);
    let v = t * (t + 1) / 2 + s as u128;
    u64::try_from(v).ok()
}

pub fn unpair(code: u64) -> (u64, u64) {
    // Largest t with t(t+1)/2 <= code.
    let c = code as u128;
    let mut t = (((8 * c + 1) as f64).sqrt() as u128).saturating_sub(1) / 2;
    while (t + 1) * (t + 2) / 2 <= c {
        t += 1;
    }
    while t * (t + 1) / 2 > c {
        t -= 1;
    }
    let s = c - t * (t + 1) / 2;
    ((t - s) as u64, s as u64)
}

/// `⌊log₂ n⌋`, with `log 0 = 0`.
pub fn floor_log2(n: u64) -> u32 {
    if n == 0 {
        0
    } else {
        63 - n.leading_zeros()
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

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(pos, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitsError { pos, found: other }),
            })
            .collect::<Result<_, _>>()?;
        Ok(BitString { bits })
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

/// Shorthand for tests and fixtures: `bs("0110")`.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("literal bit string")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nth_string_examples() {
        assert_eq!(nth_string(0), BitString::empty());
        assert_eq!(nth_string(1), bs("0"));
        assert_eq!(nth_string(2), bs("1"));
        assert_eq!(nth_string(3), bs("00"));
        assert_eq!(nth_string(6), bs("11"));
        assert_eq!(nth_string(7), bs("000"));
    }

    #[test]
    fn nth_string_is_order_preserving_bijection() {
        let mut prev: Option<BitString> = None;
        for n in 0..(1u64 << 16) {
            let s = nth_string(n);
            assert_eq!(s.index(), Some(n));
            if let Some(p) = &prev {
                assert_eq!(p.cmp_length_lex(&s), Ordering::Less, "n = {n}");
            }
            prev = Some(s);
        }
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair(0, 0), Some(0));
        assert_eq!(pair(1, 2), Some(8));
        for n in 0..100 {
            for s in 0..100 {
                assert_eq!(unpair(pair(n, s).unwrap()), (n, s));
            }
        }
    }

    #[test]
    fn pair_grid_roundtrip_both_ways() {
        for n in 0..256 {
            for s in 0..256 {
                let c = pair(n, s).unwrap();
                assert_eq!(unpair(c), (n, s));
                assert!(pair(n + 1, s).unwrap() > c);
                assert!(pair(n, s + 1).unwrap() > c);
            }
        }
        for c in 0..(256 * 257 / 2) {
            let (n, s) = unpair(c);
            assert_eq!(pair(n, s), Some(c));
        }
    }

    #[test]
    fn pair_dominates_string_length() {
        for n in 0..(1u64 << 12) {
            assert!(pair(n, 0).unwrap() >= nth_string(n).len() as u64);
        }
    }

    #[test]
    fn prefix_examples() {
        assert!(is_prefix(&BitString::empty(), &bs("01")));
        assert!(is_prefix(&bs("01"), &bs("01")));
        assert!(!is_prefix(&bs("10"), &bs("01")));
        assert!(!is_prefix(&bs("010"), &bs("01")));
    }

    #[test]
    fn parse_rejects_other_chars() {
        let err = "01x".parse::<BitString>().unwrap_err();
        assert_eq!(err.pos, 2);
    }

    #[test]
    fn floor_log_matches_definition() {
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(4), 2);
        assert_eq!(floor_log2(7), 2);
        assert_eq!(floor_log2(32), 5);
    }

    proptest! {
        #[test]
        fn unpair_inverts_pair(n in 0u64..1 << 30, s in 0u64..1 << 30) {
            prop_assert_eq!(unpair(pair(n, s).unwrap()), (n, s));
        }

        #[test]
        fn text_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..80)) {
            let s = BitString::from_bits(bits);
            prop_assert_eq!(s.to_string().parse::<BitString>().unwrap(), s);
        }
    }
}
