//! Finite binary strings and finite prefix-free sets (cylinder unions).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dyadic::Dyadic;

/// A finite binary string. Ordered by length first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinString {
    bits: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid binary string {0:?}: only '0' and '1' are allowed")]
pub struct BinStringParseError(pub String);

impl BinString {
    pub fn empty() -> Self {
        BinString { bits: Vec::new() }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BinString {
            bits: bits.into_iter().collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        BinString {
            bits: vec![false; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        BinString { bits: vec![true; n] }
    }

    /// The `len`-bit big-endian representation of `value` (which must fit).
    pub fn from_index(value: u64, len: usize) -> Self {
        BinString {
            bits: (0..len).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect(),
        }
    }

    pub(crate) fn from_biguint(value: &BigUint, len: usize) -> Self {
        BinString {
            bits: (0..len).rev().map(|i| value.bit(i as u64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn last(&self) -> Option<bool> {
        self.bits.last().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(bit);
        BinString { bits }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.bits.is_empty() {
            None
        } else {
            Some(self.prefix(self.bits.len() - 1))
        }
    }

    pub fn sibling(&self) -> Option<Self> {
        let last = self.last()?;
        let mut bits = self.bits.clone();
        *bits.last_mut().unwrap() = !last;
        Some(BinString { bits })
    }

    pub fn prefix(&self, n: usize) -> Self {
        BinString {
            bits: self.bits[..n.min(self.bits.len())].to_vec(),
        }
    }

    pub fn concat(&self, other: &BinString) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BinString { bits }
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &BinString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn is_proper_prefix_of(&self, other: &BinString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BinString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Number of leading `1` bits, i.e. the largest `j` with `1^j ⪯ self`.
    pub fn leading_ones(&self) -> usize {
        self.bits.iter().take_while(|&&b| b).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// All prefixes, shortest first, ending with `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BinString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }

    /// The value of the bits read as a big-endian integer (length must be below 64).
    pub fn index_value(&self) -> u64 {
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Position in the breadth-first, row-major order `ε, 0, 1, 00, 01, ...`.
    pub fn table_index(&self) -> usize {
        ((1usize << self.len()) - 1) + self.index_value() as usize
    }

    pub fn from_table_index(index: usize) -> Self {
        let len = (usize::BITS - (index + 1).leading_zeros() - 1) as usize;
        let value = (index + 1 - (1usize << len)) as u64;
        BinString::from_index(value, len)
    }

    /// All strings of length exactly `n`, lexicographically.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = BinString> {
        (0..(1u64 << n)).map(move |v| BinString::from_index(v, n))
    }

    /// All strings of length at most `n`, in table order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = BinString> {
        (0..=n).flat_map(BinString::all_of_length)
    }
}

impl Ord for BinString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BinString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            fmt::Display::fmt(self, f)
        }
    }
}

impl FromStr for BinString {
    type Err = BinStringParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BinStringParseError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| BinString { bits })
    }
}

impl Serialize for BinString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite antichain under the prefix order, denoting the open set `⟦E⟧`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<BinString>", into = "Vec<BinString>")]
pub struct PrefixFreeStringSet {
    members: BTreeSet<BinString>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("string set is not prefix-free: {shorter:?} is a prefix of {longer:?}")]
pub struct NotPrefixFree {
    pub shorter: BinString,
    pub longer: BinString,
}

impl PrefixFreeStringSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(s: BinString) -> Self {
        PrefixFreeStringSet {
            members: BTreeSet::from([s]),
        }
    }

    /// Keep only the prefix-minimal members; the denoted open set is unchanged.
    pub fn normalize<I>(strings: I) -> Self
    where
        I: IntoIterator,
        I::Item: std::borrow::Borrow<BinString>,
    {
        let mut sorted: Vec<BinString> = strings
            .into_iter()
            .map(|s| std::borrow::Borrow::<BinString>::borrow(&s).clone())
            .collect();
        sorted.sort();
        sorted.dedup();
        let mut members = BTreeSet::new();
        for s in sorted {
            // shorter strings come first, so any covering member is already present
            if !s.prefixes().any(|p| members.contains(&p)) {
                members.insert(s);
            }
        }
        PrefixFreeStringSet { members }
    }

    pub fn from_antichain(strings: impl IntoIterator<Item = BinString>) -> Result<Self, NotPrefixFree> {
        let members: BTreeSet<BinString> = strings.into_iter().collect();
        for s in &members {
            for p in s.prefixes().take(s.len()) {
                if members.contains(&p) {
                    return Err(NotPrefixFree {
                        shorter: p,
                        longer: s.clone(),
                    });
                }
            }
        }
        Ok(PrefixFreeStringSet { members })
    }

    pub fn iter(&self) -> impl Iterator<Item = &BinString> + '_ {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &BinString) -> bool {
        self.members.contains(s)
    }

    /// Whether `⟦x⟧ ⊆ ⟦self⟧`, i.e. some member is a prefix of `x`.
    pub fn covers(&self, x: &BinString) -> bool {
        x.prefixes().any(|p| self.members.contains(&p))
    }

    pub fn max_len(&self) -> usize {
        self.members.iter().map(BinString::len).max().unwrap_or(0)
    }

    /// `λ(⟦self⟧) = Σ 2^-|σ|`.
    pub fn lebesgue(&self) -> Dyadic {
        let Some(deepest) = self.members.iter().map(BinString::len).max() else {
            return Dyadic::zero();
        };
        let total: BigUint = self
            .members
            .iter()
            .map(|s| BigUint::from(1u32) << (deepest - s.len()))
            .sum();
        Dyadic::new(total, deepest as u32)
    }

    /// `E^m`: every member refined by exactly `m` further bits.
    pub fn extend(&self, m: usize) -> Self {
        let members = self
            .members
            .iter()
            .flat_map(|s| BinString::all_of_length(m).map(move |w| s.concat(&w)))
            .collect();
        PrefixFreeStringSet { members }
    }

    /// A prefix-free presentation of `⟦self⟧ ∩ ⟦other⟧`.
    pub fn intersect(&self, other: &PrefixFreeStringSet) -> Self {
        let mut out = BTreeSet::new();
        for a in &self.members {
            for b in &other.members {
                if a.is_prefix_of(b) {
                    out.insert(b.clone());
                } else if b.is_prefix_of(a) {
                    out.insert(a.clone());
                }
            }
        }
        // meets of two antichains form an antichain
        PrefixFreeStringSet { members: out }
    }

    pub fn union(&self, other: &PrefixFreeStringSet) -> Self {
        Self::normalize(self.members.iter().chain(other.members.iter()))
    }

    /// Members extending `prefix`.
    pub fn filter_extending(&self, prefix: &BinString) -> Self {
        PrefixFreeStringSet {
            members: self
                .members
                .iter()
                .filter(|s| prefix.is_prefix_of(s))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Debug for PrefixFreeStringSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl TryFrom<Vec<BinString>> for PrefixFreeStringSet {
    type Error = NotPrefixFree;

    fn try_from(value: Vec<BinString>) -> Result<Self, Self::Error> {
        Self::from_antichain(value)
    }
}

impl From<PrefixFreeStringSet> for Vec<BinString> {
    fn from(value: PrefixFreeStringSet) -> Self {
        value.members.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a PrefixFreeStringSet {
    type Item = &'a BinString;
    type IntoIter = std::collections::btree_set::Iter<'a, BinString>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

pub fn prefix_free_normalize<I>(strings: I) -> PrefixFreeStringSet
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<BinString>,
{
    PrefixFreeStringSet::normalize(strings)
}

pub fn lebesgue_of_set<I>(strings: I) -> Dyadic
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<BinString>,
{
    PrefixFreeStringSet::normalize(strings).lebesgue()
}

pub fn extend_set(set: &PrefixFreeStringSet, m: usize) -> PrefixFreeStringSet {
    set.extend(m)
}
