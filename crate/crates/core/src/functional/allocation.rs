//! Interval allocation: a functional whose induced semi-measure is a given one.
//!
//! Inputs are identified with integer units of `2^{-G}` in `[0, 2^G)`. Each
//! output `τ` owns a set `A(τ)` of units with `|A(τ)| = ρ(τ)·2^G`; children
//! take units from their parent, siblings stay disjoint, and fresh units are
//! always the leftmost free ones.

use thiserror::Error;

use super::{MonotoneFunctional, Pair};
use crate::dyadic::Dyadic;
use crate::staged::StagedSemiMeasure;
use crate::strings::BinString;

pub const DEFAULT_GRANULARITY_CAP: u32 = 16;

/// Largest granularity the `u64` unit arithmetic supports.
const HARD_GRANULARITY_LIMIT: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocationConfig {
    /// Largest `G` such that all values must be multiples of `2^{-G}`.
    pub granularity_cap: u32,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig {
            granularity_cap: DEFAULT_GRANULARITY_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("values need granularity 2^-{needed}, beyond the cap 2^-{cap}")]
    GranularityExceeded { needed: u32, cap: u32 },
    #[error("granularity cap {0} exceeds the supported maximum of 62")]
    CapTooLarge(u32),
    #[error("value at {node:?} decreases at stage {stage}")]
    Decreasing { node: BinString, stage: u32 },
    #[error("no room left to allocate mass for {node:?} at stage {stage}")]
    Overflow { node: BinString, stage: u32 },
}

type Intervals = Vec<(u64, u64)>;

fn measure(set: &Intervals) -> u64 {
    set.iter().map(|(a, b)| b - a).sum()
}

/// `a \ b` for sorted disjoint half-open interval lists.
fn difference(a: &Intervals, b: &Intervals) -> Intervals {
    let mut out = Vec::new();
    let mut j = 0;
    for &(mut lo, hi) in a {
        while j < b.len() && b[j].1 <= lo {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].0 < hi {
            if b[k].0 > lo {
                out.push((lo, b[k].0));
            }
            lo = lo.max(b[k].1);
            k += 1;
        }
        if lo < hi {
            out.push((lo, hi));
        }
    }
    out
}

fn union(a: &Intervals, b: &Intervals) -> Intervals {
    let mut all: Intervals = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    let mut out: Intervals = Vec::with_capacity(all.len());
    for (lo, hi) in all {
        match out.last_mut() {
            Some(last) if last.1 >= lo => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// The leftmost `units` units of `free`, if there are that many.
fn take_leftmost(free: &Intervals, mut units: u64) -> Option<Intervals> {
    let mut out = Vec::new();
    for &(lo, hi) in free {
        if units == 0 {
            break;
        }
        let take = units.min(hi - lo);
        out.push((lo, lo + take));
        units -= take;
    }
    (units == 0).then_some(out)
}

/// Split `[lo, hi)` into maximal aligned blocks, each a cylinder of length `G - j`.
fn aligned_blocks(lo: u64, hi: u64, granularity: u32) -> Vec<BinString> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let mut j = if a == 0 { granularity } else { a.trailing_zeros().min(granularity) };
        while a + (1u64 << j) > hi {
            j -= 1;
        }
        out.push(BinString::from_index(a >> j, (granularity - j) as usize));
        a += 1u64 << j;
    }
    out
}

/// Build `Φ` with `λ_Φ = ρ_t` on strings of length `≤ depth` at every stage `t ≤ s`.
pub fn from_semimeasure(
    rho: &dyn StagedSemiMeasure<Dyadic>,
    s: u32,
    depth: u32,
    config: &AllocationConfig,
) -> Result<MonotoneFunctional, AllocationError> {
    if config.granularity_cap > HARD_GRANULARITY_LIMIT {
        return Err(AllocationError::CapTooLarge(config.granularity_cap));
    }
    let tables: Vec<Vec<Dyadic>> = (0..=s).map(|t| rho.stage_at(t).table(depth)).collect();
    let granularity = tables
        .iter()
        .flatten()
        .map(Dyadic::exponent)
        .max()
        .unwrap_or(0);
    if granularity > config.granularity_cap {
        return Err(AllocationError::GranularityExceeded {
            needed: granularity,
            cap: config.granularity_cap,
        });
    }
    let universe: Intervals = vec![(0, 1u64 << granularity)];
    let units_of = |v: &Dyadic| -> Option<u64> {
        let n = v.numerator() << (granularity - v.exponent());
        u64::try_from(n).ok()
    };

    let mut owned: Vec<Intervals> = vec![Vec::new(); tables[0].len()];
    let mut stages = Vec::with_capacity(tables.len());
    for (t, table) in tables.iter().enumerate() {
        let mut fresh_pairs = Vec::new();
        for idx in 0..table.len() {
            let node = || BinString::from_table_index(idx);
            let stage = t as u32;
            let need = units_of(&table[idx]).ok_or_else(|| AllocationError::Overflow { node: node(), stage })?;
            let have = measure(&owned[idx]);
            if need < have {
                return Err(AllocationError::Decreasing { node: node(), stage });
            }
            if need == have {
                continue;
            }
            let free = if idx == 0 {
                difference(&universe, &owned[0])
            } else {
                let parent = (idx - 1) / 2;
                let sibling = if idx % 2 == 1 { idx + 1 } else { idx - 1 };
                difference(&difference(&owned[parent], &owned[idx]), &owned[sibling])
            };
            let fresh = take_leftmost(&free, need - have)
                .ok_or_else(|| AllocationError::Overflow { node: node(), stage })?;
            let tau = node();
            for &(lo, hi) in &fresh {
                for input in aligned_blocks(lo, hi, granularity) {
                    fresh_pairs.push(Pair::new(input, tau.clone()));
                }
            }
            owned[idx] = union(&owned[idx], &fresh);
        }
        stages.push(fresh_pairs);
    }
    Ok(MonotoneFunctional::from_stages_unchecked(stages))
}
