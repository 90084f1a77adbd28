//! The derived measure `ρ̄(σ) = inf_{n ≥ |σ|} Σ_{τ ⪰ σ, |τ| = n} ρ(τ)`: the
//! largest measure below `ρ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::semimeasure::{Component, SemiMeasureStage};
use crate::staged::StagedSemiMeasure;
use crate::strings::{BinString, PrefixFreeStringSet};

/// Extra levels used for the upper bound when no closed form is available.
const FALLBACK_LEVELS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrimError {
    #[error("level {level} lies above the string of length {len}")]
    LevelBelowString { level: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct TrimResult<S> {
    pub value: S,
    /// The level the value was read at.
    pub depth: u32,
    /// Whether `value` is exactly `ρ̄(σ)` rather than an upper bound.
    pub stabilized: bool,
}

/// `Σ_{τ ⪰ σ, |τ| = n} ρ(τ)`.
pub fn partial_trim<S: Scalar>(rho: &SemiMeasureStage<S>, sigma: &BinString, n: usize) -> Result<S, TrimError> {
    if n < sigma.len() {
        return Err(TrimError::LevelBelowString {
            level: n,
            len: sigma.len(),
        });
    }
    Ok(rho
        .components()
        .iter()
        .fold(S::zero(), |acc, c| acc + c.weight().clone() * level_mass(c, sigma, n)))
}

/// The unweighted level-`n` mass of one component above `σ`.
fn level_mass<S: Scalar>(c: &Component<S>, sigma: &BinString, n: usize) -> S {
    let depth = c.depth() as usize;
    if sigma.len() < depth {
        if n == sigma.len() {
            return c.raw(sigma);
        }
        return level_mass(c, &sigma.child(false), n) + level_mass(c, &sigma.child(true), n);
    }
    let k = (n - sigma.len()) as u32;
    let retention = c.tail().retention();
    if c.ones_tilt() == 0 || !sigma.is_all_ones() {
        return c.raw(sigma) * Scalar::pow(&retention, k);
    }
    // on the tilted spine: peel off one off-spine subtree per level
    let mut total = S::zero();
    let mut spine = sigma.clone();
    for i in 0..k {
        let off = spine.child(false);
        total = total + c.raw(&off) * Scalar::pow(&retention, k - 1 - i);
        spine = spine.child(true);
    }
    total + c.raw(&spine)
}

/// `lim_n` of [`level_mass`], when it has an exact closed form.
fn component_limit<S: Scalar>(c: &Component<S>, sigma: &BinString) -> Option<S> {
    let depth = c.depth() as usize;
    if sigma.len() < depth {
        let left = component_limit(c, &sigma.child(false))?;
        let right = component_limit(c, &sigma.child(true))?;
        return Some(left + right);
    }
    let (b0, b1) = c.tail().factors();
    if !(b0.clone() + b1.clone()).is_one() {
        // geometric decay, also along the tilted spine
        return Some(S::zero());
    }
    if c.ones_tilt() == 0 || !sigma.is_all_ones() {
        return Some(c.raw(sigma));
    }
    if b1 == S::zero() {
        // all mass leaves the spine at the next bit and never returns
        return Some(c.raw(sigma));
    }
    if b0 == S::zero() {
        // all mass stays on the spine, where the tilt drains it
        return Some(S::zero());
    }
    // the limit is a geometric series with a ratio that need not be dyadic
    None
}

/// `ρ̄(σ)`, exact whenever every component tail admits a closed form.
pub fn derived_measure<S: Scalar>(rho: &SemiMeasureStage<S>, sigma: &BinString) -> TrimResult<S> {
    let frontier = (rho.frontier_depth() as usize).max(sigma.len());
    let mut total = S::zero();
    for c in rho.components() {
        match component_limit(c, sigma) {
            Some(v) => total = total + c.weight().clone() * v,
            None => {
                let level = frontier + FALLBACK_LEVELS as usize;
                let bound = partial_trim(rho, sigma, level).expect("level above the string");
                return TrimResult {
                    value: bound,
                    depth: level as u32,
                    stabilized: false,
                };
            }
        }
    }
    TrimResult {
        value: total,
        depth: frontier as u32,
        stabilized: true,
    }
}

/// `ρ(E^m)` for `m = 0..=m_max`, together with the limit `ρ̄(⟦E⟧)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct OpenSetTrim<S> {
    pub masses: Vec<S>,
    pub limit: S,
    pub stabilized: bool,
}

pub fn open_set_derived<S: Scalar>(rho: &SemiMeasureStage<S>, set: &PrefixFreeStringSet, m_max: usize) -> OpenSetTrim<S> {
    let masses = (0..=m_max)
        .map(|m| {
            set.iter().fold(S::zero(), |acc, tau| {
                acc + partial_trim(rho, tau, tau.len() + m).expect("level above the string")
            })
        })
        .collect();
    let mut limit = S::zero();
    let mut stabilized = true;
    for tau in set.iter() {
        let r = derived_measure(rho, tau);
        stabilized &= r.stabilized;
        limit = limit + r.value;
    }
    OpenSetTrim {
        masses,
        limit,
        stabilized,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub enum LebesgueLike<S> {
    /// `ρ̄ = α·λ` on every checked string.
    Alpha { alpha: S },
    /// `ρ̄(σ) ≠ ρ̄(ε)·λ(σ)` at the witness, or `ρ̄(ε) = 0`.
    NotLebesgueLike { witness: BinString },
    /// No exact value of `ρ̄` is available at the given string.
    Undetermined { at: BinString },
}

/// Compare `ρ̄` with `ρ̄(ε)·λ` on every string of length `≤ depth`.
pub fn lebesgue_like_check<S: Scalar>(rho: &SemiMeasureStage<S>, depth: usize) -> LebesgueLike<S> {
    let root = derived_measure(rho, &BinString::empty());
    if !root.stabilized {
        return LebesgueLike::Undetermined { at: BinString::empty() };
    }
    let alpha = root.value;
    if alpha == S::zero() {
        return LebesgueLike::NotLebesgueLike {
            witness: BinString::empty(),
        };
    }
    for sigma in BinString::all_up_to(depth) {
        let r = derived_measure(rho, &sigma);
        if !r.stabilized {
            return LebesgueLike::Undetermined { at: sigma };
        }
        if r.value != alpha.clone() * S::pow2_neg(sigma.len() as u32) {
            return LebesgueLike::NotLebesgueLike { witness: sigma };
        }
    }
    LebesgueLike::Alpha { alpha }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("seed has length {found}, expected {expected}")]
    SeedLength { expected: usize, found: usize },
    #[error("both extensions of {prefix:?} reach the threshold (stage {stage})")]
    Ambiguity { prefix: BinString, stage: u32 },
    #[error("no extension of {prefix:?} reached the threshold by stage {max_stage}")]
    BudgetExhausted { prefix: BinString, max_stage: u32 },
}

/// Follow an atom of mass `α` from `seed`, given a threshold with `α/2 < q < α`.
///
/// At each position the stages are advanced until one child of the current
/// prefix reaches `q`. A child is emitted only if its sibling stays below `q`
/// through `max_stage`. Returns the `bits` emitted bits, without the seed.
pub fn decode_atom<S: Scalar>(
    rho: &dyn StagedSemiMeasure<S>,
    q: &S,
    n: usize,
    seed: &BinString,
    bits: usize,
    max_stage: u32,
) -> Result<BinString, DecodeError> {
    if seed.len() != n {
        return Err(DecodeError::SeedLength {
            expected: n,
            found: seed.len(),
        });
    }
    let mut cache: Vec<Option<SemiMeasureStage<S>>> = vec![None; max_stage as usize + 1];
    let mut stage_at = |s: u32| -> SemiMeasureStage<S> {
        cache[s as usize].get_or_insert_with(|| rho.stage_at(s)).clone()
    };
    let last = stage_at(max_stage);
    let mut prefix = seed.clone();
    let mut emitted = BinString::empty();
    // values only grow with the stage, so the search resumes where it stopped
    let mut s = 0;
    for _ in 0..bits {
        let left = prefix.child(false);
        let right = prefix.child(true);
        let chosen = loop {
            let stage = stage_at(s);
            let l = stage.eval(&left) >= *q;
            let r = stage.eval(&right) >= *q;
            match (l, r) {
                (true, true) => return Err(DecodeError::Ambiguity { prefix, stage: s }),
                (true, false) => break false,
                (false, true) => break true,
                (false, false) if s < max_stage => s += 1,
                (false, false) => return Err(DecodeError::BudgetExhausted { prefix, max_stage }),
            }
        };
        let sibling = prefix.child(!chosen);
        if last.eval(&sibling) >= *q {
            return Err(DecodeError::Ambiguity {
                prefix,
                stage: max_stage,
            });
        }
        prefix.push(chosen);
        emitted.push(chosen);
    }
    Ok(emitted)
}
