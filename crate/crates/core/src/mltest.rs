//! Finitely presented Martin-Löf and generalized tests relative to a semi-measure.

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::enumeration::StagedFamily;
use crate::functional::MonotoneFunctional;
use crate::scalar::Scalar;
use crate::semimeasure::{tilt_by_ones, SemiMeasureStage};
use crate::strings::{BinString, PrefixFreeStringSet};

fn normalized_levels<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<PrefixFreeStringSet>, D::Error> {
    let raw: Vec<Vec<BinString>> = Vec::deserialize(de)?;
    Ok(raw.into_iter().map(PrefixFreeStringSet::normalize).collect())
}

/// Levels `U_i` for `i = first_level, first_level + 1, …` with `ρ(U_i) ≤ 2^{-i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize + Clone",
    deserialize = "S: Deserialize<'de>"
))]
pub struct MlTest<S> {
    pub base: SemiMeasureStage<S>,
    #[serde(default)]
    pub first_level: u32,
    #[serde(deserialize_with = "normalized_levels")]
    pub levels: Vec<PrefixFreeStringSet>,
}

/// Which level is guaranteed to have mass at most `2^{-k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// `d(k) = indices[k]`.
    Table { indices: Vec<u32> },
    /// `d(k) = k + offset`.
    Offset { offset: u32 },
}

/// Levels whose masses tend to zero at the rate the declared [`Decay`] states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize + Clone",
    deserialize = "S: Deserialize<'de>"
))]
pub struct GeneralizedTest<S> {
    pub base: SemiMeasureStage<S>,
    #[serde(default)]
    pub first_level: u32,
    #[serde(deserialize_with = "normalized_levels")]
    pub levels: Vec<PrefixFreeStringSet>,
    pub decay: Decay,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestError<S: std::fmt::Debug> {
    #[error("level {level} has mass {mass:?}, above {bound:?}")]
    LevelViolation { level: u32, mass: S, bound: S },
    #[error("base semi-measure disagrees with the expected one at {witness:?}")]
    BaseMismatch { witness: BinString },
    #[error("domination constant must be at least 1")]
    ConstantBelowOne,
    #[error("domination certificate fails at {witness:?}")]
    CertificateFails { witness: BinString },
}

/// Outcome for one level of a test on a finite prefix of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    /// Some member is a prefix of the given string.
    Captured,
    /// No extension of the given string can enter the level.
    Escaped,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct LevelReport<S> {
    pub level: u32,
    pub status: LevelStatus,
    pub mass: S,
}

fn level_status(set: &PrefixFreeStringSet, prefix: &BinString) -> LevelStatus {
    if set.iter().any(|m| m.is_prefix_of(prefix)) {
        LevelStatus::Captured
    } else if set.iter().any(|m| prefix.is_prefix_of(m)) {
        LevelStatus::Undetermined
    } else {
        LevelStatus::Escaped
    }
}

fn reports<S: Scalar>(
    base: &SemiMeasureStage<S>,
    first_level: u32,
    levels: &[PrefixFreeStringSet],
    prefix: &BinString,
) -> Vec<LevelReport<S>> {
    levels
        .iter()
        .enumerate()
        .map(|(k, set)| LevelReport {
            level: first_level + k as u32,
            status: level_status(set, prefix),
            mass: base.set_mass(set),
        })
        .collect()
}

fn members(levels: &[PrefixFreeStringSet]) -> impl Iterator<Item = &BinString> + '_ {
    levels.iter().flat_map(|l| l.iter())
}

impl<S: Scalar> MlTest<S> {
    pub fn new(base: SemiMeasureStage<S>, first_level: u32, levels: Vec<PrefixFreeStringSet>) -> Self {
        MlTest {
            base,
            first_level,
            levels,
        }
    }

    /// `U_i`, if provided.
    pub fn level(&self, i: u32) -> Option<&PrefixFreeStringSet> {
        self.levels.get(i.checked_sub(self.first_level)? as usize)
    }

    pub fn last_level(&self) -> Option<u32> {
        (!self.levels.is_empty()).then(|| self.first_level + self.levels.len() as u32 - 1)
    }

    /// Check `ρ(U_i) ≤ 2^{-i}` at every provided level.
    pub fn validate(&self) -> Result<(), TestError<S>> {
        for (k, set) in self.levels.iter().enumerate() {
            let level = self.first_level + k as u32;
            let mass = self.base.set_mass(set);
            let bound = S::pow2_neg(level);
            if mass > bound {
                return Err(TestError::LevelViolation { level, mass, bound });
            }
        }
        Ok(())
    }

    pub fn passes_at_depth(&self, prefix: &BinString) -> Vec<LevelReport<S>> {
        reports(&self.base, self.first_level, &self.levels, prefix)
    }
}

impl<S: Scalar> GeneralizedTest<S> {
    fn decay_index(&self, k: u32) -> Option<u32> {
        match &self.decay {
            Decay::Table { indices } => indices.get(k as usize).copied(),
            Decay::Offset { offset } => Some(k + offset),
        }
    }

    /// Check `ρ(U_{d(k)}) ≤ 2^{-k}` for every `k` whose level is provided.
    pub fn validate(&self) -> Result<(), TestError<S>> {
        let last = self.first_level + self.levels.len() as u32;
        let mut k = 0;
        while let Some(i) = self.decay_index(k) {
            if i >= last && matches!(self.decay, Decay::Offset { .. }) {
                break;
            }
            if let Some(set) = i
                .checked_sub(self.first_level)
                .and_then(|idx| self.levels.get(idx as usize))
            {
                let mass = self.base.set_mass(set);
                let bound = S::pow2_neg(k);
                if mass > bound {
                    return Err(TestError::LevelViolation { level: i, mass, bound });
                }
            }
            k += 1;
        }
        Ok(())
    }

    pub fn passes_at_depth(&self, prefix: &BinString) -> Vec<LevelReport<S>> {
        reports(&self.base, self.first_level, &self.levels, prefix)
    }
}

/// `U_i = {x↾i}` for `first_level ≤ i ≤ |x|`, the test that captures a sequence
/// with prefix `x` whenever its masses vanish fast enough.
pub fn singleton_test<S: Scalar>(base: SemiMeasureStage<S>, x: &BinString, first_level: u32) -> MlTest<S> {
    let levels = (first_level as usize..=x.len())
        .map(|i| PrefixFreeStringSet::singleton(x.prefix(i)))
        .collect();
    MlTest::new(base, first_level, levels)
}

/// Turn a test for `λ_Φ` into a Lebesgue test: `V_i = ∪_{τ ∈ U_i} Φ^{-1}(τ)`.
pub fn pullback_test(
    t: &MlTest<Dyadic>,
    phi: &MonotoneFunctional,
    s: u32,
) -> Result<MlTest<Dyadic>, TestError<Dyadic>> {
    let depth = members(&t.levels).map(BinString::len).max().unwrap_or(0) as u32;
    let induced = phi.induced_semimeasure(s, depth);
    if let Some(w) = members(&t.levels).find(|m| t.base.eval(m) != induced.eval(m)) {
        return Err(TestError::BaseMismatch { witness: w.clone() });
    }
    t.validate()?;
    let levels = t
        .levels
        .iter()
        .map(|set| {
            let preimages: Vec<PrefixFreeStringSet> = set.iter().map(|tau| phi.preimage_set(tau, s)).collect();
            PrefixFreeStringSet::normalize(preimages.iter().flat_map(|p| p.iter()))
        })
        .collect();
    let out = MlTest::new(SemiMeasureStage::lebesgue(), t.first_level, levels);
    out.validate()?;
    Ok(out)
}

/// Re-index an `M`-test as a `ρ`-test, given `ρ ≤ c·M`: new level `i` is old
/// level `i + ⌈log₂ c⌉`.
pub fn shift_for_domination<S: Scalar>(
    t: &MlTest<S>,
    rho: &SemiMeasureStage<S>,
    c: &S,
) -> Result<MlTest<S>, TestError<S>> {
    let k = c.ceil_log2().ok_or(TestError::ConstantBelowOne)?;
    if let Some(w) = members(&t.levels).find(|m| rho.eval(m) > c.clone() * t.base.eval(m)) {
        return Err(TestError::CertificateFails { witness: w.clone() });
    }
    t.validate()?;
    let skip = k.saturating_sub(t.first_level) as usize;
    let out = MlTest::new(
        rho.clone(),
        t.first_level.saturating_sub(k),
        t.levels.iter().skip(skip).cloned().collect(),
    );
    out.validate()?;
    Ok(out)
}

/// From a test over `tilt_by_ones(M)`, the `M`-test `S_i = {σ ∈ T_{i+j} : σ ⪰ 1^j 0}`.
pub fn ones_prefix_filter<S: Scalar>(
    t: &MlTest<S>,
    m: &SemiMeasureStage<S>,
    j: u32,
) -> Result<MlTest<S>, TestError<S>> {
    let tilted = tilt_by_ones(m);
    if let Some(w) = members(&t.levels).find(|x| t.base.eval(x) != tilted.eval(x)) {
        return Err(TestError::BaseMismatch { witness: w.clone() });
    }
    t.validate()?;
    let marker = BinString::ones(j as usize).child(false);
    let skip = j.saturating_sub(t.first_level) as usize;
    let out = MlTest::new(
        m.clone(),
        t.first_level.saturating_sub(j),
        t.levels
            .iter()
            .skip(skip)
            .map(|set| set.filter_extending(&marker))
            .collect(),
    );
    out.validate()?;
    Ok(out)
}

/// `F_n`: each chain `τ_0, …, τ_n` with `τ_i ∈ E_i` contributes every
/// extension of its longest member by `n` bits.
pub fn intersect_tests(sets: &[PrefixFreeStringSet], n: usize) -> PrefixFreeStringSet {
    let Some(first) = sets.first() else {
        return PrefixFreeStringSet::empty();
    };
    let mut longest: Vec<BinString> = first.iter().cloned().collect();
    for set in sets.iter().take(n + 1).skip(1) {
        let mut next = Vec::new();
        for a in &longest {
            for b in set.iter() {
                if a.is_prefix_of(b) {
                    next.push(b.clone());
                } else if b.is_prefix_of(a) {
                    next.push(a.clone());
                }
            }
        }
        next.sort();
        next.dedup();
        longest = next;
    }
    PrefixFreeStringSet::normalize(
        longest
            .iter()
            .flat_map(|tau| BinString::all_of_length(n).map(move |w| tau.concat(&w))),
    )
}

/// [`intersect_tests`] over levels `0..=n` of a staged family at stage `s`.
pub fn intersect_staged(family: &StagedFamily, n: usize, s: u32) -> PrefixFreeStringSet {
    let sets: Vec<PrefixFreeStringSet> = (0..=n as u32).map(|i| family.normalized_at(i, s)).collect();
    intersect_tests(&sets, n)
}
