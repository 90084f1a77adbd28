use thiserror::Error;

use super::{Component, SemiMeasureStage, TailRule};
use crate::enumeration::StagedFamily;
use crate::scalar::{max_scalar, min_scalar, Scalar};
use crate::staged::StagedSemiMeasure;
use crate::strings::BinString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("value {value} at index {index} lies outside [0, 1]")]
    OutOfUnitInterval { index: usize, value: String },
    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("the sequence is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixtureError {
    #[error("weights sum to {total}, more than 1")]
    WeightOverflow { total: String },
    #[error("{weights} weights given for {family} family members")]
    LengthMismatch { weights: usize, family: usize },
    #[error("negative weight at index {0}")]
    NegativeWeight(usize),
}

/// `ρ_s(σ) = 2^{-|σ|} · min_{i ≤ |σ|} r_{i,s}`.
///
/// `r[i]` lists the stages of the `i`-th approximation; stages past the end
/// repeat the last value. Indices beyond `r.len() - 1` contribute nothing, so
/// the minimum is frozen below length `r.len() - 1` and a uniform tail is exact.
pub fn from_infimum_sequence<S: Scalar>(
    r: &[Vec<S>],
    s: u32,
    depth: u32,
) -> Result<SemiMeasureStage<S>, SequenceError> {
    if r.is_empty() {
        return Err(SequenceError::Empty);
    }
    let mut current = Vec::with_capacity(r.len());
    for (i, stages) in r.iter().enumerate() {
        let v = stages
            .get((s as usize).min(stages.len().saturating_sub(1)))
            .ok_or(SequenceError::Empty)?
            .clone();
        if v < S::zero() || v > S::one() {
            return Err(SequenceError::OutOfUnitInterval {
                index: i,
                value: format!("{v:?}"),
            });
        }
        current.push(v);
    }
    // running minima m_n = min_{i ≤ n} r_{i,s}
    let mut running = Vec::with_capacity(current.len());
    for v in &current {
        let next = match running.last() {
            Some(prev) => min_scalar(S::clone(prev), v.clone()),
            None => v.clone(),
        };
        running.push(next);
    }
    let table_depth = depth.max(r.len() as u32 - 1);
    let strict = current[0].is_one();
    let component = Component::tabulate(S::one(), table_depth, TailRule::UniformSplit, |sigma| {
        let m = &running[sigma.len().min(running.len() - 1)];
        m.clone() * S::pow2_neg(sigma.len() as u32)
    });
    Ok(SemiMeasureStage::single(component, strict))
}

/// Emit `f(i_s, s)` at step `s` when it is new and strictly below `f(k, s)` for all `k < i_s`.
pub fn enumerate_limsup<S: Scalar>(f: &[Vec<S>], schedule: &[usize]) -> Result<Vec<S>, SequenceError> {
    let mut emitted: Vec<S> = Vec::new();
    for (s, &i) in schedule.iter().enumerate() {
        let at = |k: usize| -> Result<S, SequenceError> {
            let row = f.get(k).ok_or(SequenceError::IndexOutOfRange {
                index: k,
                len: f.len(),
            })?;
            row.get(s).cloned().ok_or(SequenceError::IndexOutOfRange {
                index: s,
                len: row.len(),
            })
        };
        let candidate = at(i)?;
        let mut below_all = true;
        for k in 0..i {
            if candidate >= at(k)? {
                below_all = false;
                break;
            }
        }
        if below_all && !emitted.contains(&candidate) {
            emitted.push(candidate);
        }
    }
    Ok(emitted)
}

/// `sup_{i ≥ n} q_i` over a finite sequence.
pub fn tails_sup<S: Scalar>(q: &[S], n: usize) -> Result<S, SequenceError> {
    if n >= q.len() {
        return Err(SequenceError::IndexOutOfRange { index: n, len: q.len() });
    }
    Ok(q[n + 1..]
        .iter()
        .fold(q[n].clone(), |acc, v| max_scalar(acc, v.clone())))
}

/// `ρ(σ) = 2^{-j} M(σ)` where `j` is the number of leading ones of `σ`.
pub fn tilt_by_ones<S: Scalar>(m: &SemiMeasureStage<S>) -> SemiMeasureStage<S> {
    SemiMeasureStage {
        strict: m.strict,
        components: m.components.iter().map(|c| c.clone().tilted(1)).collect(),
    }
}

/// The point mass on `1^ω`.
pub fn dirac_on_ones<S: Scalar>() -> SemiMeasureStage<S> {
    dirac_on_spine(true)
}

/// The point mass on `b^ω`.
pub fn dirac_on_spine<S: Scalar>(bit: bool) -> SemiMeasureStage<S> {
    SemiMeasureStage::single(Component::root(S::one(), S::one(), TailRule::spine(bit)), true)
}

/// `2^{-e-1}` for `e = 0..n`.
pub fn default_weights<S: Scalar>(n: usize) -> Vec<S> {
    (0..n).map(|e| S::pow2_neg(e as u32 + 1)).collect()
}

/// `M = Σ_e w_e ρ_e` at stage `s`. The result is non-strict.
pub fn mixture<S: Scalar>(
    family: &[&dyn StagedSemiMeasure<S>],
    weights: Option<&[S]>,
    s: u32,
) -> Result<SemiMeasureStage<S>, MixtureError> {
    let weights = match weights {
        Some(w) if w.len() != family.len() => {
            return Err(MixtureError::LengthMismatch {
                weights: w.len(),
                family: family.len(),
            })
        }
        Some(w) => w.to_vec(),
        None => default_weights(family.len()),
    };
    if let Some(i) = weights.iter().position(|w| *w < S::zero()) {
        return Err(MixtureError::NegativeWeight(i));
    }
    let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
    if total > S::one() {
        return Err(MixtureError::WeightOverflow {
            total: format!("{total:?}"),
        });
    }
    let mut components = Vec::new();
    for (member, w) in family.iter().zip(&weights) {
        components.extend(member.stage_at(s).scaled(w).components);
    }
    Ok(SemiMeasureStage::new(components, false))
}

/// Check `weight · ρ(σ) ≤ M(σ)` on every string of length `≤ depth`; the
/// first failing string is returned.
pub fn check_domination<S: Scalar>(
    rho: &SemiMeasureStage<S>,
    weight: &S,
    m: &SemiMeasureStage<S>,
    depth: u32,
) -> Result<(), BinString> {
    for sigma in BinString::all_up_to(depth as usize) {
        if weight.clone() * rho.eval(&sigma) > m.eval(&sigma) {
            return Err(sigma);
        }
    }
    Ok(())
}

/// For each family `e` whose level `e + 2` has received a string by stage
/// `s`, put mass `2^{-e-1}` on every prefix of the first such string. A slack
/// component at the root brings `ρ(ε)` up to 1.
pub fn everything_mlr_builder<S: Scalar>(families: &[StagedFamily], s: u32) -> SemiMeasureStage<S> {
    let mut components = Vec::new();
    let mut used = S::zero();
    for (e, family) in families.iter().enumerate() {
        let Some(tau) = family.first_entry(e as u32 + 2, s) else {
            continue;
        };
        let weight = S::pow2_neg(e as u32 + 1);
        used = used + weight.clone();
        components.push(Component::tabulate(weight, tau.len() as u32, TailRule::Vanish, |x| {
            if x.is_prefix_of(tau) {
                S::one()
            } else {
                S::zero()
            }
        }));
    }
    let slack = S::one() - used;
    components.push(Component::root(slack, S::one(), TailRule::Vanish));
    SemiMeasureStage::new(components, true)
}
