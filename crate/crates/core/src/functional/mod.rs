//! Monotone functionals as staged, consistent sets of string pairs.

mod allocation;
mod constructions;

pub use allocation::{from_semimeasure, AllocationConfig, AllocationError, DEFAULT_GRANULARITY_CAP};
pub use constructions::{hat_extend, shen_pair, universal_functional, ShenError};

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::semimeasure::{Component, SemiMeasureStage, TailRule};
use crate::strings::{BinString, PrefixFreeStringSet};

/// One enumerated pair: on input extending `input`, output at least `output`.
/// Serialized as the two-element list `[input, output]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(BinString, BinString)", into = "(BinString, BinString)")]
pub struct Pair {
    pub input: BinString,
    pub output: BinString,
}

impl Pair {
    pub fn new(input: BinString, output: BinString) -> Self {
        Pair { input, output }
    }
}

impl From<(BinString, BinString)> for Pair {
    fn from((input, output): (BinString, BinString)) -> Self {
        Pair { input, output }
    }
}

impl From<Pair> for (BinString, BinString) {
    fn from(p: Pair) -> Self {
        (p.input, p.output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("inconsistent pairs {first:?} and {second:?}: inputs comparable, outputs not")]
pub struct Inconsistent {
    pub first: Pair,
    pub second: Pair,
}

/// A functional given by the pairs it enumerates at each stage.
///
/// `stages[t]` holds the pairs first enumerated at stage `t`; the pair set at
/// stage `s` is the union of `stages[0..=s]`, and stays fixed after the last
/// listed stage.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "FunctionalRepr", into = "FunctionalRepr")]
pub struct MonotoneFunctional {
    stages: Vec<Vec<Pair>>,
}

#[derive(Serialize, Deserialize)]
struct FunctionalRepr {
    stages: Vec<Vec<Pair>>,
}

impl TryFrom<FunctionalRepr> for MonotoneFunctional {
    type Error = Inconsistent;

    fn try_from(r: FunctionalRepr) -> Result<Self, Self::Error> {
        MonotoneFunctional::from_stages(r.stages)
    }
}

impl From<MonotoneFunctional> for FunctionalRepr {
    fn from(f: MonotoneFunctional) -> Self {
        FunctionalRepr { stages: f.stages }
    }
}

impl MonotoneFunctional {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from per-stage enumerations; duplicates are dropped and each
    /// stage is sorted.
    pub fn from_stages(stages: Vec<Vec<Pair>>) -> Result<Self, Inconsistent> {
        let mut seen = std::collections::HashSet::new();
        let stages: Vec<Vec<Pair>> = stages
            .into_iter()
            .map(|stage| {
                let mut fresh: Vec<Pair> = stage.into_iter().filter(|p| seen.insert(p.clone())).collect();
                fresh.sort();
                fresh
            })
            .collect();
        let f = MonotoneFunctional { stages };
        f.check_consistent()?;
        Ok(f)
    }

    /// All pairs enumerated at stage 0.
    pub fn from_pairs(pairs: impl IntoIterator<Item = Pair>) -> Result<Self, Inconsistent> {
        Self::from_stages(vec![pairs.into_iter().collect()])
    }

    /// The identity, enumerating `(σ, σ)` for `|σ| = t` at stage `t ≤ max_len`.
    pub fn identity(max_len: usize) -> Self {
        let stages = (0..=max_len)
            .map(|t| {
                BinString::all_of_length(t)
                    .map(|s| Pair::new(s.clone(), s))
                    .collect()
            })
            .collect();
        MonotoneFunctional { stages }
    }

    pub(crate) fn from_stages_unchecked(stages: Vec<Vec<Pair>>) -> Self {
        MonotoneFunctional { stages }
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Pairs first enumerated at stage `t`.
    pub fn new_at(&self, t: u32) -> &[Pair] {
        self.stages.get(t as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pairs_at(&self, s: u32) -> impl Iterator<Item = &Pair> + '_ {
        let end = (s as usize + 1).min(self.stages.len());
        self.stages[..end].iter().flatten()
    }

    pub fn all_pairs(&self) -> impl Iterator<Item = &Pair> + '_ {
        self.stages.iter().flatten()
    }

    /// Check that comparable inputs always carry comparable outputs.
    pub fn check_consistent(&self) -> Result<(), Inconsistent> {
        let mut by_input: HashMap<&BinString, Vec<&Pair>> = HashMap::new();
        for p in self.all_pairs() {
            by_input.entry(&p.input).or_default().push(p);
        }
        for p in self.all_pairs() {
            for k in 0..=p.input.len() {
                let prefix = p.input.prefix(k);
                let Some(others) = by_input.get(&prefix) else {
                    continue;
                };
                if let Some(q) = others.iter().find(|q| !q.output.comparable(&p.output)) {
                    return Err(Inconsistent {
                        first: (*q).clone(),
                        second: p.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `Φ^σ` at stage `s`: the longest output of a pair whose input is a prefix of `σ`.
    pub fn eval_on_string(&self, sigma: &BinString, s: u32) -> BinString {
        self.pairs_at(s)
            .filter(|p| p.input.is_prefix_of(sigma))
            .map(|p| &p.output)
            .max_by_key(|o| o.len())
            .cloned()
            .unwrap_or_else(BinString::empty)
    }

    /// `Φ^{-1}(τ)` at stage `s`: inputs of pairs whose output extends `τ`, normalized.
    pub fn preimage_set(&self, tau: &BinString, s: u32) -> PrefixFreeStringSet {
        PrefixFreeStringSet::normalize(
            self.pairs_at(s)
                .filter(|p| tau.is_prefix_of(&p.output))
                .map(|p| &p.input),
        )
    }

    /// The stage-`s` approximation of `λ_Φ`, tabulated on strings of length `≤ depth`.
    pub fn induced_semimeasure(&self, s: u32, depth: u32) -> SemiMeasureStage<Dyadic> {
        // bucket each pair's input under every output prefix it supports
        let mut buckets: BTreeMap<BinString, Vec<&BinString>> = BTreeMap::new();
        for p in self.pairs_at(s) {
            for k in 0..=p.output.len().min(depth as usize) {
                buckets.entry(p.output.prefix(k)).or_default().push(&p.input);
            }
        }
        let component = Component::tabulate(Dyadic::from_integer(1), depth, TailRule::Vanish, |tau| {
            buckets
                .get(tau)
                .map(|inputs| PrefixFreeStringSet::normalize(inputs.iter().copied()).lebesgue())
                .unwrap_or_else(Dyadic::zero)
        });
        let strict = component.raw(&BinString::empty()) == Dyadic::from_integer(1);
        SemiMeasureStage::single(component, strict)
    }

    /// Minimal inputs whose stage-`s` output has length at least `level`.
    pub fn reach_set(&self, level: usize, s: u32) -> PrefixFreeStringSet {
        if level == 0 {
            return PrefixFreeStringSet::singleton(BinString::empty());
        }
        PrefixFreeStringSet::normalize(
            self.pairs_at(s)
                .filter(|p| p.output.len() >= level)
                .map(|p| &p.input),
        )
    }

    /// Relabel inputs by prepending `prefix`.
    pub(crate) fn prefix_inputs(&self, prefix: &BinString) -> Vec<Vec<Pair>> {
        self.stages
            .iter()
            .map(|stage| {
                stage
                    .iter()
                    .map(|p| Pair::new(prefix.concat(&p.input), p.output.clone()))
                    .collect()
            })
            .collect()
    }
}

/// Supplies stages by which the reach sets are close to their limits.
pub trait StageModulus {
    /// A stage `s` with `λ(S_level) − λ(⟦reach_set(level, s)⟧) ≤ 2^{-precision}`.
    fn stage(&self, level: u32, precision: u32) -> u32;

    /// The exact limit `λ(S_level)`, when known; used to audit [`StageModulus::stage`].
    fn certified_measure(&self, _level: u32) -> Option<Dyadic> {
        None
    }
}

impl<F: Fn(u32, u32) -> u32> StageModulus for F {
    fn stage(&self, level: u32, precision: u32) -> u32 {
        self(level, precision)
    }
}

/// A modulus that always answers the same stage, optionally with known limits.
#[derive(Debug, Clone)]
pub struct ConstantModulus {
    pub stage: u32,
    pub limits: Option<Vec<Dyadic>>,
}

impl StageModulus for ConstantModulus {
    fn stage(&self, _level: u32, _precision: u32) -> u32 {
        self.stage
    }

    fn certified_measure(&self, level: u32) -> Option<Dyadic> {
        self.limits.as_ref()?.get(level as usize).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModulusError {
    #[error("level {level}: certified measure {certified} is not in [{found}, 1]")]
    ImpossibleCertificate {
        level: u32,
        certified: Dyadic,
        found: Dyadic,
    },
    #[error("level {level}: stage {stage} leaves deficiency {deficiency}, above {bound}")]
    DeficiencyTooLarge {
        level: u32,
        stage: u32,
        deficiency: Dyadic,
        bound: Dyadic,
    },
}

/// The clopen approximations `C^e_k` for `k ≤ ℓ`, and `D^e_ℓ = ∩_{k ≤ ℓ} C^e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenApprox {
    pub levels: Vec<PrefixFreeStringSet>,
    pub domain: PrefixFreeStringSet,
}

impl ClopenApprox {
    /// `C^e_ℓ`.
    pub fn clopen(&self) -> &PrefixFreeStringSet {
        self.levels.last().expect("level 0 is always present")
    }
}

/// `C^e_k = reach_set(k, modulus(k, k + e + 1))` for each `k ≤ level`.
pub fn domain_clopen_approx(
    phi: &MonotoneFunctional,
    e: u32,
    level: u32,
    modulus: &dyn StageModulus,
) -> Result<ClopenApprox, ModulusError> {
    let mut levels = Vec::with_capacity(level as usize + 1);
    let mut domain = PrefixFreeStringSet::singleton(BinString::empty());
    for k in 0..=level {
        let precision = k + e + 1;
        let stage = modulus.stage(k, precision);
        let c = phi.reach_set(k as usize, stage);
        let found = c.lebesgue();
        if let Some(certified) = modulus.certified_measure(k) {
            if certified < found || certified > Dyadic::from_integer(1) {
                return Err(ModulusError::ImpossibleCertificate {
                    level: k,
                    certified,
                    found,
                });
            }
            let deficiency = certified - found;
            let bound = Dyadic::pow2_neg(precision);
            if deficiency > bound {
                return Err(ModulusError::DeficiencyTooLarge {
                    level: k,
                    stage,
                    deficiency,
                    bound,
                });
            }
        }
        domain = domain.intersect(&c);
        levels.push(c);
    }
    Ok(ClopenApprox { levels, domain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(s: &str) -> BinString {
        s.parse().unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn pairs(list: &[(&str, &str)]) -> MonotoneFunctional {
        MonotoneFunctional::from_pairs(list.iter().map(|(i, o)| Pair::new(b(i), b(o)))).unwrap()
    }

    /// Every pair of pairs, compared directly.
    fn brute_force_consistent(f: &MonotoneFunctional) -> bool {
        let all: Vec<&Pair> = f.all_pairs().collect();
        all.iter().all(|p| {
            all.iter()
                .all(|q| !p.input.is_prefix_of(&q.input) || p.output.comparable(&q.output))
        })
    }

    #[test]
    fn evaluation() {
        let phi = pairs(&[("0", "0"), ("01", "00")]);
        assert_eq!(phi.eval_on_string(&b("011"), 0), b("00"));
        assert_eq!(phi.eval_on_string(&b("1"), 0), BinString::empty());
        assert_eq!(phi.eval_on_string(&b("00"), 0), b("0"));
    }

    #[test]
    fn rejects_inconsistency() {
        let bad = MonotoneFunctional::from_pairs([Pair::new(b("0"), b("0")), Pair::new(b("01"), b("1"))]);
        assert!(bad.is_err());
        let json = r#"{"stages":[[["0","0"]],[["01","1"]]]}"#;
        assert!(serde_json::from_str::<MonotoneFunctional>(json).is_err());
        let ok = r#"{"stages":[[["0","0"]],[["01","00"]]]}"#;
        let f: MonotoneFunctional = serde_json::from_str(ok).unwrap();
        assert_eq!(f.pairs_at(0).count(), 1);
        assert_eq!(f.pairs_at(9).count(), 2);
        assert_eq!(serde_json::to_string(&f).unwrap(), ok);
    }

    #[test]
    fn preimages() {
        let phi = pairs(&[("00", "01"), ("01", "0")]);
        assert_eq!(Vec::from(phi.preimage_set(&b("0"), 0)), vec![b("00"), b("01")]);
        assert_eq!(Vec::from(phi.preimage_set(&b("01"), 0)), vec![b("00")]);
        assert!(phi.preimage_set(&b("1"), 0).is_empty());
    }

    #[test]
    fn induced_values() {
        let phi = pairs(&[("00", "01")]);
        let rho = phi.induced_semimeasure(0, 3);
        assert_eq!(rho.eval(&b("0")), d("1/4"));
        assert_eq!(rho.eval(&b("01")), d("1/4"));
        assert_eq!(rho.eval(&b("1")), d("0"));
        assert!(rho.validate().is_ok());

        let both = pairs(&[("0", "0"), ("1", "0")]);
        let rho = both.induced_semimeasure(0, 2);
        assert_eq!(rho.eval(&b("0")), d("1"));
        assert!(rho.is_strict());
    }

    #[test]
    fn induced_grows_with_stage() {
        let id = MonotoneFunctional::identity(5);
        for s in 0..5 {
            let now = id.induced_semimeasure(s, 5);
            let next = id.induced_semimeasure(s + 1, 5);
            assert!(now.validate().is_ok());
            for sigma in BinString::all_up_to(5) {
                assert!(now.eval(&sigma) <= next.eval(&sigma));
            }
        }
        let lam = id.induced_semimeasure(5, 5);
        for sigma in BinString::all_up_to(5) {
            assert_eq!(lam.eval(&sigma), Dyadic::pow2_neg(sigma.len() as u32));
        }
    }

    #[test]
    fn reach_sets() {
        let id = MonotoneFunctional::identity(3);
        let r = id.reach_set(2, 3);
        assert_eq!(Vec::from(r.clone()), BinString::all_of_length(2).collect::<Vec<_>>());
        assert_eq!(r.lebesgue(), d("1"));
        assert_eq!(Vec::from(pairs(&[("00", "01")]).reach_set(1, 0)), vec![b("00")]);
        assert_eq!(
            Vec::from(MonotoneFunctional::empty().reach_set(0, 0)),
            vec![BinString::empty()]
        );
    }

    /// `(0σ, σ)` enumerated at stage `|σ| + 1`, so the domain is ⟦0⟧ from stage 2 on
    /// for the levels queried here.
    fn zero_half_identity(max_len: usize) -> MonotoneFunctional {
        let mut stages = vec![Vec::new()];
        for t in 0..=max_len {
            stages.push(
                BinString::all_of_length(t)
                    .map(|s| Pair::new(b("0").concat(&s), s))
                    .collect(),
            );
        }
        MonotoneFunctional::from_stages(stages).unwrap()
    }

    #[test]
    fn clopen_approximations() {
        let id = MonotoneFunctional::identity(6);
        let modulus = |level: u32, _precision: u32| level;
        for e in 0..3 {
            for level in 0..5 {
                let approx = domain_clopen_approx(&id, e, level, &modulus).unwrap();
                assert_eq!(approx.clopen().lebesgue(), d("1"));
                assert_eq!(approx.domain.lebesgue(), d("1"));
            }
        }

        let empty = MonotoneFunctional::empty();
        let approx = domain_clopen_approx(&empty, 0, 2, &modulus).unwrap();
        assert!(approx.clopen().is_empty());

        let half = zero_half_identity(1);
        let constant = ConstantModulus {
            stage: 2,
            limits: Some(vec![d("1"), d("1/2")]),
        };
        let approx = domain_clopen_approx(&half, 1, 1, &constant).unwrap();
        assert_eq!(approx.clopen().lebesgue(), d("1/2"));
        assert_eq!(Vec::from(approx.domain), vec![b("00"), b("01")]);
    }

    #[test]
    fn clopen_rejects_bad_certificates() {
        let half = zero_half_identity(2);
        let too_early = ConstantModulus {
            stage: 0,
            limits: Some(vec![d("1"), d("1/2")]),
        };
        assert!(matches!(
            domain_clopen_approx(&half, 0, 1, &too_early),
            Err(ModulusError::DeficiencyTooLarge { level: 1, .. })
        ));
        let impossible = ConstantModulus {
            stage: 3,
            limits: Some(vec![d("1"), d("1/4")]),
        };
        assert!(matches!(
            domain_clopen_approx(&half, 0, 1, &impossible),
            Err(ModulusError::ImpossibleCertificate { .. })
        ));
    }

    fn arb_functional() -> impl Strategy<Value = MonotoneFunctional> {
        // outputs drawn along one path so every pair set is consistent
        (
            "[01]{6}",
            prop::collection::vec(prop::collection::vec(("[01]{0,4}", 0usize..=6), 0..5), 1..4),
        )
            .prop_map(|(path, stages)| {
                let path: BinString = path.parse().unwrap();
                let stages = stages
                    .into_iter()
                    .map(|st| {
                        st.into_iter()
                            .map(|(i, k)| Pair::new(i.parse().unwrap(), path.prefix(k)))
                            .collect()
                    })
                    .collect();
                MonotoneFunctional::from_stages(stages).unwrap()
            })
    }

    proptest! {
        #[test]
        fn consistency_matches_brute_force(f in arb_functional()) {
            prop_assert!(brute_force_consistent(&f));
        }

        #[test]
        fn eval_monotone(f in arb_functional(), sigma in "[01]{0,5}", ext in "[01]{0,3}", s in 0u32..4) {
            let sigma: BinString = sigma.parse().unwrap();
            let longer = sigma.concat(&ext.parse().unwrap());
            prop_assert!(f.eval_on_string(&sigma, s).is_prefix_of(&f.eval_on_string(&longer, s)));
            prop_assert!(f.eval_on_string(&sigma, s).is_prefix_of(&f.eval_on_string(&sigma, s + 1)));
        }

        #[test]
        fn induced_validates(f in arb_functional(), s in 0u32..4) {
            let rho = f.induced_semimeasure(s, 6);
            prop_assert!(rho.validate().is_ok());
            for tau in BinString::all_up_to(4) {
                prop_assert_eq!(rho.eval(&tau), f.preimage_set(&tau, s).lebesgue());
            }
        }
    }
}
