//! Left-c.e. semi-measures as deterministic stage generators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::enumeration::StagedFamily;
use crate::functional::MonotoneFunctional;
use crate::scalar::Scalar;
use crate::semimeasure::{
    everything_mlr_builder, from_infimum_sequence, mixture, tilt_by_ones, MixtureError, SemiMeasureStage,
    SequenceError,
};
use crate::strings::BinString;

/// A sequence of presentations, non-decreasing pointwise in the stage.
pub trait StagedSemiMeasure<S: Scalar> {
    fn stage_at(&self, s: u32) -> SemiMeasureStage<S>;
}

impl<S: Scalar> StagedSemiMeasure<S> for SemiMeasureStage<S> {
    fn stage_at(&self, _s: u32) -> SemiMeasureStage<S> {
        self.clone()
    }
}

impl<S: Scalar, F: Fn(u32) -> SemiMeasureStage<S>> StagedSemiMeasure<S> for F {
    fn stage_at(&self, s: u32) -> SemiMeasureStage<S> {
        self(s)
    }
}

/// Find a `(σ, s)` among the given pairs where the value drops from stage `s` to `s + 1`.
pub fn spot_check_monotone<S: Scalar>(
    rho: &dyn StagedSemiMeasure<S>,
    probes: impl IntoIterator<Item = (BinString, u32)>,
) -> Result<(), (BinString, u32)> {
    for (sigma, s) in probes {
        if rho.stage_at(s).eval(&sigma) > rho.stage_at(s + 1).eval(&sigma) {
            return Err((sigma, s));
        }
    }
    Ok(())
}

/// Serializable descriptions of the left-c.e. semi-measures the tools build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// The same presentation at every stage.
    Constant { stage: SemiMeasureStage<Dyadic> },
    /// Listed stages; the last one repeats.
    Stages { stages: Vec<SemiMeasureStage<Dyadic>> },
    /// Stage `s` is `(1 − 2^{-s})` times the target.
    Ramp { target: SemiMeasureStage<Dyadic> },
    InfimumSequence { r: Vec<Vec<Dyadic>>, depth: u32 },
    Induced { functional: MonotoneFunctional, depth: u32 },
    EverythingMlr { families: Vec<StagedFamily> },
    Tilt { inner: Box<Generator> },
    Mixture {
        family: Vec<Generator>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<Dyadic>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("a stage list must not be empty")]
    NoStages,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

/// A validated [`Generator`]; every stage it produces is well formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Generator", into = "Generator")]
pub struct LeftCeSemiMeasure {
    spec: Generator,
}

impl TryFrom<Generator> for LeftCeSemiMeasure {
    type Error = GeneratorError;

    fn try_from(spec: Generator) -> Result<Self, Self::Error> {
        LeftCeSemiMeasure::new(spec)
    }
}

impl From<LeftCeSemiMeasure> for Generator {
    fn from(g: LeftCeSemiMeasure) -> Self {
        g.spec
    }
}

impl LeftCeSemiMeasure {
    pub fn new(spec: Generator) -> Result<Self, GeneratorError> {
        // past the horizon every listed sequence repeats its last entry, so
        // these stages exercise every fallible step
        for s in 0..=horizon(&spec) {
            try_stage(&spec, s)?;
        }
        Ok(LeftCeSemiMeasure { spec })
    }

    pub fn constant(stage: SemiMeasureStage<Dyadic>) -> Self {
        LeftCeSemiMeasure {
            spec: Generator::Constant { stage },
        }
    }

    pub fn spec(&self) -> &Generator {
        &self.spec
    }
}

fn horizon(spec: &Generator) -> u32 {
    match spec {
        Generator::Stages { stages } => stages.len() as u32,
        Generator::InfimumSequence { r, .. } => r.iter().map(|row| row.len() as u32).max().unwrap_or(0),
        Generator::Tilt { inner } => horizon(inner),
        Generator::Mixture { family, .. } => family.iter().map(horizon).max().unwrap_or(0),
        _ => 0,
    }
}

fn try_stage(spec: &Generator, s: u32) -> Result<SemiMeasureStage<Dyadic>, GeneratorError> {
    Ok(match spec {
        Generator::Constant { stage } => stage.clone(),
        Generator::Stages { stages } => stages
            .get((s as usize).min(stages.len().saturating_sub(1)))
            .ok_or(GeneratorError::NoStages)?
            .clone(),
        Generator::Ramp { target } => target
            .scaled(&(Dyadic::from_integer(1) - Dyadic::pow2_neg(s)))
            .with_strict(false),
        Generator::InfimumSequence { r, depth } => from_infimum_sequence(r, s, *depth)?,
        Generator::Induced { functional, depth } => functional.induced_semimeasure(s, *depth),
        Generator::EverythingMlr { families } => everything_mlr_builder(families, s),
        Generator::Tilt { inner } => tilt_by_ones(&try_stage(inner, s)?),
        Generator::Mixture { family, weights } => {
            let members = family
                .iter()
                .map(|g| try_stage(g, s))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&dyn StagedSemiMeasure<Dyadic>> =
                members.iter().map(|m| m as &dyn StagedSemiMeasure<Dyadic>).collect();
            mixture(&refs, weights.as_deref(), 0)?
        }
    })
}

impl StagedSemiMeasure<Dyadic> for LeftCeSemiMeasure {
    fn stage_at(&self, s: u32) -> SemiMeasureStage<Dyadic> {
        // the same checks ran at construction and do not depend on the stage
        try_stage(&self.spec, s).expect("validated generator")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semimeasure::dirac_on_ones;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn sample() -> Vec<LeftCeSemiMeasure> {
        let lambda = SemiMeasureStage::<Dyadic>::lebesgue();
        vec![
            LeftCeSemiMeasure::constant(lambda.clone()),
            LeftCeSemiMeasure::new(Generator::Ramp { target: lambda.clone() }).unwrap(),
            LeftCeSemiMeasure::new(Generator::InfimumSequence {
                r: vec![vec![d("1/2"), d("1")], vec![d("1/4"), d("3/4")], vec![d("1/2")]],
                depth: 3,
            })
            .unwrap(),
            LeftCeSemiMeasure::new(Generator::Induced {
                functional: MonotoneFunctional::identity(5),
                depth: 5,
            })
            .unwrap(),
            LeftCeSemiMeasure::new(Generator::Mixture {
                family: vec![
                    Generator::Tilt {
                        inner: Box::new(Generator::Ramp { target: lambda }),
                    },
                    Generator::Constant { stage: dirac_on_ones() },
                ],
                weights: None,
            })
            .unwrap(),
        ]
    }

    #[test]
    fn stages_are_monotone_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in sample() {
            let probes: Vec<(BinString, u32)> = (0..200)
                .map(|_| {
                    let len = rng.gen_range(0..7);
                    let value = rng.gen_range(0..1u64 << len);
                    (BinString::from_index(value, len), rng.gen_range(0..8))
                })
                .collect();
            assert_eq!(spot_check_monotone(&g, probes), Ok(()));
            assert_eq!(g.stage_at(3), g.stage_at(3));
            for s in 0..6 {
                assert!(g.stage_at(s).validate().is_ok());
            }
        }
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        for g in sample() {
            let text = serde_json::to_string(&g).unwrap();
            let back: LeftCeSemiMeasure = serde_json::from_str(&text).unwrap();
            assert_eq!(back, g);
        }
        let bad = r#"{"kind":"infimum_sequence","r":[["3/2"]],"depth":2}"#;
        assert!(serde_json::from_str::<LeftCeSemiMeasure>(bad).is_err());
        let late = r#"{"kind":"infimum_sequence","r":[["1/2","3/2"]],"depth":2}"#;
        assert!(serde_json::from_str::<LeftCeSemiMeasure>(late).is_err());
        let empty = r#"{"kind":"stages","stages":[]}"#;
        assert!(serde_json::from_str::<LeftCeSemiMeasure>(empty).is_err());
    }

    #[test]
    fn detects_decrease() {
        let shrinking = |s: u32| SemiMeasureStage::<Dyadic>::lebesgue().scaled(&Dyadic::pow2_neg(s));
        assert!(spot_check_monotone(&shrinking, [(BinString::empty(), 0)]).is_err());
    }
}
