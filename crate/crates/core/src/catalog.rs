//! Named presentations and the reference computations the command line reproduces.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::functional::{hat_extend, shen_pair};
use crate::semimeasure::{complete_to_measure, dirac_on_ones, dirac_on_spine, Component, SemiMeasureStage, TailRule};
use crate::staged::{Generator, LeftCeSemiMeasure, StagedSemiMeasure};
use crate::strings::BinString;
use crate::trim::derived_measure;

/// `ρ(σ) = 4^{-|σ|}`: all mass eventually leaks, so `ρ̄ = 0`.
pub fn example_one() -> SemiMeasureStage<Dyadic> {
    SemiMeasureStage::geometric(Dyadic::pow2_neg(2))
}

/// `ρ(σ) = λ(σ)/2 + 2^{-2|σ|-1}`, with `ρ̄ = λ/2`.
pub fn example_two() -> SemiMeasureStage<Dyadic> {
    let half = Dyadic::pow2_neg(1);
    SemiMeasureStage::new(
        vec![
            Component::root(half.clone(), Dyadic::from_integer(1), TailRule::UniformSplit),
            Component::root(half, Dyadic::from_integer(1), TailRule::geometric(Dyadic::pow2_neg(2))),
        ],
        true,
    )
}

/// A fixed list of left-c.e. semi-measures, cycled to the requested length,
/// used to build finite stand-ins for a universal mixture.
pub fn default_family(size: usize) -> Vec<LeftCeSemiMeasure> {
    let lambda = SemiMeasureStage::<Dyadic>::lebesgue();
    let half = Dyadic::pow2_neg(1);
    let base = [
        Generator::Constant { stage: lambda.clone() },
        Generator::Constant { stage: example_one() },
        Generator::Constant { stage: example_two() },
        Generator::Constant { stage: dirac_on_ones() },
        Generator::Constant {
            stage: dirac_on_spine(false),
        },
        Generator::Ramp { target: lambda.clone() },
        Generator::Tilt {
            inner: Box::new(Generator::Constant { stage: lambda }),
        },
        Generator::InfimumSequence {
            r: vec![
                vec![Dyadic::from_integer(1)],
                vec![half.clone(), Dyadic::pow2_neg(2) * Dyadic::from_integer(3)],
                vec![half],
            ],
            depth: 3,
        },
    ];
    base.iter()
        .cycle()
        .take(size)
        .map(|g| LeftCeSemiMeasure::new(g.clone()).expect("catalog generators are valid"))
        .collect()
}

pub const DEFAULT_FAMILY_SIZE: usize = 8;

/// Stage approximations of a left-c.e. real, used for the pair-of-functionals example.
pub fn sample_omega() -> Vec<Dyadic> {
    ["0", "1/4", "1/2", "5/8", "5/8", "11/16", "3/4"]
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect()
}

/// One line of the reference table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExampleRow {
    pub construction: String,
    pub expected: String,
    pub computed: String,
    #[serde(rename = "match")]
    pub matches: bool,
}

impl ExampleRow {
    fn new(construction: &str, expected: &str, computed: String) -> Self {
        ExampleRow {
            construction: construction.to_string(),
            matches: expected == computed,
            expected: expected.to_string(),
            computed,
        }
    }
}

/// `ρ̄` of `ρ`, checked against `factor · λ` on every string of length `≤ depth`;
/// reports the first disagreement.
fn trim_against_lebesgue(rho: &SemiMeasureStage<Dyadic>, factor: &Dyadic, depth: usize) -> Result<(), String> {
    for sigma in BinString::all_up_to(depth) {
        let r = derived_measure(rho, &sigma);
        let expected = factor.clone() * Dyadic::pow2_neg(sigma.len() as u32);
        if !r.stabilized || r.value != expected {
            return Err(format!("{} at {sigma:?}", r.value));
        }
    }
    Ok(())
}

fn max_difference(pairs: impl Iterator<Item = (Dyadic, Dyadic)>) -> Dyadic {
    pairs
        .map(|(a, b)| if a >= b { a - b } else { b - a })
        .fold(Dyadic::from_integer(0), std::cmp::max)
}

/// Recompute each reference construction on strings of length `≤ depth`.
pub fn reference_table(depth: usize) -> Vec<ExampleRow> {
    let mut rows = Vec::new();
    let zero = Dyadic::from_integer(0).to_string();

    let computed = match trim_against_lebesgue(&example_one(), &Dyadic::from_integer(0), depth) {
        Ok(()) => zero.clone(),
        Err(e) => e,
    };
    rows.push(ExampleRow::new("example1-trim", &zero, computed));

    let computed = match trim_against_lebesgue(&example_two(), &Dyadic::pow2_neg(1), depth) {
        Ok(()) => "1/2 · λ(σ)".to_string(),
        Err(e) => e,
    };
    rows.push(ExampleRow::new("example2-trim", "1/2 · λ(σ)", computed));

    let computed = match complete_to_measure(&example_one(), depth as u32) {
        Ok(mu) => {
            let gap = max_difference(
                BinString::all_up_to(depth).map(|s| (mu.eval(&s), Dyadic::pow2_neg(s.len() as u32))),
            );
            if gap == Dyadic::from_integer(0) {
                "λ".to_string()
            } else {
                format!("differs from λ by up to {gap}")
            }
        }
        Err(e) => e.to_string(),
    };
    rows.push(ExampleRow::new("completion-geometric", "λ", computed));

    let omega = sample_omega();
    let (phi, psi) = shen_pair(&omega).expect("sample approximations are valid");
    let hat = hat_extend(&phi, depth);
    let stages = omega.len() as u32;
    let gap = max_difference((0..stages).flat_map(|s| {
        let lp = phi.induced_semimeasure(s, depth as u32);
        let lh = hat.induced_semimeasure(s, depth as u32);
        BinString::all_up_to(depth)
            .map(move |t| (lh.eval(&t), (lp.eval(&t) + Dyadic::pow2_neg(t.len() as u32)).half()))
    }));
    rows.push(ExampleRow::new("hat-extension", &zero, gap.to_string()));

    let gap = max_difference((0..stages).flat_map(|s| {
        let lp = phi.induced_semimeasure(s, depth as u32);
        let lq = psi.induced_semimeasure(s, depth as u32);
        BinString::all_up_to(depth).map(move |t| (lp.eval(&t), lq.eval(&t)))
    }));
    rows.push(ExampleRow::new(&format!("shen-pair-depth-{depth}"), &zero, gap.to_string()));

    rows
}

/// Every member of the default family, evaluated at stage `s`.
pub fn default_family_at(size: usize, s: u32) -> Vec<SemiMeasureStage<Dyadic>> {
    default_family(size).iter().map(|g| g.stage_at(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semimeasure::{check_domination, mixture};

    #[test]
    fn reference_rows_all_match() {
        let rows = reference_table(6);
        assert_eq!(rows.len(), 5);
        for row in &rows {
            assert!(row.matches, "{row:?}");
        }
        assert_eq!(rows[1].computed, "1/2 · λ(σ)");
        assert_eq!(rows[4].construction, "shen-pair-depth-6");
    }

    #[test]
    fn family_mixture_dominates() {
        let members = default_family_at(DEFAULT_FAMILY_SIZE, 4);
        let refs: Vec<&dyn StagedSemiMeasure<Dyadic>> =
            members.iter().map(|m| m as &dyn StagedSemiMeasure<Dyadic>).collect();
        let m = mixture(&refs, None, 0).unwrap();
        assert!(m.validate().is_ok());
        for (e, member) in members.iter().enumerate() {
            assert!(member.validate().is_ok());
            assert!(check_domination(member, &Dyadic::pow2_neg(e as u32 + 1), &m, 6).is_ok());
        }
        assert_eq!(default_family(11).len(), 11);
    }
}
