use std::collections::HashSet;

use thiserror::Error;

use super::{MonotoneFunctional, Pair};
use crate::dyadic::Dyadic;
use crate::strings::BinString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShenError {
    #[error("approximation {index} decreases")]
    Decreasing { index: usize },
    #[error("approximation {index} is not below 1")]
    NotBelowOne { index: usize },
    #[error("no unused string of length {length} is left")]
    PoolExhausted { length: usize },
}

/// The pair `(Φ, Ψ)` built from stage approximations `Ω_0 ≤ Ω_1 ≤ …`.
///
/// At stage `s`, `Φ` enumerates `(Ω_s↾n, 0^n)` for every `n ≤ s`. Each new
/// `Φ`-pair with output `0^n` is mirrored in `Ψ` by the leftmost length-`n`
/// string not yet used for that output, so the two induced semi-measures
/// agree while the domains differ.
pub fn shen_pair(omega: &[Dyadic]) -> Result<(MonotoneFunctional, MonotoneFunctional), ShenError> {
    for (i, w) in omega.iter().enumerate() {
        if !(*w < Dyadic::from_integer(1)) {
            return Err(ShenError::NotBelowOne { index: i });
        }
        if i > 0 && *w < omega[i - 1] {
            return Err(ShenError::Decreasing { index: i });
        }
    }
    let mut seen = HashSet::new();
    let mut used = Vec::<u64>::new();
    let mut phi = Vec::with_capacity(omega.len());
    let mut psi = Vec::with_capacity(omega.len());
    for (s, w) in omega.iter().enumerate() {
        let mut phi_new = Vec::new();
        let mut psi_new = Vec::new();
        for n in 0..=s {
            let prefix = w.binary_prefix(n as u32).expect("checked below one");
            if !seen.insert(prefix.clone()) {
                continue;
            }
            if used.len() <= n {
                used.resize(n + 1, 0);
            }
            if n < 64 && used[n] >= 1u64 << n {
                return Err(ShenError::PoolExhausted { length: n });
            }
            let leftmost = BinString::from_index(used[n], n);
            used[n] += 1;
            phi_new.push(Pair::new(prefix, BinString::zeros(n)));
            psi_new.push(Pair::new(leftmost, BinString::zeros(n)));
        }
        phi.push(phi_new);
        psi.push(psi_new);
    }
    Ok((
        MonotoneFunctional::from_stages_unchecked(phi),
        MonotoneFunctional::from_stages_unchecked(psi),
    ))
}

/// `Φ̂(0X) = Φ(X)` and `Φ̂(1X) = X`, the identity half listed to `depth` at stage 0.
pub fn hat_extend(phi: &MonotoneFunctional, depth: usize) -> MonotoneFunctional {
    let mut stages = phi.prefix_inputs(&BinString::from_bits([false]));
    if stages.is_empty() {
        stages.push(Vec::new());
    }
    let one = BinString::from_bits([true]);
    stages[0].extend(BinString::all_up_to(depth).map(|s| Pair::new(one.concat(&s), s)));
    MonotoneFunctional::from_stages(stages).expect("disjoint halves of consistent functionals")
}

/// `Φ̂(1^e 0 X) = Φ_e(X)`.
pub fn universal_functional(family: &[MonotoneFunctional]) -> MonotoneFunctional {
    let depth = family.iter().map(MonotoneFunctional::stage_count).max().unwrap_or(0);
    let mut stages = vec![Vec::new(); depth];
    for (e, phi) in family.iter().enumerate() {
        let code = BinString::ones(e).child(false);
        for (t, stage) in phi.prefix_inputs(&code).into_iter().enumerate() {
            stages[t].extend(stage);
        }
    }
    MonotoneFunctional::from_stages(stages).expect("members sit on disjoint cylinders")
}
