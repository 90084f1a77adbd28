//! Acceptance criteria. Each criterion prints one PASS/FAIL line with its
//! elapsed time against a fixed bound; the process exits non-zero if any fail.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semimeasure::catalog::{example_one, example_two};
use semimeasure::functional::{from_semimeasure, shen_pair, AllocationConfig};
use semimeasure::mltest::{intersect_tests, ones_prefix_filter, pullback_test, shift_for_domination};
use semimeasure::semimeasure::{complete_to_measure, everything_mlr_builder, mixture, tilt_by_ones};
use semimeasure::strings::extend_set;
use semimeasure::trim::{
    decode_atom, derived_measure, lebesgue_like_check, open_set_derived, partial_trim, DecodeError, LebesgueLike,
};
use semimeasure::{
    BinString, Component, Dyadic, MlTest, PrefixFreeStringSet, SemiMeasureStage, StagedFamily, StagedSemiMeasure,
    TailRule,
};

type Outcome = Result<(), String>;

/// Number, name, time bound in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d(num: u64, exp: u32) -> Dyadic {
    Dyadic::new(num, exp)
}

fn one() -> Dyadic {
    Dyadic::one()
}

fn zero() -> Dyadic {
    Dyadic::zero()
}

fn random_string(rng: &mut ChaCha8Rng, min: usize, max: usize) -> BinString {
    let len = rng.gen_range(min..=max);
    BinString::from_bits((0..len).map(|_| rng.gen_bool(0.5)))
}

/// A super-additive table of integer units in BFS order. Each node hands its
/// value to its children either exactly or with a random loss.
fn random_units(rng: &mut ChaCha8Rng, depth: u32, root: u64) -> Vec<u64> {
    let size = (1usize << (depth + 1)) - 1;
    let mut t = vec![0u64; size];
    t[0] = root;
    for i in 0..size {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        if r >= size {
            break;
        }
        let v = t[i];
        let left = rng.gen_range(0..=v);
        let right = if rng.gen_bool(0.5) { v - left } else { rng.gen_range(0..=v - left) };
        t[l] = left;
        t[r] = right;
    }
    t
}

fn to_table(units: &[u64], exp: u32) -> Vec<Dyadic> {
    units.iter().map(|&u| d(u, exp)).collect()
}

fn random_tail(rng: &mut ChaCha8Rng) -> TailRule<Dyadic> {
    match rng.gen_range(0..7) {
        0 => TailRule::Vanish,
        1 => TailRule::UniformSplit,
        2 => TailRule::geometric(zero()),
        3 => TailRule::geometric(d(1, 3)),
        4 => TailRule::geometric(d(1, 2)),
        5 => TailRule::spine(false),
        _ => TailRule::spine(true),
    }
}

/// A strict single-component presentation with values in units of `2^{-exp}`.
fn random_strict(rng: &mut ChaCha8Rng, depth: u32, exp: u32, tail: TailRule<Dyadic>) -> SemiMeasureStage<Dyadic> {
    let units = random_units(rng, depth, 1 << exp);
    let c = Component::new(one(), depth, to_table(&units, exp), tail).expect("table length matches depth");
    SemiMeasureStage::single(c, true)
}

fn check_valid(rho: &SemiMeasureStage<Dyadic>) -> Outcome {
    rho.validate().map_err(|v| format!("generated presentation is invalid: {v:?}"))
}

// ---------------------------------------------------------------- criterion 1

fn example_one_trim() -> Outcome {
    let rho = example_one();
    for n in 0..=20usize {
        let v = partial_trim(&rho, &BinString::empty(), n).map_err(|e| e.to_string())?;
        ensure(v == d(1, n as u32), || format!("partial_trim(ε, {n}) = {v}"))?;
        if n <= 10 {
            // oracle: the level sum by direct evaluation
            let brute = BinString::all_of_length(n).fold(zero(), |acc, s| acc + rho.eval(&s));
            ensure(brute == v, || format!("level {n}: direct sum {brute} vs {v}"))?;
        }
    }
    for sigma in BinString::all_up_to(6) {
        let r = derived_measure(&rho, &sigma);
        ensure(r.stabilized && r.value.is_zero(), || format!("ρ̄({sigma}) = {}", r.value))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 2

fn example_two_trim() -> Outcome {
    let rho = example_two();
    for sigma in BinString::all_up_to(6) {
        let r = derived_measure(&rho, &sigma);
        let expected = d(1, sigma.len() as u32 + 1);
        ensure(r.stabilized && r.value == expected, || {
            format!("ρ̄({sigma}) = {}, expected {expected}", r.value)
        })?;
        // oracle: a level sum exceeds ρ̄ by the geometric part still in flight
        let n = sigma.len() + 6;
        let level = BinString::all_of_length(6).fold(zero(), |acc, w| acc + rho.eval(&sigma.concat(&w)));
        let leak = d(1, (2 * n + 1) as u32) * Dyadic::from_integer(1u64 << 6);
        ensure(level == expected.clone() + leak, || format!("level {n} sum above {sigma} is {level}"))?;
    }
    match lebesgue_like_check(&rho, 6) {
        LebesgueLike::Alpha { alpha } if alpha == d(1, 1) => Ok(()),
        other => Err(format!("lebesgue_like_check returned {other:?}")),
    }
}

// ---------------------------------------------------------------- criterion 3

fn completion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..200 {
        let tail = match case % 3 {
            0 => TailRule::Vanish,
            1 => TailRule::UniformSplit,
            _ => TailRule::geometric(d(1, 2)),
        };
        let rho = random_strict(&mut rng, 5, 10, tail);
        check_valid(&rho)?;
        let mu = complete_to_measure(&rho, 5).map_err(|e| format!("case {case}: {e:?}"))?;
        ensure(mu.eval(&BinString::empty()) == one(), || format!("case {case}: μ(ε) ≠ 1"))?;
        for sigma in BinString::all_up_to(7) {
            let m = mu.eval(&sigma);
            let sum = mu.eval(&sigma.child(false)) + mu.eval(&sigma.child(true));
            ensure(m == sum, || format!("case {case}: not additive at {sigma}: {m} vs {sum}"))?;
            let r = rho.eval(&sigma);
            ensure(m >= r, || format!("case {case}: μ({sigma}) = {m} < ρ = {r}"))?;
        }
    }
    let mu = complete_to_measure(&example_one(), 5).map_err(|e| format!("{e:?}"))?;
    for sigma in BinString::all_up_to(8) {
        let m = mu.eval(&sigma);
        ensure(m == d(1, sigma.len() as u32), || format!("completion of 4^-|σ| at {sigma} is {m}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 4

fn shen() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..50 {
        let len = rng.gen_range(1..=12usize);
        let exp = rng.gen_range(0..=12u32);
        let mut units: Vec<u64> = (0..len).map(|_| rng.gen_range(0..(1u64 << exp))).collect();
        units.sort_unstable();
        let omega: Vec<Dyadic> = units.iter().map(|&u| d(u, exp)).collect();
        let (phi, psi) = shen_pair(&omega).map_err(|e| format!("case {case}: {e}"))?;
        let max_out = phi
            .all_pairs()
            .chain(psi.all_pairs())
            .map(|p| p.output.len())
            .max()
            .unwrap_or(0);
        let depth = max_out as u32 + 1;
        for s in 0..len as u32 {
            let lp = phi.induced_semimeasure(s, depth);
            let lq = psi.induced_semimeasure(s, depth);
            let (tp, tq) = (lp.table(depth), lq.table(depth));
            if let Some(i) = (0..tp.len()).find(|&i| tp[i] != tq[i]) {
                return Err(format!(
                    "case {case}, stage {s}: λ_Φ and λ_Ψ differ at {}",
                    BinString::from_table_index(i)
                ));
            }
            for (i, v) in tp.iter().enumerate() {
                let sigma = BinString::from_table_index(i);
                if sigma.bits().iter().any(|&b| b) && !v.is_zero() {
                    return Err(format!("case {case}, stage {s}: λ_Φ({sigma}) = {v} off the 0-spine"));
                }
            }
            // past the table both vanish
            let deep = BinString::zeros(depth as usize + 1);
            ensure(lp.eval(&deep).is_zero() && lq.eval(&deep).is_zero(), || {
                format!("case {case}: mass beyond the longest output")
            })?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 5

/// Stage `t` keeps the table on strings of length `≤ t` and zeroes the rest.
fn depth_cut(rho: &SemiMeasureStage<Dyadic>, depth: u32, t: u32) -> SemiMeasureStage<Dyadic> {
    let c = Component::tabulate(one(), depth, TailRule::Vanish, |s| {
        if s.len() as u32 <= t {
            rho.eval(s)
        } else {
            zero()
        }
    });
    SemiMeasureStage::single(c, true)
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = AllocationConfig::default();
    for case in 0..100 {
        let depth = rng.gen_range(0..=5u32);
        let exp = rng.gen_range(0..=8u32);
        let rho = random_strict(&mut rng, depth, exp, TailRule::Vanish);
        check_valid(&rho)?;
        let staged = |t: u32| depth_cut(&rho, depth, t);
        let s = depth;
        let phi = from_semimeasure(&staged, s, depth, &config).map_err(|e| format!("case {case}: {e}"))?;
        for t in 0..=s {
            let want = staged.stage_at(t).table(depth);
            let got = phi.induced_semimeasure(t, depth).table(depth);
            if let Some(i) = (0..want.len()).find(|&i| want[i] != got[i]) {
                return Err(format!(
                    "case {case}, stage {t}: at {} induced {} vs {}",
                    BinString::from_table_index(i),
                    got[i],
                    want[i]
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 6

struct Tree {
    depth: u32,
    units: Vec<u64>,
    keeps_mass: bool,
}

/// Number of additive unit assignments below `ρ` in the subtree at `i`, by root value.
fn count_below(tree: &Tree, i: usize) -> Vec<u128> {
    let cap = tree.units[i] as usize;
    let frontier_start = (1usize << tree.depth) - 1;
    if i >= frontier_start {
        return (0..=cap).map(|v| u128::from(v == 0 || tree.keeps_mass)).collect();
    }
    let left = count_below(tree, 2 * i + 1);
    let right = count_below(tree, 2 * i + 2);
    (0..=cap)
        .map(|v| {
            (0..=v)
                .filter(|&a| a < left.len() && v - a < right.len())
                .map(|a| left[a] * right[v - a])
                .sum()
        })
        .collect()
}

/// Every additive `μ ≤ ρ` in units, listed explicitly. Below the frontier
/// `μ` splits uniformly, so it stays under a tail that keeps mass and must
/// vanish under one that leaks.
fn enumerate_below(tree: &Tree) -> Vec<Vec<u64>> {
    fn go(tree: &Tree, i: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let size = tree.units.len();
        if i == size {
            out.push(cur.clone());
            return;
        }
        let (l, r) = (2 * i + 1, 2 * i + 2);
        if r >= size {
            if cur[i] == 0 || tree.keeps_mass {
                go(tree, i + 1, cur, out);
            }
            return;
        }
        let v = cur[i];
        for a in 0..=v {
            if a <= tree.units[l] && v - a <= tree.units[r] {
                cur[l] = a;
                cur[r] = v - a;
                go(tree, i + 1, cur, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u64; tree.units.len()];
    for root in 0..=tree.units[0] {
        cur[0] = root;
        go(tree, 0, &mut cur, &mut out);
    }
    out
}

fn maximality() -> Outcome {
    const CANDIDATE_LIMIT: u128 = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut trees = 0;
    let mut total = 0usize;
    while trees < 40 {
        let depth = rng.gen_range(1..=4u32);
        let units = random_units(&mut rng, depth, 32);
        let (tail, keeps_mass) = match rng.gen_range(0..3) {
            0 => (TailRule::UniformSplit, true),
            1 => (TailRule::geometric(d(1, 2)), false),
            _ => (TailRule::Vanish, false),
        };
        let tree = Tree { depth, units, keeps_mass };
        let count: u128 = count_below(&tree, 0).iter().sum();
        if count > CANDIDATE_LIMIT {
            continue;
        }
        trees += 1;
        let c = Component::new(one(), depth, to_table(&tree.units, 5), tail).expect("table length");
        let rho = SemiMeasureStage::single(c, true);
        check_valid(&rho)?;
        let candidates = enumerate_below(&tree);
        ensure(candidates.len() as u128 == count, || "enumeration disagrees with its count".into())?;
        total += candidates.len();

        let strings: Vec<BinString> = BinString::all_up_to(depth as usize).collect();
        let trims: Vec<_> = strings.iter().map(|s| derived_measure(&rho, s)).collect();
        let mut best = vec![0u64; strings.len()];
        for mu in &candidates {
            // each candidate really lies below ρ, deep below the frontier as well
            for (i, sigma) in strings.iter().enumerate().filter(|(_, s)| s.len() == depth as usize) {
                let deep = sigma.concat(&BinString::zeros(12));
                let mu_deep = d(mu[i], 5 + 12);
                ensure(mu_deep <= rho.eval(&deep), || format!("candidate exceeds ρ below {sigma}"))?;
            }
            for (i, r) in trims.iter().enumerate() {
                ensure(r.stabilized && d(mu[i], 5) <= r.value, || {
                    format!("μ({}) = {} exceeds ρ̄ = {}", strings[i], d(mu[i], 5), r.value)
                })?;
                best[i] = best[i].max(mu[i]);
            }
        }
        for (i, sigma) in strings.iter().enumerate() {
            // the bound is attained: ρ̄ is itself one of the candidates
            ensure(d(best[i], 5) == trims[i].value, || format!("max candidate at {sigma} is below ρ̄"))?;
        }
        for sigma in BinString::all_up_to(depth as usize + 2) {
            let v = derived_measure(&rho, &sigma).value;
            let sum = derived_measure(&rho, &sigma.child(false)).value + derived_measure(&rho, &sigma.child(true)).value;
            ensure(v == sum, || format!("ρ̄ not additive at {sigma}"))?;
        }
    }
    ensure(total > 0, || "no candidates enumerated".into())
}

// ---------------------------------------------------------------- criterion 7

fn open_sets() -> Outcome {
    const M_MAX: usize = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let count = rng.gen_range(1..=3);
        let mut weight_units: Vec<u64> = (0..count).map(|_| rng.gen_range(0..=8u64)).collect();
        while weight_units.iter().sum::<u64>() > 8 {
            let i = weight_units.iter().position(|&w| w > 0).expect("positive sum");
            weight_units[i] -= 1;
        }
        let mut components = Vec::new();
        for &w in &weight_units {
            let depth = rng.gen_range(0..=4u32);
            let units = random_units(&mut rng, depth, 64);
            let tail = random_tail(&mut rng);
            components.push(Component::new(d(w, 3), depth, to_table(&units, 6), tail).expect("table length"));
        }
        let rho = SemiMeasureStage::new(components.clone(), false);
        check_valid(&rho)?;
        let set = PrefixFreeStringSet::normalize((0..rng.gen_range(1..=4)).map(|_| random_string(&mut rng, 0, 6)));
        let result = open_set_derived(&rho, &set, M_MAX);

        for m in 0..M_MAX {
            ensure(result.masses[m] >= result.masses[m + 1], || format!("case {case}: increase at m = {m}"))?;
        }
        for m in 0..=6 {
            let brute = rho.set_mass(&extend_set(&set, m));
            ensure(brute == result.masses[m], || format!("case {case}: ρ(E^{m}) = {brute} vs {}", result.masses[m]))?;
        }

        // oracle: only tails that keep all mass contribute, with their weighted frontier sums
        let mut limit = zero();
        for c in &components {
            let (b0, b1) = c.tail().factors();
            if b0 + b1 != one() {
                continue;
            }
            let single = SemiMeasureStage::single(c.clone(), false);
            for tau in set.iter() {
                let level = (c.depth() as usize).max(tau.len());
                let sum = BinString::all_of_length(level - tau.len())
                    .fold(zero(), |acc, w| acc + single.eval(&tau.concat(&w)));
                limit = limit + sum;
            }
        }
        ensure(result.stabilized && result.limit == limit, || {
            format!("case {case}: limit {} vs oracle {limit}", result.limit)
        })?;

        let frontier = rho.frontier_depth() as usize;
        let last = result.masses[M_MAX].clone();
        ensure(last >= limit.clone(), || format!("case {case}: masses fall below the limit"))?;
        let gap = last - limit.clone();
        ensure(gap <= d(1, (M_MAX - frontier) as u32), || format!("case {case}: gap {gap} at m = {M_MAX}"))?;
        let leaks_geometrically = components.iter().any(|c| {
            let (b0, b1) = c.tail().factors();
            !c.weight().is_zero() && !(b0.is_zero() && b1.is_zero()) && b0 + b1 != one()
        });
        if !leaks_geometrically {
            // a vanishing tail drops its frontier mass one level further down
            for m in frontier + 1..=M_MAX {
                ensure(result.masses[m] == limit, || format!("case {case}: not exact at m = {m}"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 8

/// A valid test over `base`: strings are added to level `i` while its mass stays `≤ 2^{-i}`.
fn random_test(
    rng: &mut ChaCha8Rng,
    base: &SemiMeasureStage<Dyadic>,
    first_level: u32,
    count: u32,
    max_len: usize,
    prefix: &BinString,
) -> MlTest<Dyadic> {
    let levels = (first_level..first_level + count)
        .map(|i| {
            let mut members: Vec<BinString> = Vec::new();
            for _ in 0..6 {
                let x = prefix.concat(&random_string(rng, 0, max_len));
                let mut trial = members.clone();
                trial.push(x);
                if base.set_mass(&PrefixFreeStringSet::normalize(trial.clone())) <= d(1, i) {
                    members = trial;
                }
            }
            PrefixFreeStringSet::normalize(members)
        })
        .collect();
    MlTest::new(base.clone(), first_level, levels)
}

fn check_bounds(t: &MlTest<Dyadic>, what: &str) -> Outcome {
    t.validate().map_err(|e| format!("{what}: {e:?}"))?;
    for (k, set) in t.levels.iter().enumerate() {
        let i = t.first_level + k as u32;
        let mass = set.iter().fold(zero(), |acc, s| acc + t.base.eval(s));
        ensure(mass <= d(1, i), || format!("{what}: level {i} has mass {mass}"))?;
    }
    Ok(())
}

fn test_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let config = AllocationConfig::default();
    for case in 0..200 {
        // pullback along a functional built from a random semi-measure
        let target = random_strict(&mut rng, 3, 6, TailRule::Vanish);
        let phi = from_semimeasure(&target, 0, 3, &config).map_err(|e| format!("case {case}: {e}"))?;
        let base = phi.induced_semimeasure(0, 6);
        let first = rng.gen_range(0..=2);
        let t = random_test(&mut rng, &base, first, 4, 4, &BinString::empty());
        let v = pullback_test(&t, &phi, 0).map_err(|e| format!("pullback case {case}: {e:?}"))?;
        check_bounds(&v, "pullback")?;
        for (u, w) in t.levels.iter().zip(&v.levels) {
            ensure(w.lebesgue() == base.set_mass(u), || format!("pullback case {case}: λ(V) ≠ λ_Φ(U)"))?;
        }

        // shift: ρ ≤ c·M for M = ρ/c + (1 − 1/c)·N
        let k = rng.gen_range(1..=3u32);
        let c = Dyadic::from_integer(1 << k);
        let tail = random_tail(&mut rng);
        let rho = random_strict(&mut rng, 3, 6, tail);
        let tail = random_tail(&mut rng);
        let other = random_strict(&mut rng, 3, 6, tail);
        let weights = [d(1, k), one() - d(1, k)];
        let family: [&dyn StagedSemiMeasure<Dyadic>; 2] = [&rho, &other];
        let m = mixture(&family, Some(&weights), 0).map_err(|e| format!("{e:?}"))?;
        let first = rng.gen_range(0..=4);
        let t = random_test(&mut rng, &m, first, 4, 5, &BinString::empty());
        let shifted = shift_for_domination(&t, &rho, &c).map_err(|e| format!("shift case {case}: {e:?}"))?;
        check_bounds(&shifted, "shift")?;

        // ones-prefix filter over the tilt of a random M
        let tail = random_tail(&mut rng);
        let m = random_strict(&mut rng, 3, 6, tail);
        let j = rng.gen_range(0..=3u32);
        let marker = BinString::ones(j as usize).child(false);
        let tilted = tilt_by_ones(&m);
        let first = rng.gen_range(0..=2);
        let t = random_test(&mut rng, &tilted, first, 5, 4, &marker);
        let filtered = ones_prefix_filter(&t, &m, j).map_err(|e| format!("filter case {case}: {e:?}"))?;
        check_bounds(&filtered, "filter")?;

        // intersection of the levels of a Lebesgue test, against cylinder membership
        let n = rng.gen_range(0..=3usize);
        let lebesgue = SemiMeasureStage::lebesgue();
        let t = random_test(&mut rng, &lebesgue, 0, n as u32 + 1, 10 - n, &BinString::empty());
        let f = intersect_tests(&t.levels, n);
        for x in BinString::all_of_length(10) {
            let expected = t.levels.iter().all(|set| set.covers(&x));
            ensure(f.covers(&x) == expected, || format!("intersection case {case}, n = {n}: disagree at {x}"))?;
        }
        ensure(f.iter().all(|s| s.len() <= 10), || "intersection member longer than 10".into())?;
        check_bounds(&MlTest::new(lebesgue, n as u32, vec![f]), "intersection")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 9

/// A path atom: mass 1 on every prefix of `w`, continuing along `bit^ω`.
fn path_component(weight: Dyadic, w: &BinString, bit: bool) -> Component<Dyadic> {
    Component::tabulate(weight, w.len() as u32, TailRule::spine(bit), |x| {
        if x.is_prefix_of(w) {
            one()
        } else {
            zero()
        }
    })
}

fn atom_decoding() -> Outcome {
    const TABLE: usize = 8;
    const MAX_STAGE: u32 = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..20 {
        let alpha = d(rng.gen_range(1..=5u64), 3);
        let n = rng.gen_range(4..TABLE);
        let w = random_string(&mut rng, TABLE, TABLE);
        let tail_bit = rng.gen_bool(0.5);
        let mut decoy_bits = w.bits()[..n].to_vec();
        decoy_bits.push(!w.bit(n));
        decoy_bits.extend((n + 1..TABLE).map(|_| rng.gen_bool(0.5)));
        let decoy = BinString::from_bits(decoy_bits);
        let background = one() - alpha.clone() - alpha.half();
        let target = SemiMeasureStage::new(
            vec![
                path_component(alpha.clone(), &w, tail_bit),
                path_component(alpha.half(), &decoy, rng.gen_bool(0.5)),
                Component::root(background.clone(), one(), TailRule::UniformSplit),
            ],
            true,
        );
        check_valid(&target)?;
        let staged = |s: u32| target.scaled(&(one() - d(1, s)));

        let atom_bit = |i: usize| if i < TABLE { w.bit(i) } else { tail_bit };
        let seed = BinString::from_bits((0..n).map(atom_bit));
        let expected = BinString::from_bits((n..n + 32).map(atom_bit));

        // certificate: the atom side reaches q by the last stage and nothing off the atom
        // ever does, since off-atom mass is at most α/2 plus the background share
        let q = alpha.clone() * d(7, 3);
        let off_atom = alpha.half() + background * d(1, n as u32 + 1);
        ensure(off_atom < q && q > alpha.half() && q < alpha, || format!("case {case}: certificate fails"))?;
        let bits = decode_atom(&staged, &q, n, &seed, 32, MAX_STAGE).map_err(|e| format!("case {case}: {e}"))?;
        ensure(bits == expected, || format!("case {case}: decoded {bits}, atom continues {expected}"))?;

        for q in [alpha.half(), alpha.clone() * d(1, 2)] {
            match decode_atom(&staged, &q, n, &seed, 32, MAX_STAGE) {
                Err(DecodeError::Ambiguity { prefix, .. }) if prefix == seed => {}
                other => return Err(format!("case {case}: q = {q} gave {other:?}")),
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 10

fn everything_mlr() -> Outcome {
    const STAGES: u32 = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let families: Vec<StagedFamily> = (0..6u32)
        .map(|e| {
            let mut f = StagedFamily::new();
            if e % 3 != 2 {
                for _ in 0..rng.gen_range(1..=4) {
                    f.push(rng.gen_range(0..=STAGES), e + 2, random_string(&mut rng, 1, 8));
                }
            }
            for _ in 0..rng.gen_range(0..=3) {
                f.push(rng.gen_range(0..=STAGES), rng.gen_range(0..=e + 3), random_string(&mut rng, 1, 8));
            }
            f
        })
        .collect();
    let mut nonempty = 0;
    let mut previous: Option<SemiMeasureStage<Dyadic>> = None;
    for s in 0..=STAGES {
        let rho: SemiMeasureStage<Dyadic> = everything_mlr_builder(&families, s);
        check_valid(&rho)?;
        ensure(rho.eval(&BinString::empty()) == one(), || format!("stage {s}: ρ(ε) ≠ 1"))?;
        if let Some(prev) = &previous {
            for sigma in BinString::all_up_to(8) {
                ensure(prev.eval(&sigma) <= rho.eval(&sigma), || format!("stage {s}: drop at {sigma}"))?;
            }
        }
        for (e, family) in families.iter().enumerate() {
            let level = family.normalized_at(e as u32 + 2, s);
            if level.is_empty() {
                continue;
            }
            nonempty += 1;
            let mass = level.iter().fold(zero(), |acc, x| acc + rho.eval(x));
            let bound = d(1, e as u32 + 2);
            ensure(mass > bound, || format!("stage {s}, family {e}: ρ(E) = {mass} ≤ {bound}"))?;
        }
        previous = Some(rho);
    }
    ensure(nonempty > 0, || "no family enumerated anything".into())
}

// ----------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "example 1 trim", 1, example_one_trim),
        (2, "example 2 trim and Lebesgue-like", 1, example_two_trim),
        (3, "completion to a measure", 5, completion),
        (4, "Shen pair agreement", 10, shen),
        (5, "allocation round trip", 30, round_trip),
        (6, "trimming maximality", 60, maximality),
        (7, "open-set level masses", 10, open_sets),
        (8, "test algebra", 30, test_algebra),
        (9, "atom decoding", 5, atom_decoding),
        (10, "everything-MLR mass bounds", 5, everything_mlr),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            ensure(elapsed <= Duration::from_secs(limit), || format!("took longer than {limit} s"))
        });
        match outcome {
            Ok(()) => println!("criterion {n:>2} {name}: PASS ({:.3} s, limit {limit} s)", elapsed.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({:.3} s, limit {limit} s): {e}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
