use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use semimeasure::catalog::{reference_table, sample_omega};
use semimeasure::functional::{
    from_semimeasure, shen_pair, universal_functional, AllocationConfig, AllocationError, DEFAULT_GRANULARITY_CAP,
};
use semimeasure::mltest::TestError;
use semimeasure::semimeasure::Violation;
use semimeasure::trim::{decode_atom, derived_measure, lebesgue_like_check, partial_trim, DecodeError};
use semimeasure::{
    BinString, Dyadic, LeftCeSemiMeasure, MonotoneFunctional, PrefixFreeStringSet, StagedFamily, StagedSemiMeasure,
};

use crate::document::{self, Document};
use crate::output::Output;
use crate::{CliError, GRANULARITY_ENV};

type CommandResult = Result<(Output, u8), CliError>;

fn bin(text: &str, what: &str) -> Result<BinString, CliError> {
    text.parse()
        .map_err(|_| CliError::Parse(format!("{what}: {text:?} is not a binary string")))
}

fn dyadic(text: &str, what: &str) -> Result<Dyadic, CliError> {
    text.trim()
        .parse()
        .map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

fn violation_json(v: &Violation<Dyadic>) -> Value {
    match v {
        Violation::SuperAdditivity {
            node,
            mass,
            left,
            right,
        } => json!({
            "kind": "super_additivity",
            "node": node.to_string(),
            "mass": mass.to_string(),
            "left": left.to_string(),
            "right": right.to_string(),
        }),
        Violation::RootMass { mass, strict } => json!({
            "kind": "root_mass",
            "mass": mass.to_string(),
            "strict": strict,
        }),
        Violation::InvalidTail { component, .. } => json!({"kind": "invalid_tail", "component": component}),
        Violation::Negative { component } => json!({"kind": "negative", "component": component}),
    }
}

fn test_error_json(e: &TestError<Dyadic>) -> Value {
    match e {
        TestError::LevelViolation { level, mass, bound } => json!({
            "kind": "level_violation",
            "level": level,
            "mass": mass.to_string(),
            "bound": bound.to_string(),
        }),
        other => json!({"kind": "other", "message": other.to_string()}),
    }
}

/// Each level must be prefix-free at every stage where it changes.
fn family_antichains(f: &StagedFamily) -> Result<(), (Value, String)> {
    let Some(max_level) = f.max_level() else {
        return Ok(());
    };
    let mut stages: Vec<u32> = f.events.iter().map(|e| e.stage).collect();
    stages.sort_unstable();
    stages.dedup();
    for level in 0..=max_level {
        for &s in &stages {
            if let Err(e) = PrefixFreeStringSet::from_antichain(f.set_at(level, s)) {
                let detail = json!({"kind": "not_prefix_free", "level": level, "stage": s, "message": e.to_string()});
                return Err((detail, format!("level {level} at stage {s}: {e}")));
            }
        }
    }
    Ok(())
}

fn report(kind: &str, outcome: Result<(), (Value, String)>) -> CommandResult {
    let (json, row, code) = match outcome {
        Ok(()) => (json!({"type": kind, "ok": true}), vec![kind.into(), "true".into(), String::new()], 0),
        Err((detail, message)) => (
            json!({"type": kind, "ok": false, "violation": detail}),
            vec![kind.into(), "false".into(), message],
            1,
        ),
    };
    Ok((
        Output {
            json,
            header: vec!["type", "ok", "detail"],
            rows: vec![row],
        },
        code,
    ))
}

pub fn validate(path: &Path) -> CommandResult {
    let doc = document::load(path)?;
    let kind = doc.kind();
    let outcome = match doc {
        Document::Semimeasure(rho) => rho.validate().map_err(|v| (violation_json(&v), v.to_string())),
        Document::Generator(g) => LeftCeSemiMeasure::new(g)
            .map(drop)
            .map_err(|e| (json!({"kind": "generator", "message": e.to_string()}), e.to_string())),
        Document::Functional(raw) => MonotoneFunctional::from_stages(raw.stages)
            .map(drop)
            .map_err(|e| {
                let detail = json!({
                    "kind": "inconsistent",
                    "first": [e.first.input.to_string(), e.first.output.to_string()],
                    "second": [e.second.input.to_string(), e.second.output.to_string()],
                });
                (detail, e.to_string())
            }),
        Document::MlTest(t) => t.validate().map_err(|e| (test_error_json(&e), e.to_string())),
        Document::GeneralizedTest(t) => t.validate().map_err(|e| (test_error_json(&e), e.to_string())),
        Document::StagedFamily(f) => family_antichains(&f),
    };
    report(kind, outcome)
}

pub fn examples(depth: u32) -> CommandResult {
    let rows = reference_table(depth as usize);
    let code = if rows.iter().all(|r| r.matches) { 0 } else { 1 };
    Ok((
        Output {
            json: serde_json::to_value(&rows).expect("rows serialize"),
            header: vec!["construction", "expected", "computed", "match"],
            rows: rows
                .iter()
                .map(|r| vec![r.construction.clone(), r.expected.clone(), r.computed.clone(), r.matches.to_string()])
                .collect(),
        },
        code,
    ))
}

pub fn trim(path: &Path, sigma: &str, depth: u32, stage: u32) -> CommandResult {
    let sigma = bin(sigma, "--sigma")?;
    let rho = document::load_staged(path)?.stage_at(stage);
    let levels = (sigma.len()..=depth as usize)
        .map(|n| partial_trim(&rho, &sigma, n).map(|m| (n, m)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    if levels.is_empty() {
        return Err(CliError::Precondition(format!(
            "--depth {depth} is below the length of {sigma:?}"
        )));
    }
    let derived = derived_measure(&rho, &sigma);
    let json = json!({
        "sigma": sigma.to_string(),
        "stage": stage,
        "levels": levels.iter().map(|(n, m)| json!({"n": n, "mass": m.to_string()})).collect::<Vec<_>>(),
        "derived": {
            "value": derived.value.to_string(),
            "depth": derived.depth,
            "stabilized": derived.stabilized,
        },
        "lebesgue_like": serde_json::to_value(lebesgue_like_check(&rho, depth as usize)).expect("serializes"),
    });
    Ok((
        Output {
            json,
            header: vec!["n", "mass"],
            rows: levels.iter().map(|(n, m)| vec![n.to_string(), m.to_string()]).collect(),
        },
        0,
    ))
}

fn table_output(rho: &semimeasure::DyadicStage, depth: u32, stage: u32) -> Output {
    let rows: Vec<Vec<String>> = BinString::all_up_to(depth as usize)
        .map(|s| vec![s.to_string(), rho.eval(&s).to_string()])
        .collect();
    let values: Vec<Value> = rows.iter().map(|r| json!({"string": r[0], "value": r[1]})).collect();
    Output {
        json: json!({"stage": stage, "depth": depth, "table": values}),
        header: vec!["string", "value"],
        rows,
    }
}

pub fn induce(path: &Path, stage: u32, depth: u32) -> CommandResult {
    let phi = document::load_functional(path)?;
    let rho = phi.induced_semimeasure(stage, depth);
    Ok((table_output(&rho, depth, stage), 0))
}

fn functional_output(phi: &MonotoneFunctional) -> Output {
    let mut json = serde_json::to_value(phi).expect("functionals serialize");
    json.as_object_mut()
        .expect("functionals serialize as objects")
        .insert("type".into(), json!("functional"));
    let rows = (0..phi.stage_count() as u32)
        .flat_map(|t| {
            phi.new_at(t)
                .iter()
                .map(move |p| vec![t.to_string(), p.input.to_string(), p.output.to_string()])
        })
        .collect();
    Output {
        json,
        header: vec!["stage", "input", "output"],
        rows,
    }
}

fn granularity_cap() -> Result<u32, CliError> {
    match std::env::var(GRANULARITY_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{GRANULARITY_ENV}: {text:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_GRANULARITY_CAP),
    }
}

pub fn invert(path: &Path, stage: u32, depth: u32) -> CommandResult {
    let rho = document::load_staged(path)?;
    let config = AllocationConfig {
        granularity_cap: granularity_cap()?,
    };
    let phi = from_semimeasure(&rho, stage, depth, &config).map_err(|e| match e {
        AllocationError::GranularityExceeded { .. } => CliError::Budget(e.to_string()),
        AllocationError::CapTooLarge(_) => CliError::Parse(format!("{GRANULARITY_ENV}: {e}")),
        _ => CliError::Precondition(e.to_string()),
    })?;
    Ok((functional_output(&phi), 0))
}

pub fn atom_decode(path: &Path, q: &str, n: usize, seed: &str, bits: u32, max_stage: u32) -> CommandResult {
    let q = dyadic(q, "--q")?;
    let seed = bin(seed, "--seed")?;
    let rho = document::load_staged(path)?;
    let emitted = decode_atom(&rho, &q, n, &seed, bits as usize, max_stage).map_err(|e| match e {
        DecodeError::BudgetExhausted { .. } => CliError::Budget(e.to_string()),
        _ => CliError::Precondition(e.to_string()),
    })?;
    Ok((
        Output {
            json: json!({"q": q.to_string(), "seed": seed.to_string(), "bits": emitted.to_string()}),
            header: vec!["bits"],
            rows: vec![vec![emitted.to_string()]],
        },
        0,
    ))
}

pub fn shen(omega: Option<&str>, depth: u32) -> CommandResult {
    let omega = match omega {
        Some(list) => list
            .split(',')
            .map(|v| dyadic(v, "--omega"))
            .collect::<Result<Vec<_>, _>>()?,
        None => sample_omega(),
    };
    let (phi, psi) = shen_pair(&omega).map_err(|e| CliError::Precondition(e.to_string()))?;
    let rows: Vec<Vec<String>> = (0..omega.len() as u32)
        .map(|s| {
            let lp = phi.induced_semimeasure(s, depth);
            let lq = psi.induced_semimeasure(s, depth);
            let gap = BinString::all_up_to(depth as usize)
                .map(|t| {
                    let (a, b) = (lp.eval(&t), lq.eval(&t));
                    if a >= b {
                        a - b
                    } else {
                        b - a
                    }
                })
                .fold(Dyadic::from_integer(0), std::cmp::max);
            let domains_differ = phi.pairs_at(s).map(|p| &p.input).ne(psi.pairs_at(s).map(|p| &p.input));
            vec![s.to_string(), gap.to_string(), domains_differ.to_string()]
        })
        .collect();
    let json = json!({
        "omega": omega.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "phi": functional_output(&phi).json,
        "psi": functional_output(&psi).json,
        "stages": rows.iter().map(|r| json!({
            "stage": r[0].parse::<u32>().expect("stage index"),
            "max_difference": r[1],
            "domains_differ": r[2] == "true",
        })).collect::<Vec<_>>(),
    });
    Ok((
        Output {
            json,
            header: vec!["stage", "max_difference", "domains_differ"],
            rows,
        },
        0,
    ))
}

pub fn universal(paths: &[PathBuf]) -> CommandResult {
    let family = paths
        .iter()
        .map(|p| document::load_functional(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((functional_output(&universal_functional(&family)), 0))
}

pub fn passes(path: &Path, prefix: &str) -> CommandResult {
    let prefix = bin(prefix, "--prefix")?;
    let t = document::load_ml_test(path)?;
    let reports = t.passes_at_depth(&prefix);
    Ok((
        Output {
            json: serde_json::to_value(&reports).expect("reports serialize"),
            header: vec!["level", "status", "mass"],
            rows: reports
                .iter()
                .map(|r| {
                    let status = serde_json::to_value(r.status).expect("status serializes");
                    vec![
                        r.level.to_string(),
                        status.as_str().unwrap_or_default().to_string(),
                        r.mass.to_string(),
                    ]
                })
                .collect(),
        },
        0,
    ))
}
