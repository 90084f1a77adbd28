//! Input files: JSON objects tagged with a `"type"` field.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use semimeasure::functional::Pair;
use semimeasure::{
    Dyadic, GeneralizedTest, Generator, LeftCeSemiMeasure, MlTest, MonotoneFunctional, SemiMeasureStage, StagedFamily,
};

use crate::CliError;

/// Pairs as written, before the consistency check.
#[derive(Debug, Deserialize)]
pub struct RawFunctional {
    pub stages: Vec<Vec<Pair>>,
}

#[derive(Debug)]
pub enum Document {
    Semimeasure(SemiMeasureStage<Dyadic>),
    Generator(Generator),
    Functional(RawFunctional),
    MlTest(MlTest<Dyadic>),
    GeneralizedTest(GeneralizedTest<Dyadic>),
    StagedFamily(StagedFamily),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Semimeasure(_) => "semimeasure",
            Document::Generator(_) => "generator",
            Document::Functional(_) => "functional",
            Document::MlTest(_) => "ml_test",
            Document::GeneralizedTest(_) => "generalized_test",
            Document::StagedFamily(_) => "staged_family",
        }
    }
}

fn typed<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        CliError::Parse(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    let kind = value
        .as_object_mut()
        .and_then(|m| m.remove("type"))
        .ok_or_else(|| CliError::Parse(format!("{}: expected an object with a \"type\" field", path.display())))?;
    let doc = match kind.as_str() {
        Some("semimeasure") => Document::Semimeasure(typed(path, value)?),
        Some("generator") => Document::Generator(typed(path, value)?),
        Some("functional") => Document::Functional(typed(path, value)?),
        Some("ml_test") => Document::MlTest(typed(path, value)?),
        Some("generalized_test") => Document::GeneralizedTest(typed(path, value)?),
        Some("staged_family") => Document::StagedFamily(typed(path, value)?),
        _ => {
            return Err(CliError::Parse(format!("{}: unknown document type {kind}", path.display())));
        }
    };
    Ok(doc)
}

fn wrong_kind(path: &Path, expected: &str, doc: &Document) -> CliError {
    CliError::Parse(format!("{}: expected {expected}, found {}", path.display(), doc.kind()))
}

/// A semi-measure or generator document as a validated left-c.e. semi-measure.
pub fn load_staged(path: &Path) -> Result<LeftCeSemiMeasure, CliError> {
    match load(path)? {
        Document::Semimeasure(rho) => {
            rho.validate()
                .map_err(|v| CliError::Precondition(format!("{}: {v}", path.display())))?;
            Ok(LeftCeSemiMeasure::constant(rho))
        }
        Document::Generator(g) => {
            LeftCeSemiMeasure::new(g).map_err(|e| CliError::Precondition(format!("{}: {e}", path.display())))
        }
        other => Err(wrong_kind(path, "a semimeasure or generator", &other)),
    }
}

pub fn load_functional(path: &Path) -> Result<MonotoneFunctional, CliError> {
    match load(path)? {
        Document::Functional(raw) => MonotoneFunctional::from_stages(raw.stages)
            .map_err(|e| CliError::Precondition(format!("{}: {e}", path.display()))),
        other => Err(wrong_kind(path, "a functional", &other)),
    }
}

pub fn load_ml_test(path: &Path) -> Result<MlTest<Dyadic>, CliError> {
    match load(path)? {
        Document::MlTest(t) => Ok(t),
        other => Err(wrong_kind(path, "an ml_test", &other)),
    }
}
