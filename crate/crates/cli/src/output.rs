use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command result in both renderings. The table is what CSV prints.
pub struct Output {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.json).expect("JSON values serialize");
                bytes.push(b'\n');
                Ok(bytes)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let failed = |e: csv::Error| CliError::Io(e.to_string());
                w.write_record(&self.header).map_err(failed)?;
                for row in &self.rows {
                    w.write_record(row).map_err(failed)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
