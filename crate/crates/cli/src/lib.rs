//! Batch experiment runner for the `coordwalk` library.
//!
//! One subcommand per experiment family reads an optional TOML
//! configuration, applies flag overrides, runs the experiment and writes a
//! single output file (or standard output) whose header records the tool
//! version, the seed and the SHA-256 of the resolved configuration.

pub mod bench;
pub mod config;
pub mod output;
pub mod reader;
pub mod run;

use std::path::Path;

use serde_json::json;

pub use config::{Command, ExperimentConfig, Format, Resolved};
pub use output::{Provenance, Report, Table};
pub use reader::{parse_output, read_output, ParsedOutput, Payload};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error{}: {message}", location(field, *line, *column))]
    Config {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Run(#[from] coordwalk::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot parse output: {0}")]
    Parse(String),
}

fn location(field: &str, line: usize, column: usize) -> String {
    match (field.is_empty(), line) {
        (true, 0) => String::new(),
        (true, _) => format!(" at line {line}, column {column}"),
        (false, 0) => format!(" in `{field}`"),
        (false, _) => format!(" in `{field}` at line {line}, column {column}"),
    }
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            line: 0,
            column: 0,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Parse(_) => 4,
        }
    }

    /// One-line JSON form written to standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config { .. } => "config",
            CliError::Run(_) => "run",
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
        };
        let mut err = json!({ "kind": kind, "message": self.to_string() });
        if let CliError::Config { field, line, column, .. } = self {
            err["field"] = json!(field);
            err["line"] = json!(line);
            err["column"] = json!(column);
        }
        json!({ "error": err })
    }

    /// Fills in the line of `field` in the source text when known.
    pub fn locate_in(self, text: &str) -> Self {
        match self {
            CliError::Config {
                field,
                line: 0,
                message,
                ..
            } if !field.is_empty() => {
                let (line, column) = locate_field(text, &field).unwrap_or((0, 0));
                CliError::Config {
                    field,
                    line,
                    column,
                    message,
                }
            }
            other => other,
        }
    }
}

/// Line and column of `section.key` (or a top-level `key`) in TOML text.
fn locate_field(text: &str, field: &str) -> Option<(usize, usize)> {
    let (section, key) = match field.rsplit_once('.') {
        Some((s, k)) => (s, k),
        None => ("", field),
    };
    let mut current = String::new();
    let mut section_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == field {
                section_line = Some(i + 1);
            }
            continue;
        }
        let Some((k, _)) = line.split_once('=') else {
            continue;
        };
        if current == section && k.trim() == key {
            return Some((i + 1, raw.len() - raw.trim_start().len() + 1));
        }
    }
    section_line.map(|l| (l, 1))
}

/// Runs a resolved configuration and returns the rendered bytes.
pub fn run_to_bytes(cfg: &Resolved) -> Result<Vec<u8>, CliError> {
    let report = run::execute(cfg)?;
    output::render(&Provenance::of(cfg), &report, cfg.format)
}
