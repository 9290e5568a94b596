//! Output tables, provenance headers and atomic writes.
//!
//! CSV files open with `# key=value` provenance lines followed by a header
//! row. JSON files hold `{"provenance", "columns", "rows", "extra"}` with
//! rows in CSV column order. Binary trajectories are prefixed by the magic
//! `CWPROV01`, a little-endian u64 length and the provenance as JSON.

use std::io::Write;
use std::path::Path;

use coordwalk::samplers::Trajectory;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, Resolved};
use crate::CliError;

pub const PROVENANCE_MAGIC: &[u8; 8] = b"CWPROV01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    pub fn of(cfg: &Resolved) -> Self {
        Self {
            tool: "coordwalk".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cfg.command.name().into(),
            seed: cfg.seed,
            config_sha256: cfg.hash(),
        }
    }

    fn pairs(&self) -> [(&'static str, String); 5] {
        [
            ("tool", self.tool.clone()),
            ("version", self.version.clone()),
            ("command", self.command.clone()),
            ("seed", self.seed.to_string()),
            ("config_sha256", self.config_sha256.clone()),
        ]
    }

    pub(crate) fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let get = |k: &str| {
            pairs
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| CliError::Parse(format!("provenance is missing `{k}`")))
        };
        Ok(Self {
            tool: get("tool")?,
            version: get("version")?,
            command: get("command")?,
            seed: get("seed")?
                .parse()
                .map_err(|e| CliError::Parse(format!("provenance seed: {e}")))?,
            config_sha256: get("config_sha256")?,
        })
    }
}

/// Column-ordered table of scalars.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    /// Structured detail kept in JSON output only.
    pub extra: Value,
    /// Raw trajectory behind a `sample` table.
    pub trajectory: Option<Trajectory>,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => {
            assert!(!s.contains([',', '\n', '"']), "CSV cells are never quoted");
            s.clone()
        }
        other => other.to_string(),
    }
}

pub fn render(prov: &Provenance, report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            for (k, v) in prov.pairs() {
                writeln!(buf, "# {k}={v}").expect("write to memory");
            }
            writeln!(buf, "{}", report.table.columns.join(",")).expect("write to memory");
            for row in &report.table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                writeln!(buf, "{}", cells.join(",")).expect("write to memory");
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "provenance": prov,
                "columns": report.table.columns,
                "rows": report.table.rows,
                "extra": report.extra,
            });
            serde_json::to_writer_pretty(&mut buf, &doc).expect("write to memory");
            buf.push(b'\n');
        }
        Format::Bin => {
            let traj = report
                .trajectory
                .as_ref()
                .ok_or_else(|| CliError::config("format", "binary output needs a trajectory"))?;
            let header = serde_json::to_vec(prov).expect("provenance serializes");
            buf.extend_from_slice(PROVENANCE_MAGIC);
            buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
            buf.extend_from_slice(&header);
            traj.write_binary(&mut buf).expect("write to memory");
        }
    }
    Ok(buf)
}

/// Writes through a temporary file in the destination directory and
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
