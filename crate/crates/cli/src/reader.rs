//! Reader for every output format the runner emits.

use std::path::Path;

use coordwalk::samplers::Trajectory;
use serde_json::Value;

use crate::output::{Provenance, Table, PROVENANCE_MAGIC};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Table { table: Table, extra: Value },
    Trajectory(Trajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOutput {
    pub provenance: Provenance,
    pub payload: Payload,
}

impl ParsedOutput {
    pub fn table(&self) -> Option<&Table> {
        match &self.payload {
            Payload::Table { table, .. } => Some(table),
            Payload::Trajectory(_) => None,
        }
    }
}

pub fn read_output(path: &Path) -> Result<ParsedOutput, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_output(&bytes)
}

/// Detects the format from the leading bytes.
pub fn parse_output(bytes: &[u8]) -> Result<ParsedOutput, CliError> {
    if bytes.starts_with(PROVENANCE_MAGIC) {
        parse_binary(bytes)
    } else if bytes.first() == Some(&b'{') {
        parse_json(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| CliError::Parse(format!("CSV is not UTF-8: {e}")))?;
        parse_csv(text)
    }
}

fn parse_binary(bytes: &[u8]) -> Result<ParsedOutput, CliError> {
    let rest = &bytes[PROVENANCE_MAGIC.len()..];
    let len_bytes: [u8; 8] = rest
        .get(..8)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| CliError::Parse("truncated provenance length".into()))?;
    let len = u64::from_le_bytes(len_bytes) as usize;
    let header = rest
        .get(8..8 + len)
        .ok_or_else(|| CliError::Parse("truncated provenance".into()))?;
    let provenance: Provenance =
        serde_json::from_slice(header).map_err(|e| CliError::Parse(format!("provenance: {e}")))?;
    let traj = Trajectory::read_binary(&rest[8 + len..]).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(ParsedOutput {
        provenance,
        payload: Payload::Trajectory(traj),
    })
}

fn parse_json(bytes: &[u8]) -> Result<ParsedOutput, CliError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| CliError::Parse(format!("JSON: {e}")))?;
    let field = |k: &str| doc.get(k).ok_or_else(|| CliError::Parse(format!("JSON output lacks `{k}`")));
    let provenance: Provenance =
        serde_json::from_value(field("provenance")?.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
    let columns: Vec<String> =
        serde_json::from_value(field("columns")?.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
    let rows: Vec<Vec<Value>> =
        serde_json::from_value(field("rows")?.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
    if let Some(i) = rows.iter().position(|r| r.len() != columns.len()) {
        return Err(CliError::Parse(format!("row {i} has the wrong width")));
    }
    Ok(ParsedOutput {
        provenance,
        payload: Payload::Table {
            table: Table { columns, rows },
            extra: field("extra")?.clone(),
        },
    })
}

fn csv_value(cell: &str) -> Value {
    match cell {
        "" => Value::Null,
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match serde_json::from_str::<Value>(cell) {
            Ok(v @ Value::Number(_)) => v,
            _ => Value::String(cell.to_string()),
        },
    }
}

fn parse_csv(text: &str) -> Result<ParsedOutput, CliError> {
    let mut pairs = Vec::new();
    let mut lines = text.lines();
    let header = loop {
        let line = lines.next().ok_or_else(|| CliError::Parse("CSV has no header row".into()))?;
        match line.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| CliError::Parse(format!("bad provenance line {line:?}")))?;
                pairs.push((k.to_string(), v.to_string()));
            }
            None => break line,
        }
    };
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<Value> = line.split(',').map(csv_value).collect();
        if row.len() != columns.len() {
            return Err(CliError::Parse(format!("CSV row {} has {} cells, expected {}", i + 1, row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok(ParsedOutput {
        provenance: Provenance::from_pairs(&pairs)?,
        payload: Payload::Table {
            table: Table { columns, rows },
            extra: Value::Null,
        },
    })
}
