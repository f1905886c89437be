use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::args::{CommandKind, Params};
use crate::commands::Outcome;
use crate::fail::Failure;

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a Params,
    status: &'static str,
    summary: &'a str,
    results: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Failure::io(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Assembles and writes the report; returns whether the run passed.
pub fn emit(kind: CommandKind, params: &Params, outcome: Outcome, wall_time_s: Option<f64>) -> Result<bool, Failure> {
    let status = if outcome.passed { "ok" } else { "failed" };
    let envelope = Envelope {
        tool: "seqclass",
        version: env!("CARGO_PKG_VERSION"),
        command: kind.name(),
        config: params,
        status,
        summary: &outcome.summary,
        results: &outcome.results,
        wall_time_s,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    text.push('\n');
    if let (Some(path), Some(csv)) = (&params.csv, &outcome.csv) {
        write_atomic(path, csv.as_bytes())?;
    }
    match &params.json {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            println!("{}: {status}: {}", kind.name(), outcome.summary);
        }
        None => print!("{text}"),
    }
    Ok(outcome.passed)
}
