//! Report envelopes and table files.
//!
//! Every command emits one JSON document on stdout: the command name, an
//! echo of its semantic parameters, and the report body. Filesystem paths
//! and the thread count are deliberately left out of the echo so that the
//! bytes of a report depend only on what was computed.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use balgeo::Result;
use serde_json::{json, Value};

/// Assemble the envelope, print it to stdout, and mirror it to `--out`.
pub fn emit(command: &str, params: Value, report: Value, out: Option<&PathBuf>) -> Result<()> {
    let envelope = json!({
        "command": command,
        "params": params,
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    print!("{text}");
    std::io::stdout().flush()?;
    if let Some(path) = out {
        fs::write(path, text)?;
    }
    Ok(())
}

/// Fixed-precision float field for table files: full round-trip precision,
/// identical bytes on every run.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}
