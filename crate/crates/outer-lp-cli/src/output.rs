//! Shared output plumbing: formats, sinks, and deterministic rendering.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::Value;

/// Output encoding of the report body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Machine-readable JSON object.
    Json,
    /// Comma-separated table.
    Csv,
}

/// Writes the report body to the chosen destination.
///
/// The body goes to `--out` when given, otherwise to stdout; free-form
/// summary lines always go to stderr so stdout stays byte-identical for
/// identical configurations.
pub fn emit(out: &Option<PathBuf>, body: &str, summary: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{body}"),
    }
    if !summary.is_empty() {
        eprintln!("{summary}");
    }
    Ok(())
}

/// Shortest round-trip decimal rendering of a float.
pub fn fnum(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// One CSV line from already-rendered fields.
pub fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

/// JSON encoding of an exponent, mapping `∞` to the string `"inf"`.
pub fn exponent_json(e: f64) -> Value {
    if e.is_infinite() {
        Value::String("inf".into())
    } else {
        serde_json::json!(e)
    }
}

/// Pretty-prints a JSON body with a trailing newline.
pub fn to_pretty_body(value: &Value) -> String {
    outer_lp::io::to_pretty(value)
}

/// Parses an exponent flag, accepting `inf` for `∞`.
pub fn parse_exponent(text: &str) -> Result<f64, String> {
    match text {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => text
            .parse::<f64>()
            .map_err(|_| format!("not an exponent: {text:?}")),
    }
}

/// Relative agreement within `1e-9`.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
