use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use dqc1_sim::sweep::format_real;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn json_text(value: &Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(dqc1_sim::Error::from)?;
    text.push('\n');
    Ok(text)
}

/// Two-line CSV of a report: dotted key paths, then values.
pub fn report_csv(value: &Value) -> String {
    let mut cells = Vec::new();
    flatten("", value, &mut cells);
    let (keys, values): (Vec<String>, Vec<String>) = cells.into_iter().unzip();
    format!("{}\n{}\n", keys.join(","), values.join(","))
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                (Some(u), _, _) => u.to_string(),
                (_, Some(i), _) => i.to_string(),
                (_, _, Some(f)) => format_real(f),
                _ => n.to_string(),
            };
            out.push((prefix.to_string(), text));
        }
        Value::String(s) if s.contains([',', '"', '\n']) => {
            out.push((
                prefix.to_string(),
                format!("\"{}\"", s.replace('"', "\"\"")),
            ));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}
