//! Rendering of results as text, CSV or JSON, with the version and the
//! generating configuration embedded in every format.

use std::fs;
use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use symbandit::experiments::write_versioned_csv;
use symbandit::{Result, VERSION};

use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Format from `--format`, else from the `--out` extension, else text.
pub fn resolve_format(common: &Common) -> Format {
    if let Some(f) = common.format {
        return f;
    }
    match common.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => Format::Text,
    }
}

/// `x` with `digits` significant digits, trailing zeros dropped.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    }
}

fn render_scalar(v: &Value, paper: bool) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if paper {
                format!("{x:.3}")
            } else {
                format_significant(x, 12)
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub struct Emitter<'a> {
    common: &'a Common,
    config: Value,
}

impl<'a> Emitter<'a> {
    pub fn new<C: Serialize>(common: &'a Common, config: &C) -> Self {
        let config = serde_json::to_value(config).expect("configuration serializes");
        Self { common, config }
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.common.out {
            Some(path) => fs::write(path, bytes)?,
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }

    fn header(&self, kind: &str) -> String {
        format!("# symbandit {VERSION}\n# kind: {kind}\n# config: {}\n", self.config)
    }

    /// One record: `key = value` lines in text mode.
    pub fn single<R: Serialize>(&self, kind: &str, row: &R) -> Result<()> {
        match resolve_format(self.common) {
            Format::Text => {
                let mut text = self.header(kind);
                if let Value::Object(map) = serde_json::to_value(row)? {
                    for (k, v) in &map {
                        text.push_str(&format!("{k} = {}\n", render_scalar(v, self.common.paper)));
                    }
                }
                self.write(text.as_bytes())
            }
            _ => self.table(kind, std::slice::from_ref(row)),
        }
    }

    /// Many records: tab-separated columns in text mode.
    pub fn table<R: Serialize>(&self, kind: &str, rows: &[R]) -> Result<()> {
        match resolve_format(self.common) {
            Format::Text => {
                let mut text = self.header(kind);
                let values: Vec<Value> = rows.iter().map(serde_json::to_value).collect::<serde_json::Result<_>>()?;
                if let Some(Value::Object(first)) = values.first() {
                    text.push_str(&first.keys().cloned().collect::<Vec<_>>().join("\t"));
                    text.push('\n');
                }
                for v in &values {
                    if let Value::Object(map) = v {
                        let cells: Vec<String> = map.values().map(|x| render_scalar(x, self.common.paper)).collect();
                        text.push_str(&cells.join("\t"));
                        text.push('\n');
                    }
                }
                self.write(text.as_bytes())
            }
            Format::Csv => {
                let mut buf = Vec::new();
                write_versioned_csv(&mut buf, kind, &self.config, rows)?;
                self.write(&buf)
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "version": VERSION,
                    "kind": kind,
                    "config": self.config,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc)?;
                text.push('\n');
                self.write(text.as_bytes())
            }
        }
    }
}
