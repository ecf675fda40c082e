use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ConfigEcho;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JsonReport {
    pub tool_version: String,
    pub config_echo: ConfigEcho,
    pub result_rows: Vec<Value>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub min_gap: Option<f64>,
    pub violations: usize,
    /// `null` unless `--timing` was given.
    pub runtime_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Value>,
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.prec$e}", prec = SIGNIFICANT_DIGITS - 1)
        .parse()
        .unwrap_or(x)
}

/// Rounds every floating-point number in `v`; integers are left alone.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

impl JsonReport {
    /// Pretty JSON with rounded numbers and a trailing newline.
    pub fn render(&self) -> anyhow::Result<String> {
        let mut v = serde_json::to_value(self)?;
        round_numbers(&mut v);
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        Ok(text)
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a weylroof report", path.display()))
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `-`.
pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if path == Path::new("-") {
        io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Flat table for `--csv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    round_sig(x).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.811_278_124_459_132_8), 0.811278124459);
        assert_eq!(round_sig(1.0), 1.0);
        assert_eq!(round_sig(-1.234_567_890_123_45e-7), -1.23456789012e-7);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn integers_untouched() {
        let mut v = serde_json::json!({"seed": u64::MAX, "x": [0.1234567890123456, 3]});
        round_numbers(&mut v);
        assert_eq!(v["seed"], serde_json::json!(u64::MAX));
        assert_eq!(v["x"][0], serde_json::json!(0.123456789012));
        assert_eq!(v["x"][1], serde_json::json!(3));
    }
}
