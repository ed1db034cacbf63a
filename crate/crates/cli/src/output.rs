//! Output shaping: format selection, config echoing, and float policy.
//!
//! Every run echoes its resolved configuration for reproducibility:
//! embedded under `"config"` for `json`, as a stderr line for `jsonl`
//! (so data files hold exactly one record per line), and as a leading
//! `#` comment for `csv`. JSON numbers use the shortest representation
//! that round-trips the exact f64 bits; CSV rounds to 12 significant
//! digits.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

pub struct Output {
    pub format: Format,
    pub dest: Option<PathBuf>,
}

/// 12 significant digits for CSV cells.
pub fn csv_f64(v: f64) -> String {
    format!("{v:.11e}")
}

/// Complex value as JSON: a bare real number when the imaginary part is
/// negligible, otherwise {"re", "im"}.
pub fn complex_value(z: jdpp::C64) -> Value {
    if z.im.abs() < 1e-9 * (1.0 + z.re.abs()) {
        json!(z.re)
    } else {
        json!({"re": z.re, "im": z.im})
    }
}

fn flatten_cell(value: &Value) -> String {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => csv_f64(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        Value::Array(items) => items.iter().map(flatten_cell).collect::<Vec<_>>().join(" "),
        Value::Object(_) => value.to_string(),
    }
}

impl Output {
    fn write(&self, body: String) -> Result<()> {
        match &self.dest {
            Some(path) => {
                fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
            }
        }
        Ok(())
    }

    /// Single-result commands (verdict, determinant, report objects).
    pub fn emit_object(&self, config: &Value, result: &Value) -> Result<()> {
        match self.format {
            Format::Json => {
                let combined = json!({"config": config, "result": result});
                self.write(format!("{}\n", serde_json::to_string_pretty(&combined)?))
            }
            Format::Jsonl => {
                eprintln!("{}", json!({"config": config}));
                self.write(format!("{}\n", serde_json::to_string(result)?))
            }
            Format::Csv => {
                let mut body = format!("# config: {config}\n");
                body.push_str("key,value\n");
                if let Value::Object(map) = result {
                    for (key, value) in map {
                        body.push_str(&format!("{key},{}\n", flatten_cell(value)));
                    }
                } else {
                    body.push_str(&format!("value,{}\n", flatten_cell(result)));
                }
                self.write(body)
            }
        }
    }

    /// Row-oriented commands (distributions, batches, estimates).
    pub fn emit_rows(&self, config: &Value, header: &[&str], rows: &[Value]) -> Result<()> {
        match self.format {
            Format::Json => {
                let combined = json!({"config": config, "rows": rows});
                self.write(format!("{}\n", serde_json::to_string_pretty(&combined)?))
            }
            Format::Jsonl => {
                eprintln!("{}", json!({"config": config}));
                let mut body = String::new();
                for row in rows {
                    body.push_str(&serde_json::to_string(row)?);
                    body.push('\n');
                }
                self.write(body)
            }
            Format::Csv => {
                let mut body = format!("# config: {config}\n");
                body.push_str(&header.join(","));
                body.push('\n');
                for row in rows {
                    let cells: Vec<String> = header
                        .iter()
                        .map(|key| flatten_cell(row.get(*key).unwrap_or(&Value::Null)))
                        .collect();
                    body.push_str(&cells.join(","));
                    body.push('\n');
                }
                self.write(body)
            }
        }
    }

    /// Kernel-producing commands always write the bare kernel JSON (so
    /// the file is directly consumable by the other commands); the
    /// config echo goes to stderr.
    pub fn emit_kernel(&self, config: &Value, kernel: &jdpp::JKernel) -> Result<()> {
        eprintln!("{}", json!({"config": config}));
        self.write(format!("{}\n", jdpp::io::kernel_to_json(kernel)))
    }
}
