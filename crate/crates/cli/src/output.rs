use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::{Failure, Format};

/// The validated run configuration echoed into every output. Worker count
/// and output path are left out: they never change results.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub net: String,
    pub n: usize,
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub shift_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub seed: u64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub stratified: bool,
    pub cap: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_range: Option<(u32, u32)>,
    pub format: Format,
}

impl RunConfig {
    fn mode(&self) -> &'static str {
        if self.exact {
            "exact"
        } else {
            "float"
        }
    }

    fn provenance(&self) -> Value {
        json!({
            "artifact": concat!("dyadnet ", env!("CARGO_PKG_VERSION")),
            "mode": self.mode(),
            "seed": self.seed,
            "shift_seed": self.shift_seed,
            "config": self,
        })
    }

    fn csv_header(&self) -> String {
        let cfg = serde_json::to_string(self).expect("config serializes");
        format!(
            "# artifact: dyadnet {}\n# mode: {}\n# seeds: seed={} shift_seed={}\n# config: {cfg}\n",
            env!("CARGO_PKG_VERSION"),
            self.mode(),
            self.seed,
            self.shift_seed.map_or("none".to_string(), |s| s.to_string()),
        )
    }
}

/// A CSV table: column names and pre-formatted rows.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|f| quote(f)).collect());
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Shortest round-trip formatting; stable across runs.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Emit either the table (CSV) or the JSON payload, with provenance.
pub fn emit(
    cfg: &RunConfig,
    out: Option<&Path>,
    table: &Table,
    payload: Value,
) -> Result<(), Failure> {
    let text = match cfg.format {
        Format::Csv => {
            let mut s = cfg.csv_header();
            s.push_str(&table.columns.join(","));
            s.push('\n');
            for r in &table.rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let doc = json!({ "provenance": cfg.provenance(), "result": payload });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Runtime(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("writing stdout: {e}"))),
    }
}
