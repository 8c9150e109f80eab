//! Report assembly and rendering.

use hdss_core::capacity::CapacityWitness;
use hdss_core::flowgraph::Instance;
use hdss_core::model::file::ConfigFile;
use hdss_core::model::expand_to_full;
use hdss_core::model::rational::{format, format_approx};
use hdss_core::{DssConfig, Rational};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config_digest: String,
    pub results: Value,
    /// Label/value pairs for the table rendering, in display order.
    pub rows: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: &DssConfig) -> Self {
        Self {
            command,
            config_digest: config_digest(config),
            results: Value::Object(Default::default()),
            rows: Vec::new(),
            warnings: config.warnings(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.results
            .as_object_mut()
            .expect("results is an object")
            .insert(key.to_string(), value);
    }

    pub fn row(&mut self, label: impl Into<String>, value: impl Into<String>) {
        self.rows.push((label.into(), value.into()));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config_digest": self.config_digest,
            "results": self.results,
            "warnings": self.warnings,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Table => self.render_table(),
        }
    }

    fn render_table(&self) -> String {
        let mut rows = vec![
            ("command".to_string(), self.command.to_string()),
            ("config digest".to_string(), self.config_digest.clone()),
        ];
        rows.extend(self.rows.iter().cloned());
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, value) in &rows {
            out.push_str(&format!("{label:<width$}  {value}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// SHA-256 of the canonical JSON of the fully expanded configuration, so that
/// equivalent homogeneous, helper-only and full descriptions hash identically.
pub fn config_digest(config: &DssConfig) -> String {
    let canonical = ConfigFile::from_config(&expand_to_full(config)).to_json();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn rat(r: &Rational) -> Value {
    Value::String(format(r))
}

pub fn approx(r: &Rational) -> String {
    format_approx(r)
}

pub fn pair_approx(a: &Rational, b: &Rational) -> String {
    format!("[{}, {}]", approx(a), approx(b))
}

pub fn nodes(v: &[usize]) -> Value {
    Value::from(v.iter().map(|i| i + 1).collect::<Vec<_>>())
}

pub fn nodes_text(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(", "))
}

pub fn instance(x: &Instance) -> Value {
    json!({ "node": x.node + 1, "generation": x.generation })
}

pub fn instances(v: &[Instance]) -> Value {
    Value::from(v.iter().map(instance).collect::<Vec<_>>())
}

pub fn instances_text(v: &[Instance]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("v{}.{}", x.node + 1, x.generation)).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn witness(w: &CapacityWitness) -> Value {
    json!({
        "value": rat(&w.value),
        "tuple": nodes(&w.tuple),
        "helper_sets": w.helper_sets.iter().map(|s| nodes(s)).collect::<Vec<_>>(),
        "terms": w.terms.iter().map(rat).collect::<Vec<_>>(),
    })
}

pub fn witness_rows(report: &mut Report, w: &CapacityWitness) {
    report.row("exact capacity", approx(&w.value));
    report.row("witness tuple", nodes_text(&w.tuple));
    let sets: Vec<String> = w.helper_sets.iter().map(|s| nodes_text(s)).collect();
    report.row("witness helpers", sets.join(" "));
    let terms: Vec<String> = w.terms.iter().map(format).collect();
    report.row("witness terms", terms.join(" + "));
}
