//! Versioned output envelope shared by every subcommand.
//!
//! An [`Output`] is a flat summary plus an optional table of records. JSON
//! renders it as one object; CSV renders the summary as `# key=value`
//! header lines followed by the table, so both formats carry the same data.

use std::fmt;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub type Record = Map<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub command: String,
    pub seed: Option<u64>,
    pub summary: Record,
    pub records: Vec<Record>,
}

/// Builds a [`Record`] from `key => value` pairs, keeping their order.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = $crate::output::Record::new();
        $(m.insert($k.to_string(), serde_json::json!($v));)*
        m
    }};
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Output {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        Output { command: command.into(), seed, summary: Record::new(), records: Vec::new() }
    }

    pub fn with_summary(mut self, summary: Record) -> Self {
        self.summary = summary;
        self
    }

    pub fn with_records(mut self, records: Vec<Record>) -> Self {
        self.records = records;
        self
    }

    pub fn to_json(&self) -> String {
        let mut top = Record::new();
        top.insert("schema_version".into(), SCHEMA_VERSION.into());
        top.insert("command".into(), self.command.clone().into());
        top.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        top.insert("summary".into(), Value::Object(self.summary.clone()));
        top.insert("records".into(), Value::Array(self.records.iter().cloned().map(Value::Object).collect()));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values always serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut out = String::new();
        out.push_str(&format!("# schema_version={SCHEMA_VERSION}\n"));
        out.push_str(&format!("# command={}\n", self.command));
        out.push_str(&format!("# seed={}\n", self.seed.map_or("none".to_string(), |s| s.to_string())));
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}={}\n", scalar(v)));
        }
        if let Some(first) = self.records.first() {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(first.keys())?;
            for r in &self.records {
                w.write_record(first.keys().map(|k| r.get(k).map(scalar).unwrap_or_default()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?);
        }
        Ok(out)
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> CliResult<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}
