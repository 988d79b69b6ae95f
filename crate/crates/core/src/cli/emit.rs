//! CSV and JSON rendering of result tables.
//!
//! CSV output has a header row, comma separators, LF line endings and
//! floats at 12 significant digits. JSON output is a single object
//! `{"meta": {...}, "data": [...]}` with keys in sorted order. Both are
//! byte-stable for identical inputs.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde_json::{Map, Number, Value as Json};

/// Significant digits used for floats in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn to_csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => Json::from(*v),
            Value::Float(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// Rows of homogeneous width under a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }
}

/// Self-description written into JSON output.
#[derive(Clone, Debug, PartialEq)]
pub struct Meta {
    pub command: String,
    pub params: BTreeMap<String, Json>,
    pub seed: u64,
    pub version: String,
}

/// Formats `v` with [`SIGNIFICANT_DIGITS`] significant digits, dropping
/// trailing zeros. Moderate magnitudes are written positionally, the rest
/// in exponent form.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..15).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exponent)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_csv(table: &Table, out: &mut dyn Write) -> io::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.iter().map(Value::to_csv_field))?;
    }
    writer.flush()
}

pub fn to_json(meta: &Meta, table: &Table) -> Json {
    let mut meta_obj = Map::new();
    meta_obj.insert("command".into(), Json::from(meta.command.as_str()));
    meta_obj.insert(
        "params".into(),
        Json::Object(meta.params.clone().into_iter().collect()),
    );
    meta_obj.insert("seed".into(), Json::from(meta.seed));
    meta_obj.insert("version".into(), Json::from(meta.version.as_str()));

    let data = table
        .rows
        .iter()
        .map(|row| {
            Json::Object(
                table
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Value::to_json))
                    .collect(),
            )
        })
        .collect();

    let mut root = Map::new();
    root.insert("meta".into(), Json::Object(meta_obj));
    root.insert("data".into(), Json::Array(data));
    Json::Object(root)
}

pub fn write_json(meta: &Meta, table: &Table, out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, &to_json(meta, table))?;
    out.write_all(b"\n")
}

pub fn emit(format: Format, meta: &Meta, table: &Table, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(meta, table, out),
    }
}
