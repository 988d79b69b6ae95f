//! Readers for the files written by [`super::emit`], used to check that
//! emitted data round-trips and to load regression fixtures.
//!
//! Both readers accept arbitrary bytes and report malformed input as an
//! error; they never panic.

use std::collections::BTreeMap;

use serde_json::Value as Json;
use thiserror::Error;

use super::emit::Meta;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureError {
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unexpected document shape: {0}")]
    Shape(String),
    #[error("no column named `{0}`")]
    MissingColumn(String),
    #[error("column `{column}` row {row} is not numeric")]
    NotNumeric { column: String, row: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Datum {
    Number(f64),
    Text(String),
    Bool(bool),
}

impl Datum {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Datum::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Datum::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub meta: Option<Meta>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Datum>>,
}

impl Fixture {
    pub fn column_index(&self, name: &str) -> Result<usize, FixtureError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| FixtureError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&Datum>, FixtureError> {
        let k = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>, FixtureError> {
        let k = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                r[k].as_f64().ok_or_else(|| FixtureError::NotNumeric {
                    column: name.to_string(),
                    row,
                })
            })
            .collect()
    }
}

fn parse_field(field: &str) -> Datum {
    match field {
        "true" => Datum::Bool(true),
        "false" => Datum::Bool(false),
        _ => match field.parse::<f64>() {
            Ok(v) => Datum::Number(v),
            Err(_) => Datum::Text(field.to_string()),
        },
    }
}

/// Parses a headed CSV table with rows of equal width.
pub fn read_csv(bytes: &[u8]) -> Result<Fixture, FixtureError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| FixtureError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if columns.is_empty() || columns.iter().all(String::is_empty) {
        return Err(FixtureError::Shape("missing header row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FixtureError::Csv(e.to_string()))?;
        rows.push(record.iter().map(parse_field).collect());
    }
    Ok(Fixture {
        meta: None,
        columns,
        rows,
    })
}

fn shape(msg: &str) -> FixtureError {
    FixtureError::Shape(msg.to_string())
}

/// Parses a `{"meta": …, "data": [...]}` document.
pub fn read_json(bytes: &[u8]) -> Result<Fixture, FixtureError> {
    let root: Json =
        serde_json::from_slice(bytes).map_err(|e| FixtureError::Json(e.to_string()))?;
    let root = root
        .as_object()
        .ok_or_else(|| shape("top level is not an object"))?;

    let meta = root
        .get("meta")
        .and_then(Json::as_object)
        .ok_or_else(|| shape("missing `meta` object"))?;
    let command = meta
        .get("command")
        .and_then(Json::as_str)
        .ok_or_else(|| shape("`meta.command` must be a string"))?;
    let params: BTreeMap<String, Json> = meta
        .get("params")
        .and_then(Json::as_object)
        .ok_or_else(|| shape("`meta.params` must be an object"))?
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let seed = meta
        .get("seed")
        .and_then(Json::as_u64)
        .ok_or_else(|| shape("`meta.seed` must be an unsigned integer"))?;
    let version = meta
        .get("version")
        .and_then(Json::as_str)
        .ok_or_else(|| shape("`meta.version` must be a string"))?;

    let data = root
        .get("data")
        .and_then(Json::as_array)
        .ok_or_else(|| shape("missing `data` array"))?;
    let mut columns: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(data.len());
    for (i, entry) in data.iter().enumerate() {
        let obj = entry
            .as_object()
            .ok_or_else(|| shape("data rows must be objects"))?;
        let keys: Vec<String> = obj.keys().cloned().collect();
        if i == 0 {
            columns = keys;
        } else if keys != columns {
            return Err(shape("data rows have differing keys"));
        }
        let row = obj
            .values()
            .map(|v| match v {
                Json::Number(n) => n
                    .as_f64()
                    .map(Datum::Number)
                    .ok_or_else(|| shape("bad number")),
                Json::String(s) => Ok(Datum::Text(s.clone())),
                Json::Bool(b) => Ok(Datum::Bool(*b)),
                Json::Null => Ok(Datum::Number(f64::NAN)),
                _ => Err(shape("data values must be scalars")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Fixture {
        meta: Some(Meta {
            command: command.to_string(),
            params,
            seed,
            version: version.to_string(),
        }),
        columns,
        rows,
    })
}
