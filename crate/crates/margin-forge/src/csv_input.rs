//! CSV tables of raw records.
//!
//! Comma separated, double-quote escaping, one header row naming the
//! columns. Every column becomes a [`Record`] entry, so label-rule columns
//! that are not features stay available. Empty cells count as missing.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use margin_forge_core::encoding::{Record, Schema};

use crate::error::{Error, Result};

/// Columns a schema needs: every field plus the label column, if any.
pub fn schema_columns(schema: &Schema) -> Vec<String> {
    schema
        .fields()
        .iter()
        .map(|f| f.name.clone())
        .chain(schema.label_field().map(str::to_string))
        .collect()
}

/// Parses a table, failing if any of `required` is not a header column.
pub fn parse_csv<R: Read, S: AsRef<str>>(reader: R, required: &[S]) -> Result<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if headers.is_empty() {
        return Err(Error::parse(1, "empty CSV file: no header row"));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    for column in required {
        let column = column.as_ref();
        if !names.iter().any(|n| n == column) {
            return Err(Error::Schema(format!("CSV has no column `{column}`")));
        }
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(&e, 0))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != names.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", names.len(), row.len()),
            ));
        }
        records.push(names.iter().zip(row.iter()).collect());
    }
    Ok(records)
}

fn csv_error(e: &csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

/// Reads the records for `schema`, also requiring the `extra` columns.
pub fn read_csv_requiring<S: AsRef<str>>(
    path: impl AsRef<Path>,
    schema: &Schema,
    extra: &[S],
) -> Result<Vec<Record>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut required = schema_columns(schema);
    required.extend(extra.iter().map(|s| s.as_ref().to_string()));
    parse_csv(file, &required)
}

pub fn read_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<Record>> {
    read_csv_requiring::<&str>(path, schema, &[])
}
