//! CSV reader and writer.
//!
//! First line is a header of attribute names; both `?` and the empty string
//! mark a missing cell. Without a schema hint a column is Numeric iff every
//! non-missing token parses as a decimal, otherwise Nominal with categories in
//! first-appearance order. Quoting and embedded commas are not supported.

use super::arff::{push_token, render_cell, CellBuilder, ParseError};
use super::{parse_numeric_token, AttributeSchema, Dataset};

/// Parses CSV text into a [`Dataset`]. With `schema_hint`, columns are typed
/// by the hint (arity must match the header); otherwise types are inferred.
pub fn parse_csv(
    source: &str,
    schema_hint: Option<&[AttributeSchema]>,
) -> Result<Dataset, ParseError> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or(ParseError::NoAttributes)?;
    let names: Vec<String> = header.split(',').map(|t| t.trim().to_string()).collect();
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(ParseError::DuplicateHeader {
                line: header_line,
                name: name.clone(),
            });
        }
    }

    if let Some(hint) = schema_hint {
        if hint.len() != names.len() {
            return Err(ParseError::SchemaHintArity {
                line: header_line,
                hint: hint.len(),
                header: names.len(),
            });
        }
    }

    // Materialize rows first: inference needs every token of a column before
    // its kind is known.
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (line_no, line) in lines {
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != names.len() {
            return Err(ParseError::RowArity {
                line: line_no,
                got: tokens.len(),
                expected: names.len(),
            });
        }
        rows.push((line_no, tokens));
    }

    let schema: Vec<AttributeSchema> = match schema_hint {
        Some(hint) => {
            let mut schema = Vec::with_capacity(hint.len());
            for (name, attr) in names.iter().zip(hint) {
                schema.push(AttributeSchema {
                    name: name.clone(),
                    kind: attr.kind.clone(),
                });
            }
            schema
        }
        None => names
            .iter()
            .enumerate()
            .map(|(col, name)| infer_column(name, col, &rows))
            .collect(),
    };

    let mut cells: Vec<CellBuilder> = schema.iter().map(CellBuilder::new).collect();
    for (line_no, tokens) in &rows {
        for (pos, token) in tokens.iter().enumerate() {
            push_token(token, *line_no, &schema[pos], &mut cells[pos], true)?;
        }
    }
    let columns = cells.into_iter().map(CellBuilder::finish).collect();
    Ok(Dataset::new("data", schema, columns)?)
}

fn infer_column(name: &str, col: usize, rows: &[(usize, Vec<&str>)]) -> AttributeSchema {
    let mut numeric = true;
    for (_, tokens) in rows {
        let token = tokens[col];
        if token == "?" || token.is_empty() {
            continue;
        }
        if parse_numeric_token(token).is_none() {
            numeric = false;
            break;
        }
    }
    if numeric {
        return AttributeSchema::numeric(name);
    }
    let mut categories: Vec<String> = Vec::new();
    for (_, tokens) in rows {
        let token = tokens[col];
        if token == "?" || token.is_empty() {
            continue;
        }
        if !categories.iter().any(|c| c == token) {
            categories.push(token.to_string());
        }
    }
    AttributeSchema::nominal(name, categories)
}

/// Serializes a dataset as CSV: header of attribute names, `?` for missing
/// cells. `parse_csv(write_csv(ds), Some(ds.schema()))` reproduces the
/// dataset exactly.
pub fn write_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    for (pos, attr) in ds.schema().iter().enumerate() {
        if pos > 0 {
            out.push(',');
        }
        out.push_str(&attr.name);
    }
    out.push('\n');
    for row in 0..ds.row_count() {
        for (pos, (attr, col)) in ds.schema().iter().zip(ds.columns()).enumerate() {
            if pos > 0 {
                out.push(',');
            }
            out.push_str(&render_cell(attr, col, row));
        }
        out.push('\n');
    }
    out
}
