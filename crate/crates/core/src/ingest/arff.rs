//! ARFF-subset reader and writer.
//!
//! Grammar: `@relation <name>`, one `@attribute <name> numeric` or
//! `@attribute <name> {v1,v2,...}` per line, `@data`, then comma-separated
//! rows. `?` marks a missing cell, `%` starts a comment line, blank lines are
//! ignored. Keywords match case-insensitively; attribute names are
//! case-sensitive. A nominal category list may continue onto following lines
//! until the closing brace (as produced by some exporters).
//!
//! `?` may appear inside a category declaration as a literal label, but a bare
//! `?` data token is always a missing cell, never that category.

use thiserror::Error;

use super::{
    format_numeric_cell, parse_numeric_token, AttributeKind, AttributeSchema, Column,
    ColumnValues, Dataset, DatasetError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: expected `@relation <name>`")]
    ExpectedRelation { line: usize },
    #[error("line {line}: malformed attribute declaration")]
    MalformedAttribute { line: usize },
    #[error("line {line}: unknown attribute kind `{token}` for attribute `{name}`")]
    UnknownKind {
        line: usize,
        name: String,
        token: String,
    },
    #[error("line {line}: duplicate attribute name `{name}`")]
    DuplicateAttribute { line: usize, name: String },
    #[error("line {line}: empty category label in declaration of `{name}`")]
    EmptyCategory { line: usize, name: String },
    #[error("line {line}: duplicate category label `{label}` in declaration of `{name}`")]
    DuplicateCategory {
        line: usize,
        name: String,
        label: String,
    },
    #[error("line {line}: unterminated category list for attribute `{name}`")]
    UnterminatedCategories { line: usize, name: String },
    #[error("line {line}: unexpected directive `{token}`")]
    UnexpectedDirective { line: usize, token: String },
    #[error("line {line}: declaration after @data")]
    DeclarationAfterData { line: usize },
    #[error("line {line}: data row before @data section")]
    DataBeforeDataSection { line: usize },
    #[error("missing @data section")]
    MissingDataSection,
    #[error("no attributes declared")]
    NoAttributes,
    #[error("line {line}: row has {got} values, expected {expected}")]
    RowArity {
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error("line {line}: token `{token}` is not a valid numeric value for attribute `{name}`")]
    NumericToken {
        line: usize,
        name: String,
        token: String,
    },
    #[error("line {line}: token `{token}` is not a declared category of attribute `{name}`")]
    NominalToken {
        line: usize,
        name: String,
        token: String,
    },
    #[error("line {line}: duplicate header name `{name}`")]
    DuplicateHeader { line: usize, name: String },
    #[error("line {line}: schema hint has {hint} attributes but header has {header}")]
    SchemaHintArity {
        line: usize,
        hint: usize,
        header: usize,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next significant line as (1-based number, trimmed content).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.iter.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            return Some((idx + 1, line));
        }
        None
    }
}

/// Parses an ARFF-subset document into a [`Dataset`]. Attribute and row order
/// match the source.
pub fn parse_arff(source: &str) -> Result<Dataset, ParseError> {
    let mut lines = Lines::new(source);

    let (line_no, first) = lines.next().ok_or(ParseError::ExpectedRelation { line: 1 })?;
    let relation = match split_directive(first) {
        Some((keyword, rest)) if keyword.eq_ignore_ascii_case("@relation") => {
            let name = rest.trim();
            if name.is_empty() {
                return Err(ParseError::ExpectedRelation { line: line_no });
            }
            name.to_string()
        }
        _ => return Err(ParseError::ExpectedRelation { line: line_no }),
    };

    let mut schema: Vec<AttributeSchema> = Vec::new();
    let mut in_data = false;
    let mut cells: Vec<CellBuilder> = Vec::new();
    let mut row_count = 0usize;

    while let Some((line_no, line)) = lines.next() {
        if let Some((keyword, rest)) = split_directive(line) {
            if keyword.eq_ignore_ascii_case("@attribute") {
                if in_data {
                    return Err(ParseError::DeclarationAfterData { line: line_no });
                }
                let attr = parse_attribute_decl(rest, line_no, &mut lines)?;
                if schema.iter().any(|a| a.name == attr.name) {
                    return Err(ParseError::DuplicateAttribute {
                        line: line_no,
                        name: attr.name,
                    });
                }
                schema.push(attr);
                continue;
            }
            if keyword.eq_ignore_ascii_case("@data") {
                if in_data {
                    return Err(ParseError::UnexpectedDirective {
                        line: line_no,
                        token: keyword.to_string(),
                    });
                }
                if schema.is_empty() {
                    return Err(ParseError::NoAttributes);
                }
                in_data = true;
                cells = schema.iter().map(CellBuilder::new).collect();
                continue;
            }
            if keyword.eq_ignore_ascii_case("@relation") {
                return Err(ParseError::UnexpectedDirective {
                    line: line_no,
                    token: keyword.to_string(),
                });
            }
            if keyword.starts_with('@') && !in_data {
                return Err(ParseError::UnexpectedDirective {
                    line: line_no,
                    token: keyword.to_string(),
                });
            }
        }

        if !in_data {
            return Err(ParseError::DataBeforeDataSection { line: line_no });
        }
        parse_row(line, line_no, &schema, &mut cells)?;
        row_count += 1;
    }

    if !in_data {
        return Err(ParseError::MissingDataSection);
    }
    let _ = row_count;
    let columns = cells.into_iter().map(CellBuilder::finish).collect();
    Ok(Dataset::new(relation, schema, columns)?)
}

fn split_directive(line: &str) -> Option<(&str, &str)> {
    if !line.starts_with('@') {
        return None;
    }
    match line.find(char::is_whitespace) {
        Some(pos) => Some((&line[..pos], &line[pos..])),
        None => Some((line, "")),
    }
}

fn parse_attribute_decl(
    rest: &str,
    line_no: usize,
    lines: &mut Lines<'_>,
) -> Result<AttributeSchema, ParseError> {
    let rest = rest.trim();
    let (name, kind_text) = match rest.find(char::is_whitespace) {
        Some(pos) => (&rest[..pos], rest[pos..].trim()),
        None => (rest, ""),
    };
    if name.is_empty() {
        return Err(ParseError::MalformedAttribute { line: line_no });
    }

    // A declaration whose kind spec is absent or has an unclosed brace
    // continues on the following line(s).
    let mut kind_text = kind_text.to_string();
    while kind_text.is_empty() || (kind_text.starts_with('{') && !kind_text.contains('}')) {
        match lines.next() {
            Some((_, cont)) => {
                if !kind_text.is_empty() {
                    kind_text.push(' ');
                }
                kind_text.push_str(cont);
            }
            None => {
                return Err(if kind_text.is_empty() {
                    ParseError::MalformedAttribute { line: line_no }
                } else {
                    ParseError::UnterminatedCategories {
                        line: line_no,
                        name: name.to_string(),
                    }
                });
            }
        }
    }

    if kind_text.eq_ignore_ascii_case("numeric") {
        return Ok(AttributeSchema::numeric(name));
    }
    if let Some(inner) = kind_text
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
    {
        let mut categories = Vec::new();
        for label in inner.split(',') {
            let label = label.trim();
            if label.is_empty() {
                return Err(ParseError::EmptyCategory {
                    line: line_no,
                    name: name.to_string(),
                });
            }
            if categories.iter().any(|c| c == label) {
                return Err(ParseError::DuplicateCategory {
                    line: line_no,
                    name: name.to_string(),
                    label: label.to_string(),
                });
            }
            categories.push(label.to_string());
        }
        return Ok(AttributeSchema::nominal(name, categories));
    }
    Err(ParseError::UnknownKind {
        line: line_no,
        name: name.to_string(),
        token: kind_text,
    })
}

pub(super) enum CellBuilder {
    Numeric(Vec<f64>, Vec<bool>),
    Nominal(Vec<u32>, Vec<bool>),
}

impl CellBuilder {
    pub(super) fn new(schema: &AttributeSchema) -> Self {
        match schema.kind {
            AttributeKind::Numeric => CellBuilder::Numeric(Vec::new(), Vec::new()),
            AttributeKind::Nominal(_) => CellBuilder::Nominal(Vec::new(), Vec::new()),
        }
    }

    pub(super) fn finish(self) -> Column {
        match self {
            CellBuilder::Numeric(values, missing) => Column {
                values: ColumnValues::Numeric(values),
                missing,
            },
            CellBuilder::Nominal(values, missing) => Column {
                values: ColumnValues::Nominal(values),
                missing,
            },
        }
    }
}

fn parse_row(
    line: &str,
    line_no: usize,
    schema: &[AttributeSchema],
    cells: &mut [CellBuilder],
) -> Result<(), ParseError> {
    let mut count = 0usize;
    for (pos, raw) in line.split(',').enumerate() {
        let token = raw.trim();
        count += 1;
        if pos >= schema.len() {
            continue;
        }
        push_token(token, line_no, &schema[pos], &mut cells[pos], false)?;
    }
    if count != schema.len() {
        return Err(ParseError::RowArity {
            line: line_no,
            got: count,
            expected: schema.len(),
        });
    }
    Ok(())
}

pub(super) fn push_token(
    token: &str,
    line_no: usize,
    schema: &AttributeSchema,
    cell: &mut CellBuilder,
    empty_is_missing: bool,
) -> Result<(), ParseError> {
    let missing = token == "?" || (empty_is_missing && token.is_empty());
    match (&schema.kind, cell) {
        (AttributeKind::Numeric, CellBuilder::Numeric(values, mask)) => {
            if missing {
                values.push(0.0);
                mask.push(true);
            } else {
                let value =
                    parse_numeric_token(token).ok_or_else(|| ParseError::NumericToken {
                        line: line_no,
                        name: schema.name.clone(),
                        token: token.to_string(),
                    })?;
                values.push(value);
                mask.push(false);
            }
        }
        (AttributeKind::Nominal(categories), CellBuilder::Nominal(values, mask)) => {
            if missing {
                values.push(0);
                mask.push(true);
            } else {
                let index = categories.iter().position(|c| c == token).ok_or_else(|| {
                    ParseError::NominalToken {
                        line: line_no,
                        name: schema.name.clone(),
                        token: token.to_string(),
                    }
                })?;
                values.push(index as u32);
                mask.push(false);
            }
        }
        _ => unreachable!("builder kind follows schema kind"),
    }
    Ok(())
}

/// Serializes a dataset as ARFF. `parse_arff(write_arff(ds))` reproduces the
/// dataset exactly, including the missing mask and relation name.
pub fn write_arff(ds: &Dataset) -> String {
    let mut out = String::new();
    out.push_str("@relation ");
    out.push_str(ds.relation());
    out.push_str("\n\n");
    for attr in ds.schema() {
        out.push_str("@attribute ");
        out.push_str(&attr.name);
        match &attr.kind {
            AttributeKind::Numeric => out.push_str(" numeric"),
            AttributeKind::Nominal(categories) => {
                out.push_str(" {");
                out.push_str(&categories.join(","));
                out.push('}');
            }
        }
        out.push('\n');
    }
    out.push_str("\n@data\n");
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

pub(super) fn render_cell(attr: &AttributeSchema, col: &Column, row: usize) -> String {
    if col.missing[row] {
        return "?".to_string();
    }
    match (&attr.kind, &col.values) {
        (AttributeKind::Numeric, ColumnValues::Numeric(v)) => format_numeric_cell(v[row]),
        (AttributeKind::Nominal(categories), ColumnValues::Nominal(v)) => {
            categories[v[row] as usize].clone()
        }
        _ => unreachable!("column kind follows schema kind"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GHA_EXCERPT: &str = include_str!("../../tests/data/gha_excerpt.arff");

    #[test]
    fn parses_production_excerpt() {
        let ds = parse_arff(GHA_EXCERPT).unwrap();
        assert_eq!(ds.relation(), "GHA_dekad_22_out01");
        assert_eq!(ds.n_attributes(), 25);
        assert_eq!(ds.row_count(), 4);

        let nominal: Vec<&str> = ds
            .schema()
            .iter()
            .filter(|a| !a.is_numeric())
            .map(|a| a.name.as_str())
            .collect();
        assert_eq!(nominal, vec!["eco", "landcover"]);
        assert_eq!(ds.schema().iter().filter(|a| a.is_numeric()).count(), 23);

        // `?` is a declared category of eco, yet the bare `?` data token stays a
        // missing cell: awc and SM are fully missing in this excerpt.
        let eco = &ds.schema()[ds.attribute_index("eco").unwrap()];
        assert!(eco.kind.categories().unwrap().contains(&"?".to_string()));

        for name in ["awc", "SM"] {
            let col = ds.column(ds.attribute_index(name).unwrap());
            assert_eq!(col.present_count(), 0, "{name} should be fully missing");
        }
        let zscore = ds.column(ds.attribute_index("Zscore").unwrap());
        assert_eq!(zscore.present_count(), 4);
        let (values, _) = zscore.as_numeric().unwrap();
        assert_eq!(values, &[-332.0, -332.0, -332.0, -332.0]);

        let eco_col = ds.column(ds.attribute_index("eco").unwrap());
        let (idx, mask) = eco_col.as_nominal().unwrap();
        assert!(mask.iter().all(|m| !m));
        let categories = eco.kind.categories().unwrap();
        assert!(idx.iter().all(|&i| categories[i as usize] == "10698"));

        let with_target = ds.with_target("SSG_dek23").unwrap();
        assert_eq!(with_target.target(), Some(24));
    }

    #[test]
    fn excerpt_round_trip_is_lossless() {
        let ds = parse_arff(GHA_EXCERPT).unwrap();
        let again = parse_arff(&write_arff(&ds)).unwrap();
        assert_eq!(ds, again);
        assert_eq!(again.relation(), ds.relation());
    }

    #[test]
    fn empty_data_section_gives_zero_rows() {
        let ds = parse_arff("@relation r\n@attribute a numeric\n@attribute b numeric\n@data\n")
            .unwrap();
        assert_eq!(ds.n_attributes(), 2);
        assert_eq!(ds.row_count(), 0);
    }

    #[test]
    fn numeric_type_mismatch_names_line_and_token() {
        let err = parse_arff("@relation r\n@attribute x numeric\n@data\n1\nabc\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::NumericToken {
                line: 5,
                name: "x".into(),
                token: "abc".into()
            }
        );
    }

    #[test]
    fn undeclared_nominal_token_is_an_error() {
        let err =
            parse_arff("@relation r\n@attribute c {a,b}\n@data\nz\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::NominalToken {
                line: 4,
                name: "c".into(),
                token: "z".into()
            }
        );
    }

    #[test]
    fn row_arity_mismatch_is_an_error() {
        let err = parse_arff("@relation r\n@attribute a numeric\n@attribute b numeric\n@data\n1\n")
            .unwrap_err();
        assert_eq!(
            err,
            ParseError::RowArity {
                line: 5,
                got: 1,
                expected: 2
            }
        );
    }

    #[test]
    fn unknown_kind_keyword_is_an_error() {
        let err = parse_arff("@relation r\n@attribute a string\n@data\n").unwrap_err();
        assert!(matches!(err, ParseError::UnknownKind { line: 2, .. }));
    }

    #[test]
    fn duplicate_attribute_is_an_error() {
        let err =
            parse_arff("@relation r\n@attribute a numeric\n@attribute a numeric\n@data\n")
                .unwrap_err();
        assert_eq!(
            err,
            ParseError::DuplicateAttribute {
                line: 3,
                name: "a".into()
            }
        );
    }

    #[test]
    fn keywords_match_case_insensitively() {
        let ds = parse_arff("@RELATION r\n@Attribute a NUMERIC\n@DATA\n2.5\n").unwrap();
        assert_eq!(ds.row_count(), 1);
        assert!(ds.schema()[0].is_numeric());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let ds = parse_arff(
            "% header comment\n@relation r\n\n@attribute a numeric\n% inline\n@data\n\n1\n% trailing\n2\n",
        )
        .unwrap();
        let (values, _) = ds.column(0).as_numeric().unwrap();
        assert_eq!(values, &[1.0, 2.0]);
    }

    #[test]
    fn category_list_may_continue_on_next_line() {
        let ds = parse_arff("@relation r\n@attribute c\n{a,b,\nc}\n@data\nb\n").unwrap();
        assert_eq!(
            ds.schema()[0].kind.categories().unwrap(),
            &["a".to_string(), "b".to_string(), "c".to_string()]
        );
    }

    #[test]
    fn signed_and_exponent_numerics_parse() {
        let ds = parse_arff("@relation r\n@attribute a numeric\n@data\n-1.5e-2\n+.5\n3.\n")
            .unwrap();
        let (values, _) = ds.column(0).as_numeric().unwrap();
        assert_eq!(values, &[-0.015, 0.5, 3.0]);
    }

    #[test]
    fn whitespace_around_commas_is_trimmed() {
        let ds = parse_arff("@relation r\n@attribute a numeric\n@attribute c { x , y }\n@data\n 1 , x \n")
            .unwrap();
        assert_eq!(ds.schema()[1].kind.categories().unwrap(), &["x", "y"]);
        let (idx, _) = ds.column(1).as_nominal().unwrap();
        assert_eq!(idx, &[0]);
    }

    #[test]
    fn missing_data_section_is_an_error() {
        assert_eq!(
            parse_arff("@relation r\n@attribute a numeric\n").unwrap_err(),
            ParseError::MissingDataSection
        );
    }
}
