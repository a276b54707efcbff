//! Tabular data ingestion: the [`Dataset`] model plus ARFF-subset and CSV
//! parsers and serializers.
//!
//! A [`Dataset`] is column-major: one typed value vector per attribute with a
//! per-cell missing mask. Once built it is immutable and safe to share across
//! threads; all downstream analysis reads it without copying.

mod arff;
mod csv;

pub use arff::{parse_arff, write_arff, ParseError};
pub use csv::{parse_csv, write_csv};

use thiserror::Error;

/// Attribute kind: continuous numeric, or nominal with an ordered category list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeKind {
    Numeric,
    /// Category labels in declaration order. Non-empty, labels distinct.
    Nominal(Vec<String>),
}

impl AttributeKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, AttributeKind::Numeric)
    }

    pub fn categories(&self) -> Option<&[String]> {
        match self {
            AttributeKind::Numeric => None,
            AttributeKind::Nominal(cats) => Some(cats),
        }
    }
}

/// Name and kind of one attribute. Names are case-sensitive and unique within
/// a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal(name: impl Into<String>, categories: Vec<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Nominal(categories),
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind.is_numeric()
    }
}

/// Per-attribute cell storage. Nominal cells hold indices into the schema's
/// category list.
#[derive(Debug, Clone)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Nominal(Vec<u32>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Nominal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One attribute column: values plus the missing mask. Masked cells carry an
/// unspecified payload (parsers store 0).
#[derive(Debug, Clone)]
pub struct Column {
    pub values: ColumnValues,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn numeric(values: Vec<f64>, missing: Vec<bool>) -> Self {
        Column {
            values: ColumnValues::Numeric(values),
            missing,
        }
    }

    pub fn nominal(values: Vec<u32>, missing: Vec<bool>) -> Self {
        Column {
            values: ColumnValues::Nominal(values),
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        self.missing[row]
    }

    /// Numeric payload, or `None` for nominal columns.
    pub fn as_numeric(&self) -> Option<(&[f64], &[bool])> {
        match &self.values {
            ColumnValues::Numeric(v) => Some((v, &self.missing)),
            ColumnValues::Nominal(_) => None,
        }
    }

    /// Nominal payload, or `None` for numeric columns.
    pub fn as_nominal(&self) -> Option<(&[u32], &[bool])> {
        match &self.values {
            ColumnValues::Nominal(v) => Some((v, &self.missing)),
            ColumnValues::Numeric(_) => None,
        }
    }

    pub fn present_count(&self) -> usize {
        self.missing.iter().filter(|m| !**m).count()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DatasetError {
    #[error("attribute name must not be empty")]
    EmptyName,
    #[error("attribute name `{0}` contains characters the serializers cannot represent")]
    InvalidName(String),
    #[error("duplicate attribute name `{0}`")]
    DuplicateName(String),
    #[error("attribute `{0}`: nominal category list must not be empty")]
    EmptyCategories(String),
    #[error("attribute `{name}`: duplicate category label `{label}`")]
    DuplicateCategory { name: String, label: String },
    #[error("attribute `{name}`: category label `{label}` cannot be represented")]
    InvalidCategory { name: String, label: String },
    #[error("attribute `{name}`, row {row}: a present cell cannot hold the `?` category")]
    PresentMissingMarker { name: String, row: usize },
    #[error("attribute `{name}`: column has {got} cells, expected {expected}")]
    ColumnLength {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("attribute `{name}`: missing mask has {got} cells, expected {expected}")]
    MaskLength {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("attribute `{name}`: column storage does not match declared kind")]
    KindMismatch { name: String },
    #[error("attribute `{name}`: category index {index} out of range for {count} categories")]
    CategoryIndex {
        name: String,
        index: u32,
        count: usize,
    },
    #[error("schema has {schema} attributes but {columns} columns were supplied")]
    ColumnCount { schema: usize, columns: usize },
    #[error("target attribute `{0}` not found")]
    TargetNotFound(String),
    #[error("target attribute `{0}` is nominal; only numeric targets are supported")]
    NominalTarget(String),
}

/// Immutable column-major table of typed attributes with an optional numeric
/// target designation.
#[derive(Debug, Clone)]
pub struct Dataset {
    relation: String,
    schema: Vec<AttributeSchema>,
    columns: Vec<Column>,
    row_count: usize,
    target: Option<usize>,
}

impl Dataset {
    /// Builds a dataset, validating every schema and column invariant:
    /// unique non-empty names, non-empty distinct category lists, uniform
    /// column length, in-range category indices.
    pub fn new(
        relation: impl Into<String>,
        schema: Vec<AttributeSchema>,
        columns: Vec<Column>,
    ) -> Result<Self, DatasetError> {
        if schema.len() != columns.len() {
            return Err(DatasetError::ColumnCount {
                schema: schema.len(),
                columns: columns.len(),
            });
        }
        for (i, attr) in schema.iter().enumerate() {
            if attr.name.is_empty() {
                return Err(DatasetError::EmptyName);
            }
            if !name_is_writable(&attr.name) {
                return Err(DatasetError::InvalidName(attr.name.clone()));
            }
            if schema[..i].iter().any(|other| other.name == attr.name) {
                return Err(DatasetError::DuplicateName(attr.name.clone()));
            }
            if let AttributeKind::Nominal(cats) = &attr.kind {
                if cats.is_empty() {
                    return Err(DatasetError::EmptyCategories(attr.name.clone()));
                }
                for (j, label) in cats.iter().enumerate() {
                    if !label_is_writable(label) {
                        return Err(DatasetError::InvalidCategory {
                            name: attr.name.clone(),
                            label: label.clone(),
                        });
                    }
                    if cats[..j].contains(label) {
                        return Err(DatasetError::DuplicateCategory {
                            name: attr.name.clone(),
                            label: label.clone(),
                        });
                    }
                }
            }
        }
        let row_count = columns.first().map_or(0, Column::len);
        for (attr, col) in schema.iter().zip(&columns) {
            if col.len() != row_count {
                return Err(DatasetError::ColumnLength {
                    name: attr.name.clone(),
                    got: col.len(),
                    expected: row_count,
                });
            }
            if col.missing.len() != row_count {
                return Err(DatasetError::MaskLength {
                    name: attr.name.clone(),
                    got: col.missing.len(),
                    expected: row_count,
                });
            }
            match (&attr.kind, &col.values) {
                (AttributeKind::Numeric, ColumnValues::Numeric(_)) => {}
                (AttributeKind::Nominal(cats), ColumnValues::Nominal(idx)) => {
                    for (row, &ix) in idx.iter().enumerate() {
                        if col.missing[row] {
                            continue;
                        }
                        if ix as usize >= cats.len() {
                            return Err(DatasetError::CategoryIndex {
                                name: attr.name.clone(),
                                index: ix,
                                count: cats.len(),
                            });
                        }
                        // A bare `?` cell always reads back as missing, so a
                        // present cell must never render as one.
                        if cats[ix as usize] == "?" {
                            return Err(DatasetError::PresentMissingMarker {
                                name: attr.name.clone(),
                                row,
                            });
                        }
                    }
                }
                _ => {
                    return Err(DatasetError::KindMismatch {
                        name: attr.name.clone(),
                    })
                }
            }
        }
        Ok(Dataset {
            relation: relation.into(),
            schema,
            columns,
            row_count,
            target: None,
        })
    }

    /// Designates the named attribute as the analysis target. The target must
    /// exist and be numeric.
    pub fn with_target(mut self, name: &str) -> Result<Self, DatasetError> {
        let index = self
            .attribute_index(name)
            .ok_or_else(|| DatasetError::TargetNotFound(name.to_string()))?;
        if !self.schema[index].is_numeric() {
            return Err(DatasetError::NominalTarget(name.to_string()));
        }
        self.target = Some(index);
        Ok(self)
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    /// Indices of every attribute except the target, in declaration order.
    pub fn analysis_indices(&self) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&i| Some(i) != self.target)
            .collect()
    }

    /// Indices of numeric non-target attributes, in declaration order.
    pub fn numeric_analysis_indices(&self) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&i| Some(i) != self.target && self.schema[i].is_numeric())
            .collect()
    }
}

/// Cell-wise equality: schema, row order, target and missing masks must match;
/// masked cells compare equal regardless of payload. The relation name is
/// identity metadata and does not participate.
impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        if self.schema != other.schema
            || self.row_count != other.row_count
            || self.target != other.target
        {
            return false;
        }
        self.columns
            .iter()
            .zip(&other.columns)
            .all(|(a, b)| columns_equal(a, b))
    }
}

fn columns_equal(a: &Column, b: &Column) -> bool {
    if a.missing != b.missing {
        return false;
    }
    match (&a.values, &b.values) {
        (ColumnValues::Numeric(x), ColumnValues::Numeric(y)) => x
            .iter()
            .zip(y)
            .zip(&a.missing)
            .all(|((xv, yv), &m)| m || xv == yv),
        (ColumnValues::Nominal(x), ColumnValues::Nominal(y)) => x
            .iter()
            .zip(y)
            .zip(&a.missing)
            .all(|((xv, yv), &m)| m || xv == yv),
        _ => false,
    }
}

// Writability guards: both serializers must reproduce the value verbatim.
// Names sit between whitespace in declarations and commas in rows; labels
// additionally must survive trimming and not collide with comment or
// missing markers.
fn name_is_writable(name: &str) -> bool {
    !name.contains([',', '{', '}'])
        && !name.contains(char::is_whitespace)
        && !name.starts_with('%')
}

fn label_is_writable(label: &str) -> bool {
    !label.is_empty()
        && label == label.trim()
        && !label.contains([',', '{', '}'])
        && !label.starts_with('%')
}

/// Strict decimal grammar shared by the ARFF and CSV readers: optional sign,
/// digits with an optional fractional part (or a bare fraction), optional
/// exponent. Rejects NaN/infinity spellings so parsed data stays finite.
pub(crate) fn is_numeric_token(token: &str) -> bool {
    let rest = token
        .strip_prefix(['+', '-'])
        .unwrap_or(token)
        .as_bytes();
    if rest.is_empty() {
        return false;
    }
    let mut i = 0;
    let mut int_digits = 0;
    while i < rest.len() && rest[i].is_ascii_digit() {
        int_digits += 1;
        i += 1;
    }
    let mut frac_digits = 0;
    if i < rest.len() && rest[i] == b'.' {
        i += 1;
        while i < rest.len() && rest[i].is_ascii_digit() {
            frac_digits += 1;
            i += 1;
        }
    }
    if int_digits == 0 && frac_digits == 0 {
        return false;
    }
    if i < rest.len() && (rest[i] == b'e' || rest[i] == b'E') {
        i += 1;
        if i < rest.len() && (rest[i] == b'+' || rest[i] == b'-') {
            i += 1;
        }
        let mut exp_digits = 0;
        while i < rest.len() && rest[i].is_ascii_digit() {
            exp_digits += 1;
            i += 1;
        }
        if exp_digits == 0 {
            return false;
        }
    }
    i == rest.len()
}

/// Grammar check plus a finiteness guard: an overflowing literal such as
/// `1e400` parses to infinity in Rust and must be rejected, not stored.
pub(crate) fn parse_numeric_token(token: &str) -> Option<f64> {
    if is_numeric_token(token) {
        token.parse::<f64>().ok().filter(|v| v.is_finite())
    } else {
        None
    }
}

/// Renders a numeric cell so that re-parsing recovers the identical `f64`
/// (shortest round-trip form).
pub(crate) fn format_numeric_cell(value: f64) -> String {
    format!("{value}")
}
