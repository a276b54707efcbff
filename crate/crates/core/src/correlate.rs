//! Attribute-attribute and attribute-target correlations for every type
//! combination, assembled into the [`CorrelationStructure`] the merit
//! evaluator consumes.
//!
//! Numeric pairs use the population-normalized linear correlation
//! `r = sum((x - mx)(y - my)) / (n * sigma_x * sigma_y)` over the rows where
//! both values are present. A nominal attribute against a numeric one is the
//! frequency-weighted sum of the correlations of its per-category 0/1
//! indicator columns; two nominal attributes are doubly weighted over both
//! indicator sets. Degenerate pairs (zero variance, fewer than two shared
//! rows, all-missing columns) correlate as 0 and are flagged, never errors,
//! so selection can rank past dead columns.

use rayon::prelude::*;
use thiserror::Error;

use crate::colstats::{complete_row_mask, filter_rows, impute_column, MissingPolicy};
use crate::format::format_float;
use crate::ingest::{Column, ColumnValues, Dataset};

/// How signed per-indicator contributions are aggregated for nominal
/// attributes. `Signed` follows the weighted-sum formula as printed;
/// `PerIndicatorAbs` sums the magnitudes instead, so that e.g. a nominal
/// column is maximally correlated with itself rather than cancelling to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NominalAggregation {
    #[default]
    Signed,
    PerIndicatorAbs,
}

/// One pairwise correlation with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorr {
    /// Correlation in [-1, 1]; exactly 0 when degenerate.
    pub r: f64,
    /// Rows that entered the computation.
    pub count: usize,
    /// Zero variance on either side, or fewer than two shared rows.
    pub degenerate: bool,
}

impl PairCorr {
    fn degenerate(count: usize) -> Self {
        PairCorr {
            r: 0.0,
            count,
            degenerate: true,
        }
    }
}

/// Population-normalized Pearson correlation over paired-present rows.
/// Clamped to [-1, 1]; degenerate when either paired variance is zero or
/// fewer than two paired rows exist.
pub fn pearson(x: &[f64], x_missing: &[bool], y: &[f64], y_missing: &[bool]) -> PairCorr {
    debug_assert_eq!(x.len(), y.len());
    let mut n = 0usize;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for i in 0..x.len() {
        if x_missing[i] || y_missing[i] {
            continue;
        }
        n += 1;
        sum_x += x[i];
        sum_y += y[i];
    }
    if n < 2 {
        return PairCorr::degenerate(n);
    }
    let mean_x = sum_x / n as f64;
    let mean_y = sum_y / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        if x_missing[i] || y_missing[i] {
            continue;
        }
        let dx = x[i] - mean_x;
        let dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return PairCorr::degenerate(n);
    }
    PairCorr {
        r: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        count: n,
        degenerate: false,
    }
}

/// Correlation of a nominal attribute with a numeric one: each of the k
/// category indicators is correlated with `y` and weighted by the category's
/// empirical frequency over the paired-present rows. Degenerate indicators
/// contribute 0.
pub fn nominal_numeric_corr(
    x: &[u32],
    x_missing: &[bool],
    category_count: usize,
    y: &[f64],
    y_missing: &[bool],
    aggregation: NominalAggregation,
) -> PairCorr {
    debug_assert_eq!(x.len(), y.len());
    let paired: Vec<bool> = x_missing
        .iter()
        .zip(y_missing)
        .map(|(&a, &b)| a || b)
        .collect();
    let n = paired.iter().filter(|m| !**m).count();
    if n < 2 {
        return PairCorr::degenerate(n);
    }
    let mut counts = vec![0usize; category_count];
    for i in 0..x.len() {
        if !paired[i] {
            counts[x[i] as usize] += 1;
        }
    }
    let present_categories = counts.iter().filter(|&&c| c > 0).count();
    if present_categories < 2 {
        // A constant indicator set: the lone indicator has zero variance.
        return PairCorr::degenerate(n);
    }

    let mut total = 0.0;
    let mut any = false;
    let mut indicator = vec![0.0; x.len()];
    for (cat, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        for i in 0..x.len() {
            indicator[i] = if x[i] as usize == cat { 1.0 } else { 0.0 };
        }
        let part = pearson(&indicator, &paired, y, y_missing);
        if part.degenerate {
            continue;
        }
        any = true;
        let weight = count as f64 / n as f64;
        total += match aggregation {
            NominalAggregation::Signed => weight * part.r,
            NominalAggregation::PerIndicatorAbs => weight * part.r.abs(),
        };
    }
    if !any {
        return PairCorr::degenerate(n);
    }
    PairCorr {
        r: total.clamp(-1.0, 1.0),
        count: n,
        degenerate: false,
    }
}

/// Correlation of two nominal attributes by double binarization: every
/// indicator pair is correlated and weighted by the product of the category
/// frequencies.
pub fn nominal_nominal_corr(
    x: &[u32],
    x_missing: &[bool],
    x_categories: usize,
    y: &[u32],
    y_missing: &[bool],
    y_categories: usize,
    aggregation: NominalAggregation,
) -> PairCorr {
    debug_assert_eq!(x.len(), y.len());
    let paired: Vec<bool> = x_missing
        .iter()
        .zip(y_missing)
        .map(|(&a, &b)| a || b)
        .collect();
    let n = paired.iter().filter(|m| !**m).count();
    if n < 2 {
        return PairCorr::degenerate(n);
    }
    let mut x_counts = vec![0usize; x_categories];
    let mut y_counts = vec![0usize; y_categories];
    for i in 0..x.len() {
        if !paired[i] {
            x_counts[x[i] as usize] += 1;
            y_counts[y[i] as usize] += 1;
        }
    }
    if x_counts.iter().filter(|&&c| c > 0).count() < 2
        || y_counts.iter().filter(|&&c| c > 0).count() < 2
    {
        return PairCorr::degenerate(n);
    }

    let mut total = 0.0;
    let mut any = false;
    let mut x_ind = vec![0.0; x.len()];
    let mut y_ind = vec![0.0; y.len()];
    for (xc, &x_count) in x_counts.iter().enumerate() {
        if x_count == 0 {
            continue;
        }
        for i in 0..x.len() {
            x_ind[i] = if x[i] as usize == xc { 1.0 } else { 0.0 };
        }
        let wx = x_count as f64 / n as f64;
        for (yc, &y_count) in y_counts.iter().enumerate() {
            if y_count == 0 {
                continue;
            }
            for i in 0..y.len() {
                y_ind[i] = if y[i] as usize == yc { 1.0 } else { 0.0 };
            }
            let part = pearson(&x_ind, &paired, &y_ind, &paired);
            if part.degenerate {
                continue;
            }
            any = true;
            let weight = wx * (y_count as f64 / n as f64);
            total += match aggregation {
                NominalAggregation::Signed => weight * part.r,
                NominalAggregation::PerIndicatorAbs => weight * part.r.abs(),
            };
        }
    }
    if !any {
        return PairCorr::degenerate(n);
    }
    PairCorr {
        r: total.clamp(-1.0, 1.0),
        count: n,
        degenerate: false,
    }
}

/// Symmetric attribute-attribute correlation matrix plus the attribute-target
/// vector, with per-pair row counts and degeneracy flags.
///
/// Indices are positions into `attributes` (analysis order = declaration
/// order). Structures loaded from a precomputed matrix CSV carry zero
/// `pair_counts` and `row_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStructure {
    /// Dataset attribute index per analysis position; empty for loaded matrices.
    pub attributes: Vec<usize>,
    pub names: Vec<String>,
    pub target_name: String,
    pub matrix: Vec<Vec<f64>>,
    pub target_corr: Vec<f64>,
    pub pair_counts: Vec<Vec<usize>>,
    pub target_counts: Vec<usize>,
    pub degenerate: Vec<Vec<bool>>,
    pub target_degenerate: Vec<bool>,
    pub row_count: usize,
}

impl CorrelationStructure {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Exact symmetry, bounded entries, and a unit (or 0-flagged degenerate)
    /// diagonal.
    pub fn check_invariants(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            let diag_ok = if self.degenerate[i][i] {
                self.matrix[i][i] == 0.0
            } else {
                self.matrix[i][i] == 1.0
            };
            if !diag_ok {
                return false;
            }
            for j in 0..n {
                if self.matrix[i][j] != self.matrix[j][i]
                    || self.matrix[i][j].abs() > 1.0
                    || self.pair_counts[i][j] > self.row_count
                {
                    return false;
                }
            }
            if self.target_corr[i].abs() > 1.0 || self.target_counts[i] > self.row_count {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrError {
    #[error("dataset has no target attribute designated")]
    NoTarget,
    #[error("analysis set must not contain the target attribute (index {0})")]
    TargetInAnalysis(usize),
    #[error("analysis attribute index {0} out of range")]
    AttributeOutOfRange(usize),
    #[error("line {line}: {message}")]
    MatrixCsv { line: usize, message: String },
}

/// Builds the full correlation structure for the given analysis attributes
/// against the dataset target.
///
/// The missing policy is resolved internally: `DropIncompleteRows` filters on
/// the analysis attributes plus the target, `MeanImpute` fills every fillable
/// column (all-missing columns are kept and come out degenerate), and
/// `PairwiseComplete` pairs rows per attribute pair. Pair computations run in
/// parallel; each accumulates in fixed row order, so results are identical
/// across thread counts.
pub fn correlation_structure(
    ds: &Dataset,
    analysis: &[usize],
    policy: MissingPolicy,
    aggregation: NominalAggregation,
) -> Result<CorrelationStructure, CorrError> {
    let target = ds.target().ok_or(CorrError::NoTarget)?;
    for &a in analysis {
        if a >= ds.n_attributes() {
            return Err(CorrError::AttributeOutOfRange(a));
        }
        if a == target {
            return Err(CorrError::TargetInAnalysis(a));
        }
    }

    let prepared: Dataset;
    let ds = match policy {
        MissingPolicy::PairwiseComplete => ds,
        MissingPolicy::DropIncompleteRows => {
            let mut relevant = analysis.to_vec();
            relevant.push(target);
            let keep = complete_row_mask(ds, &relevant);
            prepared = filter_rows(ds, &keep);
            &prepared
        }
        MissingPolicy::MeanImpute => {
            let columns = ds
                .schema()
                .iter()
                .zip(ds.columns())
                .map(|(attr, col)| impute_column(attr.kind.categories().map(<[String]>::len), col))
                .collect();
            let imputed = Dataset::new(ds.relation(), ds.schema().to_vec(), columns)
                .expect("imputation preserves dataset invariants");
            prepared = imputed
                .with_target(&ds.schema()[target].name)
                .expect("target survives imputation");
            &prepared
        }
    };

    let n = analysis.len();
    let pair_indices: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let pair_results: Vec<PairCorr> = pair_indices
        .par_iter()
        .map(|&(i, j)| column_pair(ds, analysis[i], analysis[j], aggregation))
        .collect();
    let target_results: Vec<PairCorr> = analysis
        .par_iter()
        .map(|&a| column_pair(ds, a, target, aggregation))
        .collect();

    let mut matrix = vec![vec![0.0; n]; n];
    let mut pair_counts = vec![vec![0usize; n]; n];
    let mut degenerate = vec![vec![false; n]; n];
    for (&(i, j), pair) in pair_indices.iter().zip(&pair_results) {
        matrix[i][j] = pair.r;
        matrix[j][i] = pair.r;
        pair_counts[i][j] = pair.count;
        pair_counts[j][i] = pair.count;
        degenerate[i][j] = pair.degenerate;
        degenerate[j][i] = pair.degenerate;
    }
    for (i, &a) in analysis.iter().enumerate() {
        let col = ds.column(a);
        let present = col.present_count();
        let self_degenerate = column_is_degenerate(col);
        matrix[i][i] = if self_degenerate { 0.0 } else { 1.0 };
        pair_counts[i][i] = present;
        degenerate[i][i] = self_degenerate;
    }

    let structure = CorrelationStructure {
        attributes: analysis.to_vec(),
        names: analysis
            .iter()
            .map(|&a| ds.schema()[a].name.clone())
            .collect(),
        target_name: ds.schema()[target].name.clone(),
        matrix,
        target_corr: target_results.iter().map(|p| p.r).collect(),
        pair_counts,
        target_counts: target_results.iter().map(|p| p.count).collect(),
        degenerate,
        target_degenerate: target_results.iter().map(|p| p.degenerate).collect(),
        row_count: ds.row_count(),
    };
    debug_assert!(structure.check_invariants());
    Ok(structure)
}

/// Zero-variance or effectively empty column; its diagonal entry is 0-flagged.
fn column_is_degenerate(col: &Column) -> bool {
    match &col.values {
        ColumnValues::Numeric(values) => {
            let summary = crate::colstats::summarize(values, &col.missing);
            summary.present_count < 2 || summary.sigma == 0.0
        }
        ColumnValues::Nominal(values) => {
            let mut seen = std::collections::BTreeSet::new();
            for (&v, &m) in values.iter().zip(&col.missing) {
                if !m {
                    seen.insert(v);
                }
            }
            let present = col.present_count();
            present < 2 || seen.len() < 2
        }
    }
}

fn column_pair(ds: &Dataset, a: usize, b: usize, aggregation: NominalAggregation) -> PairCorr {
    let ca = ds.column(a);
    let cb = ds.column(b);
    let ka = ds.schema()[a].kind.categories().map(<[String]>::len);
    let kb = ds.schema()[b].kind.categories().map(<[String]>::len);
    match (&ca.values, &cb.values) {
        (ColumnValues::Numeric(x), ColumnValues::Numeric(y)) => {
            pearson(x, &ca.missing, y, &cb.missing)
        }
        (ColumnValues::Nominal(x), ColumnValues::Numeric(y)) => nominal_numeric_corr(
            x,
            &ca.missing,
            ka.unwrap(),
            y,
            &cb.missing,
            aggregation,
        ),
        (ColumnValues::Numeric(x), ColumnValues::Nominal(y)) => nominal_numeric_corr(
            y,
            &cb.missing,
            kb.unwrap(),
            x,
            &ca.missing,
            aggregation,
        ),
        (ColumnValues::Nominal(x), ColumnValues::Nominal(y)) => nominal_nominal_corr(
            x,
            &ca.missing,
            ka.unwrap(),
            y,
            &cb.missing,
            kb.unwrap(),
            aggregation,
        ),
    }
}

/// Precision for the correlation-matrix CSV: two decimals mirrors the
/// published report layout, full preserves every bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixPrecision {
    TwoDecimals,
    Full,
}

/// Emits the correlation matrix as CSV: header row and first column carry the
/// attribute names, target last.
pub fn write_matrix_csv(cs: &CorrelationStructure, precision: MatrixPrecision) -> String {
    let fmt = |v: f64| match precision {
        MatrixPrecision::TwoDecimals => format!("{v:.2}"),
        MatrixPrecision::Full => format_float(v),
    };
    let n = cs.len();
    let mut out = String::new();
    for name in &cs.names {
        out.push(',');
        out.push_str(name);
    }
    out.push(',');
    out.push_str(&cs.target_name);
    out.push('\n');
    for i in 0..n {
        out.push_str(&cs.names[i]);
        for j in 0..n {
            out.push(',');
            out.push_str(&fmt(cs.matrix[i][j]));
        }
        out.push(',');
        out.push_str(&fmt(cs.target_corr[i]));
        out.push('\n');
    }
    out.push_str(&cs.target_name);
    for j in 0..n {
        out.push(',');
        out.push_str(&fmt(cs.target_corr[j]));
    }
    out.push(',');
    out.push_str(&fmt(1.0));
    out.push('\n');
    out
}

/// Loads a precomputed correlation matrix from the CSV layout written by
/// [`write_matrix_csv`]. The named target row supplies the attribute-target
/// vector; row counts are unknown and recorded as zero.
pub fn read_matrix_csv(text: &str, target_name: &str) -> Result<CorrelationStructure, CorrError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CorrError::MatrixCsv {
        line: 1,
        message: "empty matrix file".into(),
    })?;
    let names: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|t| t.trim().to_string())
        .collect();
    let total = names.len();
    let target_pos = names
        .iter()
        .position(|n| n == target_name)
        .ok_or_else(|| CorrError::MatrixCsv {
            line: 1,
            message: format!("target `{target_name}` not in matrix header"),
        })?;

    let mut full = vec![vec![0.0f64; total]; total];
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut parts = line.split(',').map(str::trim);
        let row_name = parts.next().unwrap_or("");
        if seen >= total {
            return Err(CorrError::MatrixCsv {
                line: line_no,
                message: "more matrix rows than header columns".into(),
            });
        }
        if row_name != names[seen] {
            return Err(CorrError::MatrixCsv {
                line: line_no,
                message: format!(
                    "row name `{row_name}` does not match header order (`{}` expected)",
                    names[seen]
                ),
            });
        }
        let mut count = 0usize;
        for (j, token) in parts.enumerate() {
            if j >= total {
                count += 1;
                continue;
            }
            let value = token.parse::<f64>().map_err(|_| CorrError::MatrixCsv {
                line: line_no,
                message: format!("`{token}` is not a number"),
            })?;
            if !value.is_finite() || value.abs() > 1.0 + 1e-9 {
                return Err(CorrError::MatrixCsv {
                    line: line_no,
                    message: format!("`{token}` is not a correlation in [-1, 1]"),
                });
            }
            full[seen][j] = value;
            count += 1;
        }
        if count != total {
            return Err(CorrError::MatrixCsv {
                line: line_no,
                message: format!("row has {count} values, expected {total}"),
            });
        }
        seen += 1;
    }
    if seen != total {
        return Err(CorrError::MatrixCsv {
            line: 0,
            message: format!("matrix has {seen} rows, expected {total}"),
        });
    }
    for i in 0..total {
        for j in (i + 1)..total {
            if (full[i][j] - full[j][i]).abs() > 1e-12 {
                return Err(CorrError::MatrixCsv {
                    line: 0,
                    message: format!(
                        "matrix is not symmetric at ({}, {})",
                        names[i], names[j]
                    ),
                });
            }
        }
    }

    let analysis: Vec<usize> = (0..total).filter(|&i| i != target_pos).collect();
    let n = analysis.len();
    let mut matrix = vec![vec![0.0; n]; n];
    let mut target_corr = vec![0.0; n];
    for (i, &ai) in analysis.iter().enumerate() {
        target_corr[i] = full[ai][target_pos];
        for (j, &aj) in analysis.iter().enumerate() {
            matrix[i][j] = full[ai][aj];
        }
    }
    Ok(CorrelationStructure {
        attributes: Vec::new(),
        names: analysis.iter().map(|&i| names[i].clone()).collect(),
        target_name: target_name.to_string(),
        matrix,
        target_corr,
        pair_counts: vec![vec![0; n]; n],
        target_counts: vec![0; n],
        degenerate: vec![vec![false; n]; n],
        target_degenerate: vec![false; n],
        row_count: 0,
    })
}
