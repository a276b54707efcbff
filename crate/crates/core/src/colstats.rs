//! Per-column summary statistics, standardization, and missing-value
//! policies shared by the correlation engine and PCA.
//!
//! All statistics use the population convention (divisor `n`): the
//! correlation definition normalizes by `n * sigma_x * sigma_y`, which pairs
//! with the plain cross-product sum only under population standard
//! deviations.

use thiserror::Error;

use crate::ingest::{Column, ColumnValues, Dataset};

/// Summary of the present cells of one numeric column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSummary {
    pub present_count: usize,
    pub mean: f64,
    /// Population standard deviation (divisor `present_count`).
    pub sigma: f64,
    pub min: f64,
    pub max: f64,
    /// Set when the column has no present cells; mean and sigma are 0.
    pub all_missing: bool,
}

impl ColumnSummary {
    /// Zero variance: every present value equal (or none present).
    pub fn is_constant(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Two-pass summary over present cells: exact mean first, then central
/// moments. Stable against catastrophic cancellation on large-offset data.
pub fn summarize(values: &[f64], missing: &[bool]) -> ColumnSummary {
    debug_assert_eq!(values.len(), missing.len());
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (&v, &m) in values.iter().zip(missing) {
        if m {
            continue;
        }
        n += 1;
        sum += v;
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    if n == 0 {
        return ColumnSummary {
            present_count: 0,
            mean: 0.0,
            sigma: 0.0,
            min: 0.0,
            max: 0.0,
            all_missing: true,
        };
    }
    let mean = sum / n as f64;
    let mut sq = 0.0;
    for (&v, &m) in values.iter().zip(missing) {
        if !m {
            let d = v - mean;
            sq += d * d;
        }
    }
    ColumnSummary {
        present_count: n,
        mean,
        sigma: (sq / n as f64).sqrt(),
        min,
        max,
        all_missing: false,
    }
}

/// Single-pass (Welford) summary. Agrees with [`summarize`] to high relative
/// accuracy even on large-offset columns; useful when data arrives as a
/// stream.
pub fn summarize_streaming(values: &[f64], missing: &[bool]) -> ColumnSummary {
    debug_assert_eq!(values.len(), missing.len());
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (&v, &m) in values.iter().zip(missing) {
        if m {
            continue;
        }
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    if n == 0 {
        return ColumnSummary {
            present_count: 0,
            mean: 0.0,
            sigma: 0.0,
            min: 0.0,
            max: 0.0,
            all_missing: true,
        };
    }
    ColumnSummary {
        present_count: n,
        mean,
        sigma: (m2.max(0.0) / n as f64).sqrt(),
        min,
        max,
        all_missing: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardizeMode {
    MeanCenter,
    ZScore,
}

/// Standardized copy of a column. `degenerate` flags a zero-variance input
/// whose z-scored values were forced to zero.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
    pub degenerate: bool,
}

/// Mean-centers or z-scores the present cells; missing cells stay missing
/// (payload 0). Zero-variance columns z-score to all zeros with the
/// degenerate flag set.
pub fn standardize(values: &[f64], missing: &[bool], mode: StandardizeMode) -> Standardized {
    let summary = summarize(values, missing);
    let degenerate = summary.sigma == 0.0;
    let out = values
        .iter()
        .zip(missing)
        .map(|(&v, &m)| {
            if m {
                0.0
            } else {
                match mode {
                    StandardizeMode::MeanCenter => v - summary.mean,
                    StandardizeMode::ZScore => {
                        if degenerate {
                            0.0
                        } else {
                            (v - summary.mean) / summary.sigma
                        }
                    }
                }
            }
        })
        .collect();
    Standardized {
        values: out,
        missing: missing.to_vec(),
        degenerate: degenerate && mode == StandardizeMode::ZScore,
    }
}

/// How an analysis run resolves missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Keep the data as is; each attribute pair uses only rows where both
    /// values are present.
    #[default]
    PairwiseComplete,
    /// Fill numeric cells with the column mean, nominal cells with the modal
    /// category (ties broken toward the lowest category index).
    MeanImpute,
    /// Keep only rows with no missing cell in any attribute.
    DropIncompleteRows,
}

/// Row-pairing rule a policy leaves behind for the correlation engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    AllRows,
    PairwiseComplete,
}

/// Dataset prepared for analysis: either the original borrowed untouched
/// (pairwise pairing) or a transformed copy where every cell is present.
#[derive(Debug)]
pub enum PreparedData<'a> {
    Pairwise(&'a Dataset),
    Complete(Dataset),
}

impl PreparedData<'_> {
    pub fn dataset(&self) -> &Dataset {
        match self {
            PreparedData::Pairwise(ds) => ds,
            PreparedData::Complete(ds) => ds,
        }
    }

    pub fn pairing(&self) -> Pairing {
        match self {
            PreparedData::Pairwise(_) => Pairing::PairwiseComplete,
            PreparedData::Complete(_) => Pairing::AllRows,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("dropping incomplete rows left no data ({0} rows before filtering)")]
    NoCompleteRows(usize),
    #[error("cannot mean-impute attribute `{0}`: every cell is missing")]
    AllMissingColumn(String),
}

/// Applies a missing-value policy across every attribute of the dataset.
///
/// `DropIncompleteRows` errors when no complete row survives; `MeanImpute`
/// errors on an all-missing column. `PairwiseComplete` touches nothing and
/// returns the pairwise rule for the correlation engine.
pub fn apply_missing_policy(
    ds: &Dataset,
    policy: MissingPolicy,
) -> Result<PreparedData<'_>, PolicyError> {
    match policy {
        MissingPolicy::PairwiseComplete => Ok(PreparedData::Pairwise(ds)),
        MissingPolicy::DropIncompleteRows => {
            let keep = complete_row_mask(ds, &(0..ds.n_attributes()).collect::<Vec<_>>());
            if keep.iter().all(|k| !k) && ds.row_count() > 0 {
                return Err(PolicyError::NoCompleteRows(ds.row_count()));
            }
            Ok(PreparedData::Complete(filter_rows(ds, &keep)))
        }
        MissingPolicy::MeanImpute => {
            let mut columns = Vec::with_capacity(ds.n_attributes());
            for (attr, col) in ds.schema().iter().zip(ds.columns()) {
                if !col.is_empty() && col.present_count() == 0 {
                    return Err(PolicyError::AllMissingColumn(attr.name.clone()));
                }
                columns.push(impute_column(attr.kind.categories().map(<[String]>::len), col));
            }
            let imputed = Dataset::new(ds.relation(), ds.schema().to_vec(), columns)
                .expect("imputation preserves dataset invariants");
            Ok(PreparedData::Complete(carry_target(ds, imputed)))
        }
    }
}

// Dataset::new clears the target designation, so transforms restore it.
fn carry_target(source: &Dataset, transformed: Dataset) -> Dataset {
    match source.target() {
        Some(t) => transformed
            .with_target(&source.schema()[t].name)
            .expect("target attribute survives the transform"),
        None => transformed,
    }
}

/// True for rows where every listed attribute is present.
pub(crate) fn complete_row_mask(ds: &Dataset, attrs: &[usize]) -> Vec<bool> {
    let mut keep = vec![true; ds.row_count()];
    for &a in attrs {
        for (row, &m) in ds.column(a).missing.iter().enumerate() {
            if m {
                keep[row] = false;
            }
        }
    }
    keep
}

pub(crate) fn filter_rows(ds: &Dataset, keep: &[bool]) -> Dataset {
    let columns = ds
        .columns()
        .iter()
        .map(|col| {
            let missing: Vec<bool> = col
                .missing
                .iter()
                .zip(keep)
                .filter_map(|(&m, &k)| k.then_some(m))
                .collect();
            let values = match &col.values {
                ColumnValues::Numeric(v) => ColumnValues::Numeric(
                    v.iter()
                        .zip(keep)
                        .filter_map(|(&x, &k)| k.then_some(x))
                        .collect(),
                ),
                ColumnValues::Nominal(v) => ColumnValues::Nominal(
                    v.iter()
                        .zip(keep)
                        .filter_map(|(&x, &k)| k.then_some(x))
                        .collect(),
                ),
            };
            Column { values, missing }
        })
        .collect();
    let filtered = Dataset::new(ds.relation(), ds.schema().to_vec(), columns)
        .expect("row filtering preserves dataset invariants");
    carry_target(ds, filtered)
}

/// Fills missing cells: numeric columns with the mean, nominal columns with
/// the modal category. All-missing columns are returned unchanged.
pub(crate) fn impute_column(categories: Option<usize>, col: &Column) -> Column {
    if col.present_count() == 0 {
        return col.clone();
    }
    match &col.values {
        ColumnValues::Numeric(values) => {
            let summary = summarize(values, &col.missing);
            let filled = values
                .iter()
                .zip(&col.missing)
                .map(|(&v, &m)| if m { summary.mean } else { v })
                .collect();
            Column::numeric(filled, vec![false; col.len()])
        }
        ColumnValues::Nominal(values) => {
            let k = categories.unwrap_or(0).max(1);
            let mut counts = vec![0usize; k];
            for (&v, &m) in values.iter().zip(&col.missing) {
                if !m {
                    counts[v as usize] += 1;
                }
            }
            // Ties break toward the lowest category index.
            let modal = counts
                .iter()
                .enumerate()
                .max_by(|(ia, ca), (ib, cb)| ca.cmp(cb).then(ib.cmp(ia)))
                .map(|(i, _)| i as u32)
                .unwrap_or(0);
            let filled = values
                .iter()
                .zip(&col.missing)
                .map(|(&v, &m)| if m { modal } else { v })
                .collect();
            Column::nominal(filled, vec![false; col.len()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::AttributeSchema;

    fn col(values: &[f64], missing: &[bool]) -> (Vec<f64>, Vec<bool>) {
        (values.to_vec(), missing.to_vec())
    }

    #[test]
    fn constant_column_has_zero_sigma() {
        let (v, m) = col(&[1.0, 1.0, 1.0], &[false; 3]);
        let s = summarize(&v, &m);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.sigma, 0.0);
        assert!(s.is_constant());
    }

    #[test]
    fn population_sigma_of_one_two_three() {
        let (v, m) = col(&[1.0, 2.0, 3.0], &[false; 3]);
        let s = summarize(&v, &m);
        assert_eq!(s.mean, 2.0);
        assert!((s.sigma - 0.816497).abs() < 1e-6);
        assert!((s.sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max), (1.0, 3.0));
    }

    #[test]
    fn missing_cells_are_excluded() {
        let (v, m) = col(&[1.0, 0.0, 3.0], &[false, true, false]);
        let s = summarize(&v, &m);
        assert_eq!(s.present_count, 2);
        assert_eq!(s.mean, 2.0);
    }

    #[test]
    fn all_missing_column_is_flagged() {
        let (v, m) = col(&[0.0, 0.0], &[true, true]);
        let s = summarize(&v, &m);
        assert!(s.all_missing);
        assert_eq!(s.present_count, 0);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.sigma, 0.0);
    }

    #[test]
    fn zscore_of_one_two_three() {
        let (v, m) = col(&[1.0, 2.0, 3.0], &[false; 3]);
        let z = standardize(&v, &m, StandardizeMode::ZScore);
        assert!(!z.degenerate);
        for (got, want) in z.values.iter().zip([-1.224745, 0.0, 1.224745]) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn zscore_of_constant_column_is_zero_and_flagged() {
        let (v, m) = col(&[5.0, 5.0], &[false; 2]);
        let z = standardize(&v, &m, StandardizeMode::ZScore);
        assert!(z.degenerate);
        assert_eq!(z.values, vec![0.0, 0.0]);
    }

    #[test]
    fn mean_center_preserves_missing() {
        let (v, m) = col(&[1.0, 0.0, 3.0], &[false, true, false]);
        let c = standardize(&v, &m, StandardizeMode::MeanCenter);
        assert_eq!(c.values, vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.missing, vec![false, true, false]);
        assert!(!c.degenerate);
    }

    #[test]
    fn zscore_then_summarize_is_standard_normal_shape() {
        let (v, m) = col(&[3.0, 9.5, -2.25, 7.0, 0.5], &[false; 5]);
        let z = standardize(&v, &m, StandardizeMode::ZScore);
        let s = summarize(&z.values, &z.missing);
        assert!(s.mean.abs() < 1e-12);
        assert!((s.sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let (v, m) = col(&[4.0, -1.0, 2.5, 2.5, 10.0], &[false; 5]);
        let (vp, mp) = col(&[10.0, 2.5, -1.0, 2.5, 4.0], &[false; 5]);
        let a = summarize(&v, &m);
        let b = summarize(&vp, &mp);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.sigma - b.sigma).abs() < 1e-12);
        assert_eq!((a.min, a.max), (b.min, b.max));
    }

    #[test]
    fn two_pass_and_streaming_agree_on_large_offsets() {
        // 1e6 + small noise is the catastrophic-cancellation regime.
        let values: Vec<f64> = (0..1000)
            .map(|i| 1.0e6 + ((i * 37 % 101) as f64) * 1e-3)
            .collect();
        let missing = vec![false; values.len()];
        let a = summarize(&values, &missing);
        let b = summarize_streaming(&values, &missing);
        assert!((a.mean - b.mean).abs() / a.mean.abs() <= 1e-10);
        assert!((a.sigma - b.sigma).abs() / a.sigma <= 1e-10);
    }

    fn policy_fixture() -> Dataset {
        Dataset::new(
            "t",
            vec![AttributeSchema::numeric("x"), AttributeSchema::numeric("y")],
            vec![
                Column::numeric(vec![1.0, 2.0, 3.0], vec![false, false, false]),
                Column::numeric(vec![1.0, 0.0, 3.0], vec![false, true, false]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn drop_incomplete_rows_filters() {
        let ds = policy_fixture();
        let prepared = apply_missing_policy(&ds, MissingPolicy::DropIncompleteRows).unwrap();
        assert_eq!(prepared.pairing(), Pairing::AllRows);
        let out = prepared.dataset();
        assert_eq!(out.row_count(), 2);
        let (x, _) = out.column(0).as_numeric().unwrap();
        assert_eq!(x, &[1.0, 3.0]);
        let (y, _) = out.column(1).as_numeric().unwrap();
        assert_eq!(y, &[1.0, 3.0]);
    }

    #[test]
    fn mean_impute_fills_with_column_mean() {
        let ds = policy_fixture();
        let prepared = apply_missing_policy(&ds, MissingPolicy::MeanImpute).unwrap();
        let out = prepared.dataset();
        let (y, mask) = out.column(1).as_numeric().unwrap();
        assert_eq!(y, &[1.0, 2.0, 3.0]);
        assert!(mask.iter().all(|m| !m));
    }

    #[test]
    fn mean_impute_preserves_column_mean() {
        let ds = policy_fixture();
        let before = summarize(
            ds.column(1).as_numeric().unwrap().0,
            ds.column(1).as_numeric().unwrap().1,
        );
        let prepared = apply_missing_policy(&ds, MissingPolicy::MeanImpute).unwrap();
        let (y, mask) = prepared.dataset().column(1).as_numeric().unwrap();
        let after = summarize(y, mask);
        assert!((before.mean - after.mean).abs() < 1e-12);
    }

    #[test]
    fn pairwise_policy_is_identity() {
        let ds = policy_fixture();
        let prepared = apply_missing_policy(&ds, MissingPolicy::PairwiseComplete).unwrap();
        assert_eq!(prepared.pairing(), Pairing::PairwiseComplete);
        assert_eq!(prepared.dataset(), &ds);
    }

    #[test]
    fn drop_to_zero_rows_is_an_error() {
        let ds = Dataset::new(
            "t",
            vec![AttributeSchema::numeric("x")],
            vec![Column::numeric(vec![0.0, 0.0], vec![true, true])],
        )
        .unwrap();
        assert_eq!(
            apply_missing_policy(&ds, MissingPolicy::DropIncompleteRows).unwrap_err(),
            PolicyError::NoCompleteRows(2)
        );
    }

    #[test]
    fn impute_all_missing_column_is_an_error() {
        let ds = Dataset::new(
            "t",
            vec![AttributeSchema::numeric("x")],
            vec![Column::numeric(vec![0.0], vec![true])],
        )
        .unwrap();
        assert_eq!(
            apply_missing_policy(&ds, MissingPolicy::MeanImpute).unwrap_err(),
            PolicyError::AllMissingColumn("x".into())
        );
    }

    #[test]
    fn nominal_impute_uses_modal_category_lowest_on_ties() {
        let schema = vec![AttributeSchema::nominal(
            "c",
            vec!["a".into(), "b".into(), "z".into()],
        )];
        let columns = vec![Column::nominal(
            vec![2, 1, 0, 0, 1],
            vec![false, false, false, false, true],
        )];
        let ds = Dataset::new("t", schema, columns).unwrap();
        let prepared = apply_missing_policy(&ds, MissingPolicy::MeanImpute).unwrap();
        let (idx, _) = prepared.dataset().column(0).as_nominal().unwrap();
        // a appears twice, b and z once each; modal = a (index 0).
        assert_eq!(idx[4], 0);
    }
}
