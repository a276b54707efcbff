//! Principal-component attribute analysis: standardization, symmetric
//! eigendecomposition, eigenvalue/proportion/cumulative tables, loadings,
//! and the component count needed to reach a variance threshold.
//!
//! The analysis set is the numeric non-target attributes; nominal attributes
//! are excluded. Zero-variance columns are dropped from the analysis (their
//! names are recorded on the result) rather than aborting the run.

mod eigen;

pub use eigen::{eigen_sym, EigenDecomposition, EigenError};

use thiserror::Error;

use crate::colstats::{complete_row_mask, filter_rows, impute_column, summarize, MissingPolicy};
use crate::correlate::pearson;
use crate::format::format_report_float;
use crate::ingest::Dataset;

/// Matrix the decomposition runs on: covariance of mean-centered data or
/// correlation of z-scored data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaMode {
    Covariance,
    #[default]
    Correlation,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcaError {
    #[error("variance threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("need at least 2 usable numeric attributes, found {0}")]
    TooFewAttributes(usize),
    #[error("need at least 2 rows, found {0}")]
    TooFewRows(usize),
    #[error("covariance mode needs complete rows: use drop or impute, not pairwise")]
    CovarianceNeedsCompleteRows,
    #[error("matrix is not positive semidefinite: smallest eigenvalue {0}")]
    IndefiniteMatrix(f64),
    #[error("eigenvalue {0} is negative or not finite")]
    NegativeEigenvalue(f64),
    #[error("spectrum is all zero")]
    ZeroSpectrum,
    #[error("component count {k} out of range for {available} components")]
    ComponentOutOfRange { k: usize, available: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Eigenvalue slack below zero tolerated as rounding on a PSD input.
const PSD_TOLERANCE: f64 = 1e-8;
const EIGEN_TOLERANCE: f64 = 1e-10;

/// PCA output: descending spectrum, loadings, variance bookkeeping, and the
/// component count that reaches the variance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub mode: PcaMode,
    pub threshold: f64,
    /// Dataset attribute indices in the analysis, after degenerate drops.
    pub attributes: Vec<usize>,
    pub names: Vec<String>,
    /// Names of zero-variance or empty columns excluded from the analysis.
    pub dropped: Vec<String>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the loading vector of component j over
    /// `attributes`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `eigenvalues[j] / total_variance`.
    pub proportions: Vec<f64>,
    /// Prefix sums of `proportions`.
    pub cumulative: Vec<f64>,
    /// Smallest k whose cumulative proportion reaches `threshold`.
    pub k_for_threshold: usize,
    pub total_variance: f64,
    means: Vec<f64>,
    sigmas: Vec<f64>,
}

impl PcaResult {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Fits PCA on the numeric non-target attributes of the dataset.
///
/// Correlation mode builds the pairwise correlation matrix under the given
/// missing policy; covariance mode requires complete rows (drop or impute)
/// and builds the population covariance of the mean-centered data.
pub fn pca_fit(
    ds: &Dataset,
    mode: PcaMode,
    threshold: f64,
    policy: MissingPolicy,
) -> Result<PcaResult, PcaError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(PcaError::InvalidThreshold(threshold));
    }
    if ds.row_count() < 2 {
        return Err(PcaError::TooFewRows(ds.row_count()));
    }
    let candidates = ds.numeric_analysis_indices();

    let prepared: Dataset;
    let data = match policy {
        MissingPolicy::PairwiseComplete => {
            if mode == PcaMode::Covariance {
                return Err(PcaError::CovarianceNeedsCompleteRows);
            }
            ds
        }
        MissingPolicy::DropIncompleteRows => {
            let keep = complete_row_mask(ds, &candidates);
            prepared = filter_rows(ds, &keep);
            if prepared.row_count() < 2 {
                return Err(PcaError::TooFewRows(prepared.row_count()));
            }
            &prepared
        }
        MissingPolicy::MeanImpute => {
            let columns = ds
                .schema()
                .iter()
                .zip(ds.columns())
                .map(|(attr, col)| impute_column(attr.kind.categories().map(<[String]>::len), col))
                .collect();
            prepared = Dataset::new(ds.relation(), ds.schema().to_vec(), columns)
                .expect("imputation preserves dataset invariants");
            &prepared
        }
    };

    let mut attributes = Vec::new();
    let mut dropped = Vec::new();
    let mut means = Vec::new();
    let mut sigmas = Vec::new();
    for &a in &candidates {
        let (values, missing) = data.column(a).as_numeric().expect("numeric analysis set");
        let summary = summarize(values, missing);
        if summary.present_count < 2 || summary.sigma == 0.0 {
            dropped.push(ds.schema()[a].name.clone());
        } else {
            attributes.push(a);
            means.push(summary.mean);
            sigmas.push(summary.sigma);
        }
    }
    if attributes.len() < 2 {
        return Err(PcaError::TooFewAttributes(attributes.len()));
    }

    let d = attributes.len();
    let mut matrix = vec![vec![0.0; d]; d];
    match mode {
        PcaMode::Correlation => {
            for i in 0..d {
                matrix[i][i] = 1.0;
                let (xi, mi) = data.column(attributes[i]).as_numeric().unwrap();
                for j in (i + 1)..d {
                    let (xj, mj) = data.column(attributes[j]).as_numeric().unwrap();
                    // Degenerate overlaps enter as zero correlation.
                    let r = pearson(xi, mi, xj, mj).r;
                    matrix[i][j] = r;
                    matrix[j][i] = r;
                }
            }
        }
        PcaMode::Covariance => {
            let n = data.row_count() as f64;
            for i in 0..d {
                let (xi, _) = data.column(attributes[i]).as_numeric().unwrap();
                for j in i..d {
                    let (xj, _) = data.column(attributes[j]).as_numeric().unwrap();
                    let mut sum = 0.0;
                    for r in 0..xi.len() {
                        sum += (xi[r] - means[i]) * (xj[r] - means[j]);
                    }
                    let cov = sum / n;
                    matrix[i][j] = cov;
                    matrix[j][i] = cov;
                }
            }
        }
    }

    let decomposition = eigen_sym(&matrix, EIGEN_TOLERANCE)?;
    let mut eigenvalues = decomposition.eigenvalues;
    if let Some(&min) = eigenvalues.last() {
        if min < -PSD_TOLERANCE {
            return Err(PcaError::IndefiniteMatrix(min));
        }
    }
    for value in eigenvalues.iter_mut() {
        if *value < 0.0 {
            *value = 0.0;
        }
    }

    let (proportions, cumulative, total_variance) = variance_shares(&eigenvalues)?;
    let k_for_threshold = components_for_threshold(&eigenvalues, threshold)?;

    Ok(PcaResult {
        mode,
        threshold,
        names: attributes
            .iter()
            .map(|&a| ds.schema()[a].name.clone())
            .collect(),
        attributes,
        dropped,
        eigenvalues,
        eigenvectors: decomposition.eigenvectors,
        proportions,
        cumulative,
        k_for_threshold,
        total_variance,
        means,
        sigmas,
    })
}

fn variance_shares(eigenvalues: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64), PcaError> {
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(PcaError::ZeroSpectrum);
    }
    let proportions: Vec<f64> = eigenvalues.iter().map(|&l| l / total).collect();
    let mut cumulative = Vec::with_capacity(proportions.len());
    let mut sum = 0.0;
    for &p in &proportions {
        sum += p;
        cumulative.push(sum);
    }
    Ok((proportions, cumulative, total))
}

/// Smallest k such that the first k eigenvalues carry at least `threshold`
/// of the total variance (strict `>=` comparison).
pub fn components_for_threshold(eigenvalues: &[f64], threshold: f64) -> Result<usize, PcaError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(PcaError::InvalidThreshold(threshold));
    }
    if let Some(&bad) = eigenvalues.iter().find(|&&l| l < 0.0 || !l.is_finite()) {
        return Err(PcaError::NegativeEigenvalue(bad));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(PcaError::ZeroSpectrum);
    }
    let mut cum = 0.0;
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        cum += lambda;
        if cum / total >= threshold {
            return Ok(k + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// Projects every dataset row onto the top-k components: each row is
/// standardized with the fit's column statistics (z-score in correlation
/// mode, mean-center in covariance mode; missing cells contribute zero) and
/// multiplied through the loading vectors. Returns one k-vector of scores
/// per row.
pub fn project(ds: &Dataset, result: &PcaResult, k: usize) -> Result<Vec<Vec<f64>>, PcaError> {
    if k > result.n_components() {
        return Err(PcaError::ComponentOutOfRange {
            k,
            available: result.n_components(),
        });
    }
    let d = result.attributes.len();
    let mut scores = vec![vec![0.0; k]; ds.row_count()];
    let mut standardized = vec![0.0; d];
    for row in 0..ds.row_count() {
        for (i, &a) in result.attributes.iter().enumerate() {
            let (values, missing) = ds.column(a).as_numeric().expect("numeric analysis set");
            standardized[i] = if missing[row] {
                0.0
            } else {
                match result.mode {
                    PcaMode::Correlation => (values[row] - result.means[i]) / result.sigmas[i],
                    PcaMode::Covariance => values[row] - result.means[i],
                }
            };
        }
        for (j, score) in scores[row].iter_mut().enumerate() {
            *score = result.eigenvectors[j]
                .iter()
                .zip(&standardized)
                .map(|(e, x)| e * x)
                .sum();
        }
    }
    Ok(scores)
}

/// Component table CSV: `pc,eigenvalue,proportion,cumulative`, one row per
/// component in descending-eigenvalue order.
pub fn write_components_csv(result: &PcaResult, full_precision: bool) -> String {
    let mut out = String::from("pc,eigenvalue,proportion,cumulative\n");
    for j in 0..result.n_components() {
        out.push_str(&format!(
            "PC{},{},{},{}\n",
            j + 1,
            format_report_float(result.eigenvalues[j], full_precision),
            format_report_float(result.proportions[j], full_precision),
            format_report_float(result.cumulative[j], full_precision),
        ));
    }
    out
}

/// Loadings CSV: attributes as rows, components as columns.
pub fn write_loadings_csv(result: &PcaResult, full_precision: bool) -> String {
    let mut out = String::from("attribute");
    for j in 0..result.n_components() {
        out.push_str(&format!(",PC{}", j + 1));
    }
    out.push('\n');
    for (i, name) in result.names.iter().enumerate() {
        out.push_str(name);
        for j in 0..result.n_components() {
            out.push(',');
            out.push_str(&format_report_float(
                result.eigenvectors[j][i],
                full_precision,
            ));
        }
        out.push('\n');
    }
    out
}
