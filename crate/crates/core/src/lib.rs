//! Attribute selection for mixed numeric/nominal tabular data: merit-based
//! subset selection with greedy stepwise search, plus principal-component
//! attribute analysis, over an ARFF/CSV ingestion layer.
//!
//! Pipeline: [`ingest`] parses data into an immutable [`Dataset`];
//! [`colstats`] supplies column statistics and missing-value policies;
//! [`correlate`] builds the attribute/target correlation structure for every
//! type pairing; [`cfs`] evaluates subset merit and searches greedily (with
//! an exhaustive oracle); [`pca`] decomposes the correlation or covariance
//! matrix into ranked components; [`synth`] generates datasets with planted
//! structure for benchmarks and recovery tests.

pub mod cfs;
pub mod colstats;
pub mod correlate;
pub mod format;
pub mod ingest;
pub mod pca;
pub mod synth;

pub use cfs::{
    exhaustive_best_subset, greedy_stepwise, merit, Direction, MeritEvaluation, SearchMode,
    SelectionReport,
};
pub use colstats::{
    apply_missing_policy, standardize, summarize, ColumnSummary, MissingPolicy, StandardizeMode,
};
pub use correlate::{
    correlation_structure, read_matrix_csv, write_matrix_csv, CorrelationStructure,
    MatrixPrecision, NominalAggregation,
};
pub use ingest::{
    parse_arff, parse_csv, write_arff, write_csv, AttributeKind, AttributeSchema, Column, Dataset,
};
pub use pca::{components_for_threshold, eigen_sym, pca_fit, project, PcaMode, PcaResult};
pub use synth::{generate, parse_spec, AttributePlan, AttributeRole, PlantedSpec, SynthKind};
