//! Report documents and their JSON/CSV serializations.
//!
//! Floats are rounded to six significant digits unless full precision is
//! requested, and the rounding happens on the values themselves, so the JSON
//! and CSV forms of one report always carry identical numbers. Serialization
//! is deterministic: identical inputs produce byte-identical documents.

use serde::Serialize;

use attrsel_core::format::{format_float, round_to_significant};

pub const SCHEMA_VERSION: u32 = 1;

fn shape(value: f64, full_precision: bool) -> f64 {
    if full_precision {
        value
    } else {
        round_to_significant(value, 6)
    }
}

#[derive(Debug, Serialize)]
pub struct SelectionRow {
    pub attribute: String,
    pub rank: usize,
    pub merit: f64,
    pub r_cf_abs: f64,
    pub selected: bool,
    pub above_threshold: bool,
}

#[derive(Debug, Serialize)]
pub struct SelectionDoc {
    pub schema_version: u32,
    pub command: String,
    pub target: String,
    pub missing_policy: String,
    pub direction: String,
    pub merit_threshold: f64,
    pub row_count: usize,
    pub attributes: Vec<SelectionRow>,
}

impl SelectionDoc {
    pub fn rounded(mut self, full_precision: bool) -> Self {
        self.merit_threshold = shape(self.merit_threshold, full_precision);
        for row in &mut self.attributes {
            row.merit = shape(row.merit, full_precision);
            row.r_cf_abs = shape(row.r_cf_abs, full_precision);
        }
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,rank,merit,r_cf_abs,selected,above_threshold\n");
        for row in &self.attributes {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.attribute,
                row.rank,
                format_float(row.merit),
                format_float(row.r_cf_abs),
                row.selected,
                row.above_threshold,
            ));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct PcaComponentRow {
    pub pc: usize,
    pub eigenvalue: f64,
    pub proportion: f64,
    pub cumulative: f64,
}

#[derive(Debug, Serialize)]
pub struct PcaLoadingRow {
    pub attribute: String,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct PcaDoc {
    pub schema_version: u32,
    pub command: String,
    pub mode: String,
    pub missing_policy: String,
    pub variance_threshold: f64,
    pub k_for_threshold: usize,
    pub total_variance: f64,
    pub row_count: usize,
    pub dropped: Vec<String>,
    pub components: Vec<PcaComponentRow>,
    pub loadings: Vec<PcaLoadingRow>,
}

impl PcaDoc {
    pub fn rounded(mut self, full_precision: bool) -> Self {
        self.total_variance = shape(self.total_variance, full_precision);
        for row in &mut self.components {
            row.eigenvalue = shape(row.eigenvalue, full_precision);
            row.proportion = shape(row.proportion, full_precision);
            row.cumulative = shape(row.cumulative, full_precision);
        }
        for row in &mut self.loadings {
            for c in &mut row.coefficients {
                *c = shape(*c, full_precision);
            }
        }
        self
    }
}

#[derive(Debug, Serialize)]
pub struct CorrDoc {
    pub schema_version: u32,
    pub command: String,
    pub target: String,
    pub missing_policy: String,
    pub row_count: usize,
    pub attributes: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub target_corr: Vec<f64>,
}

impl CorrDoc {
    pub fn rounded(mut self, full_precision: bool) -> Self {
        for row in &mut self.matrix {
            for v in row.iter_mut() {
                *v = shape(*v, full_precision);
            }
        }
        for v in &mut self.target_corr {
            *v = shape(*v, full_precision);
        }
        self
    }
}

/// Single JSON document with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("reports serialize infallibly");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SelectionDoc {
        SelectionDoc {
            schema_version: SCHEMA_VERSION,
            command: "rank".into(),
            target: "t".into(),
            missing_policy: "pairwise".into(),
            direction: "forward".into(),
            merit_threshold: 0.5,
            row_count: 3,
            attributes: vec![SelectionRow {
                attribute: "a".into(),
                rank: 1,
                merit: 0.123456789,
                r_cf_abs: 0.987654321,
                selected: true,
                above_threshold: false,
            }],
        }
    }

    #[test]
    fn json_and_csv_carry_identical_values() {
        let doc = sample().rounded(false);
        let json = to_json(&doc);
        let csv = doc.to_csv();
        assert!(json.contains("0.123457"));
        assert!(csv.contains("0.123457"));
        assert!(json.contains("0.987654"));
        assert!(csv.contains("0.987654"));
    }

    #[test]
    fn full_precision_passes_values_through() {
        let doc = sample().rounded(true);
        assert_eq!(doc.attributes[0].merit, 0.123456789);
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_attribute() {
        let csv = sample().rounded(false).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "attribute,rank,merit,r_cf_abs,selected,above_threshold");
        assert_eq!(lines.len(), 2);
    }
}
