//! Property suites: serialization round-trips, correlation identities, and
//! merit invariances on generated inputs.

use proptest::prelude::*;

use attrsel_core::cfs::{merit, MeritEvaluation};
use attrsel_core::colstats::{standardize, summarize, StandardizeMode};
use attrsel_core::correlate::{pearson, CorrelationStructure};
use attrsel_core::ingest::{
    parse_arff, parse_csv, write_arff, write_csv, AttributeSchema, Column, Dataset,
};

fn label_pool() -> Vec<String> {
    ["k0", "k1", "k2", "k3"].iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone)]
enum ColumnPlan {
    Numeric,
    Nominal(usize),
}

fn column_plan() -> impl Strategy<Value = ColumnPlan> {
    prop_oneof![
        Just(ColumnPlan::Numeric),
        (1usize..=4).prop_map(ColumnPlan::Nominal),
    ]
}

/// Arbitrary dataset: 1-5 attributes, 0-12 rows, ~20% missing cells.
fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (prop::collection::vec(column_plan(), 1..=5), 0usize..=12).prop_flat_map(|(plans, rows)| {
        let cells = plans
            .iter()
            .map(|plan| match plan {
                ColumnPlan::Numeric => prop::collection::vec(
                    ((-1.0e9..1.0e9f64), prop::bool::weighted(0.2)),
                    rows..=rows,
                )
                .prop_map(|cells| {
                    let (values, missing): (Vec<f64>, Vec<bool>) = cells.into_iter().unzip();
                    (ColumnPlan::Numeric, values, vec![], missing)
                })
                .boxed(),
                ColumnPlan::Nominal(k) => {
                    let k = *k;
                    prop::collection::vec(
                        ((0..k as u32), prop::bool::weighted(0.2)),
                        rows..=rows,
                    )
                    .prop_map(move |cells| {
                        let (values, missing): (Vec<u32>, Vec<bool>) = cells.into_iter().unzip();
                        (ColumnPlan::Nominal(k), vec![], values, missing)
                    })
                    .boxed()
                }
            })
            .collect::<Vec<_>>();
        cells.prop_map(|columns| {
            let mut schema = Vec::new();
            let mut built = Vec::new();
            for (i, (plan, numeric, nominal, missing)) in columns.into_iter().enumerate() {
                match plan {
                    ColumnPlan::Numeric => {
                        schema.push(AttributeSchema::numeric(format!("a{i}")));
                        built.push(Column::numeric(numeric, missing));
                    }
                    ColumnPlan::Nominal(k) => {
                        schema.push(AttributeSchema::nominal(
                            format!("a{i}"),
                            label_pool()[..k].to_vec(),
                        ));
                        built.push(Column::nominal(nominal, missing));
                    }
                }
            }
            Dataset::new("prop", schema, built).expect("valid generated dataset")
        })
    })
}

/// Dataset whose nominal categories each appear, in declaration order, before
/// any other value of that column: CSV type inference then reconstructs the
/// exact schema.
fn inference_friendly_dataset() -> impl Strategy<Value = Dataset> {
    (prop::collection::vec(column_plan(), 1..=4), 4usize..=10).prop_flat_map(|(plans, extra)| {
        let max_k = plans
            .iter()
            .map(|p| match p {
                ColumnPlan::Numeric => 0,
                ColumnPlan::Nominal(k) => *k,
            })
            .max()
            .unwrap_or(0);
        let rows = max_k + extra;
        let cells = plans
            .iter()
            .map(|plan| match plan {
                ColumnPlan::Numeric => prop::collection::vec(-1.0e6..1.0e6f64, rows..=rows)
                    .prop_map(|values| (ColumnPlan::Numeric, values, vec![]))
                    .boxed(),
                ColumnPlan::Nominal(k) => {
                    let k = *k;
                    prop::collection::vec(0..k as u32, rows..=rows)
                        .prop_map(move |values| (ColumnPlan::Nominal(k), vec![], values))
                        .boxed()
                }
            })
            .collect::<Vec<_>>();
        cells.prop_map(move |columns| {
            let mut schema = Vec::new();
            let mut built = Vec::new();
            for (i, (plan, numeric, mut nominal)) in columns.into_iter().enumerate() {
                match plan {
                    ColumnPlan::Numeric => {
                        schema.push(AttributeSchema::numeric(format!("a{i}")));
                        let n = numeric.len();
                        built.push(Column::numeric(numeric, vec![false; n]));
                    }
                    ColumnPlan::Nominal(k) => {
                        for (row, cell) in nominal.iter_mut().enumerate().take(k) {
                            *cell = row as u32;
                        }
                        schema.push(AttributeSchema::nominal(
                            format!("a{i}"),
                            label_pool()[..k].to_vec(),
                        ));
                        let n = nominal.len();
                        built.push(Column::nominal(nominal, vec![false; n]));
                    }
                }
            }
            Dataset::new("prop", schema, built).expect("valid generated dataset")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn arff_round_trip_is_identity(ds in dataset_strategy()) {
        let text = write_arff(&ds);
        let parsed = parse_arff(&text).expect("serialized dataset parses");
        prop_assert_eq!(&parsed, &ds);
        // Row and attribute order are stable through the round trip.
        prop_assert_eq!(
            parsed.schema().iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
            ds.schema().iter().map(|a| a.name.clone()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn csv_round_trip_with_hint_is_identity(ds in dataset_strategy()) {
        let text = write_csv(&ds);
        let parsed = parse_csv(&text, Some(ds.schema())).expect("serialized dataset parses");
        prop_assert_eq!(&parsed, &ds);
    }

    #[test]
    fn csv_inference_matches_arff_parse(ds in inference_friendly_dataset()) {
        let from_arff = parse_arff(&write_arff(&ds)).expect("arff parses");
        let from_csv = parse_csv(&write_csv(&ds), None).expect("csv parses");
        prop_assert_eq!(&from_csv, &from_arff);
    }

    #[test]
    fn pearson_invariant_under_positive_affine(
        xy in prop::collection::vec(((-100.0..100.0f64), (-100.0..100.0f64)), 3..40),
        a in 0.01..50.0f64,
        b in -100.0..100.0f64,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let mask = vec![false; x.len()];
        let base = pearson(&x, &mask, &y, &mask);
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let transformed = pearson(&scaled, &mask, &y, &mask);
        prop_assert_eq!(base.degenerate, transformed.degenerate);
        if !base.degenerate {
            prop_assert!((base.r - transformed.r).abs() < 1e-12);
        }
        // Negation flips the sign exactly.
        let negated: Vec<f64> = x.iter().map(|v| -v).collect();
        let flipped = pearson(&negated, &mask, &y, &mask);
        prop_assert_eq!(base.r, -flipped.r);
    }

    #[test]
    fn zscore_output_is_standardized(
        values in prop::collection::vec(-1.0e5..1.0e5f64, 3..50),
    ) {
        let mask = vec![false; values.len()];
        let z = standardize(&values, &mask, StandardizeMode::ZScore);
        let summary = summarize(&z.values, &z.missing);
        if !z.degenerate {
            prop_assert!(summary.mean.abs() < 1e-12);
            prop_assert!((summary.sigma - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(z.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn merit_commutes_with_relabeling(
        target in prop::collection::vec(-1.0..1.0f64, 4..9),
        seed in any::<u64>(),
    ) {
        let n = target.len();
        // Deterministic pairwise entries from the seed.
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut matrix = vec![vec![0.0; n]; n];
        for i in 0..n {
            matrix[i][i] = 1.0;
            for j in (i + 1)..n {
                let r = next();
                matrix[i][j] = r;
                matrix[j][i] = r;
            }
        }
        let corr = CorrelationStructure {
            attributes: (0..n).collect(),
            names: (0..n).map(|i| format!("a{i}")).collect(),
            target_name: "t".into(),
            matrix: matrix.clone(),
            target_corr: target.clone(),
            pair_counts: vec![vec![0; n]; n],
            target_counts: vec![0; n],
            degenerate: vec![vec![false; n]; n],
            target_degenerate: vec![false; n],
            row_count: 0,
        };
        // Relabel through the reversal permutation.
        let perm: Vec<usize> = (0..n).rev().collect();
        let relabeled = CorrelationStructure {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| matrix[perm[i]][perm[j]]).collect())
                .collect(),
            target_corr: perm.iter().map(|&p| target[p]).collect(),
            names: perm.iter().map(|&p| format!("a{p}")).collect(),
            ..corr.clone()
        };
        let subset: Vec<usize> = (0..n).step_by(2).collect();
        let mapped: Vec<usize> = subset.iter().map(|&s| perm.iter().position(|&p| p == s).unwrap()).collect();
        let original: MeritEvaluation = merit(&subset, &corr).unwrap();
        let relabeled_eval: MeritEvaluation = merit(&mapped, &relabeled).unwrap();
        prop_assert!((original.merit - relabeled_eval.merit).abs() < 1e-12);
        prop_assert!((original.r_cf_bar - relabeled_eval.r_cf_bar).abs() < 1e-12);
        prop_assert!((original.r_ff_bar - relabeled_eval.r_ff_bar).abs() < 1e-12);
    }
}
