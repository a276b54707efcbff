//! Synthetic dataset generator with planted correlation structure: relevant
//! attributes carry a chosen target correlation, redundant attributes are
//! noisy copies of earlier ones, irrelevant attributes are independent.
//!
//! Generation is fully determined by the seed. Every column draws from its
//! own stream (derived per attribute index), so columns can be produced in
//! parallel and the output is identical across schedules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{AttributeSchema, Column, Dataset};

/// Role of one generated attribute relative to the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttributeRole {
    /// Correlated with the target at the given level in [0, 1).
    Relevant { level: f64 },
    /// A copy of an earlier attribute's latent column plus scaled noise.
    Redundant { of: usize, noise: f64 },
    /// Independent of everything.
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Numeric,
    /// Quantile-binned into this many categories.
    Nominal { categories: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributePlan {
    pub role: AttributeRole,
    pub kind: SynthKind,
    pub missing_rate: f64,
}

impl AttributePlan {
    pub fn numeric(role: AttributeRole) -> Self {
        AttributePlan {
            role,
            kind: SynthKind::Numeric,
            missing_rate: 0.0,
        }
    }

    pub fn nominal(role: AttributeRole, categories: usize) -> Self {
        AttributePlan {
            role,
            kind: SynthKind::Nominal { categories },
            missing_rate: 0.0,
        }
    }

    pub fn with_missing_rate(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }
}

/// Blueprint for one generated dataset. The numeric target column is drawn
/// first and appended last as attribute `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub rows: usize,
    pub attributes: Vec<AttributePlan>,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("attribute {index}: correlation level {level} must be in [0, 1)")]
    BadLevel { index: usize, level: f64 },
    #[error("attribute {index}: redundant reference {of} must point to an earlier attribute")]
    BadReference { index: usize, of: usize },
    #[error("attribute {index}: noise scale {noise} must be non-negative and finite")]
    BadNoise { index: usize, noise: f64 },
    #[error("attribute {index}: nominal category count must be at least 1")]
    BadCategories { index: usize },
    #[error("attribute {index}: missing rate {rate} must be in [0, 1]")]
    BadMissingRate { index: usize, rate: f64 },
    #[error("spec line {line}: {message}")]
    Spec { line: usize, message: String },
}

impl PlantedSpec {
    pub fn new(rows: usize, attributes: Vec<AttributePlan>, seed: u64) -> Self {
        PlantedSpec {
            rows,
            attributes,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (index, plan) in self.attributes.iter().enumerate() {
            match plan.role {
                AttributeRole::Relevant { level } => {
                    if !(0.0..1.0).contains(&level) {
                        return Err(SynthError::BadLevel { index, level });
                    }
                }
                AttributeRole::Redundant { of, noise } => {
                    if of >= index {
                        return Err(SynthError::BadReference { index, of });
                    }
                    if !(noise >= 0.0 && noise.is_finite()) {
                        return Err(SynthError::BadNoise { index, noise });
                    }
                }
                AttributeRole::Irrelevant => {}
            }
            if let SynthKind::Nominal { categories } = plan.kind {
                if categories == 0 {
                    return Err(SynthError::BadCategories { index });
                }
            }
            if !(0.0..=1.0).contains(&plan.missing_rate) {
                return Err(SynthError::BadMissingRate {
                    index,
                    rate: plan.missing_rate,
                });
            }
        }
        Ok(())
    }
}

/// Standard-normal stream over a seeded generator (Box-Muller).
struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    fn fill(mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}

/// Per-column stream seeds derived from the spec seed (splitmix64 over a
/// salted input).
fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates the dataset described by the spec. The returned dataset has one
/// column per attribute plan (named by role: `rel03`, `red07`, `irr11`) plus
/// the numeric `target` column last, already designated as the target.
pub fn generate(spec: &PlantedSpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let n = spec.rows;

    let target = GaussianStream::new(derive_seed(spec.seed, 0)).fill(n);

    // Independent noise per attribute, generated in parallel from derived
    // seeds; latent combination is sequential so redundant chains resolve.
    let noise_columns: Vec<Vec<f64>> = (0..spec.attributes.len())
        .into_par_iter()
        .map(|i| GaussianStream::new(derive_seed(spec.seed, 1 + 2 * i as u64)).fill(n))
        .collect();

    let mut latents: Vec<Vec<f64>> = Vec::with_capacity(spec.attributes.len());
    for (i, plan) in spec.attributes.iter().enumerate() {
        let noise = &noise_columns[i];
        let latent: Vec<f64> = match plan.role {
            AttributeRole::Relevant { level } => {
                // With unit-variance signal and noise, corr = w / sqrt(w^2 + (1-w)^2),
                // solved for w: w = level / (level + sqrt(1 - level^2)).
                let w = if level == 0.0 {
                    0.0
                } else {
                    level / (level + (1.0 - level * level).sqrt())
                };
                target
                    .iter()
                    .zip(noise)
                    .map(|(t, e)| w * t + (1.0 - w) * e)
                    .collect()
            }
            AttributeRole::Redundant { of, noise: scale } => latents[of]
                .iter()
                .zip(noise)
                .map(|(base, e)| base + scale * e)
                .collect(),
            AttributeRole::Irrelevant => noise.clone(),
        };
        latents.push(latent);
    }

    let mut schema = Vec::with_capacity(spec.attributes.len() + 1);
    let mut columns = Vec::with_capacity(spec.attributes.len() + 1);
    let built: Vec<(AttributeSchema, Column)> = spec
        .attributes
        .par_iter()
        .zip(latents.into_par_iter())
        .enumerate()
        .map(|(i, (plan, latent))| {
            let name = match plan.role {
                AttributeRole::Relevant { .. } => format!("rel{i:02}"),
                AttributeRole::Redundant { .. } => format!("red{i:02}"),
                AttributeRole::Irrelevant => format!("irr{i:02}"),
            };
            let missing = missing_mask(
                derive_seed(spec.seed, 2 + 2 * i as u64),
                plan.missing_rate,
                n,
            );
            match plan.kind {
                SynthKind::Numeric => (
                    AttributeSchema::numeric(name),
                    Column::numeric(latent, missing),
                ),
                SynthKind::Nominal { categories } => {
                    let labels: Vec<String> = (1..=categories).map(|c| format!("q{c}")).collect();
                    (
                        AttributeSchema::nominal(name, labels),
                        Column::nominal(quantile_bins(&latent, categories), missing),
                    )
                }
            }
        })
        .collect();
    for (attr, column) in built {
        schema.push(attr);
        columns.push(column);
    }
    schema.push(AttributeSchema::numeric("target"));
    columns.push(Column::numeric(target, vec![false; n]));

    let ds = Dataset::new("synthetic", schema, columns)
        .expect("generated columns satisfy dataset invariants");
    Ok(ds
        .with_target("target")
        .expect("target column is numeric"))
}

fn missing_mask(seed: u64, rate: f64, n: usize) -> Vec<bool> {
    if rate <= 0.0 {
        return vec![false; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>() < rate).collect()
}

/// Equal-frequency binning by rank; ties resolve by row order.
fn quantile_bins(latent: &[f64], categories: usize) -> Vec<u32> {
    let n = latent.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| latent[a].partial_cmp(&latent[b]).unwrap().then(a.cmp(&b)));
    let mut bins = vec![0u32; n];
    for (rank, &row) in order.iter().enumerate() {
        bins[row] = ((rank * categories) / n).min(categories - 1) as u32;
    }
    bins
}

/// Parses the declarative spec format:
///
/// ```text
/// rows 20000
/// seed 42
/// attr relevant 0.8 numeric
/// attr relevant 0.6 nominal 4
/// attr redundant 0 0.5 numeric
/// attr irrelevant numeric missing 0.05
/// ```
///
/// One `attr` line per attribute; `missing RATE` is optional. `#` starts a
/// comment line.
pub fn parse_spec(text: &str) -> Result<PlantedSpec, SynthError> {
    let mut rows: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut attributes = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let fail = |message: String| SynthError::Spec {
            line: line_no,
            message,
        };
        match tokens[0] {
            "rows" => {
                let value = tokens
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail("expected `rows <count>`".into()))?;
                rows = Some(value);
            }
            "seed" => {
                let value = tokens
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail("expected `seed <integer>`".into()))?;
                seed = Some(value);
            }
            "attr" => {
                attributes.push(parse_attr_line(&tokens[1..], line_no)?);
            }
            other => return Err(fail(format!("unknown directive `{other}`"))),
        }
    }

    let spec = PlantedSpec {
        rows: rows.ok_or(SynthError::Spec {
            line: 0,
            message: "missing `rows` directive".into(),
        })?,
        seed: seed.unwrap_or(0),
        attributes,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_attr_line(tokens: &[&str], line: usize) -> Result<AttributePlan, SynthError> {
    let fail = |message: String| SynthError::Spec { line, message };
    let mut rest = tokens;
    let role = match rest.first() {
        Some(&"relevant") => {
            let level: f64 = rest
                .get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("expected `relevant <level>`".into()))?;
            rest = &rest[2..];
            AttributeRole::Relevant { level }
        }
        Some(&"redundant") => {
            let of: usize = rest
                .get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("expected `redundant <of> <noise>`".into()))?;
            let noise: f64 = rest
                .get(2)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("expected `redundant <of> <noise>`".into()))?;
            rest = &rest[3..];
            AttributeRole::Redundant { of, noise }
        }
        Some(&"irrelevant") => {
            rest = &rest[1..];
            AttributeRole::Irrelevant
        }
        _ => return Err(fail("expected role: relevant | redundant | irrelevant".into())),
    };
    let kind = match rest.first() {
        Some(&"numeric") => {
            rest = &rest[1..];
            SynthKind::Numeric
        }
        Some(&"nominal") => {
            let categories: usize = rest
                .get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("expected `nominal <categories>`".into()))?;
            rest = &rest[2..];
            SynthKind::Nominal { categories }
        }
        _ => return Err(fail("expected kind: numeric | nominal <k>".into())),
    };
    let missing_rate = match rest.first() {
        Some(&"missing") => rest
            .get(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fail("expected `missing <rate>`".into()))?,
        Some(other) => return Err(fail(format!("unexpected token `{other}`"))),
        None => 0.0,
    };
    Ok(AttributePlan {
        role,
        kind,
        missing_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlate::pearson;

    #[test]
    fn identical_seeds_give_identical_datasets() {
        let spec = PlantedSpec::new(
            500,
            vec![
                AttributePlan::numeric(AttributeRole::Relevant { level: 0.7 }),
                AttributePlan::nominal(AttributeRole::Irrelevant, 3).with_missing_rate(0.1),
            ],
            99,
        );
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_missing_rate_gives_no_missing_cells() {
        let spec = PlantedSpec::new(
            200,
            vec![AttributePlan::numeric(AttributeRole::Irrelevant)],
            7,
        );
        let ds = generate(&spec).unwrap();
        for col in ds.columns() {
            assert_eq!(col.present_count(), 200);
        }
    }

    #[test]
    fn planted_correlation_levels_are_recovered() {
        let spec = PlantedSpec::new(
            10_000,
            vec![
                AttributePlan::numeric(AttributeRole::Relevant { level: 0.9 }),
                AttributePlan::numeric(AttributeRole::Irrelevant),
            ],
            42,
        );
        let ds = generate(&spec).unwrap();
        let (target, tm) = ds.column(2).as_numeric().unwrap();
        let (relevant, rm) = ds.column(0).as_numeric().unwrap();
        let (irrelevant, im) = ds.column(1).as_numeric().unwrap();
        let r_rel = pearson(relevant, rm, target, tm).r.abs();
        let r_irr = pearson(irrelevant, im, target, tm).r.abs();
        assert!((0.85..=0.95).contains(&r_rel), "relevant corr {r_rel}");
        assert!(r_irr < 0.05, "irrelevant corr {r_irr}");
    }

    #[test]
    fn redundant_column_tracks_its_base() {
        let spec = PlantedSpec::new(
            5_000,
            vec![
                AttributePlan::numeric(AttributeRole::Relevant { level: 0.6 }),
                AttributePlan::numeric(AttributeRole::Redundant { of: 0, noise: 0.2 }),
            ],
            1,
        );
        let ds = generate(&spec).unwrap();
        let (base, bm) = ds.column(0).as_numeric().unwrap();
        let (copy, cm) = ds.column(1).as_numeric().unwrap();
        let r = pearson(base, bm, copy, cm).r;
        assert!(r > 0.8, "redundant corr {r}");
    }

    #[test]
    fn nominal_bins_are_balanced() {
        let spec = PlantedSpec::new(
            1_000,
            vec![AttributePlan::nominal(AttributeRole::Irrelevant, 4)],
            3,
        );
        let ds = generate(&spec).unwrap();
        let (bins, _) = ds.column(0).as_nominal().unwrap();
        let mut counts = [0usize; 4];
        for &b in bins {
            counts[b as usize] += 1;
        }
        assert_eq!(counts, [250; 4]);
    }

    #[test]
    fn missing_rate_is_roughly_honored() {
        let spec = PlantedSpec::new(
            10_000,
            vec![AttributePlan::numeric(AttributeRole::Irrelevant).with_missing_rate(0.25)],
            5,
        );
        let ds = generate(&spec).unwrap();
        let missing = 10_000 - ds.column(0).present_count();
        let rate = missing as f64 / 10_000.0;
        assert!((rate - 0.25).abs() < 0.02, "observed rate {rate}");
    }

    #[test]
    fn target_is_designated_and_last() {
        let spec = PlantedSpec::new(10, vec![AttributePlan::numeric(AttributeRole::Irrelevant)], 0);
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.target(), Some(1));
        assert_eq!(ds.schema()[1].name, "target");
    }

    #[test]
    fn validation_rejects_bad_plans() {
        let bad_level = PlantedSpec::new(
            10,
            vec![AttributePlan::numeric(AttributeRole::Relevant { level: 1.0 })],
            0,
        );
        assert!(matches!(
            bad_level.validate().unwrap_err(),
            SynthError::BadLevel { .. }
        ));
        let bad_ref = PlantedSpec::new(
            10,
            vec![AttributePlan::numeric(AttributeRole::Redundant { of: 0, noise: 0.1 })],
            0,
        );
        assert!(matches!(
            bad_ref.validate().unwrap_err(),
            SynthError::BadReference { .. }
        ));
    }

    #[test]
    fn spec_text_round_trip() {
        let text = "\
# fixture
rows 100
seed 9

attr relevant 0.8 numeric
attr relevant 0.6 nominal 4 missing 0.1
attr redundant 0 0.5 numeric
attr irrelevant numeric missing 0.05
";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.rows, 100);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.attributes.len(), 4);
        assert_eq!(
            spec.attributes[1],
            AttributePlan::nominal(AttributeRole::Relevant { level: 0.6 }, 4)
                .with_missing_rate(0.1)
        );
        assert_eq!(
            spec.attributes[2],
            AttributePlan::numeric(AttributeRole::Redundant { of: 0, noise: 0.5 })
        );
        assert!(generate(&spec).is_ok());
    }

    #[test]
    fn spec_text_errors_carry_line_numbers() {
        let err = parse_spec("rows 10\nattr relevant nope numeric\n").unwrap_err();
        assert!(matches!(err, SynthError::Spec { line: 2, .. }));
        let err = parse_spec("attr irrelevant numeric\n").unwrap_err();
        assert!(matches!(err, SynthError::Spec { line: 0, .. }));
    }
}
