//! Command-line front end: select, rank, corr, and pca analyses over ARFF or
//! CSV inputs, with deterministic JSON/CSV reports.
//!
//! Exit codes: 0 success, 2 usage (bad flags, unreadable input), 3 parse
//! failure, 4 semantic failure (bad target, empty analysis set, policy/data
//! mismatch), 5 numeric failure.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use attrsel_core::cfs::{
    greedy_stepwise, merit, Direction, SearchMode, TraceStep, MERIT_TOLERANCE,
};
use attrsel_core::colstats::MissingPolicy;
use attrsel_core::correlate::{
    correlation_structure, write_matrix_csv, CorrelationStructure, MatrixPrecision,
    NominalAggregation,
};
use attrsel_core::ingest::{parse_arff, parse_csv, Dataset};
use attrsel_core::pca::{pca_fit, write_components_csv, write_loadings_csv, PcaMode};
use report::{
    to_json, CorrDoc, PcaComponentRow, PcaDoc, PcaLoadingRow, SelectionDoc, SelectionRow,
    SCHEMA_VERSION,
};

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_SEMANTIC: u8 = 4;
const EXIT_NUMERIC: u8 = 5;

#[derive(Parser)]
#[command(
    name = "attrsel",
    version,
    about = "Attribute subset selection, ranking, correlation and PCA reports for tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy merit search: report the selected attribute subset
    Select(AnalyzeArgs),
    /// Greedy merit search to exhaustion: report every attribute ranked
    Rank(AnalyzeArgs),
    /// Principal-component analysis of the numeric attributes
    Pca(PcaArgs),
    /// Attribute correlation matrix
    Corr(CorrArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input data file
    #[arg(value_name = "INPUT")]
    input: Option<PathBuf>,
    /// Input data file (alternative to the positional form)
    #[arg(long = "input", value_name = "PATH")]
    input_flag: Option<PathBuf>,
    /// Input format; inferred from the file extension when omitted
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Missing-value policy
    #[arg(long, value_enum, default_value_t = MissingArg::Pairwise)]
    missing: MissingArg,
    /// Report format
    #[arg(long, value_enum, default_value_t = EmitArg::Json)]
    emit: EmitArg,
    /// Write the report to this path instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Serialize floats at full precision instead of 6 significant digits
    #[arg(long)]
    full_precision: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Target attribute name (required)
    #[arg(long)]
    target: Option<String>,
    /// Search direction
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    direction: DirectionArg,
    /// Merit level above which an attribute is flagged relevant
    #[arg(long, default_value_t = 0.5)]
    merit_threshold: f64,
}

#[derive(Args)]
struct PcaArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Target attribute to exclude from the analysis (optional)
    #[arg(long)]
    target: Option<String>,
    /// Cumulative variance threshold for the component count
    #[arg(long, default_value_t = 0.95)]
    variance: f64,
    /// Matrix the decomposition runs on
    #[arg(long = "pca-mode", value_enum, default_value_t = PcaModeArg::Corr)]
    pca_mode: PcaModeArg,
    /// Also write the loadings table (CSV) to this path
    #[arg(long, value_name = "PATH")]
    loadings: Option<PathBuf>,
}

#[derive(Args)]
struct CorrArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Target attribute name (required)
    #[arg(long)]
    target: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Arff,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MissingArg {
    Pairwise,
    Impute,
    Drop,
}

impl MissingArg {
    fn policy(self) -> MissingPolicy {
        match self {
            MissingArg::Pairwise => MissingPolicy::PairwiseComplete,
            MissingArg::Impute => MissingPolicy::MeanImpute,
            MissingArg::Drop => MissingPolicy::DropIncompleteRows,
        }
    }

    fn label(self) -> &'static str {
        match self {
            MissingArg::Pairwise => "pairwise",
            MissingArg::Impute => "impute",
            MissingArg::Drop => "drop",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

impl DirectionArg {
    fn direction(self) -> Direction {
        match self {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        }
    }

    fn label(self) -> &'static str {
        match self {
            DirectionArg::Forward => "forward",
            DirectionArg::Backward => "backward",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PcaModeArg {
    Corr,
    Cov,
}

impl PcaModeArg {
    fn mode(self) -> PcaMode {
        match self {
            PcaModeArg::Corr => PcaMode::Correlation,
            PcaModeArg::Cov => PcaMode::Covariance,
        }
    }

    fn label(self) -> &'static str {
        match self {
            PcaModeArg::Corr => "correlation",
            PcaModeArg::Cov => "covariance",
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(args) => run_selection(args, SearchMode::Select),
        Command::Rank(args) => run_selection(args, SearchMode::Rank),
        Command::Pca(args) => run_pca(args),
        Command::Corr(args) => run_corr(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_dataset(input: &InputArgs) -> Result<Dataset, Failure> {
    let path = match (&input.input, &input.input_flag) {
        (Some(_), Some(_)) => {
            return Err(Failure::new(
                EXIT_USAGE,
                "give the input either positionally or via --input, not both",
            ))
        }
        (Some(p), None) | (None, Some(p)) => p.clone(),
        (None, None) => return Err(Failure::new(EXIT_USAGE, "no input file given")),
    };
    let format = input.format.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FormatArg::Csv,
            _ => FormatArg::Arff,
        }
    });
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    match format {
        FormatArg::Arff => parse_arff(&text),
        FormatArg::Csv => parse_csv(&text, None),
    }
    .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn designate_target(ds: Dataset, target: &Option<String>) -> Result<Dataset, Failure> {
    let name = target
        .as_ref()
        .ok_or_else(|| Failure::new(EXIT_USAGE, "--target is required for this command"))?;
    ds.with_target(name)
        .map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))
}

fn check_threshold(value: f64, what: &str) -> Result<(), Failure> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_USAGE,
            format!("{what} must be in (0, 1], got {value}"),
        ))
    }
}

fn build_structure(
    ds: &Dataset,
    policy: MissingPolicy,
) -> Result<CorrelationStructure, Failure> {
    let analysis = ds.analysis_indices();
    if analysis.is_empty() {
        return Err(Failure::new(EXIT_SEMANTIC, "analysis set is empty"));
    }
    correlation_structure(ds, &analysis, policy, NominalAggregation::Signed)
        .map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))
}

fn emit(input: &InputArgs, text: String) -> Result<(), Failure> {
    match &input.out {
        Some(path) => fs::write(path, text).map_err(|e| {
            Failure::new(
                EXIT_USAGE,
                format!("cannot write {}: {e}", path.display()),
            )
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Length of the trace prefix the Select stopping rule would keep; ranking
/// continues past this point with non-improving merits.
fn select_prefix_len(trace: &[TraceStep]) -> usize {
    if trace.is_empty() {
        return 0;
    }
    let mut len = 1;
    let mut last = trace[0].merit;
    for step in &trace[1..] {
        if step.merit > last + MERIT_TOLERANCE {
            len += 1;
            last = step.merit;
        } else {
            break;
        }
    }
    len
}

fn run_selection(args: AnalyzeArgs, mode: SearchMode) -> Result<(), Failure> {
    check_threshold(args.merit_threshold, "--merit-threshold")?;
    let ds = load_dataset(&args.input)?;
    let ds = designate_target(ds, &args.target)?;
    let corr = build_structure(&ds, args.input.missing.policy())?;
    let report = greedy_stepwise(
        &corr,
        mode,
        args.direction.direction(),
        args.merit_threshold,
    )
    .map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))?;

    // One row per reported attribute, best rank first: the search trace for
    // forward select and for ranking (backward ranking reverses the
    // elimination order), the surviving subset for backward select.
    let ordered: Vec<(usize, f64)> = match (mode, args.direction) {
        (SearchMode::Select, DirectionArg::Forward) => report
            .trace
            .iter()
            .map(|step| (step.attribute, step.merit))
            .collect(),
        (SearchMode::Select, DirectionArg::Backward) => {
            let final_merit = merit(&report.selected, &corr)
                .map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))?
                .merit;
            let mut survivors = report.selected.clone();
            survivors.sort_by(|&a, &b| {
                corr.target_corr[b]
                    .abs()
                    .partial_cmp(&corr.target_corr[a].abs())
                    .unwrap()
                    .then(a.cmp(&b))
            });
            survivors.into_iter().map(|a| (a, final_merit)).collect()
        }
        (SearchMode::Rank, _) => {
            let merit_of = |attr: usize| {
                report
                    .trace
                    .iter()
                    .find(|step| step.attribute == attr)
                    .expect("ranked attribute appears in the trace")
                    .merit
            };
            report
                .selected
                .iter()
                .map(|&a| (a, merit_of(a)))
                .collect()
        }
    };

    let selected_set: Vec<usize> = match mode {
        SearchMode::Select => report.selected.clone(),
        // Rank mode flags the attributes the Select run would keep. For the
        // forward search that is the strictly-improving trace prefix.
        SearchMode::Rank => match args.direction {
            DirectionArg::Forward => {
                let len = select_prefix_len(&report.trace);
                report.trace[..len].iter().map(|s| s.attribute).collect()
            }
            DirectionArg::Backward => {
                greedy_stepwise(
                    &corr,
                    SearchMode::Select,
                    Direction::Backward,
                    args.merit_threshold,
                )
                .map_err(|e| Failure::new(EXIT_SEMANTIC, e.to_string()))?
                .selected
            }
        },
    };

    let rows: Vec<SelectionRow> = ordered
        .iter()
        .enumerate()
        .map(|(i, &(attribute, merit_value))| SelectionRow {
            attribute: corr.names[attribute].clone(),
            rank: i + 1,
            merit: merit_value,
            r_cf_abs: corr.target_corr[attribute].abs(),
            selected: selected_set.contains(&attribute),
            above_threshold: merit_value > args.merit_threshold,
        })
        .collect();

    let doc = SelectionDoc {
        schema_version: SCHEMA_VERSION,
        command: match mode {
            SearchMode::Select => "select".into(),
            SearchMode::Rank => "rank".into(),
        },
        target: corr.target_name.clone(),
        missing_policy: args.input.missing.label().into(),
        direction: args.direction.label().into(),
        merit_threshold: args.merit_threshold,
        row_count: corr.row_count,
        attributes: rows,
    }
    .rounded(args.input.full_precision);

    let text = match args.input.emit {
        EmitArg::Json => to_json(&doc),
        EmitArg::Csv => doc.to_csv(),
    };
    emit(&args.input, text)
}

fn run_pca(args: PcaArgs) -> Result<(), Failure> {
    check_threshold(args.variance, "--variance")?;
    let ds = load_dataset(&args.input)?;
    let ds = match &args.target {
        Some(_) => designate_target(ds, &args.target)?,
        None => ds,
    };
    let fit = pca_fit(
        &ds,
        args.pca_mode.mode(),
        args.variance,
        args.input.missing.policy(),
    )
    .map_err(|e| {
        use attrsel_core::pca::PcaError;
        let code = match e {
            PcaError::InvalidThreshold(_) => EXIT_USAGE,
            PcaError::TooFewAttributes(_)
            | PcaError::TooFewRows(_)
            | PcaError::CovarianceNeedsCompleteRows => EXIT_SEMANTIC,
            _ => EXIT_NUMERIC,
        };
        Failure::new(code, e.to_string())
    })?;
    for name in &fit.dropped {
        eprintln!("warning: dropped zero-variance attribute `{name}`");
    }

    if let Some(path) = &args.loadings {
        fs::write(path, write_loadings_csv(&fit, args.input.full_precision)).map_err(|e| {
            Failure::new(
                EXIT_USAGE,
                format!("cannot write {}: {e}", path.display()),
            )
        })?;
    }

    let text = match args.input.emit {
        EmitArg::Json => {
            let doc = PcaDoc {
                schema_version: SCHEMA_VERSION,
                command: "pca".into(),
                mode: args.pca_mode.label().into(),
                missing_policy: args.input.missing.label().into(),
                variance_threshold: args.variance,
                k_for_threshold: fit.k_for_threshold,
                total_variance: fit.total_variance,
                row_count: ds.row_count(),
                dropped: fit.dropped.clone(),
                components: (0..fit.n_components())
                    .map(|j| PcaComponentRow {
                        pc: j + 1,
                        eigenvalue: fit.eigenvalues[j],
                        proportion: fit.proportions[j],
                        cumulative: fit.cumulative[j],
                    })
                    .collect(),
                loadings: fit
                    .names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| PcaLoadingRow {
                        attribute: name.clone(),
                        coefficients: (0..fit.n_components())
                            .map(|j| fit.eigenvectors[j][i])
                            .collect(),
                    })
                    .collect(),
            }
            .rounded(args.input.full_precision);
            to_json(&doc)
        }
        EmitArg::Csv => write_components_csv(&fit, args.input.full_precision),
    };
    emit(&args.input, text)
}

fn run_corr(args: CorrArgs) -> Result<(), Failure> {
    let ds = load_dataset(&args.input)?;
    let ds = designate_target(ds, &args.target)?;
    let corr = build_structure(&ds, args.input.missing.policy())?;

    let text = match args.input.emit {
        EmitArg::Json => {
            let doc = CorrDoc {
                schema_version: SCHEMA_VERSION,
                command: "corr".into(),
                target: corr.target_name.clone(),
                missing_policy: args.input.missing.label().into(),
                row_count: corr.row_count,
                attributes: corr.names.clone(),
                matrix: corr.matrix.clone(),
                target_corr: corr.target_corr.clone(),
            }
            .rounded(args.input.full_precision);
            to_json(&doc)
        }
        EmitArg::Csv => {
            let precision = if args.input.full_precision {
                MatrixPrecision::Full
            } else {
                MatrixPrecision::TwoDecimals
            };
            write_matrix_csv(&corr, precision)
        }
    };
    emit(&args.input, text)
}
