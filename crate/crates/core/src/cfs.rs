//! Merit evaluation of attribute subsets, greedy stepwise search in selection
//! and ranking modes, and the exhaustive search used as its oracle.
//!
//! The merit of a k-attribute subset is
//! `k * r_cf / sqrt(k + k(k-1) * r_ff)` where `r_cf` is the mean
//! attribute-target correlation magnitude over the subset and `r_ff` the mean
//! pairwise attribute-attribute correlation magnitude (0 for k = 1).
//! Magnitudes keep the radicand positive and reward correlation strength
//! regardless of sign: high merit means strongly target-correlated attributes
//! with little mutual redundancy.

use thiserror::Error;

use crate::correlate::CorrelationStructure;

/// Strict-improvement tolerance for the greedy stopping rule.
pub const MERIT_TOLERANCE: f64 = 1e-12;

/// Merit of one subset, with the means it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritEvaluation {
    /// Analysis positions, sorted ascending.
    pub subset: Vec<usize>,
    /// Mean |attribute-target correlation| over the subset.
    pub r_cf_bar: f64,
    /// Mean |attribute-attribute correlation| over unordered pairs; 0 for k=1.
    pub r_ff_bar: f64,
    pub merit: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfsError {
    #[error("subset must not be empty")]
    EmptySubset,
    #[error("subset attribute {0} out of range for {1} analysis attributes")]
    SubsetOutOfRange(usize, usize),
    #[error("analysis set is empty")]
    EmptyAnalysisSet,
    #[error("exhaustive search bound {0} exceeds the supported maximum of 20")]
    BoundTooLarge(usize),
    #[error("analysis set of {n} attributes exceeds the exhaustive bound {bound}")]
    TooManyForExhaustive { n: usize, bound: usize },
}

/// Merit from the two correlation means.
pub fn merit_from_means(k: usize, r_cf_bar: f64, r_ff_bar: f64) -> f64 {
    let kf = k as f64;
    kf * r_cf_bar / (kf + kf * (kf - 1.0) * r_ff_bar).sqrt()
}

/// Evaluates the merit of a subset of analysis positions. Degenerate-flagged
/// correlations are stored as zero and enter the means as such.
pub fn merit(subset: &[usize], corr: &CorrelationStructure) -> Result<MeritEvaluation, CfsError> {
    if subset.is_empty() {
        return Err(CfsError::EmptySubset);
    }
    let n = corr.len();
    let mut members = subset.to_vec();
    members.sort_unstable();
    members.dedup();
    if let Some(&bad) = members.iter().find(|&&m| m >= n) {
        return Err(CfsError::SubsetOutOfRange(bad, n));
    }
    Ok(merit_unchecked(&members, corr))
}

/// `members` must be sorted, deduplicated, and in range.
fn merit_unchecked(members: &[usize], corr: &CorrelationStructure) -> MeritEvaluation {
    let k = members.len();
    let r_cf_bar = members
        .iter()
        .map(|&m| corr.target_corr[m].abs())
        .sum::<f64>()
        / k as f64;
    let r_ff_bar = if k < 2 {
        0.0
    } else {
        let mut sum = 0.0;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                sum += corr.matrix[a][b].abs();
            }
        }
        sum / (k * (k - 1) / 2) as f64
    };
    MeritEvaluation {
        subset: members.to_vec(),
        r_cf_bar,
        r_ff_bar,
        merit: merit_from_means(k, r_cf_bar, r_ff_bar),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Stop when no step strictly improves merit.
    Select,
    /// Continue to exhaustion, recording the order attributes are placed.
    Rank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Start from the empty set and add.
    Forward,
    /// Start from the full set and remove.
    Backward,
}

/// One committed search step: the attribute moved and the merit of the
/// subset it was moved into (forward: the extended subset after inclusion;
/// backward: the subset the attribute was last part of, just before its
/// removal). Under both directions the best-ranked attribute's merit equals
/// its single-attribute merit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub attribute: usize,
    pub merit: f64,
}

/// Outcome of a greedy stepwise run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub mode: SearchMode,
    pub direction: Direction,
    /// Steps in commit order.
    pub trace: Vec<TraceStep>,
    /// Select mode: the final subset, ascending. Rank mode: all attributes
    /// best-first (forward: inclusion order; backward: reverse removal order).
    pub selected: Vec<usize>,
    /// Per trace step, whether its merit exceeds the report threshold.
    pub threshold_flags: Vec<bool>,
}

/// Greedy stepwise search over the correlation structure.
///
/// Each forward step adds the attribute maximizing the merit of the extended
/// subset; ties break toward the lowest attribute index. Select mode stops
/// as soon as the best step no longer strictly improves merit (the first
/// attribute is always taken); Rank mode continues until every attribute is
/// placed. Backward search mirrors this with removals. Deterministic for a
/// fixed structure.
pub fn greedy_stepwise(
    corr: &CorrelationStructure,
    mode: SearchMode,
    direction: Direction,
    merit_threshold: f64,
) -> Result<SelectionReport, CfsError> {
    let n = corr.len();
    if n == 0 {
        return Err(CfsError::EmptyAnalysisSet);
    }
    let report = match direction {
        Direction::Forward => forward(corr, mode),
        Direction::Backward => backward(corr, mode),
    };
    let threshold_flags = report
        .0
        .iter()
        .map(|step| step.merit > merit_threshold)
        .collect();
    Ok(SelectionReport {
        mode,
        direction,
        trace: report.0,
        selected: report.1,
        threshold_flags,
    })
}

fn forward(corr: &CorrelationStructure, mode: SearchMode) -> (Vec<TraceStep>, Vec<usize>) {
    let n = corr.len();
    let mut in_set = vec![false; n];
    let mut members: Vec<usize> = Vec::new();
    let mut current_merit = f64::NEG_INFINITY;
    let mut trace = Vec::new();

    loop {
        let mut best: Option<(usize, f64)> = None;
        for candidate in 0..n {
            if in_set[candidate] {
                continue;
            }
            let mut extended = members.clone();
            let pos = extended.partition_point(|&m| m < candidate);
            extended.insert(pos, candidate);
            let m = merit_unchecked(&extended, corr).merit;
            // Strict comparison keeps the lowest index on ties.
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((candidate, m));
            }
        }
        let Some((attribute, step_merit)) = best else {
            break;
        };
        if mode == SearchMode::Select && step_merit <= current_merit + MERIT_TOLERANCE {
            break;
        }
        in_set[attribute] = true;
        let pos = members.partition_point(|&m| m < attribute);
        members.insert(pos, attribute);
        current_merit = step_merit;
        trace.push(TraceStep {
            attribute,
            merit: step_merit,
        });
    }

    let selected = match mode {
        SearchMode::Select => members,
        SearchMode::Rank => trace.iter().map(|s| s.attribute).collect(),
    };
    (trace, selected)
}

fn backward(corr: &CorrelationStructure, mode: SearchMode) -> (Vec<TraceStep>, Vec<usize>) {
    let n = corr.len();
    let mut members: Vec<usize> = (0..n).collect();
    let mut current_merit = merit_unchecked(&members, corr).merit;
    let mut trace = Vec::new();

    while !members.is_empty() {
        let step = if members.len() == 1 {
            // Removing the last attribute leaves the empty set; only Rank
            // mode takes this step.
            (members[0], 0.0)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (pos, &candidate) in members.iter().enumerate() {
                let mut remaining = members.clone();
                remaining.remove(pos);
                let m = merit_unchecked(&remaining, corr).merit;
                if best.is_none_or(|(_, bm)| m > bm) {
                    best = Some((candidate, m));
                }
            }
            best.expect("non-empty member set")
        };
        if mode == SearchMode::Select
            && (members.len() == 1 || step.1 <= current_merit + MERIT_TOLERANCE)
        {
            break;
        }
        let pos = members.iter().position(|&m| m == step.0).unwrap();
        members.remove(pos);
        // The step records the merit of the subset the attribute left.
        trace.push(TraceStep {
            attribute: step.0,
            merit: current_merit,
        });
        current_merit = step.1;
    }

    let selected = match mode {
        SearchMode::Select => members,
        SearchMode::Rank => trace.iter().rev().map(|s| s.attribute).collect(),
    };
    (trace, selected)
}

/// Enumerates every non-empty subset and returns the maximum-merit
/// evaluation; merit ties resolve to the lexicographically smallest subset.
/// Bounded at 20 attributes (2^20 - 1 subsets).
pub fn exhaustive_best_subset(
    corr: &CorrelationStructure,
    max_attrs: usize,
) -> Result<MeritEvaluation, CfsError> {
    if max_attrs > 20 {
        return Err(CfsError::BoundTooLarge(max_attrs));
    }
    let n = corr.len();
    if n == 0 {
        return Err(CfsError::EmptyAnalysisSet);
    }
    if n > max_attrs {
        return Err(CfsError::TooManyForExhaustive { n, bound: max_attrs });
    }
    let mut best: Option<MeritEvaluation> = None;
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        members.clear();
        for bit in 0..n {
            if mask & (1 << bit) != 0 {
                members.push(bit);
            }
        }
        let eval = merit_unchecked(&members, corr);
        let better = match &best {
            None => true,
            Some(b) => eval.merit > b.merit || (eval.merit == b.merit && eval.subset < b.subset),
        };
        if better {
            best = Some(eval);
        }
    }
    Ok(best.expect("at least one subset evaluated"))
}
