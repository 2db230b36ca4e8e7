use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::CostSample;
use crate::program::TargetKind;
use crate::search::{Algorithm, RunRecord};

use super::stats::{median, vargha_delaney_a12, wilcoxon_rank_sum, EffectSize};
use super::select_median;

pub const ALPHA: f64 = 0.05;
/// Upper end of the marginal-significance band.
pub const MARGINAL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Better,
    Worse,
    NoDiff,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Better => "better",
            Verdict::Worse => "worse",
            Verdict::NoDiff => "no-diff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub subject: String,
    pub metric: String,
    pub candidate_median: f64,
    pub baseline_median: f64,
    pub p_value: f64,
    /// Probability that a candidate value exceeds a baseline value.
    pub a12: f64,
    pub effect: EffectSize,
    pub verdict: Verdict,
    /// `0.05 <= p < 0.1`.
    pub marginal: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub better: usize,
    pub worse: usize,
    pub no_diff: usize,
}

/// Cost of each algorithm's median suite on a subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianCost {
    pub subject: String,
    pub candidate: CostSample,
    pub baseline: CostSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub candidate: Algorithm,
    pub baseline: Algorithm,
    pub repetitions: usize,
    pub rows: Vec<MetricRow>,
    pub summary: BTreeMap<String, VerdictCounts>,
    /// Subjects whose branch coverage does not differ significantly.
    pub equivalent_coverage: Vec<String>,
    pub median_costs: Vec<MedianCost>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no records for {algorithm} on {subject}")]
    Missing { subject: String, algorithm: Algorithm },
    #[error("{subject}: {candidate} has {a} runs but {baseline} has {b}")]
    MismatchedRepetitions { subject: String, candidate: Algorithm, baseline: Algorithm, a: usize, b: usize },
}

fn compare(subject: &str, metric: &str, cand: &[f64], base: &[f64], higher_is_better: bool) -> MetricRow {
    let p = wilcoxon_rank_sum(cand, base);
    let (a12, effect) = vargha_delaney_a12(cand, base);
    let verdict = if p >= ALPHA {
        Verdict::NoDiff
    } else if (a12 > 0.5) == higher_is_better {
        Verdict::Better
    } else {
        Verdict::Worse
    };
    MetricRow {
        subject: subject.to_string(),
        metric: metric.to_string(),
        candidate_median: median(cand),
        baseline_median: median(base),
        p_value: p,
        a12,
        effect,
        verdict,
        marginal: (ALPHA..MARGINAL).contains(&p),
    }
}

/// Per-subject comparison of `candidate` against `baseline`. Cost metrics
/// are only compared where branch coverage is statistically equivalent.
pub fn build_report(
    records: &[RunRecord],
    candidate: Algorithm,
    baseline: Algorithm,
) -> Result<ComparisonReport, ReportError> {
    let mut subjects: Vec<&str> = records.iter().map(|r| r.subject.as_str()).collect();
    subjects.sort_unstable();
    subjects.dedup();

    let mut rows = Vec::new();
    let mut equivalent = Vec::new();
    let mut median_costs = Vec::new();
    let mut repetitions = 0;
    for subject in subjects {
        let pick = |alg: Algorithm| -> Result<Vec<&RunRecord>, ReportError> {
            let v: Vec<&RunRecord> = records.iter().filter(|r| r.subject == subject && r.algorithm == alg).collect();
            if v.is_empty() {
                return Err(ReportError::Missing { subject: subject.to_string(), algorithm: alg });
            }
            Ok(v)
        };
        let (cand, base) = (pick(candidate)?, pick(baseline)?);
        if cand.len() != base.len() {
            return Err(ReportError::MismatchedRepetitions {
                subject: subject.to_string(),
                candidate,
                baseline,
                a: cand.len(),
                b: base.len(),
            });
        }
        repetitions = cand.len();
        let series = |rs: &[&RunRecord], f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<f64>>();

        for kind in TargetKind::ALL {
            let f = move |r: &RunRecord| r.coverage_of(kind);
            rows.push(compare(subject, kind.name(), &series(&cand, &f), &series(&base, &f), true));
        }
        if cand.iter().chain(&base).all(|r| r.mutation_score.is_some()) {
            let f = |r: &RunRecord| r.mutation_score.unwrap_or(0.0);
            rows.push(compare(subject, "mutation", &series(&cand, &f), &series(&base, &f), true));
        }
        let branch = rows.iter().rev().find(|r| r.subject == subject && r.metric == TargetKind::Branch.name());
        if branch.is_some_and(|r| r.p_value >= ALPHA) {
            equivalent.push(subject.to_string());
            let steps = |r: &RunRecord| r.suite_cost.steps as f64;
            let alloc = |r: &RunRecord| r.suite_cost.alloc_units as f64;
            rows.push(compare(subject, "steps", &series(&cand, &steps), &series(&base, &steps), false));
            rows.push(compare(subject, "alloc_units", &series(&cand, &alloc), &series(&base, &alloc), false));
            median_costs.push(MedianCost {
                subject: subject.to_string(),
                candidate: select_median(&cand).suite_cost,
                baseline: select_median(&base).suite_cost,
            });
        }
    }
    let mut summary: BTreeMap<String, VerdictCounts> = BTreeMap::new();
    for r in &rows {
        let c = summary.entry(r.metric.clone()).or_default();
        match r.verdict {
            Verdict::Better => c.better += 1,
            Verdict::Worse => c.worse += 1,
            Verdict::NoDiff => c.no_diff += 1,
        }
    }
    Ok(ComparisonReport {
        candidate,
        baseline,
        repetitions,
        rows,
        summary,
        equivalent_coverage: equivalent,
        median_costs,
    })
}

impl ComparisonReport {
    pub fn row(&self, subject: &str, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.subject == subject && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("subject,metric,candidate_median,baseline_median,p_value,a12,effect,verdict,marginal\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.subject,
                r.metric,
                r.candidate_median,
                r.baseline_median,
                r.p_value,
                r.a12,
                r.effect.name(),
                r.verdict.name(),
                r.marginal
            );
        }
        out
    }
}
