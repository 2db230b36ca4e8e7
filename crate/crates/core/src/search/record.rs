use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::interp::{execute_test, CostSample, ExecOptions, Limits};
use crate::program::{enumerate_targets, TargetKind};
use crate::subject::Subject;
use crate::testcase::TestCase;

use super::{Algorithm, ArchiveEvent, Heuristic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub evaluations: u64,
    /// Archived targets per criterion.
    pub covered: BTreeMap<TargetKind, usize>,
    pub uncovered_active: usize,
    /// Heuristic used to rank this generation; absent for random search.
    pub heuristic: Option<Heuristic>,
    pub performance_counter: u32,
    pub crowding_counter: u32,
    pub archive_size: usize,
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subject: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Final suite coverage for every criterion, searched for or not.
    pub coverage: BTreeMap<TargetKind, f64>,
    pub mutation_score: Option<f64>,
    pub suite_size: usize,
    /// Statements over all tests of the suite.
    pub suite_length: usize,
    pub suite_cost: CostSample,
    pub evaluations: u64,
    pub generations: Vec<GenerationLog>,
    pub archive_events: Vec<ArchiveEvent>,
}

impl RunRecord {
    pub fn coverage_of(&self, kind: TargetKind) -> f64 {
        self.coverage.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn branch_coverage(&self) -> f64 {
        self.coverage_of(TargetKind::Branch)
    }
}

/// Fraction of targets covered per criterion; 1 for a criterion without targets.
pub fn suite_coverage(subject: &Subject, tests: &[TestCase], limits: Limits) -> BTreeMap<TargetKind, f64> {
    let targets = enumerate_targets(&subject.program, &subject.cfg, &subject.mutants, &TargetKind::ALL);
    let options = ExecOptions { limits, weak: true, observe: false };
    let mut hit = vec![false; targets.len()];
    for t in tests {
        let trace = execute_test(subject, t, &options);
        for (h, target) in hit.iter_mut().zip(&targets) {
            *h |= trace.covers(target);
        }
    }
    TargetKind::ALL
        .iter()
        .map(|&k| {
            let (total, covered) = targets
                .iter()
                .zip(&hit)
                .filter(|(t, _)| t.kind == k)
                .fold((0usize, 0usize), |(n, c), (_, &h)| (n + 1, c + usize::from(h)));
            (k, if total == 0 { 1.0 } else { covered as f64 / total as f64 })
        })
        .collect()
}

/// Cost of running every test once.
pub fn suite_cost(subject: &Subject, tests: &[TestCase], limits: Limits) -> CostSample {
    let options = ExecOptions::new(limits);
    tests.iter().map(|t| execute_test(subject, t, &options).cost).sum()
}
