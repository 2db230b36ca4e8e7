//! Strong mutation: run each mutant against tests and compare what a
//! regression oracle would see.

use rayon::prelude::*;

use crate::interp::{execute_test, ExecOptions, ExecutionTrace, Limits};
use crate::subject::Subject;
use crate::testcase::TestCase;

use super::MutationOperator;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KillVerdict {
    pub mutant: String,
    pub operator: MutationOperator,
    /// First test that kills the mutant.
    pub killed_by: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationResult {
    pub verdicts: Vec<KillVerdict>,
    /// Killed over generated mutants; 1 when there are none.
    pub score: f64,
}

impl MutationResult {
    pub fn killed(&self) -> usize {
        self.verdicts.iter().filter(|v| v.killed_by.is_some()).count()
    }
}

/// Full per-pair outcome, indexed `[mutant][test]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KillTable {
    pub killed: Vec<Vec<bool>>,
    pub infected: Vec<Vec<bool>>,
}

fn reference_runs(subject: &Subject, tests: &[TestCase], limits: Limits) -> Vec<ExecutionTrace> {
    let options = ExecOptions { limits, weak: true, observe: true };
    tests.iter().map(|t| execute_test(subject, t, &options)).collect()
}

/// Runs one mutant program against one test and decides the kill.
fn kills(mutated: &Subject, test: &TestCase, original: &ExecutionTrace, limits: Limits) -> bool {
    let mut limits = limits;
    if !original.budget_exhausted {
        // Generous headroom over the original run; anything slower counts as a timeout.
        limits.max_steps = limits.max_steps.min((original.cost.steps * 4).max(1_000));
    }
    let options = ExecOptions { limits, weak: false, observe: true };
    let trace = execute_test(mutated, test, &options);
    if trace.budget_exhausted && !original.budget_exhausted {
        return true;
    }
    trace.observations != original.observations
}

fn reaches(subject: &Subject, mutant: usize, trace: &ExecutionTrace) -> bool {
    let site = subject.mutants[mutant].site as usize;
    match subject.cfg.expr_site.get(site).copied().flatten() {
        Some((gm, block)) => trace.block_hits[subject.cfg.global_block(gm, block)] > 0,
        None => false,
    }
}

/// Mutation score of `tests`, stopping at the first killing test per mutant.
pub fn strong_mutation_score(subject: &Subject, tests: &[TestCase], limits: Limits) -> MutationResult {
    let refs = reference_runs(subject, tests, limits);
    let programs = subject.mutant_programs();
    let verdicts: Vec<KillVerdict> = (0..subject.mutants.len())
        .into_par_iter()
        .map(|mi| {
            let m = &subject.mutants[mi];
            let killed_by = tests
                .iter()
                .zip(&refs)
                .position(|(t, r)| reaches(subject, mi, r) && kills(&programs[mi], t, r, limits));
            KillVerdict { mutant: m.id.clone(), operator: m.operator, killed_by }
        })
        .collect();
    let score = if verdicts.is_empty() {
        1.0
    } else {
        verdicts.iter().filter(|v| v.killed_by.is_some()).count() as f64 / verdicts.len() as f64
    };
    MutationResult { verdicts, score }
}

/// Every (mutant, test) pair: strong kill and weak infection.
pub fn kill_table(subject: &Subject, tests: &[TestCase], limits: Limits) -> KillTable {
    let refs = reference_runs(subject, tests, limits);
    let programs = subject.mutant_programs();
    let rows: Vec<(Vec<bool>, Vec<bool>)> = (0..subject.mutants.len())
        .into_par_iter()
        .map(|mi| {
            let killed = tests
                .iter()
                .zip(&refs)
                .map(|(t, r)| reaches(subject, mi, r) && kills(&programs[mi], t, r, limits))
                .collect();
            let infected = refs.iter().map(|r| r.infected[mi]).collect();
            (killed, infected)
        })
        .collect();
    let (killed, infected) = rows.into_iter().unzip();
    KillTable { killed, infected }
}

/// `mutant-id<TAB>operator<TAB>killing test or -`, one line per mutant.
pub fn kill_matrix(result: &MutationResult) -> String {
    result
        .verdicts
        .iter()
        .map(|v| {
            let by = v.killed_by.map_or_else(|| "-".to_string(), |t| t.to_string());
            format!("{}\t{}\t{}\n", v.mutant, v.operator, by)
        })
        .collect()
}
