//! Repeated runs over a corpus, median suites, cost profiles and reports.

mod report;
mod stats;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::interp::{execute_test, CostSample, ExecOptions, Limits};
use crate::mutation::strong_mutation_score;
use crate::search::{run, Algorithm, RunRecord, SearchConfig, SearchError};
use crate::subject::Subject;
use crate::testcase::{TestCase, TestSuite};

pub use report::{build_report, ComparisonReport, MedianCost, MetricRow, ReportError, Verdict, VerdictCounts, ALPHA};
pub use stats::{median, vargha_delaney_a12, wilcoxon_rank_sum, EffectSize, EFFECT_THRESHOLDS};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "ADYNA_WORKERS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("need at least two repetitions, got {0}")]
    Repetitions(usize),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("bad record file {path}: {source}")]
    Record { path: PathBuf, source: serde_json::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub repetitions: usize,
    pub master_seed: u64,
    /// Template for every run; algorithm and seed are overwritten.
    pub search: SearchConfig,
    /// Score every final suite against the strong mutants.
    pub mutation: bool,
    /// Worker threads; `None` reads the environment, then uses all cores.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(algorithms: Vec<Algorithm>, repetitions: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            algorithms,
            repetitions,
            master_seed,
            search: SearchConfig::new(Algorithm::ADynaMosa, master_seed),
            mutation: false,
            workers: None,
        }
    }

    /// Seed of repetition `r`, shared by every algorithm and subject.
    pub fn seed(&self, r: usize) -> u64 {
        self.master_seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub suite: TestSuite,
}

pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Loads every `.mini` file of `dir`, in name order. Files that fail to
/// parse are skipped and reported.
pub fn load_corpus(dir: &Path) -> Result<(Vec<Subject>, Vec<String>), ExperimentError> {
    let io_err = |source| ExperimentError::Io { path: dir.to_path_buf(), source };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mini"))
        .collect();
    paths.sort();
    let mut subjects = Vec::new();
    let mut skipped = Vec::new();
    for p in paths {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let source = fs::read_to_string(&p).map_err(|source| ExperimentError::Io { path: p.clone(), source })?;
        match Subject::from_source(&name, &source) {
            Ok(s) => subjects.push(s),
            Err(e) => skipped.push(format!("{}: {e}", p.display())),
        }
    }
    Ok((subjects, skipped))
}

/// Runs every (subject, algorithm, repetition) cell. Output order is
/// subject, then algorithm, then repetition, whatever the scheduling.
pub fn run_experiment(subjects: &[Subject], config: &ExperimentConfig) -> Result<Vec<RunOutcome>, ExperimentError> {
    if config.repetitions < 2 {
        return Err(ExperimentError::Repetitions(config.repetitions));
    }
    config.search.validate()?;
    let cells: Vec<(usize, Algorithm, usize)> = (0..subjects.len())
        .flat_map(|s| config.algorithms.iter().flat_map(move |&a| (0..config.repetitions).map(move |r| (s, a, r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config.workers))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(s, algorithm, r)| {
                let subject = &subjects[s];
                let search = SearchConfig { algorithm, seed: config.seed(r), ..config.search.clone() };
                let out = run(subject, &search)?;
                let mut record = out.record;
                if config.mutation {
                    record.mutation_score = Some(strong_mutation_score(subject, &out.suite.tests, search.limits).score);
                }
                Ok(RunOutcome { record, suite: out.suite })
            })
            .collect()
    })
}

/// The record with the lower-median branch coverage; ties go to the smaller seed.
pub fn select_median<'a>(records: &[&'a RunRecord]) -> &'a RunRecord {
    assert!(!records.is_empty(), "median of no records");
    let mut values: Vec<f64> = records.iter().map(|r| r.branch_coverage()).collect();
    values.sort_by(f64::total_cmp);
    let lower = values[(values.len() - 1) / 2];
    records
        .iter()
        .copied()
        .filter(|r| r.branch_coverage() == lower)
        .min_by_key(|r| r.seed)
        .expect("the lower median is one of the values")
}

/// Suite of the median run among `outcomes`.
pub fn select_median_suite(outcomes: &[&RunOutcome]) -> TestSuite {
    let records: Vec<&RunRecord> = outcomes.iter().map(|o| &o.record).collect();
    let m = select_median(&records);
    let pos = records.iter().position(|r| std::ptr::eq(*r, m)).expect("median is one of the records");
    outcomes[pos].suite.clone()
}

/// Total cost of running the suite, checked identical across `forks` runs.
pub fn profile_suite(subject: &Subject, tests: &[TestCase], forks: usize, limits: Limits) -> CostSample {
    let options = ExecOptions::new(limits);
    let once = || tests.iter().map(|t| execute_test(subject, t, &options).cost).sum::<CostSample>();
    let first = once();
    for _ in 1..forks {
        assert_eq!(once(), first, "cost model is not deterministic");
    }
    first
}

/// One JSON record per line.
pub fn save_records(path: &Path, records: &[RunRecord]) -> Result<(), ExperimentError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(|source| ExperimentError::Record { path: path.into(), source })?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| ExperimentError::Io { path: path.into(), source })
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.into(), source })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|source| ExperimentError::Record { path: path.into(), source }))
        .collect()
}
