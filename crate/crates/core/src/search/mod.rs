//! Test generation loops: random search, DynaMOSA and its adaptive,
//! performance-aware variant.

mod archive;
mod engine;
mod heuristic;
mod minimize;
mod record;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::Limits;
use crate::program::TargetKind;
use crate::subject::Subject;
use crate::testcase::{GenomeConfig, TestSuite};

pub use archive::{Archive, ArchiveEntry, ArchiveEvent, ArchivePolicy};
pub use engine::update_targets;
pub use heuristic::{get_secondary_heuristic, Heuristic, HeuristicState};
pub use minimize::minimize;
pub use record::{suite_coverage, GenerationLog, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Random,
    #[serde(rename = "dynamosa")]
    DynaMosa,
    #[serde(rename = "adynamosa")]
    ADynaMosa,
    /// aDynaMOSA with the heuristic pinned to performance.
    #[serde(rename = "nonadaptive")]
    NonAdaptive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Random, Algorithm::DynaMosa, Algorithm::ADynaMosa, Algorithm::NonAdaptive];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::DynaMosa => "dynamosa",
            Algorithm::ADynaMosa => "adynamosa",
            Algorithm::NonAdaptive => "nonadaptive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Algorithm::Random),
            "dynamosa" => Ok(Algorithm::DynaMosa),
            "adynamosa" => Ok(Algorithm::ADynaMosa),
            "nonadaptive" | "adynamosa-nonadaptive" => Ok(Algorithm::NonAdaptive),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// How the secondary score is chosen each generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicPolicy {
    Adaptive,
    Pinned(Heuristic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub crossover_rate: f64,
    /// Fitness evaluations, i.e. test executions.
    pub budget: u64,
    pub tournament: usize,
    pub criteria: Vec<TargetKind>,
    pub seed: u64,
    pub limits: Limits,
    pub genome: GenomeConfig,
    /// Turn off to keep offspring as selected (or recombined) copies.
    pub mutation: bool,
    /// Overrides the algorithm's heuristic policy.
    pub heuristic: Option<HeuristicPolicy>,
    /// Overrides the algorithm's archive policy.
    pub archive: Option<ArchivePolicy>,
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        SearchConfig {
            algorithm,
            population: 50,
            crossover_rate: 0.75,
            budget: 10_000,
            tournament: 10,
            criteria: vec![TargetKind::Branch],
            seed,
            limits: Limits::default(),
            genome: GenomeConfig::default(),
            mutation: true,
            heuristic: None,
            archive: None,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.budget == 0 {
            return bad("budget must be positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must lie in [0, 1]");
        }
        if self.tournament == 0 {
            return bad("tournament size must be positive");
        }
        if self.criteria.is_empty() {
            return bad("no coverage criteria");
        }
        Ok(())
    }

    pub fn heuristic_policy(&self) -> HeuristicPolicy {
        self.heuristic.unwrap_or(match self.algorithm {
            Algorithm::ADynaMosa => HeuristicPolicy::Adaptive,
            Algorithm::NonAdaptive => HeuristicPolicy::Pinned(Heuristic::Performance),
            Algorithm::DynaMosa | Algorithm::Random => HeuristicPolicy::Pinned(Heuristic::Crowding),
        })
    }

    pub fn archive_policy(&self) -> ArchivePolicy {
        self.archive.unwrap_or(match self.algorithm {
            Algorithm::ADynaMosa | Algorithm::NonAdaptive => ArchivePolicy::PerformanceScore,
            Algorithm::DynaMosa | Algorithm::Random => ArchivePolicy::Length,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Minimised archive contents.
    pub suite: TestSuite,
    pub archive: Archive,
    pub record: RunRecord,
}

/// Runs the configured algorithm on `subject`.
pub fn run(subject: &Subject, config: &SearchConfig) -> Result<RunOutput, SearchError> {
    config.validate()?;
    Ok(match config.algorithm {
        Algorithm::Random => engine::random_search(subject, config),
        _ => engine::evolve(subject, config),
    })
}

fn with_algorithm(config: &SearchConfig, algorithm: Algorithm) -> SearchConfig {
    SearchConfig { algorithm, ..config.clone() }
}

pub fn run_adynamosa(subject: &Subject, config: &SearchConfig) -> Result<RunOutput, SearchError> {
    run(subject, &with_algorithm(config, Algorithm::ADynaMosa))
}

pub fn run_dynamosa(subject: &Subject, config: &SearchConfig) -> Result<RunOutput, SearchError> {
    run(subject, &with_algorithm(config, Algorithm::DynaMosa))
}

pub fn run_nonadaptive(subject: &Subject, config: &SearchConfig) -> Result<RunOutput, SearchError> {
    run(subject, &with_algorithm(config, Algorithm::NonAdaptive))
}

pub fn run_random_search(subject: &Subject, config: &SearchConfig) -> Result<RunOutput, SearchError> {
    run(subject, &with_algorithm(config, Algorithm::Random))
}
