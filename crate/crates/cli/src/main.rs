use std::fs;
use std::path::{Path, PathBuf};

use adyna::experiment::{
    build_report, load_corpus, load_records, profile_suite, run_experiment, save_records, ExperimentConfig,
};
use adyna::interp::Limits;
use adyna::mutation::{kill_matrix, strong_mutation_score};
use adyna::program::{enumerate_targets, parse_criteria, target_manifest, TargetKind};
use adyna::search::{run, Algorithm, SearchConfig};
use adyna::testcase::{suite_from_json, suite_to_json};
use adyna::Subject;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adyna", version, about = "Search-based unit test generation for .mini classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test suite for the class under test.
    Gen {
        file: PathBuf,
        #[arg(long, default_value = "adynamosa")]
        algo: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, default_value = "branch")]
        criteria: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the run record (coverage, costs, generation log) as JSON.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Print the coverage targets, one `kind<TAB>id` per line.
    Targets {
        file: PathBuf,
        #[arg(long, default_value = "branch,line,method,weakmut")]
        criteria: String,
    },
    /// List the generated mutants.
    Mutants { file: PathBuf },
    /// Strong mutation score of a suite, with the kill matrix.
    Mutscore { file: PathBuf, suite: PathBuf },
    /// Deterministic cost of a suite.
    Profile {
        file: PathBuf,
        suite: PathBuf,
        #[arg(long, default_value_t = 1)]
        forks: usize,
    },
    /// Repeated runs over a corpus directory, with reports.
    Exp {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, value_delimiter = ',', default_value = "random,dynamosa,adynamosa,nonadaptive")]
        algos: Vec<Algorithm>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Master seed; repetition r uses seed + r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "branch")]
        criteria: String,
        /// Also compute strong mutation scores of the final suites.
        #[arg(long)]
        mutation: bool,
        #[arg(long, env = "ADYNA_WORKERS")]
        workers: Option<usize>,
    },
    /// Compare two record files (candidate first).
    Stats {
        candidate: PathBuf,
        baseline: PathBuf,
        /// Defaults to the algorithm of the first record in each file.
        #[arg(long)]
        candidate_algo: Option<Algorithm>,
        #[arg(long)]
        baseline_algo: Option<Algorithm>,
    },
}

fn load_subject(path: &Path) -> Result<Subject> {
    let source = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Subject::from_source(&name, &source).with_context(|| format!("parsing {}", path.display()))
}

fn criteria(s: &str) -> Result<Vec<TargetKind>> {
    parse_criteria(s).map_err(anyhow::Error::msg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { file, algo, seed, budget, criteria: c, out, record } => {
            let subject = load_subject(&file)?;
            let config = SearchConfig { budget, criteria: criteria(&c)?, ..SearchConfig::new(algo, seed) };
            let result = run(&subject, &config)?;
            let json = suite_to_json(&subject.program, &result.suite);
            match out {
                Some(p) => fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?,
                None => println!("{json}"),
            }
            if let Some(p) = record {
                fs::write(&p, serde_json::to_string_pretty(&result.record)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            let r = &result.record;
            eprintln!(
                "{} {} seed {}: {} tests, branch {:.3}, line {:.3}, steps {}, alloc {}",
                r.subject,
                r.algorithm,
                r.seed,
                r.suite_size,
                r.branch_coverage(),
                r.coverage_of(TargetKind::Line),
                r.suite_cost.steps,
                r.suite_cost.alloc_units
            );
        }
        Command::Targets { file, criteria: c } => {
            let s = load_subject(&file)?;
            print!("{}", target_manifest(&enumerate_targets(&s.program, &s.cfg, &s.mutants, &criteria(&c)?)));
        }
        Command::Mutants { file } => {
            let s = load_subject(&file)?;
            for m in &s.mutants {
                println!("{}\t{}\t{}\t{}", m.id, m.operator, m.line, m.description);
            }
        }
        Command::Mutscore { file, suite } => {
            let s = load_subject(&file)?;
            let text = fs::read_to_string(&suite).with_context(|| format!("reading {}", suite.display()))?;
            let suite = suite_from_json(&s.program, &text)?;
            let result = strong_mutation_score(&s, &suite.tests, Limits::default());
            print!("{}", kill_matrix(&result));
            println!("score\t{}/{}\t{:.4}", result.killed(), result.verdicts.len(), result.score);
        }
        Command::Profile { file, suite, forks } => {
            let s = load_subject(&file)?;
            let text = fs::read_to_string(&suite).with_context(|| format!("reading {}", suite.display()))?;
            let suite = suite_from_json(&s.program, &text)?;
            let cost = profile_suite(&s, &suite.tests, forks.max(1), Limits::default());
            println!("steps\t{}\nalloc_units\t{}", cost.steps, cost.alloc_units);
        }
        Command::Exp { corpus, reps, algos, out, budget, seed, criteria: c, mutation, workers } => {
            let (subjects, skipped) = load_corpus(&corpus)?;
            for s in &skipped {
                eprintln!("skipping {s}");
            }
            if subjects.is_empty() {
                bail!("no usable subjects in {}", corpus.display());
            }
            let mut config = ExperimentConfig::new(algos.clone(), reps, seed);
            config.search.budget = budget;
            config.search.criteria = criteria(&c)?;
            config.mutation = mutation;
            config.workers = workers;
            let outcomes = run_experiment(&subjects, &config)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
            save_records(&out.join("records.jsonl"), &records)?;
            let mut summaries = serde_json::Map::new();
            if let Some(&candidate) = algos.iter().find(|&&a| a == Algorithm::ADynaMosa).or(algos.first()) {
                for &baseline in algos.iter().filter(|&&a| a != candidate) {
                    let report = build_report(&records, candidate, baseline)?;
                    let stem = format!("{candidate}-vs-{baseline}");
                    fs::write(out.join(format!("{stem}.csv")), report.to_csv())?;
                    summaries.insert(stem, serde_json::to_value(&report)?);
                }
            }
            fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summaries)?)?;
            eprintln!("{} runs written to {}", records.len(), out.display());
        }
        Command::Stats { candidate, baseline, candidate_algo, baseline_algo } => {
            let a = load_records(&candidate)?;
            let b = load_records(&baseline)?;
            let ca = candidate_algo.or(a.first().map(|r| r.algorithm)).context("candidate file has no records")?;
            let ba = baseline_algo.or(b.first().map(|r| r.algorithm)).context("baseline file has no records")?;
            let all: Vec<_> = a.into_iter().chain(b).collect();
            let report = build_report(&all, ca, ba)?;
            print!("{}", report.to_csv());
            for (metric, c) in &report.summary {
                eprintln!("{metric}: {} better, {} worse, {} no diff", c.better, c.worse, c.no_diff);
            }
        }
    }
    Ok(())
}
