//! End-to-end acceptance checks over the bundled corpus. Prints one
//! PASS/FAIL line per criterion and fails if any of them fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use adyna::experiment::{build_report, vargha_delaney_a12, wilcoxon_rank_sum, ComparisonReport, Verdict};
use adyna::fitness::{
    fast_nondominated_sort, performance_heuristic, performance_score, preference_sorting, ProxyVector, TargetModel,
};
use adyna::interp::{execute_test, ExecOptions, Limits};
use adyna::mutation::{kill_table, strong_mutation_score};
use adyna::program::TargetKind;
use adyna::search::{run, Algorithm, ArchivePolicy, Heuristic, HeuristicPolicy, RunOutput, RunRecord, SearchConfig};
use adyna::testcase::{suite_to_json, TestCase};
use adyna::Subject;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEEDS: u64 = 20;
const BUDGET: u64 = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Fronts by repeated peeling of points nobody left dominates.
fn peeled_fronts(points: &[Vec<f64>], members: &[usize]) -> Vec<Vec<usize>> {
    let better = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    let mut left = members.to_vec();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| better(&points[j], &points[i]))).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn sorting_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=25);
        let m = rng.gen_range(1..=8);
        let levels = rng.gen_range(2..=6);
        let points: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| f64::from(rng.gen_range(0..levels)) / 4.0).collect()).collect();
        let lengths: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=30)).collect();
        let all: Vec<usize> = (0..n).collect();
        if fast_nondominated_sort(&points) != peeled_fronts(&points, &all) {
            mismatches += 1;
        }
        // First front: the best test per objective, shorter then earlier on ties.
        let mut first: Vec<usize> = (0..m)
            .map(|j| {
                let best = points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
                let tied: Vec<usize> = all.iter().copied().filter(|&i| points[i][j] == best).collect();
                let shortest = tied.iter().map(|&i| lengths[i]).min().unwrap();
                tied.into_iter().find(|&i| lengths[i] == shortest).unwrap()
            })
            .collect();
        first.sort_unstable();
        first.dedup();
        let rest: Vec<usize> = all.iter().copied().filter(|i| !first.contains(i)).collect();
        let mut want = vec![first];
        want.extend(peeled_fronts(&points, &rest));
        if preference_sorting(&points, &lengths) != want {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches over 200 instances in {secs:.2}s"))
}

fn formula_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut out_of_range = 0;
    for _ in 0..1000 {
        let p = ProxyVector(std::array::from_fn(|_| rng.gen_range(0..5000)));
        let direct: f64 = p.0.iter().map(|&x| x as f64 / (1.0 + x as f64)).sum();
        worst = worst.max((performance_score(&p) - direct).abs());

        let size = rng.gen_range(1..=12);
        let front: Vec<ProxyVector> =
            (0..size).map(|_| ProxyVector(std::array::from_fn(|_| rng.gen_range(0..40)))).collect();
        let got = performance_heuristic(&front);
        for (t, h) in front.iter().zip(&got) {
            let mut direct = 0.0;
            for k in 0..7 {
                let hi = front.iter().map(|q| q.0[k] as f64).fold(f64::MIN, f64::max);
                let lo = front.iter().map(|q| q.0[k] as f64).fold(f64::MAX, f64::min);
                if hi > lo {
                    direct += (hi - t.0[k] as f64) / (hi - lo);
                }
            }
            worst = worst.max((h - direct).abs());
            if !(0.0..=7.0).contains(h) {
                out_of_range += 1;
            }
        }
    }
    // Every proxy varies over this front.
    let fixture = [
        ProxyVector([0, 1, 1, 0, 2, 0, 1]),
        ProxyVector([3, 4, 2, 1, 5, 2, 4]),
        ProxyVector([9, 8, 7, 6, 9, 5, 8]),
    ];
    let anchors = performance_heuristic(&fixture);
    let anchored = anchors[0] == 7.0 && anchors[2] == 0.0;
    verdict(
        worst <= 1e-12 && out_of_range == 0 && anchored,
        format!("max error {worst:e}, {out_of_range} out of range, anchors {} / {}", anchors[0], anchors[2]),
    )
}

fn reduction(corpus: &[Subject]) -> Outcome {
    let picks = ["gauss", "lru", "stack", "calendar", "vending"];
    let cells: Vec<(&Subject, u64)> = corpus
        .iter()
        .filter(|s| picks.contains(&s.name.as_str()))
        .flat_map(|s| (0..5).map(move |seed| (s, seed)))
        .collect();
    let differing: Vec<String> = cells
        .par_iter()
        .filter_map(|&(s, seed)| {
            let reduced = SearchConfig {
                heuristic: Some(HeuristicPolicy::Pinned(Heuristic::Crowding)),
                archive: Some(ArchivePolicy::Length),
                ..SearchConfig::new(Algorithm::ADynaMosa, seed)
            };
            let mut a = run(s, &reduced).unwrap();
            let b = run(s, &SearchConfig::new(Algorithm::DynaMosa, seed)).unwrap();
            // Only the algorithm label may differ.
            a.suite.provenance.algorithm = b.suite.provenance.algorithm.clone();
            let same_suite = suite_to_json(&s.program, &a.suite) == suite_to_json(&s.program, &b.suite);
            let same_record = RunRecord { algorithm: Algorithm::DynaMosa, ..a.record } == b.record;
            (!(same_suite && same_record)).then(|| format!("{}/{seed}", s.name))
        })
        .collect();
    verdict(
        cells.len() == 25 && differing.is_empty(),
        format!("{} of {} runs identical {differing:?}", cells.len() - differing.len(), cells.len()),
    )
}

fn medians(records: &[RunRecord], subject: &str, algorithm: Algorithm) -> f64 {
    let v: Vec<f64> =
        records.iter().filter(|r| r.subject == subject && r.algorithm == algorithm).map(|r| r.branch_coverage()).collect();
    adyna::experiment::median(&v)
}

fn parity(records: &[RunRecord], subjects: &[String], secs: f64) -> Outcome {
    let close: Vec<&String> = subjects
        .iter()
        .filter(|s| (medians(records, s, Algorithm::ADynaMosa) - medians(records, s, Algorithm::DynaMosa)).abs() <= 0.02)
        .collect();
    let share = close.len() as f64 / subjects.len() as f64;
    let far: Vec<&String> = subjects.iter().filter(|s| !close.contains(s)).collect();
    verdict(
        share >= 0.7 && secs <= 1800.0,
        format!("{}/{} subjects within 2pp ({:.1}%), outside {far:?}; corpus runs took {secs:.0}s", close.len(), subjects.len(), 100.0 * share),
    )
}

fn performance_gain(report: &ComparisonReport) -> Outcome {
    let gated = &report.median_costs;
    let steps = gated.iter().filter(|m| m.candidate.steps < m.baseline.steps).count();
    let alloc = gated.iter().filter(|m| m.candidate.alloc_units < m.baseline.alloc_units).count();
    let best = gated
        .iter()
        .map(|m| 1.0 - m.candidate.steps as f64 / m.baseline.steps.max(1) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let n = gated.len();
    verdict(
        n > 0 && 2 * steps >= n && 2 * alloc >= n && best >= 0.10,
        format!("{n} gated subjects; steps lower on {steps}, allocUnits lower on {alloc}; largest steps reduction {:.1}%", 100.0 * best),
    )
}

fn branch_verdicts(report: &ComparisonReport) -> (Vec<String>, Vec<String>) {
    let rows = report.rows.iter().filter(|r| r.metric == TargetKind::Branch.name());
    let (mut better, mut worse) = (Vec::new(), Vec::new());
    for r in rows {
        match r.verdict {
            Verdict::Better => better.push(r.subject.clone()),
            Verdict::Worse => worse.push(r.subject.clone()),
            Verdict::NoDiff => {}
        }
    }
    (better, worse)
}

fn ablation(report: &ComparisonReport, n: usize) -> Outcome {
    // Candidate is aDynaMOSA: "better" means the non-adaptive variant is lower.
    let (lower, higher) = branch_verdicts(report);
    verdict(
        lower.len() as f64 >= 0.3 * n as f64 && higher.is_empty(),
        format!("non-adaptive lower on {}/{n} {lower:?}, higher on {} {higher:?}", lower.len(), higher.len()),
    )
}

fn random_baseline(report: &ComparisonReport, n: usize) -> Outcome {
    let (better, worse) = branch_verdicts(report);
    verdict(
        2 * better.len() >= n && worse.is_empty(),
        format!("better than random on {}/{n}, worse on {} {worse:?}", better.len(), worse.len()),
    )
}

fn mutation_properties(corpus: &[Subject], runs: &[(usize, RunOutput)]) -> Outcome {
    // Distinct tests of all final suites, per subject.
    let mut pools: Vec<Vec<TestCase>> = vec![Vec::new(); corpus.len()];
    for (si, out) in runs {
        for t in &out.suite.tests {
            if !pools[*si].contains(t) {
                pools[*si].push(t.clone());
            }
        }
    }
    let tables: Vec<_> = corpus.par_iter().zip(&pools).map(|(s, p)| kill_table(s, p, Limits::default())).collect();
    let mut pairs = 0usize;
    let mut violations = 0usize;
    for t in &tables {
        for (k, i) in t.killed.iter().zip(&t.infected) {
            pairs += k.len();
            violations += k.iter().zip(i).filter(|(&k, &i)| k && !i).count();
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sequences: Vec<(usize, Vec<TestCase>)> = (0..100)
        .map(|q| {
            let si = q % corpus.len();
            let mut pool = pools[si].clone();
            pool.shuffle(&mut rng);
            pool.truncate(6);
            (si, pool)
        })
        .collect();
    let drops = sequences
        .par_iter()
        .filter(|(si, seq)| {
            let scores: Vec<f64> =
                (0..=seq.len()).map(|n| strong_mutation_score(&corpus[*si], &seq[..n], Limits::default()).score).collect();
            scores.windows(2).any(|w| w[1] < w[0])
        })
        .count();

    let gate = common::fixture("gate");
    let tests = common::tests_from(
        &gate,
        r#"[[{"op":"construct","class":"Gate","args":[]},{"op":"call","receiver":0,"method":"less","args":[{"int":1},{"int":2}]}],
            [{"op":"construct","class":"Gate","args":[]},{"op":"call","receiver":0,"method":"less","args":[{"int":2},{"int":2}]}],
            [{"op":"construct","class":"Gate","args":[]},{"op":"call","receiver":0,"method":"less","args":[{"int":3},{"int":1}]}]]"#,
    );
    let table = kill_table(&gate, &tests, Limits::default());
    let expected = [
        ("< -> <=", 5, [false, true, false]),
        ("< -> >", 5, [true, false, true]),
        ("< -> ==", 5, [true, true, false]),
        ("< -> !=", 5, [false, false, true]),
        ("1 -> 0", 7, [true, false, false]),
    ];
    let fixture_ok = expected.iter().all(|(d, line, row)| {
        gate.mutants
            .iter()
            .position(|m| m.description == *d && m.line == *line)
            .is_some_and(|m| table.killed[m] == row.to_vec())
    });
    verdict(
        violations == 0 && drops == 0 && fixture_ok,
        format!("{violations} kill-without-infection over {pairs} pairs; {drops} of 100 growth sequences drop; fixture matrix {}", if fixture_ok { "matches" } else { "differs" }),
    )
}

fn statistics_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut broken = 0;
    for _ in 0..500 {
        let a: Vec<f64> = (0..rng.gen_range(1..30)).map(|_| f64::from(rng.gen_range(0..12))).collect();
        let b: Vec<f64> = (0..rng.gen_range(1..30)).map(|_| f64::from(rng.gen_range(0..12))).collect();
        let self_ok = vargha_delaney_a12(&a, &a).0 == 0.5;
        let sum = vargha_delaney_a12(&a, &b).0 + vargha_delaney_a12(&b, &a).0;
        if !self_ok || (sum - 1.0).abs() > 1e-12 {
            broken += 1;
        }
    }
    let refs: [(&[f64], &[f64], f64); 3] = [
        (&[7.0, 3.0, 9.0, 2.0], &[5.0, 6.0, 8.0, 4.0], 0.8852339144732015),
        (&[0.72, 0.75, 0.75, 0.80, 0.81, 0.90, 0.66], &[0.60, 0.62, 0.75, 0.70, 0.64, 0.58], 0.017778372968701422),
        (
            &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 10.0, 12.0],
            &[2.0, 3.0, 3.0, 5.0, 6.0, 7.0, 8.0, 9.0, 11.0, 13.0, 15.0],
            0.05089026432983417,
        ),
    ];
    let worst = refs.iter().map(|(a, b, p)| (wilcoxon_rank_sum(a, b) - p).abs()).fold(0.0, f64::max);
    verdict(broken == 0 && worst <= 1e-6, format!("{broken} of 500 pairs break an identity; worst p error {worst:e}"))
}

fn archive_audit(corpus: &[Subject], runs: &[(usize, RunOutput)]) -> Outcome {
    let models: Vec<TargetModel> = corpus.iter().map(|s| TargetModel::new(s, &[TargetKind::Branch])).collect();
    let options = ExecOptions::new(Limits::default());
    let (mut entries, mut events) = (0usize, 0usize);
    let mut problems: Vec<String> = Vec::new();
    for (si, out) in runs {
        let (s, model) = (&corpus[*si], &models[*si]);
        for (t, id, entry) in out.archive.entries() {
            entries += 1;
            if !execute_test(s, &entry.test, &options).covers(&model.targets[t]) {
                problems.push(format!("{} {} seed {}: {id} not covered", s.name, out.record.algorithm, out.record.seed));
            }
        }
        for e in out.record.archive_events.iter().filter(|e| e.is_replacement()) {
            events += 1;
            let decreased = match out.archive.policy {
                ArchivePolicy::PerformanceScore => e.new_score < e.old_score.unwrap(),
                ArchivePolicy::Length => e.new_length < e.old_length.unwrap(),
            };
            if !decreased {
                problems.push(format!("{} {} seed {}: replacement on {} did not improve", s.name, out.record.algorithm, out.record.seed, e.target));
            }
        }
    }
    problems.truncate(5);
    verdict(
        problems.is_empty(),
        format!("{entries} archived tests re-executed, {events} replacements checked, violations {problems:?}"),
    )
}

#[test]
fn acceptance_criteria() {
    let corpus = common::corpus();
    let names: Vec<String> = corpus.iter().map(|s| s.name.clone()).collect();
    let mut results: BTreeMap<usize, (&str, Outcome)> = BTreeMap::new();
    results.insert(1, ("sorting oracle", sorting_oracle()));
    results.insert(2, ("formula oracles", formula_oracles()));
    results.insert(9, ("statistics oracles", statistics_oracles()));
    results.insert(3, ("reduction to DynaMOSA", reduction(&corpus)));

    let cells: Vec<(usize, Algorithm, u64)> = (0..corpus.len())
        .flat_map(|s| Algorithm::ALL.into_iter().flat_map(move |a| (0..SEEDS).map(move |seed| (s, a, seed))))
        .collect();
    let start = Instant::now();
    let runs: Vec<(usize, RunOutput)> = cells
        .par_iter()
        .map(|&(si, algorithm, seed)| {
            let config = SearchConfig { budget: BUDGET, ..SearchConfig::new(algorithm, seed) };
            (si, run(&corpus[si], &config).unwrap())
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let records: Vec<RunRecord> = runs.iter().map(|(_, o)| o.record.clone()).collect();
    let report = |baseline| build_report(&records, Algorithm::ADynaMosa, baseline).unwrap();
    let (vs_dyna, vs_nonadaptive, vs_random) =
        (report(Algorithm::DynaMosa), report(Algorithm::NonAdaptive), report(Algorithm::Random));

    results.insert(4, ("coverage parity", parity(&records, &names, secs)));
    results.insert(5, ("performance gain", performance_gain(&vs_dyna)));
    results.insert(6, ("adaptivity ablation", ablation(&vs_nonadaptive, names.len())));
    results.insert(7, ("random baseline", random_baseline(&vs_random, names.len())));
    results.insert(8, ("mutation properties", mutation_properties(&corpus, &runs)));
    results.insert(10, ("archive audit", archive_audit(&corpus, &runs)));

    let corpus_ok = corpus.len() >= 10;
    println!("corpus: {} subjects {names:?}", corpus.len());
    let mut failed = BTreeSet::new();
    for (n, (name, o)) in &results {
        println!("criterion {n:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.insert(*n);
        }
    }
    assert!(corpus_ok, "corpus needs at least ten subjects");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
