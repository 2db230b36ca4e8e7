mod common;

use adyna::fitness::{ProxyVector, TargetModel};
use adyna::interp::{execute_test, ExecOptions, Limits};
use adyna::program::{edge_id, TargetKind};
use adyna::search::{
    get_secondary_heuristic, minimize, run, suite_coverage, update_targets, Algorithm, Archive, ArchivePolicy,
    Heuristic, HeuristicState, SearchConfig,
};
use adyna::testcase::{random_test, GenomeConfig, TestCase};
use common::{fixture, tests_from};
use proptest::prelude::*;
use rand::SeedableRng;

#[test]
fn first_generation_uses_performance() {
    let mut s = HeuristicState { performance_counter: 4, crowding_counter: 1, previous: Heuristic::Crowding };
    assert_eq!(get_secondary_heuristic(&mut s, 0, &[0.5], &[0.5]), Heuristic::Performance);
    assert_eq!(s, HeuristicState::default());
}

#[test]
fn progress_keeps_the_heuristic_and_resets_it() {
    let mut s = HeuristicState { performance_counter: 2, crowding_counter: 1, previous: Heuristic::Performance };
    assert_eq!(get_secondary_heuristic(&mut s, 5, &[0.3, 0.9], &[0.4, 0.9]), Heuristic::Performance);
    assert_eq!((s.performance_counter, s.crowding_counter), (0, 1));
}

#[test]
fn stagnation_moves_to_the_less_stuck_heuristic() {
    let mut s = HeuristicState { performance_counter: 2, crowding_counter: 1, previous: Heuristic::Performance };
    assert_eq!(get_secondary_heuristic(&mut s, 5, &[0.4, 0.9], &[0.4, 0.9]), Heuristic::Crowding);
    assert_eq!((s.performance_counter, s.crowding_counter), (3, 1));
    assert_eq!(s.previous, Heuristic::Crowding);
}

proptest! {
    #[test]
    fn selector_follows_its_counters(steps in prop::collection::vec(any::<bool>(), 1..60)) {
        let mut s = HeuristicState::default();
        prop_assert_eq!(s.decide(0, true), Heuristic::Performance);
        let (mut perf, mut crowd, mut prev) = (0u32, 0u32, Heuristic::Performance);
        for (g, &stagnated) in steps.iter().enumerate() {
            let got = s.decide(g + 1, stagnated);
            let stuck = if prev == Heuristic::Performance { &mut perf } else { &mut crowd };
            let want = if stagnated {
                *stuck += 1;
                if perf <= crowd { Heuristic::Performance } else { Heuristic::Crowding }
            } else {
                *stuck = 0;
                prev
            };
            prop_assert_eq!(got, want);
            prop_assert_eq!((s.performance_counter, s.crowding_counter), (perf, crowd));
            prev = want;
        }
    }
}

fn test_of_len(n: usize) -> TestCase {
    let s = fixture("shapes");
    let mut stmts = r#"{"op":"construct","class":"Shapes","arity":0,"args":[]}"#.to_string();
    for _ in 1..n {
        stmts.push_str(r#",{"op":"call","receiver":0,"method":"flat","args":[{"int":1}]}"#);
    }
    tests_from(&s, &format!("[[{stmts}]]")).remove(0)
}

#[test]
fn archive_inserts_then_replaces_only_on_improvement() {
    let mut a = Archive::new(ArchivePolicy::PerformanceScore, vec!["t".into(), "u".into()]);
    assert!(a.offer(0, &test_of_len(2), ProxyVector([1, 1, 1, 1, 1, 1, 0]), 0));
    assert_eq!(a.get(0).unwrap().score, 3.0);
    assert!(!a.is_covered(1));
    // A costlier test, even a shorter one, leaves the archive unchanged.
    assert!(!a.offer(0, &test_of_len(1), ProxyVector([1, 1, 1, 1, 1, 1, 1]), 1));
    assert!(!a.offer(0, &test_of_len(1), ProxyVector([1, 1, 1, 1, 1, 1, 0]), 1));
    assert_eq!(a.get(0).unwrap().score, 3.0);
    // 2/3 + 1/2 + 1/2 + 1/2 is below 3.
    let cheaper = ProxyVector([2, 1, 1, 1, 0, 0, 0]);
    assert!((cheaper.performance_score() - 2.1666666666666665).abs() < 1e-12);
    assert!(a.offer(0, &test_of_len(4), cheaper, 2));
    assert_eq!(a.get(0).unwrap().test.len(), 4);
    assert_eq!(a.events.len(), 2);
    assert!(a.events[1].is_replacement() && a.events[1].new_score < a.events[1].old_score.unwrap());
    assert_eq!(a.covered_count(), 1);
    assert!(!a.all_covered());
}

#[test]
fn length_archive_prefers_shorter_tests() {
    let mut a = Archive::new(ArchivePolicy::Length, vec!["t".into()]);
    assert!(a.offer(0, &test_of_len(3), ProxyVector([0; 7]), 0));
    assert!(!a.offer(0, &test_of_len(3), ProxyVector([0; 7]), 1));
    assert!(!a.offer(0, &test_of_len(5), ProxyVector([0; 7]), 1));
    assert!(a.offer(0, &test_of_len(2), ProxyVector([9; 7]), 2));
    assert_eq!(a.get(0).unwrap().length(), 2);
}

#[test]
fn target_activation_follows_dependencies() {
    let s = fixture("shapes");
    let model = TargetModel::new(&s, &[TargetKind::Branch]);
    let id = |t: &str| model.position(t).unwrap();
    let mut active = vec![false; model.len()];
    for t in model.cdg.entry_points() {
        active[t] = true;
    }
    let before = active.clone();
    update_targets(&mut active, &[], &model.cdg);
    assert_eq!(active, before, "nothing taken, nothing changes");
    assert!(!active[id("branch:Shapes.nest:b1:T")]);

    let outer = s.cfg.branches.iter().position(|b| b.line == 16).unwrap();
    update_targets(&mut active, &[edge_id(outer, true)], &model.cdg);
    assert!(active[id("branch:Shapes.nest:b1:T")] && active[id("branch:Shapes.nest:b1:F")]);

    // Taking a leaf edge opens nothing new, so covering it shrinks the open set by one.
    let open = |active: &[bool], covered: &[usize]| (0..active.len()).filter(|t| active[*t] && !covered.contains(t)).count();
    let leaf = id("branch:Shapes.nest:b1:T");
    let n = open(&active, &[]);
    let inner = s.cfg.branches.iter().position(|b| b.line == 17).unwrap();
    update_targets(&mut active, &[edge_id(inner, true)], &model.cdg);
    assert_eq!(open(&active, &[leaf]), n - 1);
}

fn small(algorithm: Algorithm, seed: u64, budget: u64) -> SearchConfig {
    SearchConfig { budget, ..SearchConfig::new(algorithm, seed) }
}

#[test]
fn runs_are_reproducible() {
    let s = common::corpus_subject("gauss");
    for algorithm in Algorithm::ALL {
        let a = run(&s, &small(algorithm, 7, 1500)).unwrap();
        let b = run(&s, &small(algorithm, 7, 1500)).unwrap();
        assert_eq!(a.record, b.record, "{algorithm}");
        assert_eq!(a.suite, b.suite, "{algorithm}");
    }
}

#[test]
fn budget_is_respected() {
    let s = common::corpus_subject("stack");
    for algorithm in Algorithm::ALL {
        let out = run(&s, &small(algorithm, 1, 777)).unwrap();
        assert!(out.record.evaluations <= 777, "{algorithm}: {}", out.record.evaluations);
    }
}

#[test]
fn random_search_with_one_evaluation() {
    let s = common::corpus_subject("gauss");
    let out = run(&s, &small(Algorithm::Random, 3, 1)).unwrap();
    assert_eq!(out.record.evaluations, 1);
    assert!(out.suite.tests.len() <= 1);
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = fixture("shapes");
    let base = SearchConfig::new(Algorithm::ADynaMosa, 0);
    assert!(run(&s, &SearchConfig { population: 1, ..base.clone() }).is_err());
    assert!(run(&s, &SearchConfig { budget: 0, ..base.clone() }).is_err());
    assert!(run(&s, &SearchConfig { crossover_rate: 1.5, ..base.clone() }).is_err());
    assert!(run(&s, &SearchConfig { criteria: vec![], ..base }).is_err());
}

#[test]
fn final_suite_keeps_archive_coverage() {
    for name in ["gauss", "lru", "calendar"] {
        let s = common::corpus_subject(name);
        for algorithm in [Algorithm::DynaMosa, Algorithm::ADynaMosa] {
            let out = run(&s, &small(algorithm, 2, 2000)).unwrap();
            let model = TargetModel::new(&s, &[TargetKind::Branch]);
            let want = out.archive.covered_count() as f64 / model.len() as f64;
            let got = suite_coverage(&s, &out.suite.tests, Limits::default())[&TargetKind::Branch];
            assert!(got >= want - 1e-12, "{name} {algorithm}: {got} < {want}");
            assert_eq!(out.record.branch_coverage(), got);
            let covered: Vec<usize> = out.record.generations.iter().map(|g| g.covered.values().sum()).collect();
            assert!(covered.windows(2).all(|w| w[0] <= w[1]), "{name} {algorithm}: archive shrank");
        }
    }
}

#[test]
fn minimisation_keeps_covered_targets() {
    let s = common::corpus_subject("lru");
    let model = TargetModel::new(&s, &[TargetKind::Branch, TargetKind::Line]);
    let options = ExecOptions::new(Limits::default());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let t = random_test(&s, &GenomeConfig::default(), &mut rng);
        let m = minimize(&s, &model, &t, &options);
        assert!(m.len() <= t.len() && !m.is_empty());
        let (before, after) = (execute_test(&s, &t, &options), execute_test(&s, &m, &options));
        for target in &model.targets {
            assert!(!before.covers(target) || after.covers(target), "{} lost", target.id);
        }
    }
}
