mod common;

use std::sync::OnceLock;

use adyna::testcase::{
    crossover_single_point, mutate_uniform, random_test, suite_from_json, suite_to_json, validate, GenomeConfig,
    Provenance, Statement, TestSuite,
};
use adyna::Subject;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus() -> &'static [Subject] {
    static CORPUS: OnceLock<Vec<Subject>> = OnceLock::new();
    CORPUS.get_or_init(common::corpus)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn length_one_gives_a_lone_constructor() {
    let config = GenomeConfig { max_len: 1, ..GenomeConfig::default() };
    for s in corpus() {
        let mut r = rng(11);
        for _ in 0..50 {
            let t = random_test(s, &config, &mut r);
            assert_eq!(t.len(), 1, "{}", s.name);
            let Statement::Construct { class, .. } = &t.statements[0] else {
                panic!("{}: expected a constructor, got {:?}", s.name, t.statements[0]);
            };
            assert_eq!(*class, s.program.cut);
            validate(&s.program, &t).unwrap();
        }
    }
}

#[test]
fn same_seed_same_test() {
    let config = GenomeConfig::default();
    for s in corpus() {
        let a: Vec<_> = (0..10).map(|_| ()).scan(rng(5), |r, _| Some(random_test(s, &config, r))).collect();
        let b: Vec<_> = (0..10).map(|_| ()).scan(rng(5), |r, _| Some(random_test(s, &config, r))).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn identical_parents_give_identical_children() {
    let config = GenomeConfig::default();
    let mut r = rng(2);
    for s in corpus() {
        for _ in 0..20 {
            let t = random_test(s, &config, &mut r);
            let (c1, c2) = crossover_single_point(s, &t, &t, &config, &mut r);
            assert_eq!(c1, t);
            assert_eq!(c2, t);
        }
    }
}

#[test]
fn zero_probabilities_leave_tests_alone() {
    let config = GenomeConfig { insert_prob: 0.0, delete_prob: 0.0, change_scale: 0.0, ..GenomeConfig::default() };
    let mut r = rng(8);
    for s in corpus() {
        for _ in 0..20 {
            let t = random_test(s, &config, &mut r);
            assert_eq!(mutate_uniform(s, &t, &config, &mut r), t);
        }
    }
}

#[test]
fn deletion_keeps_a_statement() {
    let one = GenomeConfig { max_len: 1, ..GenomeConfig::default() };
    let delete_only = GenomeConfig { insert_prob: 0.0, delete_prob: 1.0, change_scale: 0.0, ..GenomeConfig::default() };
    let mut r = rng(4);
    for s in corpus() {
        let t = random_test(s, &one, &mut r);
        let m = mutate_uniform(s, &t, &delete_only, &mut r);
        assert!(!m.is_empty());
        validate(&s.program, &m).unwrap();
    }
}

#[test]
fn suites_round_trip_through_json() {
    let config = GenomeConfig::default();
    let mut r = rng(9);
    for s in corpus() {
        let suite = TestSuite {
            tests: (0..8).map(|_| random_test(s, &config, &mut r)).collect(),
            provenance: Provenance { subject: s.name.clone(), algorithm: "random".into(), seed: 9 },
        };
        let text = suite_to_json(&s.program, &suite);
        assert_eq!(suite_from_json(&s.program, &text).unwrap(), suite, "{}", s.name);
    }
}

#[test]
fn malformed_suites_are_rejected() {
    let s = &corpus()[0];
    assert!(suite_from_json(&s.program, "{").is_err());
    let forward = r#"{"subject":"x","algorithm":"random","seed":0,"tests":[{"statements":[
        {"op":"call","receiver":1,"method":"nothing","args":[]}]}]}"#;
    assert!(suite_from_json(&s.program, forward).is_err());
    let empty = r#"{"subject":"x","algorithm":"random","seed":0,"tests":[{"statements":[]}]}"#;
    assert!(suite_from_json(&s.program, empty).is_err());
}

fn subject_index() -> impl Strategy<Value = usize> {
    0..corpus().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_tests_validate(si in subject_index(), seed: u64) {
        let s = &corpus()[si];
        let config = GenomeConfig::default();
        let t = random_test(s, &config, &mut rng(seed));
        prop_assert!(!t.is_empty() && t.len() <= config.max_len);
        prop_assert!(validate(&s.program, &t).is_ok(), "{:?}", validate(&s.program, &t));
    }

    #[test]
    fn crossover_children_validate(si in subject_index(), seed: u64) {
        let s = &corpus()[si];
        let config = GenomeConfig::default();
        let mut r = rng(seed);
        let a = random_test(s, &config, &mut r);
        let b = random_test(s, &config, &mut r);
        let (c1, c2) = crossover_single_point(s, &a, &b, &config, &mut r);
        for c in [&c1, &c2] {
            prop_assert!(!c.is_empty() && c.len() <= config.max_len);
            prop_assert!(validate(&s.program, c).is_ok(), "{:?}", validate(&s.program, c));
        }
    }

    #[test]
    fn mutants_validate(si in subject_index(), seed: u64, rounds in 1usize..6) {
        let s = &corpus()[si];
        let config = GenomeConfig::default();
        let mut r = rng(seed);
        let mut t = random_test(s, &config, &mut r);
        for _ in 0..rounds {
            t = mutate_uniform(s, &t, &config, &mut r);
            prop_assert!(!t.is_empty() && t.len() <= config.max_len);
            prop_assert!(validate(&s.program, &t).is_ok(), "{:?}", validate(&s.program, &t));
        }
    }

    #[test]
    fn static_proxies_add_up(si in subject_index(), seed: u64) {
        let s = &corpus()[si];
        let t = random_test(s, &GenomeConfig::default(), &mut rng(seed));
        let p = t.static_proxies();
        prop_assert_eq!(p.method_calls + p.other_statements, p.length);
        prop_assert_eq!(p.length as usize, t.len());
        prop_assert_eq!(p.method_calls as usize, t.statements.iter().filter(|s| s.is_call()).count());
    }
}
