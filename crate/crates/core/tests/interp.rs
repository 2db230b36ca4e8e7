mod common;

use adyna::interp::distance::comparison_distances;
use adyna::interp::{branch_distance, execute_test, ExecOptions, FaultKind, Limits, Value};
use adyna::program::{edge_id, BinOp};
use adyna::testcase::TestCase;
use adyna::Subject;
use common::{subject_from, tests_from};
use proptest::prelude::*;

const PROBE: &str = "cut class Probe {
  field int n;

  method int zero(int x) {
    if (x == 0) {
      return 1;
    }
    return 0;
  }

  method int spin(int a, int b) {
    var int s = 0;
    for (var int i = 0; i < a; i = i + 1) {
      s = s + 1;
    }
    for (var int j = 0; j < b; j = j + 1) {
      s = s + 2;
    }
    return s;
  }

  method void m1() {
    this.n = this.n + 1;
  }

  method void m2() {
    this.n = this.n - 1;
  }

  method int div(int d) {
    return 10 / d;
  }

  method int forever() {
    var int i = 0;
    while (i >= 0) {
      i = i + 1;
    }
    return i;
  }

  method int deep(int k) {
    return deep(k + 1);
  }

  method int[] big(int n) {
    return new int[n];
  }
}
";

fn probe() -> Subject {
    subject_from("probe", PROBE)
}

fn run(s: &Subject, t: &TestCase) -> adyna::interp::ExecutionTrace {
    execute_test(s, t, &ExecOptions::new(Limits::default()))
}

fn one(s: &Subject, statements: &str) -> TestCase {
    tests_from(s, &format!("[{statements}]")).remove(0)
}

fn branch_on_line(s: &Subject, line: u32) -> usize {
    s.cfg.branches.iter().position(|b| b.line == line).unwrap()
}

#[test]
fn distance_examples() {
    let d = |op, a, b| branch_distance(op, Value::Int(a), Value::Int(b), true);
    assert_eq!(d(BinOp::Eq, 5, 5), 0.0);
    assert_eq!(d(BinOp::Lt, 7, 3), 5.0);
    assert_eq!(d(BinOp::Ne, 2, 2), 1.0);
}

#[test]
fn empty_test_costs_nothing() {
    let s = probe();
    let trace = run(&s, &TestCase::default());
    assert_eq!((trace.cost.steps, trace.cost.alloc_units), (0, 0));
    assert!(trace.fault.is_none());
}

#[test]
fn equality_distances_after_running() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"zero","args":[{"int":0}]}]"#);
    let trace = run(&s, &t);
    let b = branch_on_line(&s, 5);
    assert_eq!(trace.edge_distance[edge_id(b, true)], 0.0);
    assert_eq!(trace.edge_distance[edge_id(b, false)], 1.0);
    assert_eq!(trace.edge_frequency[edge_id(b, true)], 1);
    assert_eq!(trace.edge_frequency[edge_id(b, false)], 0);
}

#[test]
fn loop_header_counts_iterations() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"spin","args":[{"int":5},{"int":1}]}]"#);
    let trace = run(&s, &t);
    let first = branch_on_line(&s, 13);
    let second = branch_on_line(&s, 16);
    assert_eq!(trace.edge_frequency[edge_id(first, true)], 5);
    assert_eq!(trace.edge_frequency[edge_id(first, false)], 1);
    assert_eq!(trace.edge_frequency[edge_id(second, true)], 1);
    // One loop ran five times, the other once.
    assert_eq!(trace.dynamic_proxies(&s.cfg).loop_cycles, 5);
}

#[test]
fn loops_run_once_have_no_cycles() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"spin","args":[{"int":1},{"int":1}]}]"#);
    assert_eq!(run(&s, &t).dynamic_proxies(&s.cfg).loop_cycles, 0);
}

#[test]
fn covered_calls_are_counted() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"m1","args":[]},
        {"op":"call","receiver":0,"method":"m1","args":[]},
        {"op":"call","receiver":0,"method":"m2","args":[]}]"#);
    let trace = run(&s, &t);
    assert_eq!(trace.dynamic_proxies(&s.cfg).method_calls, 3);
}

#[test]
fn static_proxies_count_calls_and_other_statements() {
    let s = probe();
    let t = one(&s, r#"[{"op":"primitive","value":{"int":1}},
        {"op":"construct","class":"Probe","args":[]},
        {"op":"primitive","value":{"int":2}},
        {"op":"call","receiver":1,"method":"zero","args":[{"var":0}]},
        {"op":"primitive","value":{"int":3}}]"#);
    let p = t.static_proxies();
    assert_eq!((p.method_calls, p.other_statements, p.length), (2, 3, 5));
}

#[test]
fn faults_stop_the_test() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"div","args":[{"int":0}]},
        {"op":"call","receiver":0,"method":"m1","args":[]}]"#);
    let trace = run(&s, &t);
    let fault = trace.fault.expect("division by zero");
    assert_eq!(fault.kind, FaultKind::DivisionByZero);
    assert_eq!(fault.statement, 1);
    assert_eq!(trace.test_statements_run, 2);
}

#[test]
fn step_budget_ends_infinite_loops() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"forever","args":[]}]"#);
    let limits = Limits { max_steps: 500, ..Limits::default() };
    let trace = execute_test(&s, &t, &ExecOptions::new(limits));
    assert!(trace.budget_exhausted);
    assert!(trace.cost.steps <= 500 + 10);
}

#[test]
fn unbounded_recursion_overflows() {
    let s = probe();
    let t = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"deep","args":[{"int":0}]}]"#);
    assert_eq!(run(&s, &t).fault.map(|f| f.kind), Some(FaultKind::StackOverflow));
}

#[test]
fn negative_array_size_faults_and_allocation_is_counted() {
    let s = probe();
    let bad = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"big","args":[{"int":-1}]}]"#);
    assert_eq!(run(&s, &bad).fault.map(|f| f.kind), Some(FaultKind::NegativeArraySize));
    let small = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"big","args":[{"int":4}]}]"#);
    let large = one(&s, r#"[{"op":"construct","class":"Probe","args":[]},
        {"op":"call","receiver":0,"method":"big","args":[{"int":40}]}]"#);
    assert!(run(&s, &large).cost.alloc_units > run(&s, &small).cost.alloc_units);
}

#[test]
fn execution_is_deterministic_on_corpus() {
    use rand::SeedableRng;
    let config = adyna::testcase::GenomeConfig::default();
    for s in common::corpus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = adyna::testcase::random_test(&s, &config, &mut rng);
            let options = ExecOptions { limits: Limits::default(), weak: true, observe: true };
            assert_eq!(execute_test(&s, &t, &options), execute_test(&s, &t, &options), "{}", s.name);
        }
    }
}

fn corpus() -> &'static [Subject] {
    static CORPUS: std::sync::OnceLock<Vec<Subject>> = std::sync::OnceLock::new();
    CORPUS.get_or_init(common::corpus)
}

fn random_case(si: usize, seed: u64) -> TestCase {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    adyna::testcase::random_test(&corpus()[si], &adyna::testcase::GenomeConfig::default(), &mut rng)
}

/// Average ranks, ties sharing the mean position.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            out[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

#[test]
fn proxies_track_cost_across_corpus() {
    let (mut work, mut steps, mut inst, mut alloc) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for si in 0..corpus().len() {
        for seed in 0..40 {
            let s = &corpus()[si];
            let t = random_case(si, seed);
            let trace = run(s, &t);
            let d = trace.dynamic_proxies(&s.cfg);
            work.push((d.loop_cycles + d.method_calls + d.statements) as f64);
            steps.push(trace.cost.steps as f64);
            inst.push(d.instantiations as f64);
            alloc.push(trace.cost.alloc_units as f64);
        }
    }
    let (a, b) = (spearman(&work, &steps), spearman(&inst, &alloc));
    assert!(a > 0.0 && b > 0.0, "rank correlations {a} and {b}");
}

fn comparison() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Eq),
        Just(BinOp::Ne),
        Just(BinOp::Lt),
        Just(BinOp::Le),
        Just(BinOp::Gt),
        Just(BinOp::Ge)
    ]
}

fn holds(op: BinOp, a: i64, b: i64) -> bool {
    match op {
        BinOp::Eq => a == b,
        BinOp::Ne => a != b,
        BinOp::Lt => a < b,
        BinOp::Le => a <= b,
        BinOp::Gt => a > b,
        BinOp::Ge => a >= b,
        _ => unreachable!(),
    }
}

proptest! {
    #[test]
    fn distance_is_zero_exactly_when_outcome_holds(op in comparison(), a in -1000i64..1000, b in -1000i64..1000, want: bool) {
        let d = branch_distance(op, Value::Int(a), Value::Int(b), want);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d == 0.0, holds(op, a, b) == want);
    }

    #[test]
    fn taken_side_has_zero_distance(op in comparison(), a in -1000i64..1000, b in -1000i64..1000) {
        let outcome = holds(op, a, b);
        let (t, f) = comparison_distances(op, Value::Int(a), Value::Int(b), outcome);
        let (taken, other) = if outcome { (t, f) } else { (f, t) };
        prop_assert_eq!(taken, 0.0);
        prop_assert!(other > 0.0);
        prop_assert_eq!(other, branch_distance(op, Value::Int(a), Value::Int(b), !outcome));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn edges_are_taken_exactly_at_distance_zero(si in 0..corpus().len(), seed: u64) {
        let s = &corpus()[si];
        let trace = run(s, &random_case(si, seed));
        for (f, d) in trace.edge_frequency.iter().zip(&trace.edge_distance) {
            prop_assert_eq!(*f > 0, *d == 0.0);
        }
    }

    #[test]
    fn longer_prefixes_never_cost_less(si in 0..corpus().len(), seed: u64) {
        let s = &corpus()[si];
        let t = random_case(si, seed);
        let mut last = adyna::interp::CostSample::default();
        for n in 1..=t.len() {
            let now = run(s, &TestCase::new(t.statements[..n].to_vec())).cost;
            prop_assert!(now.steps >= last.steps && now.alloc_units >= last.alloc_units);
            last = now;
        }
    }
}
