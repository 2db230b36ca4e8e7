mod common;

use std::collections::BTreeSet;

use adyna::program::cdg::{control_dependencies, post_dominators};
use adyna::program::cfg::{MethodCfg, Terminator};
use adyna::program::{
    build_cdg, edge_id, enumerate_targets, parse_program, print_program, target_manifest, ProgramError, TargetKind,
};
use common::{corpus, corpus_dir, fixture, subject_from};

const ALL: [TargetKind; 4] = TargetKind::ALL;

fn method_index(s: &adyna::Subject, name: &str) -> usize {
    s.cfg
        .methods
        .iter()
        .position(|m| s.program.qualified_name(m.method).ends_with(&format!(".{name}")))
        .unwrap_or_else(|| panic!("no method {name}"))
}

fn branches_in(m: &MethodCfg) -> Vec<usize> {
    (0..m.blocks.len()).filter(|&b| matches!(m.blocks[b].term, Terminator::Branch { .. })).collect()
}

#[test]
fn empty_cut_has_no_targets() {
    let s = subject_from("empty", "cut class Empty {\n}\n");
    let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &ALL);
    // Only the implicit constructor remains, with nothing to branch on.
    assert!(targets.iter().all(|t| t.kind != TargetKind::Branch && t.kind != TargetKind::WeakMutant));
    assert!(targets.iter().filter(|t| t.kind == TargetKind::Method).count() <= 1);
}

#[test]
fn single_comparison_gives_two_branch_targets() {
    let src = "cut class C {\n  method int m(int a, int b) {\n    if (a < b) {\n      return 1;\n    }\n    return 0;\n  }\n}\n";
    let s = subject_from("c", src);
    let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &[TargetKind::Branch]);
    assert_eq!(targets.len(), 2);
    assert_eq!(s.cfg.branches.len(), 1);
}

#[test]
fn syntax_error_names_its_line() {
    let src = "cut class C {\n  method int m() {\n    return 1 +;\n  }\n}\n";
    let err = parse_program(src).unwrap_err();
    assert!(matches!(err, ProgramError::Syntax { .. }), "{err}");
    assert_eq!(err.line(), Some(3));
}

#[test]
fn unresolved_name_is_reported() {
    let src = "cut class C {\n  method int m() {\n    return missing;\n  }\n}\n";
    let err = parse_program(src).unwrap_err();
    assert_eq!(err.line(), Some(3), "{err}");
}

#[test]
fn type_errors_are_rejected() {
    let src = "cut class C {\n  method int m() {\n    var bool b = 3;\n    return 0;\n  }\n}\n";
    assert!(parse_program(src).is_err());
}

#[test]
fn ambiguous_cut_is_rejected() {
    assert!(parse_program("class A {\n}\nclass B {\n}\n").is_err());
    assert!(parse_program("cut class A {\n}\ncut class B {\n}\n").is_err());
    // A lone class is the class under test even without the marker.
    assert!(parse_program("class A {\n}\n").is_ok());
}

#[test]
fn straight_line_method_is_one_block() {
    let s = fixture("shapes");
    let m = &s.cfg.methods[method_index(&s, "flat")];
    assert_eq!(m.blocks.len(), 1);
    assert!(branches_in(m).is_empty());
    assert!(m.back_edges.is_empty());
}

#[test]
fn while_loop_has_one_back_edge_into_its_header() {
    let s = fixture("shapes");
    let m = &s.cfg.methods[method_index(&s, "loop")];
    assert_eq!(m.back_edges.len(), 1);
    let (_, header) = m.back_edges[0];
    let Terminator::Branch { line, on_true, on_false, .. } = &m.blocks[header].term else {
        panic!("loop header must end in a branch");
    };
    assert_eq!(*line, 28);
    // Hand-drawn shape: header -> [if-block | exit]; the inner if sits on the true edge.
    let Terminator::Branch { line: inner_line, on_true: then_block, on_false: join, .. } = &m.blocks[*on_true].term
    else {
        panic!("loop body must start with the inner conditional");
    };
    assert_eq!(*inner_line, 29);
    assert_eq!(branches_in(m).len(), 2);
    // Both arms of the inner if meet again before jumping back to the header.
    assert_eq!(m.blocks[*then_block].successors(), vec![*join]);
    assert_eq!(m.blocks[*join].successors(), vec![header]);
    assert!(matches!(m.blocks[*on_false].term, Terminator::Return { .. }));
}

#[test]
fn nested_if_depends_only_on_outer_true_edge() {
    let s = fixture("shapes");
    let gm = method_index(&s, "nest");
    let m = &s.cfg.methods[gm];
    let deps = control_dependencies(m);
    let outer = s.cfg.branches.iter().position(|b| b.method == gm && b.line == 16).unwrap();
    let inner = s.cfg.branches.iter().position(|b| b.method == gm && b.line == 17).unwrap();
    let inner_block = s.cfg.branches[inner].block;
    let parents: Vec<_> = deps.iter().filter(|(b, _)| *b == inner_block).map(|(_, e)| *e).collect();
    assert_eq!(parents, vec![edge_id(outer, true)]);
}

#[test]
fn entry_points_and_children_on_fixture() {
    let s = fixture("shapes");
    let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &[TargetKind::Branch, TargetKind::Method]);
    let cdg = build_cdg(&s.cfg, &targets);
    let ids = |v: Vec<usize>| v.into_iter().map(|t| targets[t].id.clone()).collect::<BTreeSet<_>>();
    let entry = ids(cdg.entry_points());
    // Methods have no conditionals above them, nor do the top-level branches.
    for id in [
        "method:Shapes.flat",
        "method:Shapes.nest",
        "branch:Shapes.nest:b0:T",
        "branch:Shapes.nest:b0:F",
        "branch:Shapes.loop:b1:T",
        "branch:Shapes.loop:b1:F",
    ] {
        assert!(entry.contains(id), "{id} should be an entry point: {entry:?}");
    }
    assert!(!entry.contains("branch:Shapes.nest:b1:T"));
    let kids = ids(cdg.dominated_children_by_id("branch:Shapes.nest:b0:T").unwrap());
    assert_eq!(kids, ["branch:Shapes.nest:b1:T", "branch:Shapes.nest:b1:F"].map(String::from).into());
    assert!(cdg.dominated_children_by_id("branch:Shapes.nest:b1:T").unwrap().is_empty());
    assert!(cdg.dominated_children_by_id("method:Shapes.flat").unwrap().is_empty());
    assert!(cdg.dominated_children_by_id("nope").is_err());
}

#[test]
fn nested_chain_exposes_only_outermost_branches() {
    let src = "cut class C {\n  method int m(int a) {\n    if (a > 0) {\n      if (a > 5) {\n        if (a > 9) {\n          return 3;\n        }\n        return 2;\n      }\n      return 1;\n    }\n    return 0;\n  }\n}\n";
    let s = subject_from("chain", src);
    let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &[TargetKind::Branch]);
    let cdg = build_cdg(&s.cfg, &targets);
    let entry: Vec<&str> = cdg.entry_points().into_iter().map(|t| targets[t].id.as_str()).collect();
    assert_eq!(entry, vec!["branch:C.m:b0:T", "branch:C.m:b0:F"]);
}

/// Reachability from `from` to the virtual exit avoiding `removed`.
fn reaches_exit(m: &MethodCfg, from: usize, removed: usize) -> bool {
    let mut seen = vec![false; m.blocks.len()];
    let mut stack = vec![from];
    while let Some(b) = stack.pop() {
        if b == removed || seen[b] {
            continue;
        }
        seen[b] = true;
        if matches!(m.blocks[b].term, Terminator::Return { .. }) {
            return true;
        }
        stack.extend(m.blocks[b].successors());
    }
    false
}

fn reaches(m: &MethodCfg, from: usize, to: usize, removed: usize) -> bool {
    let mut seen = vec![false; m.blocks.len()];
    let mut stack = vec![from];
    while let Some(b) = stack.pop() {
        if b == removed || seen[b] {
            continue;
        }
        if b == to {
            return true;
        }
        seen[b] = true;
        stack.extend(m.blocks[b].successors());
    }
    false
}

/// `y` post-dominates `x` (reflexive).
fn post_dominates(m: &MethodCfg, y: usize, x: usize) -> bool {
    x == y || !reaches_exit(m, x, y)
}

/// `d` dominates `x` (reflexive).
fn dominates(m: &MethodCfg, d: usize, x: usize) -> bool {
    x == d || !reaches(m, 0, x, d)
}

/// Brute-force control dependence with loop-carried edges removed.
fn oracle_dependencies(m: &MethodCfg) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for a in 0..m.blocks.len() {
        let Terminator::Branch { on_true, on_false, branch, .. } = &m.blocks[a].term else { continue };
        for (succ, outcome) in [(*on_true, true), (*on_false, false)] {
            for b in 0..m.blocks.len() {
                let strict_pdom_a = b != a && post_dominates(m, b, a);
                if post_dominates(m, b, succ) && !strict_pdom_a && !dominates(m, b, a) {
                    out.insert((b, edge_id(*branch, outcome)));
                }
            }
        }
    }
    out
}

#[test]
fn control_dependencies_match_brute_force_on_corpus() {
    let mut methods = 0;
    for s in corpus().iter().chain([fixture("shapes")].iter()) {
        for m in &s.cfg.methods {
            let got: BTreeSet<_> = control_dependencies(m).into_iter().collect();
            assert_eq!(got, oracle_dependencies(m), "{} {}", s.name, s.program.qualified_name(m.method));
            methods += 1;
        }
    }
    assert!(methods > 50);
}

#[test]
fn post_dominators_match_brute_force_on_corpus() {
    for s in corpus() {
        for m in &s.cfg.methods {
            let sets = post_dominators(m);
            for x in 0..m.blocks.len() {
                if !reaches_exit(m, x, usize::MAX) {
                    continue;
                }
                let want: BTreeSet<usize> = (0..m.blocks.len()).filter(|&y| y != x && post_dominates(m, y, x)).collect();
                let got: BTreeSet<usize> = sets[x].iter().copied().filter(|&y| y != x && y < m.blocks.len()).collect();
                assert_eq!(got, want, "{} block {x}", s.name);
            }
        }
    }
}

#[test]
fn dependency_graphs_are_acyclic() {
    for s in corpus() {
        let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &ALL);
        assert!(build_cdg(&s.cfg, &targets).is_acyclic(&s.cfg), "{}", s.name);
    }
}

#[test]
fn target_counts_follow_structure() {
    // Three conditionals over two methods, eleven statement lines.
    let src = "cut class T {\n  method int a(int x) {\n    var int y = 0;\n    if (x > 0) {\n      y = 1;\n    }\n    if (x > 9) {\n      y = 2;\n    }\n    return y;\n  }\n\n  method int b(int x) {\n    var int z = x;\n    while (z > 0) {\n      z = z - 1;\n    }\n    z = z + 1;\n    return z;\n  }\n}\n";
    let s = subject_from("t", src);
    let count = |k: TargetKind| enumerate_targets(&s.program, &s.cfg, &s.mutants, &[k]).len();
    assert_eq!(count(TargetKind::Branch), 6);
    assert_eq!(count(TargetKind::Line), 11);
    assert_eq!(count(TargetKind::Method), 2);
    let branch_only = enumerate_targets(&s.program, &s.cfg, &s.mutants, &[TargetKind::Branch]);
    assert!(branch_only.iter().all(|t| t.kind == TargetKind::Branch));
}

#[test]
fn gauss_targets_match_golden_manifest() {
    let golden = std::fs::read_to_string(corpus_dir().join("gauss.targets")).unwrap();
    let s = common::corpus_subject("gauss");
    let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &[TargetKind::Branch, TargetKind::Line, TargetKind::Method]);
    assert_eq!(target_manifest(&targets), golden);
    let kinds = |k: &str| golden.lines().filter(|l| l.starts_with(k)).count();
    assert_eq!((kinds("branch"), kinds("line"), kinds("method")), (10, 19, 4));
}

#[test]
fn printer_round_trips_every_corpus_subject() {
    for s in corpus() {
        let text = print_program(&s.program);
        let again = parse_program(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", s.name));
        assert_eq!(again, s.program, "{}", s.name);
    }
}

#[test]
fn corpus_is_large_and_branchy_enough() {
    let subjects = corpus();
    assert!(subjects.len() >= 10);
    for s in &subjects {
        let cut = s.program.cut;
        // Cyclomatic complexity of the CUT: decisions plus one per method.
        let complexity: usize = s
            .cfg
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.method.class == cut)
            .map(|(gm, _)| 1 + s.cfg.branches.iter().filter(|b| b.method == gm).count())
            .sum();
        assert!(complexity >= 5, "{} has complexity {complexity}", s.name);
    }
}

#[test]
fn every_target_is_an_entry_point_or_a_child() {
    for s in corpus() {
        let targets = enumerate_targets(&s.program, &s.cfg, &s.mutants, &ALL);
        let cdg = build_cdg(&s.cfg, &targets);
        let entry: BTreeSet<usize> = cdg.entry_points().into_iter().collect();
        let children: BTreeSet<usize> = (0..targets.len()).flat_map(|t| cdg.dominated_children(t)).collect();
        assert!(entry.is_disjoint(&children), "{}: an entry point is also a child", s.name);
        let orphans: Vec<&str> =
            (0..targets.len()).filter(|t| !entry.contains(t) && !children.contains(t)).map(|t| targets[t].id.as_str()).collect();
        assert!(orphans.is_empty(), "{}: {orphans:?}", s.name);
    }
}

#[test]
fn printed_programs_keep_their_manifest() {
    for s in corpus() {
        let again = adyna::Subject::from_source(&s.name, &print_program(&s.program)).unwrap();
        let manifest = |x: &adyna::Subject| target_manifest(&enumerate_targets(&x.program, &x.cfg, &x.mutants, &ALL));
        assert_eq!(manifest(&again), manifest(&s), "{}", s.name);
    }
}

#[test]
fn conditionals_have_one_true_and_one_false_edge() {
    for s in corpus() {
        for m in &s.cfg.methods {
            for b in branches_in(m) {
                let Terminator::Branch { on_true, on_false, .. } = m.blocks[b].term else { unreachable!() };
                assert!(on_true < m.blocks.len() && on_false < m.blocks.len());
                assert_eq!(m.blocks[b].successors().len(), 2, "{}", s.name);
            }
        }
    }
}
