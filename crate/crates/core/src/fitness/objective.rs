use crate::interp::ExecutionTrace;
use crate::program::cfg::edge_branch;
use crate::program::{build_cdg, enumerate_targets, Cdg, CoverageTarget, TargetKind, TargetLoc};
use crate::subject::Subject;

/// Targets of a subject together with the dependency graph used to score them.
#[derive(Debug, Clone)]
pub struct TargetModel {
    pub targets: Vec<CoverageTarget>,
    pub cdg: Cdg,
    /// Global block holding each branch's condition.
    branch_block: Vec<usize>,
}

fn normalise(d: f64) -> f64 {
    let d = if d.is_finite() { d } else { 1.0 };
    d / (d + 1.0)
}

impl TargetModel {
    pub fn new(subject: &Subject, criteria: &[TargetKind]) -> Self {
        let targets = enumerate_targets(&subject.program, &subject.cfg, &subject.mutants, criteria);
        let cdg = build_cdg(&subject.cfg, &targets);
        let branch_block = subject.cfg.branches.iter().map(|b| subject.cfg.global_block(b.method, b.block)).collect();
        TargetModel { targets, cdg, branch_block }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.targets.iter().position(|t| t.id == id)
    }

    /// How far a trace is from reaching `block`: 0 when it ran, otherwise
    /// approach levels plus the normalised distance at the closest miss.
    pub fn reach(&self, trace: &ExecutionTrace, block: usize) -> f64 {
        if trace.block_hits[block] > 0 {
            return 0.0;
        }
        let parents = &self.cdg.block_parents[block];
        if parents.is_empty() {
            return 1.0;
        }
        parents
            .iter()
            .map(|&e| {
                let a = self.branch_block[edge_branch(e).0];
                if trace.block_hits[a] > 0 {
                    normalise(trace.edge_distance[e])
                } else {
                    1.0 + self.reach(trace, a)
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Objective value of target `t`; 0 exactly when covered.
    pub fn objective(&self, trace: &ExecutionTrace, t: usize) -> f64 {
        let target = &self.targets[t];
        if trace.covers(target) {
            return 0.0;
        }
        match target.loc {
            TargetLoc::Edge(e) => {
                let a = self.branch_block[edge_branch(e).0];
                if trace.block_hits[a] > 0 {
                    normalise(trace.edge_distance[e])
                } else {
                    1.0 + self.reach(trace, a)
                }
            }
            TargetLoc::Line(_) => match self.reach(trace, self.cdg.phi[t]) {
                // Reached the block but stopped before the line.
                r if r == 0.0 => 0.5,
                r => r,
            },
            TargetLoc::Method => 1.0,
            TargetLoc::Mutant(_) => self.reach(trace, self.cdg.phi[t]) + 0.5,
        }
    }

    pub fn covered<'a>(&'a self, trace: &'a ExecutionTrace) -> impl Iterator<Item = usize> + 'a {
        (0..self.targets.len()).filter(move |&t| trace.covers(&self.targets[t]))
    }
}
