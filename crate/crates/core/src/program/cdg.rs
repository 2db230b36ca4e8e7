//! Control-dependency graph over CFG blocks, extended with the target map.
//!
//! Nodes are global block ids. A block depends on a labelled branch edge when
//! taking that edge decides whether the block executes (post-dominator
//! construction, per method). Dependencies a loop header has on edges inside
//! its own loop are dropped, which keeps the graph acyclic; method entries
//! have no parents, so every method's targets root at its entry.

use std::collections::BTreeSet;

use super::cfg::{edge_id, Cfg, EdgeId, MethodCfg, Terminator};
use super::targets::{CoverageTarget, TargetLoc};
use super::ProgramError;

#[derive(Debug, Clone, PartialEq)]
pub struct Cdg {
    /// Control-dependency parents (branch edges) of each global block.
    pub block_parents: Vec<Vec<EdgeId>>,
    /// Blocks directly control dependent on each branch edge.
    pub edge_children: Vec<Vec<usize>>,
    /// Target index -> global block (the target map).
    pub phi: Vec<usize>,
    /// Targets whose node is directly dependent on each edge.
    pub edge_targets: Vec<Vec<usize>>,
    target_edges: Vec<Option<EdgeId>>,
    ids: Vec<String>,
}

/// Strict post-dominator sets for each local block; index `n` is the virtual exit.
pub fn post_dominators(m: &MethodCfg) -> Vec<BTreeSet<usize>> {
    let n = m.blocks.len();
    let exit = n;
    let mut succ: Vec<Vec<usize>> = m
        .blocks
        .iter()
        .map(|b| match &b.term {
            Terminator::Return { .. } => vec![exit],
            _ => b.successors(),
        })
        .collect();
    // Blocks caught in an infinite loop get a pseudo edge to the exit.
    let mut reaches = vec![false; n + 1];
    reaches[exit] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for b in 0..n {
            if !reaches[b] && succ[b].iter().any(|&s| reaches[s]) {
                reaches[b] = true;
                changed = true;
            }
        }
    }
    for b in 0..n {
        if !reaches[b] {
            succ[b].push(exit);
        }
    }

    let all: BTreeSet<usize> = (0..=n).collect();
    let mut pdom: Vec<BTreeSet<usize>> = vec![all; n + 1];
    pdom[exit] = BTreeSet::from([exit]);
    let mut changed = true;
    while changed {
        changed = false;
        for b in (0..n).rev() {
            let mut inter: Option<BTreeSet<usize>> = None;
            for &s in &succ[b] {
                inter = Some(match inter {
                    None => pdom[s].clone(),
                    Some(acc) => acc.intersection(&pdom[s]).copied().collect(),
                });
            }
            let mut new = inter.unwrap_or_default();
            new.insert(b);
            if new != pdom[b] {
                pdom[b] = new;
                changed = true;
            }
        }
    }
    pdom
}

/// Dominator sets for each local block (entry is block 0).
pub fn dominators(m: &MethodCfg) -> Vec<BTreeSet<usize>> {
    let n = m.blocks.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in m.blocks.iter().enumerate() {
        for s in b.successors() {
            preds[s].push(i);
        }
    }
    let all: BTreeSet<usize> = (0..n).collect();
    let mut dom = vec![all; n];
    dom[0] = BTreeSet::from([0]);
    let mut changed = true;
    while changed {
        changed = false;
        for b in 1..n {
            let mut inter: Option<BTreeSet<usize>> = None;
            for &p in &preds[b] {
                inter = Some(match inter {
                    None => dom[p].clone(),
                    Some(acc) => acc.intersection(&dom[p]).copied().collect(),
                });
            }
            let mut new = inter.unwrap_or_default();
            new.insert(b);
            if new != dom[b] {
                dom[b] = new;
                changed = true;
            }
        }
    }
    dom
}

fn immediate(sets: &[BTreeSet<usize>], b: usize) -> Option<usize> {
    // The closest strict (post-)dominator has the largest set of its own.
    sets[b].iter().copied().filter(|&d| d != b).max_by_key(|&d| sets[d].len())
}

/// `(block, edge)` control dependencies of one method, local block indices.
pub fn control_dependencies(m: &MethodCfg) -> Vec<(usize, EdgeId)> {
    let pdom = post_dominators(m);
    let dom = dominators(m);
    let mut out = Vec::new();
    for (a, block) in m.blocks.iter().enumerate() {
        let Terminator::Branch { on_true, on_false, branch, .. } = &block.term else { continue };
        let stop = immediate(&pdom, a);
        for (target, outcome) in [(*on_true, true), (*on_false, false)] {
            let mut runner = Some(target);
            while let Some(r) = runner {
                if Some(r) == stop || r >= m.blocks.len() {
                    break;
                }
                // Dependencies of a block on edges it dominates are loop-carried.
                if !dom[a].contains(&r) {
                    out.push((r, edge_id(*branch, outcome)));
                }
                runner = immediate(&pdom, r);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn build_cdg(cfg: &Cfg, targets: &[CoverageTarget]) -> Cdg {
    let n_blocks = cfg.block_count();
    let mut block_parents = vec![Vec::new(); n_blocks];
    let mut edge_children = vec![Vec::new(); cfg.branches.len() * 2];
    for m in &cfg.methods {
        for (local, edge) in control_dependencies(m) {
            let g = m.offset + local;
            block_parents[g].push(edge);
            edge_children[edge].push(g);
        }
    }
    let phi: Vec<usize> = targets.iter().map(|t| cfg.global_block(t.method, t.block)).collect();
    let mut edge_targets = vec![Vec::new(); edge_children.len()];
    for (ti, &node) in phi.iter().enumerate() {
        for &e in &block_parents[node] {
            edge_targets[e].push(ti);
        }
    }
    let target_edges = targets
        .iter()
        .map(|t| match t.loc {
            TargetLoc::Edge(e) => Some(e),
            _ => None,
        })
        .collect();
    Cdg {
        block_parents,
        edge_children,
        phi,
        edge_targets,
        target_edges,
        ids: targets.iter().map(|t| t.id.clone()).collect(),
    }
}

impl Cdg {
    pub fn node_count(&self) -> usize {
        self.block_parents.len()
    }

    /// Labelled dependency edges `(branch edge, dependent block)`.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, usize)> + '_ {
        self.edge_children.iter().enumerate().flat_map(|(e, ch)| ch.iter().map(move |&b| (e, b)))
    }

    pub fn is_entry_node(&self, block: usize) -> bool {
        self.block_parents[block].is_empty()
    }

    /// Targets free of control dependencies, in target order.
    pub fn entry_points(&self) -> Vec<usize> {
        (0..self.phi.len()).filter(|&t| self.is_entry_node(self.phi[t])).collect()
    }

    /// Targets made reachable by covering `target`. Only branch targets have children.
    pub fn dominated_children(&self, target: usize) -> Vec<usize> {
        match self.target_edges.get(target) {
            Some(Some(e)) => self.edge_targets[*e].clone(),
            _ => Vec::new(),
        }
    }

    pub fn dominated_children_by_id(&self, id: &str) -> Result<Vec<usize>, ProgramError> {
        let t = self
            .ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| ProgramError::UnknownTarget(id.to_string()))?;
        Ok(self.dominated_children(t))
    }

    /// Targets that depend directly on a branch edge, whatever the criteria.
    pub fn targets_on_edge(&self, edge: EdgeId) -> &[usize] {
        &self.edge_targets[edge]
    }

    /// True if the dependency relation has no cycle.
    pub fn is_acyclic(&self, cfg: &Cfg) -> bool {
        // Block -> block relation through the branch's own block.
        let n = self.node_count();
        let mut indeg = vec![0usize; n];
        let mut adj = vec![Vec::new(); n];
        for (e, child) in self.edges() {
            let info = &cfg.branches[e / 2];
            let from = cfg.global_block(info.method, info.block);
            adj[from].push(child);
            indeg[child] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&b| indeg[b] == 0).collect();
        let mut seen = 0;
        while let Some(b) = queue.pop() {
            seen += 1;
            for &c in &adj[b] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        seen == n
    }
}
