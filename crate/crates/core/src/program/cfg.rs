//! Control-flow graphs, one per method, lowered from the resolved syntax tree.
//!
//! Blocks hold straight-line statements and end in a terminator. Conditionals
//! (`if`, `while`, `for` headers) end in a two-way [`Terminator::Branch`]
//! whose edges are the branch coverage targets. The interpreter executes
//! these graphs directly, so coverage is measured on exactly the structure
//! the dependency analysis sees.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;

pub type BlockId = usize;
pub type BranchId = usize;
/// `2 * branch` for the true edge, `2 * branch + 1` for the false edge.
pub type EdgeId = usize;

pub fn edge_id(branch: BranchId, outcome: bool) -> EdgeId {
    2 * branch + usize::from(!outcome)
}

pub fn edge_branch(edge: EdgeId) -> (BranchId, bool) {
    (edge / 2, edge % 2 == 0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimpleStmt {
    Init { slot: usize, value: Option<Expr> },
    Assign { place: Place, value: Expr },
    Eval(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfgStmt {
    pub kind: SimpleStmt,
    pub line: u32,
    /// Dense index into [`Cfg::lines`].
    pub line_slot: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terminator {
    Goto(usize),
    Branch { cond: Expr, on_true: usize, on_false: usize, branch: BranchId, line: u32, line_slot: usize },
    /// `line` is `None` for the implicit return at the end of a body.
    Return { value: Option<Expr>, line: Option<(u32, usize)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<CfgStmt>,
    pub term: Terminator,
}

impl Block {
    pub fn successors(&self) -> Vec<usize> {
        match &self.term {
            Terminator::Goto(b) => vec![*b],
            Terminator::Branch { on_true, on_false, .. } => vec![*on_true, *on_false],
            Terminator::Return { .. } => vec![],
        }
    }

    pub fn lines(&self) -> BTreeSet<u32> {
        let mut out: BTreeSet<u32> = self.stmts.iter().map(|s| s.line).collect();
        match &self.term {
            Terminator::Branch { line, .. } => {
                out.insert(*line);
            }
            Terminator::Return { line: Some((l, _)), .. } => {
                out.insert(*l);
            }
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCfg {
    pub method: MethodId,
    pub blocks: Vec<Block>,
    /// Global id of local block 0.
    pub offset: BlockId,
    /// `(from, to)` local block pairs found by depth-first traversal.
    pub back_edges: Vec<(usize, usize)>,
    pub local_count: usize,
}

impl MethodCfg {
    pub fn entry(&self) -> usize {
        0
    }

    /// Labelled edges `(from, to, label)`; `None` marks an unconditional edge.
    pub fn edges(&self) -> Vec<(usize, usize, Option<bool>)> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            match &b.term {
                Terminator::Goto(t) => out.push((i, *t, None)),
                Terminator::Branch { on_true, on_false, .. } => {
                    out.push((i, *on_true, Some(true)));
                    out.push((i, *on_false, Some(false)));
                }
                Terminator::Return { .. } => {}
            }
        }
        out
    }

    pub fn loop_headers(&self) -> BTreeSet<usize> {
        self.back_edges.iter().map(|&(_, h)| h).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchInfo {
    /// Global method index.
    pub method: usize,
    pub block: usize,
    pub line: u32,
    /// The outcome that stays inside a loop when this is a loop header.
    pub loop_outcome: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineInfo {
    pub method: usize,
    pub line: u32,
    /// First local block that contains the line.
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cfg {
    pub methods: Vec<MethodCfg>,
    pub class_offsets: Vec<usize>,
    pub branches: Vec<BranchInfo>,
    pub lines: Vec<LineInfo>,
    /// Global block id -> (global method, local block).
    pub block_owner: Vec<(usize, usize)>,
    /// Expression id -> (global method, local block) where it is evaluated.
    pub expr_site: Vec<Option<(usize, usize)>>,
}

impl Cfg {
    pub fn method_index(&self, id: MethodId) -> usize {
        self.class_offsets[id.class] + id.index
    }

    pub fn block_count(&self) -> usize {
        self.block_owner.len()
    }

    pub fn global_block(&self, method: usize, local: usize) -> BlockId {
        self.methods[method].offset + local
    }

    pub fn loop_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.branches
            .iter()
            .enumerate()
            .filter_map(|(b, info)| info.loop_outcome.map(|o| edge_id(b, o)))
    }
}

pub fn build_cfg(program: &MiniProgram) -> Cfg {
    let mut class_offsets = Vec::with_capacity(program.classes.len());
    let mut methods = Vec::new();
    for (ci, class) in program.classes.iter().enumerate() {
        class_offsets.push(methods.len());
        for (mi, m) in class.methods.iter().enumerate() {
            methods.push(lower_method(MethodId { class: ci, index: mi }, m));
        }
    }

    let mut lines = Vec::new();
    let mut line_slots: HashMap<(usize, u32), usize> = HashMap::new();
    let mut branches = Vec::new();
    let mut block_owner = Vec::new();
    let mut expr_site = vec![None; program.expr_count as usize];

    for (gm, mcfg) in methods.iter_mut().enumerate() {
        mcfg.offset = block_owner.len();
        for (bi, block) in mcfg.blocks.iter_mut().enumerate() {
            block_owner.push((gm, bi));
            let mut slot_for = |line: u32| {
                *line_slots.entry((gm, line)).or_insert_with(|| {
                    lines.push(LineInfo { method: gm, line, block: bi });
                    lines.len() - 1
                })
            };
            for s in &mut block.stmts {
                s.line_slot = slot_for(s.line);
                for e in simple_exprs(&s.kind) {
                    e.walk(&mut |x| expr_site[x.id as usize] = Some((gm, bi)));
                }
            }
            match &mut block.term {
                Terminator::Branch { cond, branch, line, line_slot, .. } => {
                    *line_slot = slot_for(*line);
                    *branch = branches.len();
                    branches.push(BranchInfo { method: gm, block: bi, line: *line, loop_outcome: None });
                    cond.walk(&mut |x| expr_site[x.id as usize] = Some((gm, bi)));
                }
                Terminator::Return { value, line } => {
                    if let Some((l, slot)) = line {
                        *slot = slot_for(*l);
                    }
                    if let Some(v) = value {
                        v.walk(&mut |x| expr_site[x.id as usize] = Some((gm, bi)));
                    }
                }
                Terminator::Goto(_) => {}
            }
        }
        mcfg.back_edges = find_back_edges(mcfg);
        for &(latch, header) in &mcfg.back_edges {
            let body = natural_loop(mcfg, latch, header);
            if let Terminator::Branch { on_true, on_false, branch, .. } = &mcfg.blocks[header].term {
                let outcome = match (body.contains(on_true), body.contains(on_false)) {
                    (true, false) => Some(true),
                    (false, true) => Some(false),
                    _ => None,
                };
                if outcome.is_some() {
                    branches[*branch].loop_outcome = outcome;
                }
            }
        }
    }

    Cfg { methods, class_offsets, branches, lines, block_owner, expr_site }
}

pub(crate) fn simple_exprs(s: &SimpleStmt) -> Vec<&Expr> {
    match s {
        SimpleStmt::Init { value, .. } => value.iter().collect(),
        SimpleStmt::Assign { place, value } => {
            let mut v = match place {
                Place::Local(_) => vec![],
                Place::Field { obj, .. } => vec![obj],
                Place::Index { array, index } => vec![array, index],
            };
            v.push(value);
            v
        }
        SimpleStmt::Eval(e) => vec![e],
    }
}

/// Edges `u -> v` where `v` is on the depth-first stack when `u` is visited.
fn find_back_edges(m: &MethodCfg) -> Vec<(usize, usize)> {
    let n = m.blocks.len();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    state[0] = 1;
    while let Some(&mut (node, ref mut next)) = stack.last_mut() {
        let succ = m.blocks[node].successors();
        if *next < succ.len() {
            let s = succ[*next];
            *next += 1;
            match state[s] {
                0 => {
                    state[s] = 1;
                    stack.push((s, 0));
                }
                1 => out.push((node, s)),
                _ => {}
            }
        } else {
            state[node] = 2;
            stack.pop();
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn natural_loop(m: &MethodCfg, latch: usize, header: usize) -> BTreeSet<usize> {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m.blocks.len()];
    for (i, b) in m.blocks.iter().enumerate() {
        for s in b.successors() {
            preds[s].push(i);
        }
    }
    let mut body = BTreeSet::from([header]);
    let mut work = vec![latch];
    while let Some(n) = work.pop() {
        if body.insert(n) {
            work.extend(preds[n].iter().copied());
        }
    }
    body
}

struct Lowering {
    blocks: Vec<(Vec<CfgStmt>, Option<Terminator>)>,
    cur: usize,
}

impl Lowering {
    fn new_block(&mut self) -> usize {
        self.blocks.push((Vec::new(), None));
        self.blocks.len() - 1
    }

    fn push(&mut self, kind: SimpleStmt, line: u32) {
        self.blocks[self.cur].0.push(CfgStmt { kind, line, line_slot: 0 });
    }

    fn terminate(&mut self, t: Terminator) {
        if self.blocks[self.cur].1.is_none() {
            self.blocks[self.cur].1 = Some(t);
        }
    }

    fn branch(&mut self, cond: &Expr, on_true: usize, on_false: usize) {
        self.terminate(Terminator::Branch {
            cond: cond.clone(),
            on_true,
            on_false,
            branch: 0,
            line: cond.line,
            line_slot: 0,
        });
    }

    fn simple(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Var { slot, init } => self.push(SimpleStmt::Init { slot: *slot, value: init.clone() }, s.line),
            StmtKind::Assign { place, value } => {
                self.push(SimpleStmt::Assign { place: place.clone(), value: value.clone() }, s.line)
            }
            StmtKind::Call(e) => self.push(SimpleStmt::Eval(e.clone()), s.line),
            _ => unreachable!("compound statement in simple position"),
        }
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            match &s.kind {
                StmtKind::Var { .. } | StmtKind::Assign { .. } | StmtKind::Call(_) => self.simple(s),
                StmtKind::Return(v) => {
                    self.terminate(Terminator::Return { value: v.clone(), line: Some((s.line, 0)) });
                    self.cur = self.new_block();
                }
                StmtKind::If { cond, then_body, else_body } => {
                    let then_b = self.new_block();
                    let else_b = else_body.as_ref().map(|_| self.new_block());
                    let join = self.new_block();
                    self.branch(&Expr { line: s.line, ..cond.clone() }, then_b, else_b.unwrap_or(join));
                    self.cur = then_b;
                    self.stmts(then_body);
                    self.terminate(Terminator::Goto(join));
                    if let (Some(eb), Some(body)) = (else_b, else_body) {
                        self.cur = eb;
                        self.stmts(body);
                        self.terminate(Terminator::Goto(join));
                    }
                    self.cur = join;
                }
                StmtKind::While { cond, body } => {
                    let header = self.new_block();
                    self.terminate(Terminator::Goto(header));
                    let body_b = self.new_block();
                    let exit = self.new_block();
                    self.cur = header;
                    self.branch(&Expr { line: s.line, ..cond.clone() }, body_b, exit);
                    self.cur = body_b;
                    self.stmts(body);
                    self.terminate(Terminator::Goto(header));
                    self.cur = exit;
                }
                StmtKind::For { init, cond, step, body } => {
                    if let Some(i) = init {
                        self.simple(i);
                    }
                    let header = self.new_block();
                    self.terminate(Terminator::Goto(header));
                    let body_b = self.new_block();
                    let exit = self.new_block();
                    self.cur = header;
                    match cond {
                        Some(c) => self.branch(&Expr { line: s.line, ..c.clone() }, body_b, exit),
                        None => self.terminate(Terminator::Goto(body_b)),
                    }
                    self.cur = body_b;
                    self.stmts(body);
                    if let Some(st) = step {
                        if self.blocks[self.cur].1.is_none() {
                            self.simple(st);
                        }
                    }
                    self.terminate(Terminator::Goto(header));
                    self.cur = exit;
                }
            }
        }
    }
}

fn lower_method(id: MethodId, m: &MethodDef) -> MethodCfg {
    let mut l = Lowering { blocks: vec![(Vec::new(), None)], cur: 0 };
    l.stmts(&m.body);
    l.terminate(Terminator::Return { value: None, line: None });

    // Drop blocks unreachable from the entry and renumber in creation order.
    let n = l.blocks.len();
    let succ = |t: &Option<Terminator>| -> Vec<usize> {
        match t {
            Some(Terminator::Goto(b)) => vec![*b],
            Some(Terminator::Branch { on_true, on_false, .. }) => vec![*on_true, *on_false],
            _ => vec![],
        }
    };
    let mut reachable = vec![false; n];
    let mut work = vec![0usize];
    while let Some(b) = work.pop() {
        if !std::mem::replace(&mut reachable[b], true) {
            work.extend(succ(&l.blocks[b].1));
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for (i, r) in reachable.iter().enumerate() {
        if *r {
            remap[i] = next;
            next += 1;
        }
    }
    let blocks = l
        .blocks
        .into_iter()
        .enumerate()
        .filter(|(i, _)| reachable[*i])
        .map(|(_, (stmts, term))| {
            let term = match term.expect("every block is terminated") {
                Terminator::Goto(b) => Terminator::Goto(remap[b]),
                Terminator::Branch { cond, on_true, on_false, branch, line, line_slot } => Terminator::Branch {
                    cond,
                    on_true: remap[on_true],
                    on_false: remap[on_false],
                    branch,
                    line,
                    line_slot,
                },
                r => r,
            };
            Block { stmts, term }
        })
        .collect();
    MethodCfg { method: id, blocks, offset: 0, back_edges: Vec::new(), local_count: m.locals.len() }
}
