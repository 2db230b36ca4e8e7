//! A compiled subject: program, control flow, mutants and instrumentation tables.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::mutation::{apply_mutant, generate_mutants, Mutant};
use crate::program::ast::{ExprKind, Stmt};
use crate::program::{build_cfg, parse_program, Cfg, MiniProgram, ProgramError};

#[derive(Debug, Clone)]
pub struct Subject {
    pub name: String,
    pub program: MiniProgram,
    pub cfg: Cfg,
    pub mutants: Vec<Mutant>,
    /// Expression id -> production instantiation site, `u32::MAX` if none.
    pub(crate) alloc_site: Vec<u32>,
    pub(crate) production_sites: usize,
    pub(crate) hooks: WeakHooks,
    pub constants: ConstantPool,
    compiled: OnceLock<Vec<Subject>>,
}

/// Mutant indices per expression id, as a flat table.
#[derive(Debug, Clone, Default)]
pub(crate) struct WeakHooks {
    start: Vec<u32>,
    list: Vec<u32>,
}

impl WeakHooks {
    fn new(expr_count: u32, mutants: &[Mutant]) -> Self {
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); expr_count as usize];
        for (i, m) in mutants.iter().enumerate() {
            buckets[m.site as usize].push(i as u32);
        }
        let mut start = Vec::with_capacity(buckets.len() + 1);
        let mut list = Vec::new();
        for b in buckets {
            start.push(list.len() as u32);
            list.extend(b);
        }
        start.push(list.len() as u32);
        WeakHooks { start, list }
    }

    #[inline]
    pub(crate) fn at(&self, expr: u32) -> &[u32] {
        match (self.start.get(expr as usize), self.start.get(expr as usize + 1)) {
            (Some(&a), Some(&b)) => &self.list[a as usize..b as usize],
            _ => &[],
        }
    }
}

/// Literals harvested from the CUT for seeding test inputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantPool {
    pub ints: Vec<i64>,
    pub floats: Vec<f64>,
}

impl Subject {
    pub fn from_source(name: &str, source: &str) -> Result<Self, ProgramError> {
        Ok(Subject::new(name, parse_program(source)?))
    }

    pub fn new(name: &str, program: MiniProgram) -> Self {
        let mutants = generate_mutants(&program);
        Subject::with_mutants(name, program, mutants)
    }

    /// A subject without mutants, as used to run a mutated program.
    pub fn bare(name: &str, program: MiniProgram) -> Self {
        Subject::with_mutants(name, program, Vec::new())
    }

    fn with_mutants(name: &str, program: MiniProgram, mutants: Vec<Mutant>) -> Self {
        let cfg = build_cfg(&program);
        let mut alloc_site = vec![u32::MAX; program.expr_count as usize];
        let mut next = 0u32;
        let mut ints = BTreeSet::new();
        let mut floats: Vec<f64> = Vec::new();
        for (ci, class) in program.classes.iter().enumerate() {
            for m in &class.methods {
                Stmt::walk_all(&m.body, &mut |s| {
                    for root in s.exprs() {
                        root.walk(&mut |e| match e.kind {
                            ExprKind::New { .. } | ExprKind::NewArray(_) => {
                                alloc_site[e.id as usize] = next;
                                next += 1;
                            }
                            ExprKind::Int(v) if ci == program.cut => {
                                ints.insert(v);
                            }
                            ExprKind::Float(v) if ci == program.cut && !floats.iter().any(|f| f.to_bits() == v.to_bits()) => {
                                floats.push(v);
                            }
                            _ => {}
                        });
                    }
                });
            }
        }
        let hooks = WeakHooks::new(program.expr_count, &mutants);
        Subject {
            name: name.to_string(),
            production_sites: next as usize,
            alloc_site,
            hooks,
            constants: ConstantPool { ints: ints.into_iter().collect(), floats },
            program,
            cfg,
            mutants,
            compiled: OnceLock::new(),
        }
    }

    /// Every mutant as a runnable subject, built on first use.
    pub fn mutant_programs(&self) -> &[Subject] {
        self.compiled.get_or_init(|| {
            self.mutants
                .iter()
                .map(|m| Subject::bare(&format!("{}#{}", self.name, m.id), apply_mutant(&self.program, m)))
                .collect()
        })
    }

    /// Instantiation sites: production ones, then one per class for test
    /// constructions, then one for test arrays.
    pub fn site_count(&self) -> usize {
        self.production_sites + self.program.classes.len() + 1
    }

    pub(crate) fn test_construct_site(&self, class: usize) -> usize {
        self.production_sites + class
    }

    pub(crate) fn test_array_site(&self) -> usize {
        self.production_sites + self.program.classes.len()
    }
}
