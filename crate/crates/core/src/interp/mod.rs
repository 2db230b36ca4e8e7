//! Instrumented execution of test cases against a subject.

pub mod distance;
mod exec;
mod observe;

use serde::{Deserialize, Serialize};

use crate::program::cfg::Cfg;
use crate::program::{CoverageTarget, TargetLoc};
use crate::subject::Subject;
use crate::testcase::TestCase;

pub use distance::branch_distance;
pub use observe::{Observation, Observations};

/// A runtime value. Objects and arrays are handles into the execution's heap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    Obj(u32),
    Arr(u32),
    Void,
}

impl Value {
    /// Equality with floats compared bit for bit.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    DivisionByZero,
    NullDereference,
    IndexOutOfBounds,
    NegativeArraySize,
    StackOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub kind: FaultKind,
    /// Source line of the faulting production code; 0 for the test itself.
    pub line: u32,
    /// Index of the test statement that was running.
    pub statement: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_depth: u32,
    /// Cap on allocation units, to keep huge arrays out of memory.
    pub max_alloc: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 20_000, max_depth: 200, max_alloc: 1 << 20 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CostSample {
    pub steps: u64,
    pub alloc_units: u64,
}

impl std::ops::Add for CostSample {
    type Output = CostSample;
    fn add(self, o: CostSample) -> CostSample {
        CostSample { steps: self.steps + o.steps, alloc_units: self.alloc_units + o.alloc_units }
    }
}

impl std::iter::Sum for CostSample {
    fn sum<I: Iterator<Item = CostSample>>(iter: I) -> CostSample {
        iter.fold(CostSample::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecOptions {
    pub limits: Limits,
    /// Track weak-mutant infection.
    pub weak: bool,
    /// Record observations for strong mutation.
    pub observe: bool,
}

impl ExecOptions {
    pub fn new(limits: Limits) -> Self {
        ExecOptions { limits, weak: false, observe: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    /// Times each branch edge was taken.
    pub edge_frequency: Vec<u32>,
    /// Smallest raw distance to taking each edge; infinite if its conditional never ran.
    pub edge_distance: Vec<f64>,
    /// Executions of each global block.
    pub block_hits: Vec<u32>,
    /// Executions of each line slot.
    pub line_hits: Vec<u32>,
    /// Invocations of each method and constructor, by global method index.
    pub method_calls: Vec<u32>,
    /// Allocations per instantiation site.
    pub instantiations: Vec<u32>,
    /// Production statements executed, conditions and returns included.
    pub statements_executed: u64,
    pub cost: CostSample,
    pub fault: Option<Fault>,
    pub budget_exhausted: bool,
    /// Test statements that ran (to completion or to the fault).
    pub test_statements_run: usize,
    /// Per-mutant infection; empty unless weak tracking was requested.
    pub infected: Vec<bool>,
    pub observations: Option<Observations>,
}

impl ExecutionTrace {
    pub fn covers(&self, target: &CoverageTarget) -> bool {
        match target.loc {
            TargetLoc::Edge(e) => self.edge_frequency[e] > 0,
            TargetLoc::Line(slot) => self.line_hits[slot] > 0,
            TargetLoc::Method => self.method_calls[target.method] > 0,
            TargetLoc::Mutant(m) => self.infected.get(m).copied().unwrap_or(false),
        }
    }

    /// Proxy counters measured at run time.
    pub fn dynamic_proxies(&self, cfg: &Cfg) -> DynamicProxies {
        let above_one = |f: u32| if f > 1 { u64::from(f) } else { 0 };
        DynamicProxies {
            loop_cycles: cfg.loop_edges().map(|e| above_one(self.edge_frequency[e])).sum(),
            method_calls: self.method_calls.iter().map(|&c| u64::from(c)).sum(),
            instantiations: self.instantiations.iter().map(|&c| above_one(c)).sum(),
            statements: self.statements_executed,
        }
    }
}

/// The run-time proxies: loop cycles, covered method calls, repeated
/// instantiations and covered statements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DynamicProxies {
    pub loop_cycles: u64,
    pub method_calls: u64,
    pub instantiations: u64,
    pub statements: u64,
}

pub fn execute_test(subject: &Subject, test: &TestCase, options: &ExecOptions) -> ExecutionTrace {
    exec::Machine::new(subject, options).run(test)
}

/// Line-oriented dump: `target-id<TAB>frequency<TAB>distance`.
pub fn trace_dump(targets: &[CoverageTarget], trace: &ExecutionTrace) -> String {
    let mut out = String::new();
    for t in targets {
        let (freq, dist) = match t.loc {
            TargetLoc::Edge(e) => (u64::from(trace.edge_frequency[e]), trace.edge_distance[e]),
            TargetLoc::Line(s) => (u64::from(trace.line_hits[s]), if trace.line_hits[s] > 0 { 0.0 } else { f64::INFINITY }),
            TargetLoc::Method => {
                let c = trace.method_calls[t.method];
                (u64::from(c), if c > 0 { 0.0 } else { f64::INFINITY })
            }
            TargetLoc::Mutant(_) => {
                let hit = trace.covers(t);
                (u64::from(hit), if hit { 0.0 } else { f64::INFINITY })
            }
        };
        out.push_str(&format!("{}\t{}\t{}\n", t.id, freq, dist));
    }
    out
}
