//! Mutant generation for the class under test, plus weak and strong analysis.

mod strong;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::program::ast::*;
use crate::program::binary_type;

pub use strong::{kill_matrix, kill_table, strong_mutation_score, KillTable, KillVerdict, MutationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationOperator {
    DeleteCall,
    DeleteField,
    InsertUnaryOperator,
    ReplaceArithmeticOperator,
    ReplaceBitwiseOperator,
    ReplaceComparisonOperator,
    ReplaceConstant,
    ReplaceVariable,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 8] = [
        MutationOperator::DeleteCall,
        MutationOperator::DeleteField,
        MutationOperator::InsertUnaryOperator,
        MutationOperator::ReplaceArithmeticOperator,
        MutationOperator::ReplaceBitwiseOperator,
        MutationOperator::ReplaceComparisonOperator,
        MutationOperator::ReplaceConstant,
        MutationOperator::ReplaceVariable,
    ];
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A variable a read can be redirected to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarRef {
    Local(usize),
    /// Field of `this`.
    Field(usize),
}

/// The single change a mutant makes at its site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Change {
    Operator(BinOp),
    IntConstant(i64),
    FloatConstant(f64),
    Negate,
    Variable(VarRef),
    /// Field read replaced by the default value of its type.
    FieldDefault,
    /// Call removed: dropped as a statement, otherwise replaced by a default value.
    CallRemoved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    /// `mNNNN`, in enumeration order.
    pub id: String,
    pub operator: MutationOperator,
    pub method: MethodId,
    /// Expression the change applies to.
    pub site: ExprId,
    pub line: u32,
    pub change: Change,
    pub description: String,
}

/// Enumerates mutants of every method of the CUT in a fixed order.
pub fn generate_mutants(program: &MiniProgram) -> Vec<Mutant> {
    let mut gen = Generator { program, out: Vec::new(), method: MethodId { class: program.cut, index: 0 }, scope: Vec::new() };
    for (index, m) in program.cut_class().methods.iter().enumerate() {
        gen.method = MethodId { class: program.cut, index };
        gen.scope = (0..m.param_count).collect();
        gen.stmts(m, &m.body);
    }
    gen.out
}

struct Generator<'a> {
    program: &'a MiniProgram,
    out: Vec<Mutant>,
    method: MethodId,
    /// Local slots visible at the current point.
    scope: Vec<usize>,
}

impl Generator<'_> {
    fn push(&mut self, op: MutationOperator, e: &Expr, change: Change, description: String) {
        let id = format!("m{:04}", self.out.len());
        self.out.push(Mutant { id, operator: op, method: self.method, site: e.id, line: e.line, change, description });
    }

    fn stmts(&mut self, m: &MethodDef, stmts: &[Stmt]) {
        let mark = self.scope.len();
        for s in stmts {
            self.stmt(m, s);
        }
        self.scope.truncate(mark);
    }

    fn stmt(&mut self, m: &MethodDef, s: &Stmt) {
        match &s.kind {
            StmtKind::Var { slot, init } => {
                if let Some(e) = init {
                    self.expr(m, e);
                }
                self.scope.push(*slot);
            }
            StmtKind::If { cond, then_body, else_body } => {
                self.expr(m, cond);
                self.stmts(m, then_body);
                if let Some(e) = else_body {
                    self.stmts(m, e);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(m, cond);
                self.stmts(m, body);
            }
            StmtKind::For { init, cond, step, body } => {
                let mark = self.scope.len();
                if let Some(i) = init {
                    self.stmt(m, i);
                }
                if let Some(c) = cond {
                    self.expr(m, c);
                }
                self.stmts(m, body);
                if let Some(st) = step {
                    self.stmt(m, st);
                }
                self.scope.truncate(mark);
            }
            _ => {
                for e in s.exprs() {
                    self.expr(m, e);
                }
            }
        }
    }

    fn expr(&mut self, m: &MethodDef, e: &Expr) {
        use MutationOperator::*;
        match &e.kind {
            ExprKind::Int(c) => {
                let mut seen = vec![*c];
                for v in [0, c.wrapping_add(1), c.wrapping_neg()] {
                    if !seen.contains(&v) {
                        seen.push(v);
                        self.push(ReplaceConstant, e, Change::IntConstant(v), format!("{c} -> {v}"));
                    }
                }
            }
            ExprKind::Float(c) => {
                let mut seen = vec![c.to_bits()];
                for v in [0.0, c + 1.0, -c] {
                    if !seen.contains(&v.to_bits()) {
                        seen.push(v.to_bits());
                        self.push(ReplaceConstant, e, Change::FloatConstant(v), format!("{c:?} -> {v:?}"));
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let (group, operator) = if op.is_arithmetic() {
                    (&BinOp::ARITHMETIC[..], ReplaceArithmeticOperator)
                } else if op.is_bitwise() {
                    (&BinOp::BITWISE[..], ReplaceBitwiseOperator)
                } else if op.is_comparison() {
                    (&BinOp::COMPARISON[..], ReplaceComparisonOperator)
                } else {
                    (&[][..], ReplaceComparisonOperator)
                };
                for &alt in group {
                    if alt != *op && binary_type(alt, lhs.ty, rhs.ty) == Some(e.ty) {
                        self.push(operator, e, Change::Operator(alt), format!("{op} -> {alt}"));
                    }
                }
            }
            ExprKind::Local(slot) => {
                self.negation(e);
                for &other in &self.scope.clone() {
                    if other != *slot && m.locals[other].ty == e.ty {
                        let d = format!("{} -> {}", m.locals[*slot].name, m.locals[other].name);
                        self.push(ReplaceVariable, e, Change::Variable(VarRef::Local(other)), d);
                    }
                }
                self.field_swaps(e, &m.locals[*slot].name, None);
            }
            ExprKind::Field { obj, class, field } => {
                self.negation(e);
                let fname = &self.program.classes[*class].fields[*field].name;
                if matches!(obj.kind, ExprKind::This) && *class == self.program.cut {
                    for &other in &self.scope.clone() {
                        if m.locals[other].ty == e.ty {
                            let d = format!("this.{fname} -> {}", m.locals[other].name);
                            self.push(ReplaceVariable, e, Change::Variable(VarRef::Local(other)), d);
                        }
                    }
                    self.field_swaps(e, &format!("this.{fname}"), Some(*field));
                }
                if obj.is_pure() {
                    self.push(DeleteField, e, Change::FieldDefault, format!("delete read of {fname}"));
                }
            }
            ExprKind::Index { .. } => self.negation(e),
            ExprKind::Call { method, .. } => {
                let name = self.program.qualified_name(*method);
                self.push(DeleteCall, e, Change::CallRemoved, format!("delete call to {name}"));
            }
            _ => {}
        }
        // Children after the node itself, in evaluation order.
        match &e.kind {
            ExprKind::Field { obj, .. } => self.expr(m, obj),
            ExprKind::Index { array, index } => {
                self.expr(m, array);
                self.expr(m, index);
            }
            ExprKind::Length(x) | ExprKind::NewArray(x) => self.expr(m, x),
            ExprKind::Unary { operand, .. } => self.expr(m, operand),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(m, lhs);
                self.expr(m, rhs);
            }
            ExprKind::Call { receiver, args, .. } => {
                self.expr(m, receiver);
                args.iter().for_each(|a| self.expr(m, a));
            }
            ExprKind::New { args, .. } => args.iter().for_each(|a| self.expr(m, a)),
            _ => {}
        }
    }

    fn negation(&mut self, e: &Expr) {
        if e.ty.is_numeric() {
            self.push(MutationOperator::InsertUnaryOperator, e, Change::Negate, "negate read".into());
        }
    }

    fn field_swaps(&mut self, e: &Expr, from: &str, except: Option<usize>) {
        let cut = self.program.cut_class();
        for (fi, f) in cut.fields.iter().enumerate() {
            if Some(fi) != except && f.ty == e.ty {
                let d = format!("{from} -> this.{}", f.name);
                self.push(MutationOperator::ReplaceVariable, e, Change::Variable(VarRef::Field(fi)), d);
            }
        }
    }
}

pub(crate) fn default_expr_kind(ty: Type) -> ExprKind {
    match ty {
        Type::Int => ExprKind::Int(0),
        Type::Float => ExprKind::Float(0.0),
        Type::Bool => ExprKind::Bool(false),
        _ => ExprKind::Null,
    }
}

/// The program with `mutant` applied. Expression ids are preserved.
pub fn apply_mutant(program: &MiniProgram, mutant: &Mutant) -> MiniProgram {
    let mut out = program.clone();
    let cut = program.cut;
    let this_ty = Type::Class(cut);
    let method = &mut out.classes[mutant.method.class].methods[mutant.method.index];
    if mutant.change == Change::CallRemoved && remove_call_stmt(&mut method.body, mutant.site) {
        return out;
    }
    let mut next_id = program.expr_count;
    let mut fresh = |kind: ExprKind, ty: Type, line: u32| {
        next_id += 1;
        Expr { id: next_id - 1, kind, ty, line }
    };
    let mut done = false;
    Stmt::walk_all_mut(&mut method.body, &mut |s| {
        for root in s.exprs_mut() {
            root.walk_mut(&mut |e| {
                if done || e.id != mutant.site {
                    return;
                }
                done = true;
                match mutant.change {
                    Change::Operator(new) => {
                        if let ExprKind::Binary { op, .. } = &mut e.kind {
                            *op = new;
                        }
                    }
                    Change::IntConstant(v) => e.kind = ExprKind::Int(v),
                    Change::FloatConstant(v) => e.kind = ExprKind::Float(v),
                    Change::Negate => {
                        let inner = fresh(e.kind.clone(), e.ty, e.line);
                        e.kind = ExprKind::Unary { op: UnOp::Neg, operand: Box::new(inner) };
                    }
                    Change::Variable(VarRef::Local(slot)) => e.kind = ExprKind::Local(slot),
                    Change::Variable(VarRef::Field(field)) => {
                        let this = fresh(ExprKind::This, this_ty, e.line);
                        e.kind = ExprKind::Field { obj: Box::new(this), class: cut, field };
                    }
                    Change::FieldDefault | Change::CallRemoved => e.kind = default_expr_kind(e.ty),
                }
            });
        }
    });
    out.expr_count = next_id;
    out
}

/// Removes the `call` statement whose expression is `site`, at any depth.
fn remove_call_stmt(stmts: &mut Vec<Stmt>, site: ExprId) -> bool {
    if let Some(i) = stmts.iter().position(|s| matches!(&s.kind, StmtKind::Call(e) if e.id == site)) {
        stmts.remove(i);
        return true;
    }
    stmts.iter_mut().any(|s| match &mut s.kind {
        StmtKind::If { then_body, else_body, .. } => {
            remove_call_stmt(then_body, site) || else_body.as_mut().is_some_and(|e| remove_call_stmt(e, site))
        }
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => remove_call_stmt(body, site),
        _ => false,
    })
}
