use crate::mutation::{Change, VarRef};
use crate::program::ast::*;
use crate::program::cfg::{edge_id, SimpleStmt, Terminator};
use crate::subject::Subject;
use crate::testcase::{Arg, Literal, Statement, TestCase};

use super::distance::{comparison_distances, finish, K};
use super::observe::{Observation, Observations};
use super::{CostSample, ExecOptions, ExecutionTrace, Fault, FaultKind, Value};

/// Why execution stopped early.
enum Stop {
    Fault(FaultKind, u32),
    Budget,
}

type Exec<T> = Result<T, Stop>;

struct Object {
    class: ClassId,
    fields: Vec<Value>,
}

#[derive(Clone, Copy)]
struct Frame {
    this: Value,
    base: usize,
}

pub(super) struct Machine<'a> {
    subject: &'a Subject,
    program: &'a MiniProgram,
    options: &'a ExecOptions,
    objects: Vec<Object>,
    arrays: Vec<Vec<i64>>,
    stack: Vec<Value>,
    depth: u32,
    steps: u64,
    weak: bool,
    trace: ExecutionTrace,
}

fn fault<T>(kind: FaultKind, line: u32) -> Exec<T> {
    Err(Stop::Fault(kind, line))
}

fn default_value(ty: Type) -> Value {
    match ty {
        Type::Int => Value::Int(0),
        Type::Float => Value::Float(0.0),
        Type::Bool => Value::Bool(false),
        Type::Void => Value::Void,
        _ => Value::Null,
    }
}

fn coerce(ty: Type, v: Value) -> Value {
    match (ty, v) {
        (Type::Float, Value::Int(i)) => Value::Float(i as f64),
        _ => v,
    }
}

fn literal_value(l: &Literal) -> Value {
    match *l {
        Literal::Int(i) => Value::Int(i),
        Literal::Float(f) => Value::Float(f),
        Literal::Bool(b) => Value::Bool(b),
        Literal::Null => Value::Null,
    }
}

fn as_f64(v: Value) -> f64 {
    match v {
        Value::Int(i) => i as f64,
        Value::Float(f) => f,
        _ => f64::NAN,
    }
}

/// Applies a non-short-circuit binary operator.
fn binary(op: BinOp, l: Value, r: Value, line: u32) -> Exec<Value> {
    use BinOp::*;
    Ok(match (l, r) {
        (Value::Int(a), Value::Int(b)) => match op {
            Add => Value::Int(a.wrapping_add(b)),
            Sub => Value::Int(a.wrapping_sub(b)),
            Mul => Value::Int(a.wrapping_mul(b)),
            Div | Rem if b == 0 => return fault(FaultKind::DivisionByZero, line),
            Div => Value::Int(a.wrapping_div(b)),
            Rem => Value::Int(a.wrapping_rem(b)),
            BitAnd => Value::Int(a & b),
            BitOr => Value::Int(a | b),
            BitXor => Value::Int(a ^ b),
            Shl => Value::Int(a.wrapping_shl((b & 63) as u32)),
            Shr => Value::Int(a.wrapping_shr((b & 63) as u32)),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            Ge => Value::Bool(a >= b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            And | Or => Value::Bool(false),
        },
        (Value::Int(_) | Value::Float(_), Value::Int(_) | Value::Float(_)) => {
            let (a, b) = (as_f64(l), as_f64(r));
            match op {
                Add => Value::Float(a + b),
                Sub => Value::Float(a - b),
                Mul => Value::Float(a * b),
                Div | Rem if b == 0.0 => return fault(FaultKind::DivisionByZero, line),
                Div => Value::Float(a / b),
                Rem => Value::Float(a % b),
                Lt => Value::Bool(a < b),
                Le => Value::Bool(a <= b),
                Gt => Value::Bool(a > b),
                Ge => Value::Bool(a >= b),
                Eq => Value::Bool(a == b),
                Ne => Value::Bool(a != b),
                _ => Value::Bool(false),
            }
        }
        (Value::Bool(a), Value::Bool(b)) => match op {
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            And => Value::Bool(a && b),
            Or => Value::Bool(a || b),
            _ => Value::Bool(false),
        },
        (a, b) => match op {
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            _ => Value::Bool(false),
        },
    })
}

fn same_result(a: &Exec<Value>, b: &Exec<Value>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.same(y),
        (Err(Stop::Fault(x, _)), Err(Stop::Fault(y, _))) => x == y,
        (Err(Stop::Budget), Err(Stop::Budget)) => true,
        _ => false,
    }
}

impl<'a> Machine<'a> {
    pub(super) fn new(subject: &'a Subject, options: &'a ExecOptions) -> Self {
        let cfg = &subject.cfg;
        let weak = options.weak && !subject.mutants.is_empty();
        Machine {
            subject,
            program: &subject.program,
            options,
            objects: Vec::new(),
            arrays: Vec::new(),
            stack: Vec::with_capacity(64),
            depth: 0,
            steps: 0,
            weak,
            trace: ExecutionTrace {
                edge_frequency: vec![0; cfg.branches.len() * 2],
                edge_distance: vec![f64::INFINITY; cfg.branches.len() * 2],
                block_hits: vec![0; cfg.block_count()],
                line_hits: vec![0; cfg.lines.len()],
                method_calls: vec![0; cfg.methods.len()],
                instantiations: vec![0; subject.site_count()],
                statements_executed: 0,
                cost: CostSample::default(),
                fault: None,
                budget_exhausted: false,
                test_statements_run: 0,
                infected: if weak { vec![false; subject.mutants.len()] } else { Vec::new() },
                observations: options.observe.then(Observations::default),
            },
        }
    }

    pub(super) fn run(mut self, test: &TestCase) -> ExecutionTrace {
        let mut vars: Vec<Value> = Vec::with_capacity(test.statements.len());
        for (i, st) in test.statements.iter().enumerate() {
            let r = self.test_statement(st, &vars);
            self.trace.test_statements_run = i + 1;
            match r {
                Ok(v) => {
                    if self.trace.observations.is_some() {
                        let obs = match st {
                            Statement::Construct { .. } | Statement::Call { .. } => self.observe(v, true),
                            _ => Observation::Void,
                        };
                        self.trace.observations.as_mut().unwrap().values.push(obs);
                    }
                    vars.push(v);
                }
                Err(Stop::Fault(kind, line)) => {
                    self.trace.fault = Some(Fault { kind, line, statement: i });
                    break;
                }
                Err(Stop::Budget) => {
                    self.trace.budget_exhausted = true;
                    break;
                }
            }
        }
        if self.trace.observations.is_some() {
            let finals: Vec<Observation> = vars
                .iter()
                .filter(|v| matches!(v, Value::Obj(_) | Value::Arr(_)))
                .map(|&v| self.observe(v, true))
                .collect();
            let fault = self.trace.fault.map(|f| f.kind);
            let obs = self.trace.observations.as_mut().unwrap();
            obs.final_state = finals;
            obs.fault = fault;
        }
        self.trace.cost.steps = self.steps;
        self.trace
    }

    fn observe(&self, v: Value, deep: bool) -> Observation {
        match v {
            Value::Void => Observation::Void,
            Value::Int(i) => Observation::Int(i),
            Value::Float(f) => Observation::Float(f.to_bits()),
            Value::Bool(b) => Observation::Bool(b),
            Value::Null => Observation::Null,
            Value::Obj(h) => {
                let o = &self.objects[h as usize];
                if deep {
                    Observation::Object { class: o.class, fields: o.fields.iter().map(|&f| self.observe(f, false)).collect() }
                } else {
                    Observation::ObjectRef(o.class)
                }
            }
            Value::Arr(h) => {
                let a = &self.arrays[h as usize];
                if deep {
                    Observation::Array(a.clone())
                } else {
                    Observation::ArrayRef(a.len())
                }
            }
        }
    }

    #[inline]
    fn tick(&mut self) -> Exec<()> {
        if self.steps >= self.options.limits.max_steps {
            return Err(Stop::Budget);
        }
        self.steps += 1;
        Ok(())
    }

    #[inline]
    fn production_step(&mut self, line_slot: usize) -> Exec<()> {
        self.tick()?;
        self.trace.statements_executed += 1;
        self.trace.line_hits[line_slot] += 1;
        Ok(())
    }

    fn charge_alloc(&mut self, units: u64, site: usize) -> Exec<()> {
        if self.trace.cost.alloc_units + units > self.options.limits.max_alloc {
            return Err(Stop::Budget);
        }
        self.trace.cost.alloc_units += units;
        self.trace.instantiations[site] += 1;
        Ok(())
    }

    fn arg_value(&self, a: &Arg, vars: &[Value]) -> Value {
        match a {
            Arg::Lit(l) => literal_value(l),
            Arg::Var(i) => vars.get(*i).copied().unwrap_or(Value::Null),
        }
    }

    fn test_statement(&mut self, st: &Statement, vars: &[Value]) -> Exec<Value> {
        self.tick()?;
        match st {
            Statement::Primitive(l) => Ok(literal_value(l)),
            Statement::ArrayCreate { elements } => {
                let site = self.subject.test_array_site();
                self.charge_alloc(elements.len() as u64, site)?;
                self.arrays.push(elements.clone());
                Ok(Value::Arr(self.arrays.len() as u32 - 1))
            }
            Statement::Construct { class, ctor, args } => {
                let args: Vec<Value> = args.iter().map(|a| self.arg_value(a, vars)).collect();
                let site = self.subject.test_construct_site(*class);
                self.instantiate(*class, *ctor, &args, site, 0)
            }
            Statement::Call { receiver, method, args } => {
                let recv = vars.get(*receiver).copied().unwrap_or(Value::Null);
                let Value::Obj(h) = recv else { return fault(FaultKind::NullDereference, 0) };
                let class = self.objects[h as usize].class;
                let args: Vec<Value> = args.iter().map(|a| self.arg_value(a, vars)).collect();
                self.invoke(MethodId { class, index: *method }, recv, &args, 0)
            }
        }
    }

    fn instantiate(&mut self, class: ClassId, ctor: Option<usize>, args: &[Value], site: usize, line: u32) -> Exec<Value> {
        let def = &self.program.classes[class];
        self.charge_alloc(1 + def.fields.len() as u64, site)?;
        let fields = def.fields.iter().map(|f| default_value(f.ty)).collect();
        self.objects.push(Object { class, fields });
        let this = Value::Obj(self.objects.len() as u32 - 1);
        if let Some(index) = ctor {
            self.invoke(MethodId { class, index }, this, args, line)?;
        }
        Ok(this)
    }

    fn invoke(&mut self, id: MethodId, this: Value, args: &[Value], line: u32) -> Exec<Value> {
        if self.depth >= self.options.limits.max_depth {
            return fault(FaultKind::StackOverflow, line);
        }
        let cfg = &self.subject.cfg;
        let gm = cfg.method_index(id);
        self.trace.method_calls[gm] += 1;
        let def = self.program.method(id);
        let base = self.stack.len();
        for (i, local) in def.locals.iter().enumerate() {
            let v = if i < def.param_count { coerce(local.ty, args[i]) } else { default_value(local.ty) };
            self.stack.push(v);
        }
        self.depth += 1;
        let r = self.run_method(gm, Frame { this, base }, def.ret);
        self.depth -= 1;
        self.stack.truncate(base);
        r
    }

    fn run_method(&mut self, gm: usize, fr: Frame, ret: Type) -> Exec<Value> {
        let mcfg = &self.subject.cfg.methods[gm];
        let mut cur = 0usize;
        loop {
            let block = &mcfg.blocks[cur];
            self.trace.block_hits[mcfg.offset + cur] += 1;
            for s in &block.stmts {
                self.production_step(s.line_slot)?;
                self.simple(&s.kind, fr, gm, s.line)?;
            }
            match &block.term {
                Terminator::Goto(t) => cur = *t,
                Terminator::Branch { cond, on_true, on_false, branch, line_slot, .. } => {
                    self.production_step(*line_slot)?;
                    let (v, dt, df) = self.cond(cond, fr)?;
                    let (et, ef) = (edge_id(*branch, true), edge_id(*branch, false));
                    let d = &mut self.trace.edge_distance;
                    d[et] = d[et].min(dt);
                    d[ef] = d[ef].min(df);
                    self.trace.edge_frequency[if v { et } else { ef }] += 1;
                    cur = if v { *on_true } else { *on_false };
                }
                Terminator::Return { value, line } => {
                    if let Some((_, slot)) = line {
                        self.production_step(*slot)?;
                    }
                    return match value {
                        Some(e) => Ok(coerce(ret, self.eval(e, fr)?)),
                        None => Ok(default_value(ret)),
                    };
                }
            }
        }
    }

    fn simple(&mut self, s: &SimpleStmt, fr: Frame, gm: usize, line: u32) -> Exec<()> {
        match s {
            SimpleStmt::Init { slot, value } => {
                let def = self.program.method(self.subject.cfg.methods[gm].method);
                let ty = def.locals[*slot].ty;
                let v = match value {
                    Some(e) => coerce(ty, self.eval(e, fr)?),
                    None => default_value(ty),
                };
                self.stack[fr.base + slot] = v;
            }
            SimpleStmt::Assign { place, value } => match place {
                Place::Local(slot) => {
                    let def = self.program.method(self.subject.cfg.methods[gm].method);
                    let ty = def.locals[*slot].ty;
                    let v = coerce(ty, self.eval(value, fr)?);
                    self.stack[fr.base + slot] = v;
                }
                Place::Field { obj, class, field } => {
                    let o = self.eval(obj, fr)?;
                    let v = self.eval(value, fr)?;
                    let Value::Obj(h) = o else { return fault(FaultKind::NullDereference, line) };
                    let ty = self.program.classes[*class].fields[*field].ty;
                    self.objects[h as usize].fields[*field] = coerce(ty, v);
                }
                Place::Index { array, index } => {
                    let a = self.eval(array, fr)?;
                    let i = self.eval(index, fr)?;
                    let v = self.eval(value, fr)?;
                    let Value::Arr(h) = a else { return fault(FaultKind::NullDereference, line) };
                    let (Value::Int(i), Value::Int(v)) = (i, v) else { unreachable!("ill-typed array store") };
                    let arr = &mut self.arrays[h as usize];
                    if i < 0 || i as usize >= arr.len() {
                        return fault(FaultKind::IndexOutOfBounds, line);
                    }
                    arr[i as usize] = v;
                }
            },
            SimpleStmt::Eval(e) => {
                self.eval(e, fr)?;
            }
        }
        Ok(())
    }

    /// Evaluates a branch condition: `(value, distance to true, distance to false)`.
    fn cond(&mut self, e: &Expr, fr: Frame) -> Exec<(bool, f64, f64)> {
        match &e.kind {
            ExprKind::Unary { op: UnOp::Not, operand } => {
                let (v, t, f) = self.cond(operand, fr)?;
                Ok((!v, f, t))
            }
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => {
                let (a, at, af) = self.cond(lhs, fr)?;
                if !a {
                    return Ok((false, at + K, 0.0));
                }
                let (b, bt, bf) = self.cond(rhs, fr)?;
                let (t, f) = finish(at + bt, af.min(bf), b);
                Ok((b, t, f))
            }
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => {
                let (a, at, af) = self.cond(lhs, fr)?;
                if a {
                    return Ok((true, 0.0, af + K));
                }
                let (b, bt, bf) = self.cond(rhs, fr)?;
                let (t, f) = finish(at.min(bt), af + bf, b);
                Ok((b, t, f))
            }
            ExprKind::Binary { op, lhs, rhs } if op.is_comparison() => {
                let l = self.eval(lhs, fr)?;
                let r = self.eval(rhs, fr)?;
                let res = binary(*op, l, r, e.line);
                if self.weak {
                    self.infect_binary(e, *op, l, r, &res);
                }
                let Value::Bool(v) = res? else { unreachable!("comparison yields bool") };
                let (t, f) = comparison_distances(*op, l, r, v);
                Ok((v, t, f))
            }
            _ => {
                let Value::Bool(v) = self.eval(e, fr)? else { unreachable!("condition is bool") };
                let (t, f) = finish(K, K, v);
                Ok((v, t, f))
            }
        }
    }

    #[inline]
    fn eval(&mut self, e: &Expr, fr: Frame) -> Exec<Value> {
        if self.weak && !self.subject.hooks.at(e.id).is_empty() {
            return self.eval_hooked(e, fr);
        }
        self.eval_plain(e, fr)
    }

    fn eval_plain(&mut self, e: &Expr, fr: Frame) -> Exec<Value> {
        match &e.kind {
            ExprKind::Int(i) => Ok(Value::Int(*i)),
            ExprKind::Float(f) => Ok(Value::Float(*f)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Null => Ok(Value::Null),
            ExprKind::Local(slot) => Ok(self.stack[fr.base + slot]),
            ExprKind::This => Ok(fr.this),
            ExprKind::Field { obj, field, .. } => {
                let o = self.eval(obj, fr)?;
                self.read_field(o, *field, e.line)
            }
            ExprKind::Index { array, index } => {
                let a = self.eval(array, fr)?;
                let i = self.eval(index, fr)?;
                let Value::Arr(h) = a else { return fault(FaultKind::NullDereference, e.line) };
                let Value::Int(i) = i else { unreachable!("ill-typed index") };
                let arr = &self.arrays[h as usize];
                if i < 0 || i as usize >= arr.len() {
                    return fault(FaultKind::IndexOutOfBounds, e.line);
                }
                Ok(Value::Int(arr[i as usize]))
            }
            ExprKind::Length(a) => match self.eval(a, fr)? {
                Value::Arr(h) => Ok(Value::Int(self.arrays[h as usize].len() as i64)),
                _ => fault(FaultKind::NullDereference, e.line),
            },
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand, fr)?;
                Ok(match (op, v) {
                    (UnOp::Neg, Value::Int(i)) => Value::Int(i.wrapping_neg()),
                    (UnOp::Neg, Value::Float(f)) => Value::Float(-f),
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnOp::BitNot, Value::Int(i)) => Value::Int(!i),
                    _ => unreachable!("ill-typed unary operand"),
                })
            }
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => {
                if self.eval(lhs, fr)? == Value::Bool(false) {
                    return Ok(Value::Bool(false));
                }
                self.eval(rhs, fr)
            }
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => {
                if self.eval(lhs, fr)? == Value::Bool(true) {
                    return Ok(Value::Bool(true));
                }
                self.eval(rhs, fr)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, fr)?;
                let r = self.eval(rhs, fr)?;
                binary(*op, l, r, e.line)
            }
            ExprKind::Call { receiver, method, args } => {
                let recv = self.eval(receiver, fr)?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, fr)?);
                }
                if !matches!(recv, Value::Obj(_)) {
                    return fault(FaultKind::NullDereference, e.line);
                }
                self.invoke(*method, recv, &vals, e.line)
            }
            ExprKind::New { class, ctor, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, fr)?);
                }
                let site = self.subject.alloc_site[e.id as usize] as usize;
                self.instantiate(*class, *ctor, &vals, site, e.line)
            }
            ExprKind::NewArray(len) => {
                let Value::Int(n) = self.eval(len, fr)? else { unreachable!("ill-typed array length") };
                if n < 0 {
                    return fault(FaultKind::NegativeArraySize, e.line);
                }
                let site = self.subject.alloc_site[e.id as usize] as usize;
                self.charge_alloc(n as u64, site)?;
                self.arrays.push(vec![0; n as usize]);
                Ok(Value::Arr(self.arrays.len() as u32 - 1))
            }
        }
    }

    fn read_field(&self, o: Value, field: usize, line: u32) -> Exec<Value> {
        match o {
            Value::Obj(h) => Ok(self.objects[h as usize].fields[field]),
            _ => fault(FaultKind::NullDereference, line),
        }
    }

    fn infect(&mut self, mutant: u32) {
        self.trace.infected[mutant as usize] = true;
    }

    fn infect_binary(&mut self, e: &Expr, op: BinOp, l: Value, r: Value, res: &Exec<Value>) {
        let hooks = self.subject.hooks.at(e.id);
        for &m in hooks {
            if let Change::Operator(alt) = self.subject.mutants[m as usize].change {
                if alt != op && !same_result(res, &binary(alt, l, r, e.line)) {
                    self.infect(m);
                }
            }
        }
    }

    /// Evaluation with infection checks for the mutants at this expression.
    fn eval_hooked(&mut self, e: &Expr, fr: Frame) -> Exec<Value> {
        let subject = self.subject;
        let hooks = subject.hooks.at(e.id);
        for &m in hooks {
            match subject.mutants[m as usize].change {
                // A removed call or a replaced constant differs as soon as it is reached.
                Change::CallRemoved | Change::IntConstant(_) | Change::FloatConstant(_) => self.infect(m),
                _ => {}
            }
        }
        let res = match &e.kind {
            ExprKind::Binary { op, lhs, rhs } if !matches!(op, BinOp::And | BinOp::Or) => {
                let l = self.eval(lhs, fr)?;
                let r = self.eval(rhs, fr)?;
                let res = binary(*op, l, r, e.line);
                self.infect_binary(e, *op, l, r, &res);
                return res;
            }
            ExprKind::Field { obj, field, .. } => {
                let o = match self.eval(obj, fr) {
                    Ok(o) => o,
                    Err(stop) => {
                        // Without the read the object expression is never evaluated.
                        for &m in hooks {
                            if subject.mutants[m as usize].change == Change::FieldDefault {
                                self.infect(m);
                            }
                        }
                        return Err(stop);
                    }
                };
                self.read_field(o, *field, e.line)
            }
            _ => self.eval_plain(e, fr),
        };
        if let Err(Stop::Budget) = res {
            return res;
        }
        for &m in hooks {
            let alt: Exec<Value> = match subject.mutants[m as usize].change {
                Change::Negate => match &res {
                    Ok(Value::Int(i)) => Ok(Value::Int(i.wrapping_neg())),
                    Ok(Value::Float(f)) => Ok(Value::Float(-f)),
                    _ => continue,
                },
                Change::Variable(VarRef::Local(slot)) => Ok(self.stack[fr.base + slot]),
                Change::Variable(VarRef::Field(f)) => self.read_field(fr.this, f, e.line),
                Change::FieldDefault => Ok(default_value(e.ty)),
                _ => continue,
            };
            if !same_result(&res, &alt) {
                self.infect(m);
            }
        }
        res
    }
}
