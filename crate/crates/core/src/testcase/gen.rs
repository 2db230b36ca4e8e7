use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::program::ast::{MethodKind, MiniProgram, Type};
use crate::subject::Subject;

use super::{var_types, Arg, Literal, Statement, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenomeConfig {
    pub max_len: usize,
    pub insert_prob: f64,
    pub delete_prob: f64,
    /// Each statement changes with probability `change_scale / len`.
    pub change_scale: f64,
    /// Fresh integers are drawn from `-int_range..=int_range`.
    pub int_range: i64,
    /// Chance that an argument reuses a compatible variable rather than a fresh literal.
    pub reuse_prob: f64,
}

impl Default for GenomeConfig {
    fn default() -> Self {
        GenomeConfig { max_len: 30, insert_prob: 0.3, delete_prob: 0.1, change_scale: 1.0, int_range: 1000, reuse_prob: 0.2 }
    }
}

struct Builder<'a, R: Rng> {
    subject: &'a Subject,
    program: &'a MiniProgram,
    config: &'a GenomeConfig,
    rng: &'a mut R,
    stmts: Vec<Statement>,
    types: Vec<Type>,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn new(subject: &'a Subject, config: &'a GenomeConfig, rng: &'a mut R) -> Self {
        Builder { subject, program: &subject.program, config, rng, stmts: Vec::new(), types: Vec::new() }
    }

    fn push(&mut self, s: Statement) -> usize {
        let t = statement_type(self.program, &self.types, &s);
        self.stmts.push(s);
        self.types.push(t);
        self.stmts.len() - 1
    }

    fn room(&self) -> usize {
        self.config.max_len.saturating_sub(self.stmts.len())
    }

    fn compatible(&self, ty: Type, before: usize) -> Vec<usize> {
        (0..before.min(self.types.len())).filter(|&v| self.types[v] != Type::Void && ty.accepts(self.types[v])).collect()
    }

    /// Appends a construction of `class` (after any prerequisites), reserving `reserve` slots.
    fn construct(&mut self, class: usize, depth: usize, reserve: usize) -> Option<usize> {
        if self.room() <= reserve {
            return None;
        }
        let ctors: Vec<usize> = self.program.ctors(class).collect();
        let ctor = ctors.choose(self.rng).copied();
        let params: Vec<Type> = ctor.map_or(Vec::new(), |k| self.program.classes[class].methods[k].params().iter().map(|p| p.ty).collect());
        let args = self.args(&params, depth, reserve + 1);
        Some(self.push(Statement::Construct { class, ctor, args }))
    }

    fn args(&mut self, params: &[Type], depth: usize, reserve: usize) -> Vec<Arg> {
        params.iter().map(|&p| self.arg(p, depth, reserve)).collect()
    }

    fn arg(&mut self, ty: Type, depth: usize, reserve: usize) -> Arg {
        let existing = self.compatible(ty, self.stmts.len());
        match ty {
            Type::Class(c) => {
                if !existing.is_empty() && (self.rng.gen_bool(0.8) || depth >= 2) {
                    return Arg::Var(*existing.choose(self.rng).unwrap());
                }
                if depth < 2 && self.rng.gen_bool(0.9) {
                    if let Some(v) = self.construct(c, depth + 1, reserve) {
                        return Arg::Var(v);
                    }
                }
                Arg::Lit(Literal::Null)
            }
            Type::IntArray => {
                if !existing.is_empty() && self.rng.gen_bool(0.5) {
                    return Arg::Var(*existing.choose(self.rng).unwrap());
                }
                if self.room() > reserve && self.rng.gen_bool(0.9) {
                    let n = self.rng.gen_range(0..=6);
                    let elements = (0..n).map(|_| small_int(self.subject, self.config, self.rng)).collect();
                    return Arg::Var(self.push(Statement::ArrayCreate { elements }));
                }
                Arg::Lit(Literal::Null)
            }
            _ => {
                if !existing.is_empty() && self.rng.gen_bool(self.config.reuse_prob) {
                    return Arg::Var(*existing.choose(self.rng).unwrap());
                }
                let lit = random_literal(self.subject, self.config, ty, self.rng);
                if self.room() > reserve && self.rng.gen_bool(0.1) {
                    return Arg::Var(self.push(Statement::Primitive(lit)));
                }
                Arg::Lit(lit)
            }
        }
    }

    /// Appends a call of a random public method on a random variable of the CUT.
    fn call_on_cut(&mut self, before: usize) -> bool {
        let cut = self.program.cut;
        let receivers = self.compatible(Type::Class(cut), before);
        let methods: Vec<usize> = self.program.public_methods(cut).collect();
        let (Some(&receiver), Some(&method)) = (receivers.choose(self.rng), methods.choose(self.rng)) else {
            return false;
        };
        if self.room() == 0 {
            return false;
        }
        let params: Vec<Type> = self.program.classes[cut].methods[method].params().iter().map(|p| p.ty).collect();
        let args = self.args(&params, 0, 1);
        self.push(Statement::Call { receiver, method, args });
        true
    }
}

fn statement_type(program: &MiniProgram, types: &[Type], s: &Statement) -> Type {
    match s {
        Statement::Construct { class, .. } => Type::Class(*class),
        Statement::Call { receiver, method, .. } => match types.get(*receiver) {
            Some(Type::Class(c)) => program.classes[*c].methods.get(*method).map_or(Type::Void, |m| m.ret),
            _ => Type::Void,
        },
        Statement::Primitive(l) => l.ty(),
        Statement::ArrayCreate { .. } => Type::IntArray,
    }
}

fn small_int<R: Rng>(subject: &Subject, config: &GenomeConfig, rng: &mut R) -> i64 {
    match rng.gen_range(0..10) {
        0..=2 => *[-1, 0, 1].choose(rng).unwrap(),
        3..=5 if !subject.constants.ints.is_empty() => {
            let c = *subject.constants.ints.choose(rng).unwrap();
            c.wrapping_add(rng.gen_range(-1..=1))
        }
        _ => rng.gen_range(-config.int_range..=config.int_range),
    }
}

fn random_literal<R: Rng>(subject: &Subject, config: &GenomeConfig, ty: Type, rng: &mut R) -> Literal {
    match ty {
        Type::Int => Literal::Int(small_int(subject, config, rng)),
        Type::Float => {
            if !subject.constants.floats.is_empty() && rng.gen_bool(0.3) {
                Literal::Float(*subject.constants.floats.choose(rng).unwrap())
            } else if rng.gen_bool(0.3) {
                Literal::Float(small_int(subject, config, rng) as f64)
            } else {
                let r = config.int_range as f64;
                Literal::Float(rng.gen_range(-r..=r))
            }
        }
        Type::Bool => Literal::Bool(rng.gen()),
        _ => Literal::Null,
    }
}

fn perturb<R: Rng>(subject: &Subject, config: &GenomeConfig, l: Literal, rng: &mut R) -> Literal {
    match l {
        Literal::Int(v) if rng.gen_bool(0.5) => Literal::Int(v.wrapping_add(rng.gen_range(-10..=10))),
        Literal::Float(v) if rng.gen_bool(0.5) => Literal::Float(v + rng.gen_range(-10.0..=10.0)),
        Literal::Bool(b) => Literal::Bool(!b),
        Literal::Null => Literal::Null,
        other => random_literal(subject, config, other.ty(), rng),
    }
}

/// A random test: at least one construction of the CUT, then calls on it.
pub fn random_test<R: Rng>(subject: &Subject, config: &GenomeConfig, rng: &mut R) -> TestCase {
    let max_len = config.max_len.max(1);
    let target = rng.gen_range(1..=max_len);
    let cut = subject.program.cut;
    let mut b = Builder::new(subject, config, rng);
    if b.construct(cut, 0, 0).is_none() {
        // No room for prerequisites: literal arguments only.
        let ctor = b.program.ctors(cut).next();
        let args = ctor.map_or(Vec::new(), |k| {
            b.program.classes[cut].methods[k].params().iter().map(|p| Arg::Lit(null_or_default(p.ty))).collect()
        });
        b.push(Statement::Construct { class: cut, ctor, args });
    }
    let mut attempts = 0;
    while b.stmts.len() < target && attempts < 4 * max_len {
        attempts += 1;
        if b.rng.gen_bool(0.15) {
            b.construct(cut, 0, 0);
        } else {
            let len = b.stmts.len();
            b.call_on_cut(len);
        }
    }
    TestCase::new(b.stmts)
}

fn null_or_default(ty: Type) -> Literal {
    match ty {
        Type::Int => Literal::Int(0),
        Type::Float => Literal::Float(0.0),
        Type::Bool => Literal::Bool(false),
        _ => Literal::Null,
    }
}

/// Sentinel for a reference whose target is gone.
const DANGLING: usize = usize::MAX;

/// Rebuilds a statement list after structural edits.
///
/// `items` holds statements whose references use input positions; `None`
/// entries were deleted. References to deleted, dangling, forward or
/// incompatible variables are re-bound to a compatible earlier variable,
/// fall back to a literal, or (for receivers) drop the statement.
fn repair<R: Rng>(program: &MiniProgram, items: Vec<Option<Statement>>, rng: &mut R) -> Vec<Statement> {
    let mut map: Vec<Option<usize>> = Vec::with_capacity(items.len());
    let mut out: Vec<Statement> = Vec::new();
    let mut types: Vec<Type> = Vec::new();
    for item in items {
        let Some(mut s) = item else {
            map.push(None);
            continue;
        };
        let mut keep = true;
        let Some(expected) = expected_types(program, &types, &map, &s) else {
            map.push(None);
            continue;
        };
        let pick = |want: Type, types: &[Type], rng: &mut R| -> Option<usize> {
            let c: Vec<usize> = (0..types.len()).filter(|&v| types[v] != Type::Void && want.accepts(types[v])).collect();
            c.choose(rng).copied()
        };
        let resolve = |r: usize| if r == DANGLING { None } else { map.get(r).copied().flatten() };
        match &mut s {
            Statement::Call { receiver, method, args } => {
                let want = expected[0];
                let mapped = resolve(*receiver).filter(|&v| types[v] == want);
                match mapped.or_else(|| pick(want, &types, rng)) {
                    Some(v) => *receiver = v,
                    None => keep = false,
                }
                let _ = method;
                fix_args(args, &expected[1..], &types, &resolve, &pick, rng);
            }
            Statement::Construct { args, .. } => fix_args(args, &expected, &types, &resolve, &pick, rng),
            _ => {}
        }
        if keep {
            let t = statement_type(program, &types, &s);
            map.push(Some(out.len()));
            out.push(s);
            types.push(t);
        } else {
            map.push(None);
        }
    }
    out
}

fn fix_args<R: Rng>(
    args: &mut [Arg],
    params: &[Type],
    types: &[Type],
    resolve: &impl Fn(usize) -> Option<usize>,
    pick: &impl Fn(Type, &[Type], &mut R) -> Option<usize>,
    rng: &mut R,
) {
    for (a, &p) in args.iter_mut().zip(params) {
        if let Arg::Var(r) = *a {
            *a = match resolve(r).filter(|&v| types[v] != Type::Void && p.accepts(types[v])) {
                Some(v) => Arg::Var(v),
                None => pick(p, types, rng).map_or(Arg::Lit(null_or_default(p)), Arg::Var),
            };
        }
    }
}

/// Parameter types a statement expects; for calls the receiver's type comes first.
fn expected_types(program: &MiniProgram, types: &[Type], map: &[Option<usize>], s: &Statement) -> Option<Vec<Type>> {
    match s {
        Statement::Construct { class, ctor, .. } => Some(
            ctor.map_or(Vec::new(), |k| program.classes[*class].methods[k].params().iter().map(|p| p.ty).collect()),
        ),
        Statement::Call { receiver, method, .. } => {
            // The receiver's class is fixed by the method; fall back to the CUT.
            let is_method = |c: usize| program.classes[c].methods.get(*method).is_some_and(|m| m.kind == MethodKind::Method);
            let class = map
                .get(*receiver)
                .copied()
                .flatten()
                .and_then(|v| match types[v] {
                    Type::Class(c) if is_method(c) => Some(c),
                    _ => None,
                })
                .or_else(|| is_method(program.cut).then_some(program.cut))?;
            let m = &program.classes[class].methods[*method];
            Some(std::iter::once(Type::Class(class)).chain(m.params().iter().map(|p| p.ty)).collect())
        }
        _ => Some(Vec::new()),
    }
}

/// Single-point crossover at a relative position; the offspring swap tails.
pub fn crossover_single_point<R: Rng>(
    subject: &Subject,
    a: &TestCase,
    b: &TestCase,
    config: &GenomeConfig,
    rng: &mut R,
) -> (TestCase, TestCase) {
    let alpha: f64 = rng.gen();
    let pa = ((alpha * a.len() as f64) as usize).min(a.len());
    let pb = ((alpha * b.len() as f64) as usize).min(b.len());
    let (ta, tb) = (var_types(&subject.program, a), var_types(&subject.program, b));
    let child = |x: &TestCase, tx: &[Type], px: usize, y: &TestCase, ty: &[Type], py: usize, rng: &mut R| {
        let mut items: Vec<Option<Statement>> = x.statements[..px].iter().cloned().map(Some).collect();
        for s in &y.statements[py..] {
            let mut s = s.clone();
            for r in s.refs_mut() {
                // Head references stay put when the other head has the same type there.
                *r = if *r >= py {
                    *r - py + px
                } else if *r < px && tx[*r] == ty[*r] {
                    *r
                } else {
                    DANGLING
                };
            }
            items.push(Some(s));
        }
        let mut out = repair(&subject.program, items, rng);
        out.truncate(config.max_len.max(1));
        if out.is_empty() {
            x.clone()
        } else {
            TestCase::new(out)
        }
    };
    let c1 = child(a, &ta, pa, b, &tb, pb, rng);
    let c2 = child(b, &tb, pb, a, &ta, pa, rng);
    (c1, c2)
}

/// Uniform mutation: deletion, per-statement change and insertion, each by chance.
pub fn mutate_uniform<R: Rng>(subject: &Subject, t: &TestCase, config: &GenomeConfig, rng: &mut R) -> TestCase {
    let program = &subject.program;
    let mut stmts = t.statements.clone();

    if stmts.len() > 1 && rng.gen_bool(config.delete_prob.clamp(0.0, 1.0)) {
        let victim = rng.gen_range(0..stmts.len());
        let items = stmts.iter().enumerate().map(|(i, s)| (i != victim).then(|| s.clone())).collect();
        let repaired = repair(program, items, rng);
        if !repaired.is_empty() {
            stmts = repaired;
        }
    }

    let p_change = if stmts.is_empty() { 0.0 } else { (config.change_scale / stmts.len() as f64).clamp(0.0, 1.0) };
    let mut changed = false;
    for i in 0..stmts.len() {
        if p_change > 0.0 && rng.gen_bool(p_change) {
            changed |= change_statement(subject, config, &mut stmts, i, rng);
        }
    }
    if changed {
        stmts = repair(program, stmts.into_iter().map(Some).collect(), rng);
    }

    if stmts.len() < config.max_len && rng.gen_bool(config.insert_prob.clamp(0.0, 1.0)) {
        let pos = rng.gen_range(0..=stmts.len());
        let mut b = Builder::new(subject, config, rng);
        b.types = var_types(program, &TestCase::new(stmts[..pos].to_vec()));
        b.stmts = stmts[..pos].to_vec();
        let inserted = if b.rng.gen_bool(0.8) && b.call_on_cut(pos) {
            true
        } else {
            b.construct(program.cut, 0, 0).is_some()
        };
        if inserted {
            let added = b.stmts.len() - pos;
            let mut head = b.stmts;
            for s in &stmts[pos..] {
                let mut s = s.clone();
                for r in s.refs_mut() {
                    if *r >= pos {
                        *r += added;
                    }
                }
                head.push(s);
            }
            stmts = head;
            stmts.truncate(config.max_len.max(1));
        }
    }
    if stmts.is_empty() {
        return t.clone();
    }
    TestCase::new(stmts)
}

/// Changes statement `i` in place; references may need repair afterwards.
fn change_statement<R: Rng>(subject: &Subject, config: &GenomeConfig, stmts: &mut [Statement], i: usize, rng: &mut R) -> bool {
    let program = &subject.program;
    let types = var_types(program, &TestCase::new(stmts[..i].to_vec()));
    let params = param_types(program, &types, &stmts[i]);
    let replace_call = rng.gen_bool(0.3);
    match &mut stmts[i] {
        Statement::Primitive(l) => *l = perturb(subject, config, *l, rng),
        Statement::ArrayCreate { elements } => {
            if elements.is_empty() || rng.gen_bool(0.3) {
                if !elements.is_empty() && rng.gen_bool(0.5) {
                    elements.pop();
                } else {
                    elements.push(small_int(subject, config, rng));
                }
            } else {
                let k = rng.gen_range(0..elements.len());
                elements[k] = match perturb(subject, config, Literal::Int(elements[k]), rng) {
                    Literal::Int(v) => v,
                    _ => 0,
                };
            }
        }
        Statement::Call { receiver, method, args } if replace_call => {
            let Some(Type::Class(c)) = types.get(*receiver).copied() else { return false };
            let methods: Vec<usize> = program.public_methods(c).collect();
            let &m = methods.choose(rng).unwrap_or(method);
            *method = m;
            *args = program.classes[c].methods[m]
                .params()
                .iter()
                .map(|p| fresh_arg(subject, config, p.ty, &types, rng))
                .collect();
            return true;
        }
        Statement::Call { args, .. } | Statement::Construct { args, .. } => {
            if args.is_empty() || params.len() != args.len() {
                return false;
            }
            let k = rng.gen_range(0..args.len());
            let p = params[k];
            args[k] = match args[k] {
                Arg::Lit(l) if l != Literal::Null && rng.gen_bool(0.8) => Arg::Lit(perturb(subject, config, l, rng)),
                _ => fresh_arg(subject, config, p, &types, rng),
            };
        }
    }
    true
}

fn param_types(program: &MiniProgram, types: &[Type], s: &Statement) -> Vec<Type> {
    match s {
        Statement::Construct { class, ctor, .. } => {
            ctor.map_or(Vec::new(), |k| program.classes[*class].methods[k].params().iter().map(|p| p.ty).collect())
        }
        Statement::Call { receiver, method, .. } => match types.get(*receiver) {
            Some(Type::Class(c)) => program.classes[*c].methods[*method].params().iter().map(|p| p.ty).collect(),
            _ => Vec::new(),
        },
        _ => Vec::new(),
    }
}

fn fresh_arg<R: Rng>(subject: &Subject, config: &GenomeConfig, ty: Type, types: &[Type], rng: &mut R) -> Arg {
    let existing: Vec<usize> = (0..types.len()).filter(|&v| types[v] != Type::Void && ty.accepts(types[v])).collect();
    let reuse = if ty.is_reference() { 0.9 } else { config.reuse_prob };
    if !existing.is_empty() && rng.gen_bool(reuse) {
        return Arg::Var(*existing.choose(rng).unwrap());
    }
    Arg::Lit(random_literal(subject, config, ty, rng))
}
