//! Test cases as statement sequences against the class under test.

mod gen;
mod json;

use thiserror::Error;

use crate::program::ast::{ClassId, MethodKind, MiniProgram, Type};

pub use gen::{crossover_single_point, mutate_uniform, random_test, GenomeConfig};
pub use json::{suite_from_json, suite_to_json, JsonError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
}

impl Literal {
    pub fn ty(&self) -> Type {
        match self {
            Literal::Int(_) => Type::Int,
            Literal::Float(_) => Type::Float,
            Literal::Bool(_) => Type::Bool,
            Literal::Null => Type::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arg {
    Lit(Literal),
    /// Value of an earlier statement.
    Var(usize),
}

/// One statement; statement `i` defines test variable `i`.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    /// `ctor` indexes the class's members; `None` is the implicit constructor.
    Construct { class: ClassId, ctor: Option<usize>, args: Vec<Arg> },
    /// `method` indexes the members of the receiver's class.
    Call { receiver: usize, method: usize, args: Vec<Arg> },
    Primitive(Literal),
    ArrayCreate { elements: Vec<i64> },
}

impl Statement {
    pub fn is_call(&self) -> bool {
        matches!(self, Statement::Construct { .. } | Statement::Call { .. })
    }

    pub(crate) fn refs_mut(&mut self) -> impl Iterator<Item = &mut usize> {
        let (recv, args) = match self {
            Statement::Construct { args, .. } => (None, Some(args)),
            Statement::Call { receiver, args, .. } => (Some(receiver), Some(args)),
            _ => (None, None),
        };
        recv.into_iter().chain(args.into_iter().flat_map(|a| {
            a.iter_mut().filter_map(|x| match x {
                Arg::Var(v) => Some(v),
                Arg::Lit(_) => None,
            })
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestCase {
    pub statements: Vec<Statement>,
}

impl TestCase {
    pub fn new(statements: Vec<Statement>) -> Self {
        TestCase { statements }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn static_proxies(&self) -> StaticProxies {
        let calls = self.statements.iter().filter(|s| s.is_call()).count() as u64;
        let length = self.statements.len() as u64;
        StaticProxies { method_calls: calls, other_statements: length - calls, length }
    }
}

/// Counts read off the test itself: calls (constructors included), other
/// statements, and length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StaticProxies {
    pub method_calls: u64,
    pub other_statements: u64,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub subject: String,
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestSuite {
    pub tests: Vec<TestCase>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestCaseError {
    #[error("test has no statements")]
    Empty,
    #[error("statement {statement}: reference to variable {var} is not backwards")]
    ForwardReference { statement: usize, var: usize },
    #[error("statement {statement}: {msg}")]
    Ill { statement: usize, msg: String },
}

/// Static type of each test variable.
pub fn var_types(program: &MiniProgram, test: &TestCase) -> Vec<Type> {
    let mut out: Vec<Type> = Vec::with_capacity(test.len());
    for s in &test.statements {
        let ty = match s {
            Statement::Construct { class, .. } => Type::Class(*class),
            Statement::Call { receiver, method, .. } => match out.get(*receiver) {
                Some(Type::Class(c)) => program.classes[*c].methods.get(*method).map_or(Type::Void, |m| m.ret),
                _ => Type::Void,
            },
            Statement::Primitive(l) => l.ty(),
            Statement::ArrayCreate { .. } => Type::IntArray,
        };
        out.push(ty);
    }
    out
}

/// Checks that every reference points backwards and every call is well typed.
pub fn validate(program: &MiniProgram, test: &TestCase) -> Result<(), TestCaseError> {
    if test.is_empty() {
        return Err(TestCaseError::Empty);
    }
    let types = var_types(program, test);
    let ill = |statement: usize, msg: String| Err(TestCaseError::Ill { statement, msg });
    for (i, s) in test.statements.iter().enumerate() {
        let (params, args): (Vec<Type>, &[Arg]) = match s {
            Statement::Construct { class, ctor, args } => {
                let Some(c) = program.classes.get(*class) else { return ill(i, format!("unknown class {class}")) };
                match ctor {
                    Some(k) => match c.methods.get(*k) {
                        Some(m) if m.kind == MethodKind::Ctor => (m.params().iter().map(|p| p.ty).collect(), args),
                        _ => return ill(i, format!("{} has no constructor #{k}", c.name)),
                    },
                    None if program.ctors(*class).next().is_none() => (Vec::new(), args),
                    None => return ill(i, format!("{} needs an explicit constructor", c.name)),
                }
            }
            Statement::Call { receiver, method, args } => {
                if *receiver >= i {
                    return Err(TestCaseError::ForwardReference { statement: i, var: *receiver });
                }
                let Type::Class(c) = types[*receiver] else { return ill(i, "receiver is not an object".into()) };
                match program.classes[c].methods.get(*method) {
                    Some(m) if m.kind == MethodKind::Method => (m.params().iter().map(|p| p.ty).collect(), args),
                    _ => return ill(i, format!("{} has no method #{method}", program.classes[c].name)),
                }
            }
            Statement::Primitive(_) | Statement::ArrayCreate { .. } => continue,
        };
        if params.len() != args.len() {
            return ill(i, format!("expected {} arguments, got {}", params.len(), args.len()));
        }
        for (p, a) in params.iter().zip(args) {
            let ty = match a {
                Arg::Lit(l) => l.ty(),
                Arg::Var(v) if *v >= i => return Err(TestCaseError::ForwardReference { statement: i, var: *v }),
                Arg::Var(v) => types[*v],
            };
            if ty == Type::Void || !p.accepts(ty) {
                return ill(i, format!("argument of type {} where {} expected", program.type_name(ty), program.type_name(*p)));
            }
        }
    }
    Ok(())
}
