//! Suite files.
//!
//! ```json
//! { "subject": "Gauss", "algorithm": "adynamosa", "seed": 7,
//!   "tests": [ { "statements": [
//!     { "op": "construct", "class": "Gauss", "arity": 1, "args": [ { "int": 3 } ] },
//!     { "op": "call", "receiver": 0, "method": "solve", "args": [ { "var": 0 }, "null" ] },
//!     { "op": "primitive", "value": { "float": 1.5 } },
//!     { "op": "array", "elements": [ 1, 2, 3 ] } ] } ] }
//! ```
//!
//! `arity` is omitted for the implicit constructor. References name earlier
//! statements by position.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::ast::{MethodKind, MiniProgram, Type};

use super::{validate, var_types, Arg, Literal, Provenance, Statement, TestCase, TestCaseError, TestSuite};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed suite file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("test {test}, statement {statement}: {msg}")]
    Unknown { test: usize, statement: usize, msg: String },
    #[error("test {test}: {source}")]
    Invalid { test: usize, source: TestCaseError },
}

#[derive(Debug, Serialize, Deserialize)]
struct SuiteDto {
    subject: String,
    algorithm: String,
    seed: u64,
    tests: Vec<TestDto>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TestDto {
    statements: Vec<StatementDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum StatementDto {
    Construct {
        class: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arity: Option<usize>,
        args: Vec<ArgDto>,
    },
    Call {
        receiver: usize,
        method: String,
        args: Vec<ArgDto>,
    },
    Primitive {
        value: ArgDto,
    },
    Array {
        elements: Vec<i64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ArgDto {
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    Var(usize),
}

impl From<Arg> for ArgDto {
    fn from(a: Arg) -> Self {
        match a {
            Arg::Lit(Literal::Int(v)) => ArgDto::Int(v),
            Arg::Lit(Literal::Float(v)) => ArgDto::Float(v),
            Arg::Lit(Literal::Bool(v)) => ArgDto::Bool(v),
            Arg::Lit(Literal::Null) => ArgDto::Null,
            Arg::Var(v) => ArgDto::Var(v),
        }
    }
}

impl From<ArgDto> for Arg {
    fn from(a: ArgDto) -> Self {
        match a {
            ArgDto::Int(v) => Arg::Lit(Literal::Int(v)),
            ArgDto::Float(v) => Arg::Lit(Literal::Float(v)),
            ArgDto::Bool(v) => Arg::Lit(Literal::Bool(v)),
            ArgDto::Null => Arg::Lit(Literal::Null),
            ArgDto::Var(v) => Arg::Var(v),
        }
    }
}

pub fn suite_to_json(program: &MiniProgram, suite: &TestSuite) -> String {
    let tests = suite
        .tests
        .iter()
        .map(|t| {
            let types = var_types(program, t);
            let statements = t
                .statements
                .iter()
                .map(|s| match s {
                    Statement::Construct { class, ctor, args } => StatementDto::Construct {
                        class: program.classes[*class].name.clone(),
                        arity: ctor.map(|k| program.classes[*class].methods[k].param_count),
                        args: args.iter().map(|&a| a.into()).collect(),
                    },
                    Statement::Call { receiver, method, args } => {
                        let Type::Class(c) = types[*receiver] else { unreachable!("validated receiver") };
                        StatementDto::Call {
                            receiver: *receiver,
                            method: program.classes[c].methods[*method].name.clone(),
                            args: args.iter().map(|&a| a.into()).collect(),
                        }
                    }
                    Statement::Primitive(l) => StatementDto::Primitive { value: Arg::Lit(*l).into() },
                    Statement::ArrayCreate { elements } => StatementDto::Array { elements: elements.clone() },
                })
                .collect();
            TestDto { statements }
        })
        .collect();
    let dto = SuiteDto {
        subject: suite.provenance.subject.clone(),
        algorithm: suite.provenance.algorithm.clone(),
        seed: suite.provenance.seed,
        tests,
    };
    serde_json::to_string_pretty(&dto).expect("suite serialises")
}

pub fn suite_from_json(program: &MiniProgram, text: &str) -> Result<TestSuite, JsonError> {
    let dto: SuiteDto = serde_json::from_str(text)?;
    let mut tests = Vec::with_capacity(dto.tests.len());
    for (ti, t) in dto.tests.into_iter().enumerate() {
        let mut tc = TestCase::default();
        for (si, s) in t.statements.into_iter().enumerate() {
            let unknown = |msg: String| JsonError::Unknown { test: ti, statement: si, msg };
            let st = match s {
                StatementDto::Construct { class, arity, args } => {
                    let c = program.class_by_name(&class).ok_or_else(|| unknown(format!("unknown class `{class}`")))?;
                    let ctor = match arity {
                        None => None,
                        Some(n) => Some(
                            program
                                .ctors(c)
                                .find(|&k| program.classes[c].methods[k].param_count == n)
                                .ok_or_else(|| unknown(format!("`{class}` has no constructor of arity {n}")))?,
                        ),
                    };
                    Statement::Construct { class: c, ctor, args: args.into_iter().map(Arg::from).collect() }
                }
                StatementDto::Call { receiver, method, args } => {
                    let types = var_types(program, &tc);
                    let Some(Type::Class(c)) = types.get(receiver).copied() else {
                        return Err(unknown(format!("receiver {receiver} is not an earlier object")));
                    };
                    let m = program.classes[c]
                        .methods
                        .iter()
                        .position(|m| m.kind == MethodKind::Method && m.name == method)
                        .ok_or_else(|| unknown(format!("unknown method `{method}`")))?;
                    Statement::Call { receiver, method: m, args: args.into_iter().map(Arg::from).collect() }
                }
                StatementDto::Primitive { value } => match Arg::from(value) {
                    Arg::Lit(l) => Statement::Primitive(l),
                    Arg::Var(_) => return Err(unknown("primitive value must be a literal".into())),
                },
                StatementDto::Array { elements } => Statement::ArrayCreate { elements },
            };
            tc.statements.push(st);
        }
        validate(program, &tc).map_err(|source| JsonError::Invalid { test: ti, source })?;
        tests.push(tc);
    }
    Ok(TestSuite { tests, provenance: Provenance { subject: dto.subject, algorithm: dto.algorithm, seed: dto.seed } })
}
