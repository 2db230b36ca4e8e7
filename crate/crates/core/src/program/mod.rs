//! The mini-language: parsing, control flow, control dependencies and targets.

pub mod ast;
pub mod cdg;
pub mod cfg;
mod lexer;
mod parser;
pub mod printer;
mod resolve;
pub mod targets;

use thiserror::Error;

pub use ast::{BinOp, ClassId, Expr, ExprId, ExprKind, MethodId, MethodKind, MiniProgram, Type, UnOp};
pub use cdg::{build_cdg, Cdg};
pub use cfg::{build_cfg, edge_branch, edge_id, Cfg, EdgeId};
pub use printer::print_program;
pub use resolve::binary_type;
pub use targets::{enumerate_targets, parse_criteria, target_manifest, CoverageTarget, TargetKind, TargetLoc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("line {line}: unresolved name `{name}`")]
    Unresolved { line: u32, name: String },
    #[error("line {line}: type mismatch: {msg}")]
    Type { line: u32, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
}

impl ProgramError {
    pub(crate) fn syntax(line: u32, col: u32, msg: impl Into<String>) -> Self {
        ProgramError::Syntax { line, col, msg: msg.into() }
    }

    /// Source line the diagnostic points at, when it has one.
    pub fn line(&self) -> Option<u32> {
        match self {
            ProgramError::Syntax { line, .. }
            | ProgramError::Unresolved { line, .. }
            | ProgramError::Type { line, .. } => Some(*line),
            ProgramError::Invalid(_) | ProgramError::UnknownTarget(_) => None,
        }
    }
}

/// Parses and resolves mini-language source.
pub fn parse_program(source: &str) -> Result<MiniProgram, ProgramError> {
    let tokens = lexer::tokenize(source)?;
    let classes = parser::Parser::new(tokens).parse_program()?;
    resolve::resolve(classes)
}
