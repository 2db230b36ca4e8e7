//! Recursive-descent parser producing an unresolved syntax tree.

use super::ast::{BinOp, UnOp};
use super::lexer::{Tok, Token};
use super::ProgramError;

#[derive(Debug, Clone, PartialEq)]
pub enum SType {
    Int,
    Bool,
    Float,
    IntArray,
    Named(String),
    Void,
}

#[derive(Debug, Clone)]
pub struct SExpr {
    pub kind: SExprKind,
    pub line: u32,
}

#[derive(Debug, Clone)]
pub enum SExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    This,
    Name(String),
    Member(Box<SExpr>, String),
    Index(Box<SExpr>, Box<SExpr>),
    Call(Box<SExpr>, Vec<SExpr>),
    New(String, Vec<SExpr>),
    NewArray(Box<SExpr>),
    Unary(UnOp, Box<SExpr>),
    Binary(BinOp, Box<SExpr>, Box<SExpr>),
}

#[derive(Debug, Clone)]
pub struct SStmt {
    pub kind: SStmtKind,
    pub line: u32,
}

#[derive(Debug, Clone)]
pub enum SStmtKind {
    Var(SType, String, Option<SExpr>),
    Assign(SExpr, SExpr),
    If(SExpr, Vec<SStmt>, Option<Vec<SStmt>>),
    While(SExpr, Vec<SStmt>),
    For(Option<Box<SStmt>>, Option<SExpr>, Option<Box<SStmt>>, Vec<SStmt>),
    Return(Option<SExpr>),
    Call(SExpr),
}

#[derive(Debug, Clone)]
pub struct SParam {
    pub ty: SType,
    pub name: String,
}

#[derive(Debug, Clone)]
pub enum SMember {
    Field { ty: SType, name: String, line: u32 },
    Ctor { params: Vec<SParam>, body: Vec<SStmt>, line: u32 },
    Method { ret: SType, name: String, params: Vec<SParam>, body: Vec<SStmt>, line: u32 },
}

#[derive(Debug, Clone)]
pub struct SClass {
    pub name: String,
    pub is_cut: bool,
    pub members: Vec<SMember>,
    pub line: u32,
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Kw(x) if *x == s)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ProgramError> {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Float(v) => format!("float `{v}`"),
            Tok::Kw(k) => format!("keyword `{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(ProgramError::syntax(t.line, t.col, format!("{}, found {found}", msg.into())))
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token, ProgramError> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<Token, ProgramError> {
        if self.is_kw(s) {
            Ok(self.bump())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ProgramError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    pub fn parse_program(&mut self) -> Result<Vec<SClass>, ProgramError> {
        let mut classes = Vec::new();
        while self.peek().tok != Tok::Eof {
            classes.push(self.parse_class()?);
        }
        Ok(classes)
    }

    fn parse_class(&mut self) -> Result<SClass, ProgramError> {
        let is_cut = if self.is_kw("cut") {
            self.bump();
            true
        } else {
            false
        };
        let line = self.expect_kw("class")?.line;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut members = Vec::new();
        while !self.is_sym("}") {
            members.push(self.parse_member()?);
        }
        self.expect_sym("}")?;
        Ok(SClass { name, is_cut, members, line })
    }

    fn parse_member(&mut self) -> Result<SMember, ProgramError> {
        let line = self.peek().line;
        if self.is_kw("field") {
            self.bump();
            let ty = self.parse_type(false)?;
            let name = self.ident()?;
            self.expect_sym(";")?;
            Ok(SMember::Field { ty, name, line })
        } else if self.is_kw("ctor") {
            self.bump();
            let params = self.parse_params()?;
            let body = self.parse_block()?;
            Ok(SMember::Ctor { params, body, line })
        } else if self.is_kw("method") {
            self.bump();
            let ret = self.parse_type(true)?;
            let name = self.ident()?;
            let params = self.parse_params()?;
            let body = self.parse_block()?;
            Ok(SMember::Method { ret, name, params, body, line })
        } else {
            self.error("expected `field`, `ctor` or `method`")
        }
    }

    fn parse_type(&mut self, allow_void: bool) -> Result<SType, ProgramError> {
        let t = self.peek().tok.clone();
        let ty = match t {
            Tok::Kw("int") => {
                self.bump();
                if self.is_sym("[") {
                    self.bump();
                    self.expect_sym("]")?;
                    SType::IntArray
                } else {
                    SType::Int
                }
            }
            Tok::Kw("bool") => {
                self.bump();
                SType::Bool
            }
            Tok::Kw("float") => {
                self.bump();
                SType::Float
            }
            Tok::Kw("void") if allow_void => {
                self.bump();
                SType::Void
            }
            Tok::Ident(name) => {
                self.bump();
                SType::Named(name)
            }
            _ => return self.error("expected type"),
        };
        Ok(ty)
    }

    fn parse_params(&mut self) -> Result<Vec<SParam>, ProgramError> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let ty = self.parse_type(false)?;
                let name = self.ident()?;
                params.push(SParam { ty, name });
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(params)
    }

    fn parse_block(&mut self) -> Result<Vec<SStmt>, ProgramError> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            if self.peek().tok == Tok::Eof {
                return self.error("expected `}`");
            }
            stmts.push(self.parse_stmt()?);
        }
        self.expect_sym("}")?;
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> Result<SStmt, ProgramError> {
        let line = self.peek().line;
        let kind = match &self.peek().tok {
            Tok::Kw("if") => return self.parse_if(),
            Tok::Kw("while") => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.parse_expr()?;
                self.expect_sym(")")?;
                let body = self.parse_block()?;
                SStmtKind::While(cond, body)
            }
            Tok::Kw("for") => {
                self.bump();
                self.expect_sym("(")?;
                let init = if self.is_sym(";") { None } else { Some(Box::new(self.parse_simple()?)) };
                self.expect_sym(";")?;
                let cond = if self.is_sym(";") { None } else { Some(self.parse_expr()?) };
                self.expect_sym(";")?;
                let step = if self.is_sym(")") { None } else { Some(Box::new(self.parse_simple()?)) };
                self.expect_sym(")")?;
                let body = self.parse_block()?;
                SStmtKind::For(init, cond, step, body)
            }
            Tok::Kw("return") => {
                self.bump();
                let value = if self.is_sym(";") { None } else { Some(self.parse_expr()?) };
                self.expect_sym(";")?;
                SStmtKind::Return(value)
            }
            Tok::Kw("call") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_sym(";")?;
                SStmtKind::Call(e)
            }
            _ => {
                let s = self.parse_simple()?;
                self.expect_sym(";")?;
                return Ok(s);
            }
        };
        Ok(SStmt { kind, line })
    }

    fn parse_if(&mut self) -> Result<SStmt, ProgramError> {
        let line = self.peek().line;
        self.expect_kw("if")?;
        self.expect_sym("(")?;
        let cond = self.parse_expr()?;
        self.expect_sym(")")?;
        let then_body = self.parse_block()?;
        let else_body = if self.is_kw("else") {
            self.bump();
            if self.is_kw("if") {
                Some(vec![self.parse_if()?])
            } else {
                Some(self.parse_block()?)
            }
        } else {
            None
        };
        Ok(SStmt { kind: SStmtKind::If(cond, then_body, else_body), line })
    }

    /// `var T x [= e]` or `place = e`, without the trailing semicolon.
    fn parse_simple(&mut self) -> Result<SStmt, ProgramError> {
        let line = self.peek().line;
        if self.is_kw("var") {
            self.bump();
            let ty = self.parse_type(false)?;
            let name = self.ident()?;
            let init = if self.is_sym("=") {
                self.bump();
                Some(self.parse_expr()?)
            } else {
                None
            };
            return Ok(SStmt { kind: SStmtKind::Var(ty, name, init), line });
        }
        let target = self.parse_postfix()?;
        if !self.is_sym("=") {
            return self.error("expected `=` (use `call` for call statements)");
        }
        self.bump();
        let value = self.parse_expr()?;
        Ok(SStmt { kind: SStmtKind::Assign(target, value), line })
    }

    pub fn parse_expr(&mut self) -> Result<SExpr, ProgramError> {
        self.parse_binary(1)
    }

    fn binop_here(&self) -> Option<BinOp> {
        let Tok::Sym(s) = &self.peek().tok else { return None };
        let op = match *s {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "&" => BinOp::BitAnd,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        };
        Some(op)
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<SExpr, ProgramError> {
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.binop_here() {
            if op.precedence() < min_prec {
                break;
            }
            let t = self.bump();
            let rhs = self.parse_binary(op.precedence() + 1)?;
            lhs = SExpr { kind: SExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), line: t.line };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<SExpr, ProgramError> {
        let line = self.peek().line;
        let op = match &self.peek().tok {
            Tok::Sym("-") => UnOp::Neg,
            Tok::Sym("!") => UnOp::Not,
            Tok::Sym("~") => UnOp::BitNot,
            _ => return self.parse_postfix(),
        };
        self.bump();
        if op == UnOp::Neg {
            // Negative numeric literals fold into a single literal.
            match self.peek().tok.clone() {
                Tok::Int(v) => {
                    self.bump();
                    return self.parse_postfix_tail(SExpr { kind: SExprKind::Int(v.wrapping_neg()), line });
                }
                Tok::Float(v) => {
                    self.bump();
                    return self.parse_postfix_tail(SExpr { kind: SExprKind::Float(-v), line });
                }
                _ => {}
            }
        }
        let operand = self.parse_unary()?;
        Ok(SExpr { kind: SExprKind::Unary(op, Box::new(operand)), line })
    }

    fn parse_postfix(&mut self) -> Result<SExpr, ProgramError> {
        let primary = self.parse_primary()?;
        self.parse_postfix_tail(primary)
    }

    fn parse_postfix_tail(&mut self, mut e: SExpr) -> Result<SExpr, ProgramError> {
        loop {
            if self.is_sym(".") {
                let t = self.bump();
                let name = self.ident()?;
                e = SExpr { kind: SExprKind::Member(Box::new(e), name), line: t.line };
            } else if self.is_sym("[") {
                let t = self.bump();
                let idx = self.parse_expr()?;
                self.expect_sym("]")?;
                e = SExpr { kind: SExprKind::Index(Box::new(e), Box::new(idx)), line: t.line };
            } else if self.is_sym("(") {
                let t = self.bump();
                let args = self.parse_args()?;
                e = SExpr { kind: SExprKind::Call(Box::new(e), args), line: t.line };
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_args(&mut self) -> Result<Vec<SExpr>, ProgramError> {
        let mut args = Vec::new();
        if !self.is_sym(")") {
            loop {
                args.push(self.parse_expr()?);
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn parse_primary(&mut self) -> Result<SExpr, ProgramError> {
        let t = self.peek().clone();
        let kind = match t.tok {
            Tok::Int(v) => {
                if v == i64::MIN {
                    return self.error("integer literal out of range");
                }
                self.bump();
                SExprKind::Int(v)
            }
            Tok::Float(v) => {
                self.bump();
                SExprKind::Float(v)
            }
            Tok::Kw("true") => {
                self.bump();
                SExprKind::Bool(true)
            }
            Tok::Kw("false") => {
                self.bump();
                SExprKind::Bool(false)
            }
            Tok::Kw("null") => {
                self.bump();
                SExprKind::Null
            }
            Tok::Kw("this") => {
                self.bump();
                SExprKind::This
            }
            Tok::Ident(name) => {
                self.bump();
                SExprKind::Name(name)
            }
            Tok::Kw("new") => {
                self.bump();
                if self.is_kw("int") && matches!(self.peek_at(1), Tok::Sym("[")) {
                    self.bump();
                    self.expect_sym("[")?;
                    let len = self.parse_expr()?;
                    self.expect_sym("]")?;
                    SExprKind::NewArray(Box::new(len))
                } else {
                    let class = self.ident()?;
                    self.expect_sym("(")?;
                    let args = self.parse_args()?;
                    SExprKind::New(class, args)
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            _ => return self.error("expected expression"),
        };
        Ok(SExpr { kind, line: t.line })
    }
}
