//! Name resolution and type checking: surface syntax to [`MiniProgram`].

use std::collections::HashMap;

use super::ast::*;
use super::parser::{SClass, SExpr, SExprKind, SMember, SStmt, SStmtKind, SType};
use super::ProgramError;

pub fn resolve(classes: Vec<SClass>) -> Result<MiniProgram, ProgramError> {
    let mut names = HashMap::new();
    for (i, c) in classes.iter().enumerate() {
        if names.insert(c.name.clone(), i).is_some() {
            return Err(ProgramError::Invalid(format!("line {}: duplicate class `{}`", c.line, c.name)));
        }
    }
    let cut = match classes.iter().filter(|c| c.is_cut).count() {
        0 if classes.len() == 1 => 0,
        0 => return Err(ProgramError::Invalid("no class marked `cut`".into())),
        1 => classes.iter().position(|c| c.is_cut).unwrap(),
        _ => return Err(ProgramError::Invalid("more than one class marked `cut`".into())),
    };

    let ty_of = |t: &SType, line: u32| -> Result<Type, ProgramError> {
        Ok(match t {
            SType::Int => Type::Int,
            SType::Bool => Type::Bool,
            SType::Float => Type::Float,
            SType::IntArray => Type::IntArray,
            SType::Void => Type::Void,
            SType::Named(n) => Type::Class(
                *names.get(n).ok_or_else(|| ProgramError::Unresolved { line, name: n.clone() })?,
            ),
        })
    };

    // Signatures first so bodies can reference any class member.
    let mut program = MiniProgram { classes: Vec::new(), cut, expr_count: 0 };
    for c in &classes {
        let mut fields: Vec<FieldDef> = Vec::new();
        let mut methods: Vec<MethodDef> = Vec::new();
        for m in &c.members {
            match m {
                SMember::Field { ty, name, line } => {
                    if fields.iter().any(|f| &f.name == name) {
                        return Err(ProgramError::Invalid(format!("line {line}: duplicate field `{name}`")));
                    }
                    fields.push(FieldDef { name: name.clone(), ty: ty_of(ty, *line)?, line: *line });
                }
                SMember::Ctor { params, line, .. } => {
                    if methods.iter().any(|x| x.kind == MethodKind::Ctor && x.param_count == params.len()) {
                        return Err(ProgramError::Invalid(format!(
                            "line {line}: duplicate constructor of arity {}",
                            params.len()
                        )));
                    }
                    let locals = params
                        .iter()
                        .map(|p| Ok(LocalDef { name: p.name.clone(), ty: ty_of(&p.ty, *line)? }))
                        .collect::<Result<Vec<_>, ProgramError>>()?;
                    methods.push(MethodDef {
                        name: "<init>".into(),
                        kind: MethodKind::Ctor,
                        param_count: params.len(),
                        locals,
                        ret: Type::Void,
                        body: Vec::new(),
                        line: *line,
                    });
                }
                SMember::Method { ret, name, params, line, .. } => {
                    if methods.iter().any(|x| x.kind == MethodKind::Method && &x.name == name) {
                        return Err(ProgramError::Invalid(format!("line {line}: duplicate method `{name}`")));
                    }
                    let locals = params
                        .iter()
                        .map(|p| Ok(LocalDef { name: p.name.clone(), ty: ty_of(&p.ty, *line)? }))
                        .collect::<Result<Vec<_>, ProgramError>>()?;
                    methods.push(MethodDef {
                        name: name.clone(),
                        kind: MethodKind::Method,
                        param_count: params.len(),
                        locals,
                        ret: ty_of(ret, *line)?,
                        body: Vec::new(),
                        line: *line,
                    });
                }
            }
        }
        program.classes.push(ClassDef { name: c.name.clone(), fields, methods, line: c.line });
    }

    let mut next_id = 0u32;
    for (ci, c) in classes.iter().enumerate() {
        let mut mi = 0;
        for m in &c.members {
            let body = match m {
                SMember::Field { .. } => continue,
                SMember::Ctor { body, .. } | SMember::Method { body, .. } => body,
            };
            let def = &program.classes[ci].methods[mi];
            let mut r = BodyResolver {
                program: &program,
                names: &names,
                class: ci,
                ret: def.ret,
                locals: def.locals.clone(),
                scopes: vec![def.locals.iter().enumerate().map(|(i, l)| (l.name.clone(), i)).collect()],
                next_id,
            };
            for p in def.params() {
                if def.params().iter().filter(|q| q.name == p.name).count() > 1 {
                    return Err(ProgramError::Invalid(format!("line {}: duplicate parameter `{}`", def.line, p.name)));
                }
            }
            let resolved = r.block(body)?;
            next_id = r.next_id;
            let locals = r.locals;
            let def = &mut program.classes[ci].methods[mi];
            def.body = resolved;
            def.locals = locals;
            mi += 1;
        }
    }
    program.expr_count = next_id;
    Ok(program)
}

struct BodyResolver<'a> {
    program: &'a MiniProgram,
    names: &'a HashMap<String, ClassId>,
    class: ClassId,
    ret: Type,
    locals: Vec<LocalDef>,
    scopes: Vec<HashMap<String, usize>>,
    next_id: u32,
}

fn type_err<T>(line: u32, msg: impl Into<String>) -> Result<T, ProgramError> {
    Err(ProgramError::Type { line, msg: msg.into() })
}

impl BodyResolver<'_> {
    fn tn(&self, t: Type) -> String {
        self.program.type_name(t)
    }

    fn mk(&mut self, kind: ExprKind, ty: Type, line: u32) -> Expr {
        let id = self.next_id;
        self.next_id += 1;
        Expr { id, kind, ty, line }
    }

    fn lookup_local(&self, name: &str) -> Option<usize> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn block(&mut self, stmts: &[SStmt]) -> Result<Vec<Stmt>, ProgramError> {
        self.scopes.push(HashMap::new());
        let mut out = Vec::with_capacity(stmts.len());
        for (i, s) in stmts.iter().enumerate() {
            let st = self.stmt(s)?;
            let returns = matches!(st.kind, StmtKind::Return(_));
            out.push(st);
            if returns && i + 1 < stmts.len() {
                self.scopes.pop();
                return Err(ProgramError::Invalid(format!("line {}: unreachable statement", stmts[i + 1].line)));
            }
        }
        self.scopes.pop();
        Ok(out)
    }

    fn stmt(&mut self, s: &SStmt) -> Result<Stmt, ProgramError> {
        let line = s.line;
        let kind = match &s.kind {
            SStmtKind::Var(ty, name, init) => {
                let ty = match ty {
                    SType::Int => Type::Int,
                    SType::Bool => Type::Bool,
                    SType::Float => Type::Float,
                    SType::IntArray => Type::IntArray,
                    SType::Void => return type_err(line, "variables cannot be void"),
                    SType::Named(n) => Type::Class(
                        *self.names.get(n).ok_or_else(|| ProgramError::Unresolved { line, name: n.clone() })?,
                    ),
                };
                if self.scopes.last().unwrap().contains_key(name) {
                    return Err(ProgramError::Invalid(format!("line {line}: `{name}` already declared")));
                }
                // Initialiser is resolved before the name is in scope.
                let init = match init {
                    Some(e) => {
                        let e = self.expr(e)?;
                        if !ty.accepts(e.ty) {
                            return type_err(line, format!("cannot initialise {} with {}", self.tn(ty), self.tn(e.ty)));
                        }
                        Some(e)
                    }
                    None => None,
                };
                let slot = self.locals.len();
                self.locals.push(LocalDef { name: name.clone(), ty });
                self.scopes.last_mut().unwrap().insert(name.clone(), slot);
                StmtKind::Var { slot, init }
            }
            SStmtKind::Assign(target, value) => {
                let place = self.place(target)?;
                let value = self.expr(value)?;
                let pty = self.place_type(&place);
                if !pty.accepts(value.ty) {
                    return type_err(line, format!("cannot assign {} to {}", self.tn(value.ty), self.tn(pty)));
                }
                StmtKind::Assign { place, value }
            }
            SStmtKind::If(cond, then_b, else_b) => {
                let cond = self.cond(cond)?;
                let then_body = self.block(then_b)?;
                let else_body = match else_b {
                    Some(b) => Some(self.block(b)?),
                    None => None,
                };
                StmtKind::If { cond, then_body, else_body }
            }
            SStmtKind::While(cond, body) => {
                let cond = self.cond(cond)?;
                let body = self.block(body)?;
                StmtKind::While { cond, body }
            }
            SStmtKind::For(init, cond, step, body) => {
                self.scopes.push(HashMap::new());
                let init = match init {
                    Some(s) => Some(Box::new(self.stmt(s)?)),
                    None => None,
                };
                let cond = match cond {
                    Some(c) => Some(self.cond(c)?),
                    None => None,
                };
                let step = match step {
                    Some(s) => Some(Box::new(self.stmt(s)?)),
                    None => None,
                };
                let body = self.block(body)?;
                self.scopes.pop();
                StmtKind::For { init, cond, step, body }
            }
            SStmtKind::Return(value) => {
                let value = match value {
                    Some(v) => {
                        let v = self.expr(v)?;
                        if self.ret == Type::Void {
                            return type_err(line, "void method cannot return a value");
                        }
                        if !self.ret.accepts(v.ty) {
                            return type_err(line, format!("cannot return {} from {}", self.tn(v.ty), self.tn(self.ret)));
                        }
                        Some(v)
                    }
                    None => {
                        if self.ret != Type::Void {
                            return type_err(line, "missing return value");
                        }
                        None
                    }
                };
                StmtKind::Return(value)
            }
            SStmtKind::Call(e) => {
                let e = self.expr(e)?;
                if !matches!(e.kind, ExprKind::Call { .. }) {
                    return type_err(line, "`call` requires a method call");
                }
                StmtKind::Call(e)
            }
        };
        Ok(Stmt { kind, line })
    }

    fn cond(&mut self, e: &SExpr) -> Result<Expr, ProgramError> {
        let c = self.expr(e)?;
        if c.ty != Type::Bool {
            return type_err(e.line, format!("condition must be bool, found {}", self.tn(c.ty)));
        }
        Ok(c)
    }

    fn place_type(&self, p: &Place) -> Type {
        match p {
            Place::Local(slot) => self.locals[*slot].ty,
            Place::Field { class, field, .. } => self.program.classes[*class].fields[*field].ty,
            Place::Index { .. } => Type::Int,
        }
    }

    fn place(&mut self, e: &SExpr) -> Result<Place, ProgramError> {
        let line = e.line;
        match &e.kind {
            SExprKind::Name(name) => {
                if let Some(slot) = self.lookup_local(name) {
                    return Ok(Place::Local(slot));
                }
                match self.program.classes[self.class].fields.iter().position(|f| &f.name == name) {
                    Some(field) => {
                        let this = self.mk(ExprKind::This, Type::Class(self.class), line);
                        Ok(Place::Field { obj: this, class: self.class, field })
                    }
                    None => Err(ProgramError::Unresolved { line, name: name.clone() }),
                }
            }
            SExprKind::Member(obj, name) => {
                let obj = self.expr(obj)?;
                let Type::Class(class) = obj.ty else {
                    return type_err(line, format!("cannot assign member `{name}` of {}", self.tn(obj.ty)));
                };
                let field = self.program.classes[class]
                    .fields
                    .iter()
                    .position(|f| &f.name == name)
                    .ok_or_else(|| ProgramError::Unresolved { line, name: name.clone() })?;
                Ok(Place::Field { obj, class, field })
            }
            SExprKind::Index(arr, idx) => {
                let array = self.expr(arr)?;
                let index = self.expr(idx)?;
                if array.ty != Type::IntArray || index.ty != Type::Int {
                    return type_err(line, "array assignment needs int[] and int index");
                }
                Ok(Place::Index { array, index })
            }
            _ => type_err(line, "invalid assignment target"),
        }
    }

    fn args(&mut self, method: &MethodDef, args: &[SExpr], line: u32) -> Result<Vec<Expr>, ProgramError> {
        if args.len() != method.param_count {
            return type_err(line, format!("expected {} arguments, found {}", method.param_count, args.len()));
        }
        let params: Vec<Type> = method.params().iter().map(|p| p.ty).collect();
        let mut out = Vec::with_capacity(args.len());
        for (a, pty) in args.iter().zip(params) {
            let a = self.expr(a)?;
            if !pty.accepts(a.ty) {
                return type_err(line, format!("argument of type {} where {} expected", self.tn(a.ty), self.tn(pty)));
            }
            out.push(a);
        }
        Ok(out)
    }

    fn expr(&mut self, e: &SExpr) -> Result<Expr, ProgramError> {
        let line = e.line;
        match &e.kind {
            SExprKind::Int(v) => Ok(self.mk(ExprKind::Int(*v), Type::Int, line)),
            SExprKind::Float(v) => Ok(self.mk(ExprKind::Float(*v), Type::Float, line)),
            SExprKind::Bool(v) => Ok(self.mk(ExprKind::Bool(*v), Type::Bool, line)),
            SExprKind::Null => Ok(self.mk(ExprKind::Null, Type::Null, line)),
            SExprKind::This => Ok(self.mk(ExprKind::This, Type::Class(self.class), line)),
            SExprKind::Name(name) => {
                if let Some(slot) = self.lookup_local(name) {
                    let ty = self.locals[slot].ty;
                    return Ok(self.mk(ExprKind::Local(slot), ty, line));
                }
                match self.program.classes[self.class].fields.iter().position(|f| &f.name == name) {
                    Some(field) => {
                        let this = self.mk(ExprKind::This, Type::Class(self.class), line);
                        let ty = self.program.classes[self.class].fields[field].ty;
                        Ok(self.mk(ExprKind::Field { obj: Box::new(this), class: self.class, field }, ty, line))
                    }
                    None => Err(ProgramError::Unresolved { line, name: name.clone() }),
                }
            }
            SExprKind::Member(obj, name) => {
                let obj = self.expr(obj)?;
                match obj.ty {
                    Type::IntArray if name == "length" => Ok(self.mk(ExprKind::Length(Box::new(obj)), Type::Int, line)),
                    Type::Class(class) => {
                        let field = self.program.classes[class]
                            .fields
                            .iter()
                            .position(|f| &f.name == name)
                            .ok_or_else(|| ProgramError::Unresolved { line, name: name.clone() })?;
                        let ty = self.program.classes[class].fields[field].ty;
                        Ok(self.mk(ExprKind::Field { obj: Box::new(obj), class, field }, ty, line))
                    }
                    t => type_err(line, format!("{} has no member `{name}`", self.tn(t))),
                }
            }
            SExprKind::Index(arr, idx) => {
                let array = self.expr(arr)?;
                let index = self.expr(idx)?;
                if array.ty != Type::IntArray {
                    return type_err(line, format!("cannot index {}", self.tn(array.ty)));
                }
                if index.ty != Type::Int {
                    return type_err(line, "array index must be int");
                }
                Ok(self.mk(ExprKind::Index { array: Box::new(array), index: Box::new(index) }, Type::Int, line))
            }
            SExprKind::Call(callee, args) => {
                let (receiver, name) = match &callee.kind {
                    SExprKind::Name(n) => (self.mk(ExprKind::This, Type::Class(self.class), line), n.clone()),
                    SExprKind::Member(obj, n) => (self.expr(obj)?, n.clone()),
                    _ => return type_err(line, "invalid call target"),
                };
                let Type::Class(class) = receiver.ty else {
                    return type_err(line, format!("cannot call `{name}` on {}", self.tn(receiver.ty)));
                };
                let program = self.program;
                let index = program.classes[class]
                    .methods
                    .iter()
                    .position(|m| m.kind == MethodKind::Method && m.name == name)
                    .ok_or_else(|| ProgramError::Unresolved { line, name: name.clone() })?;
                let def = &program.classes[class].methods[index];
                let args = self.args(def, args, line)?;
                let ret = def.ret;
                Ok(self.mk(
                    ExprKind::Call { receiver: Box::new(receiver), method: MethodId { class, index }, args },
                    ret,
                    line,
                ))
            }
            SExprKind::New(cname, args) => {
                let class =
                    *self.names.get(cname).ok_or_else(|| ProgramError::Unresolved { line, name: cname.clone() })?;
                let program = self.program;
                let ctor = program.classes[class]
                    .methods
                    .iter()
                    .position(|m| m.kind == MethodKind::Ctor && m.param_count == args.len());
                let has_ctors = program.ctors(class).next().is_some();
                let args = match ctor {
                    Some(i) => self.args(&program.classes[class].methods[i], args, line)?,
                    None if !has_ctors && args.is_empty() => Vec::new(),
                    None => {
                        return type_err(line, format!("no constructor of `{cname}` takes {} arguments", args.len()))
                    }
                };
                Ok(self.mk(ExprKind::New { class, ctor, args }, Type::Class(class), line))
            }
            SExprKind::NewArray(len) => {
                let len = self.expr(len)?;
                if len.ty != Type::Int {
                    return type_err(line, "array length must be int");
                }
                Ok(self.mk(ExprKind::NewArray(Box::new(len)), Type::IntArray, line))
            }
            SExprKind::Unary(op, operand) => {
                let operand = self.expr(operand)?;
                let ty = match (op, operand.ty) {
                    (UnOp::Neg, t @ (Type::Int | Type::Float)) => t,
                    (UnOp::Not, Type::Bool) => Type::Bool,
                    (UnOp::BitNot, Type::Int) => Type::Int,
                    (_, t) => return type_err(line, format!("bad operand type {} for unary operator", self.tn(t))),
                };
                Ok(self.mk(ExprKind::Unary { op: *op, operand: Box::new(operand) }, ty, line))
            }
            SExprKind::Binary(op, l, r) => {
                let lhs = self.expr(l)?;
                let rhs = self.expr(r)?;
                let ty = binary_type(*op, lhs.ty, rhs.ty).ok_or_else(|| ProgramError::Type {
                    line,
                    msg: format!("operator `{op}` cannot apply to {} and {}", self.tn(lhs.ty), self.tn(rhs.ty)),
                })?;
                Ok(self.mk(ExprKind::Binary { op: *op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, ty, line))
            }
        }
    }
}

/// Result type of `l op r`, or `None` if ill-typed.
pub fn binary_type(op: BinOp, l: Type, r: Type) -> Option<Type> {
    use BinOp::*;
    match op {
        Add | Sub | Mul | Div | Rem => match (l, r) {
            (Type::Int, Type::Int) => Some(Type::Int),
            (a, b) if a.is_numeric() && b.is_numeric() => Some(Type::Float),
            _ => None,
        },
        BitAnd | BitOr | BitXor | Shl | Shr => (l == Type::Int && r == Type::Int).then_some(Type::Int),
        Lt | Le | Gt | Ge => (l.is_numeric() && r.is_numeric()).then_some(Type::Bool),
        Eq | Ne => {
            let ok = (l.is_numeric() && r.is_numeric())
                || (l == Type::Bool && r == Type::Bool)
                || (l.is_reference() && r.is_reference() && (l.accepts(r) || r.accepts(l)));
            ok.then_some(Type::Bool)
        }
        And | Or => (l == Type::Bool && r == Type::Bool).then_some(Type::Bool),
    }
}
