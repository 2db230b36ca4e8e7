//! Resolved, type-annotated syntax tree of a mini-language program.

use std::fmt;

pub type ClassId = usize;
pub type ExprId = u32;

/// Static type of a value, local, field or expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
    Float,
    IntArray,
    Class(ClassId),
    Void,
    /// Type of the `null` literal; assignable to any reference type.
    Null,
}

impl Type {
    pub fn is_reference(self) -> bool {
        matches!(self, Type::Class(_) | Type::IntArray | Type::Null)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Type::Int | Type::Float)
    }

    /// Whether a value of type `from` may be stored where `self` is expected.
    pub fn accepts(self, from: Type) -> bool {
        match (self, from) {
            (a, b) if a == b => true,
            (Type::Float, Type::Int) => true,
            (Type::Class(_) | Type::IntArray, Type::Null) => true,
            _ => false,
        }
    }
}

/// Identifies a constructor or method: index into [`ClassDef::methods`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId {
    pub class: ClassId,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Ctor,
    Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiniProgram {
    pub classes: Vec<ClassDef>,
    pub cut: ClassId,
    /// One past the largest expression id in use.
    pub expr_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub fields: Vec<FieldDef>,
    /// Constructors and methods in declaration order.
    pub methods: Vec<MethodDef>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub ty: Type,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDef {
    pub name: String,
    pub kind: MethodKind,
    /// Number of leading entries of `locals` that are parameters.
    pub param_count: usize,
    pub locals: Vec<LocalDef>,
    pub ret: Type,
    pub body: Vec<Stmt>,
    pub line: u32,
}

impl MethodDef {
    pub fn params(&self) -> &[LocalDef] {
        &self.locals[..self.param_count]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDef {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    /// Local declaration; `None` initialises to the type's default.
    Var { slot: usize, init: Option<Expr> },
    Assign { place: Place, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    For { init: Option<Box<Stmt>>, cond: Option<Expr>, step: Option<Box<Stmt>>, body: Vec<Stmt> },
    Return(Option<Expr>),
    /// `call <expr>;` evaluating a call for its effects.
    Call(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Place {
    Local(usize),
    Field { obj: Expr, class: ClassId, field: usize },
    Index { array: Expr, index: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: ExprId,
    pub kind: ExprKind,
    pub ty: Type,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    Local(usize),
    This,
    Field { obj: Box<Expr>, class: ClassId, field: usize },
    Index { array: Box<Expr>, index: Box<Expr> },
    Length(Box<Expr>),
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { receiver: Box<Expr>, method: MethodId, args: Vec<Expr> },
    /// `ctor` is `None` for the implicit no-argument constructor.
    New { class: ClassId, ctor: Option<usize>, args: Vec<Expr> },
    NewArray(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ARITHMETIC: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem];
    pub const BITWISE: [BinOp; 5] = [BinOp::BitAnd, BinOp::BitOr, BinOp::BitXor, BinOp::Shl, BinOp::Shr];
    pub const COMPARISON: [BinOp; 6] = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::BitOr => 3,
            BinOp::BitXor => 4,
            BinOp::BitAnd => 5,
            BinOp::Eq | BinOp::Ne => 6,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 10,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        Self::ARITHMETIC.contains(&self)
    }

    pub fn is_bitwise(self) -> bool {
        Self::BITWISE.contains(&self)
    }

    pub fn is_comparison(self) -> bool {
        Self::COMPARISON.contains(&self)
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl MiniProgram {
    pub fn class(&self, id: ClassId) -> &ClassDef {
        &self.classes[id]
    }

    pub fn method(&self, id: MethodId) -> &MethodDef {
        &self.classes[id.class].methods[id.index]
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn cut_class(&self) -> &ClassDef {
        &self.classes[self.cut]
    }

    /// `Class.method`, or `Class.<init>/N` for a constructor of arity N.
    pub fn qualified_name(&self, id: MethodId) -> String {
        let class = &self.classes[id.class];
        let m = &class.methods[id.index];
        match m.kind {
            MethodKind::Method => format!("{}.{}", class.name, m.name),
            MethodKind::Ctor => format!("{}.<init>/{}", class.name, m.param_count),
        }
    }

    pub fn method_ids(&self) -> impl Iterator<Item = MethodId> + '_ {
        self.classes.iter().enumerate().flat_map(|(class, c)| {
            (0..c.methods.len()).map(move |index| MethodId { class, index })
        })
    }

    pub fn ctors(&self, class: ClassId) -> impl Iterator<Item = usize> + '_ {
        self.classes[class]
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.kind == MethodKind::Ctor)
            .map(|(i, _)| i)
    }

    pub fn public_methods(&self, class: ClassId) -> impl Iterator<Item = usize> + '_ {
        self.classes[class]
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.kind == MethodKind::Method)
            .map(|(i, _)| i)
    }

    pub fn type_name(&self, ty: Type) -> String {
        match ty {
            Type::Int => "int".into(),
            Type::Bool => "bool".into(),
            Type::Float => "float".into(),
            Type::IntArray => "int[]".into(),
            Type::Class(c) => self.classes[c].name.clone(),
            Type::Void => "void".into(),
            Type::Null => "null".into(),
        }
    }

    /// Decision points (conditionals) plus one, summed over the CUT's methods.
    pub fn cyclomatic_complexity(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match &s.kind {
                    StmtKind::If { then_body, else_body, .. } => {
                        1 + count(then_body) + else_body.as_deref().map_or(0, count)
                    }
                    StmtKind::While { body, .. } => 1 + count(body),
                    StmtKind::For { cond, body, .. } => usize::from(cond.is_some()) + count(body),
                    _ => 0,
                })
                .sum()
        }
        self.cut_class().methods.iter().map(|m| 1 + count(&m.body)).sum()
    }
}

impl Expr {
    /// Visits this expression and all sub-expressions in evaluation order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Field { obj, .. } => obj.walk(f),
            ExprKind::Index { array, index } => {
                array.walk(f);
                index.walk(f);
            }
            ExprKind::Length(e) | ExprKind::NewArray(e) => e.walk(f),
            ExprKind::Unary { operand, .. } => operand.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Call { receiver, args, .. } => {
                receiver.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::New { args, .. } => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Field { obj, .. } => obj.walk_mut(f),
            ExprKind::Index { array, index } => {
                array.walk_mut(f);
                index.walk_mut(f);
            }
            ExprKind::Length(e) | ExprKind::NewArray(e) => e.walk_mut(f),
            ExprKind::Unary { operand, .. } => operand.walk_mut(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk_mut(f);
                rhs.walk_mut(f);
            }
            ExprKind::Call { receiver, args, .. } => {
                receiver.walk_mut(f);
                args.iter_mut().for_each(|a| a.walk_mut(f));
            }
            ExprKind::New { args, .. } => args.iter_mut().for_each(|a| a.walk_mut(f)),
            _ => {}
        }
    }

    /// True if evaluating the expression cannot run production code or allocate.
    pub fn is_pure(&self) -> bool {
        let mut pure = true;
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::Call { .. } | ExprKind::New { .. } | ExprKind::NewArray(_)) {
                pure = false;
            }
        });
        pure
    }
}

impl Stmt {
    /// Direct expressions of this statement (not those of nested bodies).
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        match &self.kind {
            StmtKind::Var { init, .. } => out.extend(init.iter()),
            StmtKind::Assign { place, value } => {
                match place {
                    Place::Local(_) => {}
                    Place::Field { obj, .. } => out.push(obj),
                    Place::Index { array, index } => {
                        out.push(array);
                        out.push(index);
                    }
                }
                out.push(value);
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => out.push(cond),
            StmtKind::For { cond, .. } => out.extend(cond.iter()),
            StmtKind::Return(e) => out.extend(e.iter()),
            StmtKind::Call(e) => out.push(e),
        }
        out
    }

    /// Visits every statement in `stmts`, recursing into nested bodies.
    pub fn walk_all<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
        for s in stmts {
            f(s);
            match &s.kind {
                StmtKind::If { then_body, else_body, .. } => {
                    Stmt::walk_all(then_body, f);
                    if let Some(e) = else_body {
                        Stmt::walk_all(e, f);
                    }
                }
                StmtKind::While { body, .. } => Stmt::walk_all(body, f),
                StmtKind::For { init, step, body, .. } => {
                    if let Some(i) = init {
                        f(i);
                    }
                    if let Some(st) = step {
                        f(st);
                    }
                    Stmt::walk_all(body, f);
                }
                _ => {}
            }
        }
    }

    pub fn walk_all_mut(stmts: &mut [Stmt], f: &mut impl FnMut(&mut Stmt)) {
        for s in stmts {
            f(s);
            match &mut s.kind {
                StmtKind::If { then_body, else_body, .. } => {
                    Stmt::walk_all_mut(then_body, f);
                    if let Some(e) = else_body {
                        Stmt::walk_all_mut(e, f);
                    }
                }
                StmtKind::While { body, .. } => Stmt::walk_all_mut(body, f),
                StmtKind::For { init, step, body, .. } => {
                    if let Some(i) = init {
                        f(i);
                    }
                    if let Some(st) = step {
                        f(st);
                    }
                    Stmt::walk_all_mut(body, f);
                }
                _ => {}
            }
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        let mut out = Vec::new();
        match &mut self.kind {
            StmtKind::Var { init, .. } => out.extend(init.iter_mut()),
            StmtKind::Assign { place, value } => {
                match place {
                    Place::Local(_) => {}
                    Place::Field { obj, .. } => out.push(obj),
                    Place::Index { array, index } => {
                        out.push(array);
                        out.push(index);
                    }
                }
                out.push(value);
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => out.push(cond),
            StmtKind::For { cond, .. } => out.extend(cond.iter_mut()),
            StmtKind::Return(e) => out.extend(e.iter_mut()),
            StmtKind::Call(e) => out.push(e),
        }
        out
    }
}
