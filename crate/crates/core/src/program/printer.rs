//! Canonical source printer.
//!
//! Every statement is emitted on the line it was parsed from, so re-parsing
//! the output reproduces the same line-based coverage targets.

use super::ast::*;

struct Printer<'a> {
    program: &'a MiniProgram,
    out: String,
    line: u32,
}

pub fn print_program(program: &MiniProgram) -> String {
    let mut p = Printer { program, out: String::new(), line: 1 };
    for (ci, class) in program.classes.iter().enumerate() {
        p.goto(class.line, 0);
        if ci == program.cut && program.classes.len() > 1 {
            p.out.push_str("cut ");
        }
        p.out.push_str(&format!("class {} {{", class.name));
        for f in &class.fields {
            p.goto(f.line, 1);
            p.out.push_str(&format!("field {} {};", program.type_name(f.ty), f.name));
        }
        for m in &class.methods {
            p.method(m);
        }
        p.out.push_str(" }");
    }
    p.out.push('\n');
    p.out
}

impl Printer<'_> {
    /// Moves to `line` (emitting newlines plus indentation) or separates with a space.
    fn goto(&mut self, line: u32, depth: usize) {
        if self.line < line {
            while self.line < line {
                self.out.push('\n');
                self.line += 1;
            }
            for _ in 0..depth {
                self.out.push_str("  ");
            }
        } else if !self.out.is_empty() && !self.out.ends_with(' ') && !self.out.ends_with('\n') {
            self.out.push(' ');
        }
    }

    fn method(&mut self, m: &MethodDef) {
        self.goto(m.line, 1);
        let params: Vec<String> =
            m.params().iter().map(|p| format!("{} {}", self.program.type_name(p.ty), p.name)).collect();
        match m.kind {
            MethodKind::Ctor => self.out.push_str(&format!("ctor({}) {{", params.join(", "))),
            MethodKind::Method => self.out.push_str(&format!(
                "method {} {}({}) {{",
                self.program.type_name(m.ret),
                m.name,
                params.join(", ")
            )),
        }
        self.block(m, &m.body, 2);
        self.out.push_str(" }");
    }

    fn block(&mut self, m: &MethodDef, stmts: &[Stmt], depth: usize) {
        for s in stmts {
            self.stmt(m, s, depth);
        }
    }

    fn simple(&self, m: &MethodDef, s: &Stmt) -> String {
        match &s.kind {
            StmtKind::Var { slot, init } => {
                let l = &m.locals[*slot];
                match init {
                    Some(e) => format!("var {} {} = {}", self.program.type_name(l.ty), l.name, self.expr(m, e)),
                    None => format!("var {} {}", self.program.type_name(l.ty), l.name),
                }
            }
            StmtKind::Assign { place, value } => format!("{} = {}", self.place(m, place), self.expr(m, value)),
            _ => unreachable!("not a simple statement"),
        }
    }

    fn stmt(&mut self, m: &MethodDef, s: &Stmt, depth: usize) {
        self.goto(s.line, depth);
        match &s.kind {
            StmtKind::Var { .. } | StmtKind::Assign { .. } => {
                let text = self.simple(m, s);
                self.out.push_str(&text);
                self.out.push(';');
            }
            StmtKind::If { cond, then_body, else_body } => {
                let c = self.expr(m, cond);
                self.out.push_str(&format!("if ({c}) {{"));
                self.block(m, then_body, depth + 1);
                self.out.push_str(" }");
                if let Some(e) = else_body {
                    self.out.push_str(" else {");
                    self.block(m, e, depth + 1);
                    self.out.push_str(" }");
                }
            }
            StmtKind::While { cond, body } => {
                let c = self.expr(m, cond);
                self.out.push_str(&format!("while ({c}) {{"));
                self.block(m, body, depth + 1);
                self.out.push_str(" }");
            }
            StmtKind::For { init, cond, step, body } => {
                let i = init.as_ref().map(|s| self.simple(m, s)).unwrap_or_default();
                let c = cond.as_ref().map(|e| self.expr(m, e)).unwrap_or_default();
                let st = step.as_ref().map(|s| self.simple(m, s)).unwrap_or_default();
                self.out.push_str(&format!("for ({i}; {c}; {st}) {{"));
                self.block(m, body, depth + 1);
                self.out.push_str(" }");
            }
            StmtKind::Return(v) => match v {
                Some(e) => {
                    let e = self.expr(m, e);
                    self.out.push_str(&format!("return {e};"));
                }
                None => self.out.push_str("return;"),
            },
            StmtKind::Call(e) => {
                let e = self.expr(m, e);
                self.out.push_str(&format!("call {e};"));
            }
        }
    }

    fn place(&self, m: &MethodDef, p: &Place) -> String {
        match p {
            Place::Local(slot) => m.locals[*slot].name.clone(),
            Place::Field { obj, class, field } => {
                format!("{}.{}", self.postfix_operand(m, obj), self.program.classes[*class].fields[*field].name)
            }
            Place::Index { array, index } => format!("{}[{}]", self.postfix_operand(m, array), self.expr(m, index)),
        }
    }

    fn postfix_operand(&self, m: &MethodDef, e: &Expr) -> String {
        let s = self.expr(m, e);
        match &e.kind {
            ExprKind::Binary { .. } | ExprKind::Unary { .. } => format!("({s})"),
            ExprKind::Int(v) if *v < 0 => format!("({s})"),
            ExprKind::Float(v) if v.is_sign_negative() => format!("({s})"),
            _ => s,
        }
    }

    fn expr(&self, m: &MethodDef, e: &Expr) -> String {
        match &e.kind {
            ExprKind::Int(v) => v.to_string(),
            ExprKind::Float(v) => format_float(*v),
            ExprKind::Bool(v) => v.to_string(),
            ExprKind::Null => "null".into(),
            ExprKind::Local(slot) => m.locals[*slot].name.clone(),
            ExprKind::This => "this".into(),
            ExprKind::Field { obj, class, field } => {
                format!("{}.{}", self.postfix_operand(m, obj), self.program.classes[*class].fields[*field].name)
            }
            ExprKind::Index { array, index } => format!("{}[{}]", self.postfix_operand(m, array), self.expr(m, index)),
            ExprKind::Length(a) => format!("{}.length", self.postfix_operand(m, a)),
            ExprKind::Unary { op, operand } => {
                let sym = match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                    UnOp::BitNot => "~",
                };
                let inner = self.expr(m, operand);
                let wrap = match &operand.kind {
                    ExprKind::Binary { .. } => true,
                    ExprKind::Int(v) => *v < 0 || *op == UnOp::Neg,
                    ExprKind::Float(_) => *op == UnOp::Neg,
                    ExprKind::Unary { .. } => *op == UnOp::Neg,
                    _ => false,
                };
                if wrap {
                    format!("{sym}({inner})")
                } else {
                    format!("{sym}{inner}")
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                let l = self.expr(m, lhs);
                let r = self.expr(m, rhs);
                let l = match &lhs.kind {
                    ExprKind::Binary { op: lop, .. } if lop.precedence() < prec => format!("({l})"),
                    _ => l,
                };
                let r = match &rhs.kind {
                    ExprKind::Binary { op: rop, .. } if rop.precedence() <= prec => format!("({r})"),
                    _ => r,
                };
                format!("{l} {op} {r}")
            }
            ExprKind::Call { receiver, method, args } => {
                let args: Vec<String> = args.iter().map(|a| self.expr(m, a)).collect();
                format!(
                    "{}.{}({})",
                    self.postfix_operand(m, receiver),
                    self.program.method(*method).name,
                    args.join(", ")
                )
            }
            ExprKind::New { class, args, .. } => {
                let args: Vec<String> = args.iter().map(|a| self.expr(m, a)).collect();
                format!("new {}({})", self.program.classes[*class].name, args.join(", "))
            }
            ExprKind::NewArray(len) => format!("new int[{}]", self.expr(m, len)),
        }
    }
}

fn format_float(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}
