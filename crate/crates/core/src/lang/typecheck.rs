// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            span,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}: {}",
            self.span.line, self.span.col, self.severity, self.message
        )
    }
}

/// Where an expression occurs; decides whether `old` is allowed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Pre,
    Post,
    Body,
}

pub fn typecheck(p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for r in &p.routines {
        check_routine(r, &mut diags);
    }
    diags
}

pub fn check_routine(r: &Routine, diags: &mut Vec<Diagnostic>) {
    let mut tc = Checker { r, diags };
    for e in &r.precondition {
        tc.expect(e, Type::Bool, Ctx::Pre, r.span, "precondition");
        e.visit(&mut |sub| {
            if let Expr::Var(v) = sub {
                if !r.is_param(v) {
                    tc.diags.push(Diagnostic::error(
                        r.span,
                        format!("precondition of `{}` may only refer to parameters, found `{v}`", r.name),
                    ));
                }
            }
        });
    }
    for e in &r.postcondition {
        tc.expect(e, Type::Bool, Ctx::Post, r.span, "postcondition");
    }
    tc.block(&r.body);
}

struct Checker<'a> {
    r: &'a Routine,
    diags: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn block(&mut self, instrs: &[Instr]) {
        for i in instrs {
            self.instr(i);
        }
    }

    fn instr(&mut self, i: &Instr) {
        match i {
            Instr::Assign {
                target,
                value,
                span,
            } => {
                let Some(var_ty) = self.r.lookup(target.root()) else {
                    self.diags.push(Diagnostic::error(
                        *span,
                        format!("undeclared identifier `{}`", target.root()),
                    ));
                    return;
                };
                let target_ty = match target {
                    LValue::Var(_) => var_ty,
                    LValue::Index(name, idx) => {
                        if var_ty != Type::IntArray {
                            self.diags.push(Diagnostic::error(
                                *span,
                                format!("`{name}` is not an array and cannot be indexed"),
                            ));
                        }
                        self.expect(idx, Type::Int, Ctx::Body, *span, "array index");
                        Type::Int
                    }
                };
                self.expect(value, target_ty, Ctx::Body, *span, "assigned value");
            }
            Instr::If {
                branches,
                else_block,
                span,
                ..
            } => {
                for (g, b) in branches {
                    self.expect(g, Type::Bool, Ctx::Body, *span, "conditional guard");
                    self.block(b);
                }
                self.block(else_block);
            }
            Instr::While {
                guard,
                invariant,
                variant,
                body,
                span,
            } => {
                self.expect(guard, Type::Bool, Ctx::Body, *span, "loop guard");
                for e in invariant {
                    self.expect(e, Type::Bool, Ctx::Body, *span, "loop invariant");
                }
                if let Some(v) = variant {
                    self.expect(v, Type::Int, Ctx::Body, *span, "loop variant");
                }
                self.block(body);
            }
            Instr::Check { cond, span } => {
                self.expect(cond, Type::Bool, Ctx::Body, *span, "check condition");
            }
        }
    }

    fn expect(&mut self, e: &Expr, want: Type, ctx: Ctx, span: Span, what: &str) {
        if let Some(got) = self.infer(e, ctx, span) {
            if got != want {
                self.diags.push(Diagnostic::error(
                    span,
                    format!("{what} must be {want}, found {got}"),
                ));
            }
        }
    }

    /// `None` once an error has been reported for the subtree.
    fn infer(&mut self, e: &Expr, ctx: Ctx, span: Span) -> Option<Type> {
        let operand = |this: &mut Self, inner: &Expr, want: Type, what: &str| -> bool {
            match this.infer(inner, ctx, span) {
                Some(t) if t == want => true,
                Some(t) => {
                    this.diags.push(Diagnostic::error(
                        span,
                        format!("{what} expects {want}, found {t}"),
                    ));
                    false
                }
                None => false,
            }
        };
        match e {
            Expr::Int(_) => Some(Type::Int),
            Expr::Bool(_) => Some(Type::Bool),
            Expr::Var(v) => match self.r.lookup(v) {
                Some(t) => Some(t),
                None => {
                    self.diags
                        .push(Diagnostic::error(span, format!("undeclared identifier `{v}`")));
                    None
                }
            },
            Expr::Index(a, i) => {
                let ok_a = operand(self, a, Type::IntArray, "indexing");
                let ok_i = operand(self, i, Type::Int, "array index");
                (ok_a && ok_i).then_some(Type::Int)
            }
            Expr::Len(a) => operand(self, a, Type::IntArray, "len").then_some(Type::Int),
            Expr::Unary(UnOp::Neg, a) => operand(self, a, Type::Int, "unary minus").then_some(Type::Int),
            Expr::Unary(UnOp::Not, a) => operand(self, a, Type::Bool, "not").then_some(Type::Bool),
            Expr::Old(inner) => {
                if ctx != Ctx::Post {
                    self.diags.push(Diagnostic::error(
                        span,
                        "`old` is only allowed in postconditions",
                    ));
                    return None;
                }
                self.infer(inner, ctx, span)
            }
            Expr::Binary(op, l, r) => {
                if op.is_arithmetic() {
                    let ok_l = operand(self, l, Type::Int, op.symbol());
                    let ok_r = operand(self, r, Type::Int, op.symbol());
                    (ok_l && ok_r).then_some(Type::Int)
                } else if op.is_logical() {
                    let ok_l = operand(self, l, Type::Bool, op.symbol());
                    let ok_r = operand(self, r, Type::Bool, op.symbol());
                    (ok_l && ok_r).then_some(Type::Bool)
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let lt = self.infer(l, ctx, span)?;
                    let rt = self.infer(r, ctx, span)?;
                    if lt != rt || lt == Type::IntArray {
                        self.diags.push(Diagnostic::error(
                            span,
                            format!("cannot compare {lt} with {rt} using `{}`", op.symbol()),
                        ));
                        return None;
                    }
                    Some(Type::Bool)
                } else {
                    let ok_l = operand(self, l, Type::Int, op.symbol());
                    let ok_r = operand(self, r, Type::Int, op.symbol());
                    (ok_l && ok_r).then_some(Type::Bool)
                }
            }
        }
    }
}
