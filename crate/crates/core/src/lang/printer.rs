// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "   ";

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for (i, r) in p.routines.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_routine(r));
    }
    out
}

pub fn print_routine(r: &Routine) -> String {
    let mut out = String::new();
    let params: Vec<String> = r
        .params
        .iter()
        .map(|d| format!("{}: {}", d.name, d.ty))
        .collect();
    let _ = write!(out, "routine {}({})", r.name, params.join("; "));
    if let Some(t) = r.result_type {
        let _ = write!(out, ": {t}");
    }
    out.push('\n');
    if !r.precondition.is_empty() {
        out.push_str("require\n");
        for e in &r.precondition {
            let _ = writeln!(out, "{INDENT}{}", print_assertion(e));
        }
    }
    if !r.locals.is_empty() {
        out.push_str("local\n");
        for d in &r.locals {
            let _ = writeln!(out, "{INDENT}{}: {}", d.name, d.ty);
        }
    }
    out.push_str("do\n");
    print_block(&r.body, 1, &mut out);
    if !r.postcondition.is_empty() {
        out.push_str("ensure\n");
        for e in &r.postcondition {
            let _ = writeln!(out, "{INDENT}{}", print_assertion(e));
        }
    }
    out.push_str("end\n");
    out
}

/// Assertions in a list are juxtaposed, so one starting with `-` would
/// fuse with its predecessor.
fn print_assertion(e: &Expr) -> String {
    let s = print_expr(e);
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_block(instrs: &[Instr], depth: usize, out: &mut String) {
    for i in instrs {
        print_instr(i, depth, out);
    }
}

fn print_instr(i: &Instr, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    match i {
        Instr::Assign { target, value, .. } => {
            let lhs = match target {
                LValue::Var(v) => v.clone(),
                LValue::Index(v, idx) => format!("{v}[{}]", print_expr(idx)),
            };
            let _ = writeln!(out, "{pad}{lhs} := {}", print_expr(value));
        }
        Instr::Check { cond, .. } => {
            let _ = writeln!(out, "{pad}check {} end", print_expr(cond));
        }
        Instr::If {
            branches,
            else_block,
            else_explicit,
            ..
        } => {
            // A guarded single check prints on one line.
            if branches.len() == 1 && else_block.is_empty() && !else_explicit {
                if let [Instr::Check { cond, .. }] = branches[0].1.as_slice() {
                    let _ = writeln!(
                        out,
                        "{pad}if {} then check {} end end",
                        print_expr(&branches[0].0),
                        print_expr(cond)
                    );
                    return;
                }
            }
            for (k, (guard, block)) in branches.iter().enumerate() {
                let kw = if k == 0 { "if" } else { "elseif" };
                let _ = writeln!(out, "{pad}{kw} {} then", print_expr(guard));
                print_block(block, depth + 1, out);
            }
            if *else_explicit {
                let _ = writeln!(out, "{pad}else");
                print_block(else_block, depth + 1, out);
            }
            let _ = writeln!(out, "{pad}end");
        }
        Instr::While {
            guard,
            invariant,
            variant,
            body,
            ..
        } => {
            let _ = writeln!(out, "{pad}while {}", print_expr(guard));
            if !invariant.is_empty() {
                let _ = writeln!(out, "{pad}invariant");
                for e in invariant {
                    let _ = writeln!(out, "{pad}{INDENT}{}", print_assertion(e));
                }
            }
            if let Some(v) = variant {
                let _ = writeln!(out, "{pad}variant");
                let _ = writeln!(out, "{pad}{INDENT}{}", print_expr(v));
            }
            let _ = writeln!(out, "{pad}do");
            print_block(body, depth + 1, out);
            let _ = writeln!(out, "{pad}end");
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, 0, &mut s);
    s
}

fn expr_precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Unary(UnOp::Not, _) => NOT_PRECEDENCE,
        Expr::Unary(UnOp::Neg, _) | Expr::Old(_) => PREFIX_PRECEDENCE,
        Expr::Int(n) if *n < 0 => PREFIX_PRECEDENCE,
        _ => PREFIX_PRECEDENCE + 1,
    }
}

fn write_expr(e: &Expr, ctx: u8, out: &mut String) {
    if expr_precedence(e) < ctx {
        out.push('(');
        write_expr(e, 0, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(true) => out.push_str("True"),
        Expr::Bool(false) => out.push_str("False"),
        Expr::Var(v) => out.push_str(v),
        Expr::Len(a) => {
            out.push_str("len(");
            write_expr(a, 0, out);
            out.push(')');
        }
        Expr::Index(a, i) => {
            write_expr(a, PREFIX_PRECEDENCE + 1, out);
            out.push('[');
            write_expr(i, 0, out);
            out.push(']');
        }
        Expr::Unary(UnOp::Not, inner) => {
            out.push_str("not ");
            write_expr(inner, NOT_PRECEDENCE + 1, out);
        }
        Expr::Unary(UnOp::Neg, inner) => {
            out.push('-');
            // `-5` would re-parse as a literal and `--` opens a comment.
            let needs_paren = matches!(**inner, Expr::Int(_))
                || expr_precedence(inner) < PREFIX_PRECEDENCE
                || matches!(**inner, Expr::Unary(UnOp::Neg, _));
            if needs_paren {
                out.push('(');
                write_expr(inner, 0, out);
                out.push(')');
            } else {
                write_expr(inner, PREFIX_PRECEDENCE, out);
            }
        }
        Expr::Old(inner) => {
            out.push_str("old ");
            write_expr(inner, PREFIX_PRECEDENCE, out);
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let (lctx, rctx) = if *op == BinOp::Implies {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            write_expr(l, lctx, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(r, rctx, out);
        }
    }
}
