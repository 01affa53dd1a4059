// SPDX-License-Identifier: Apache-2.0

//! Substitution-based weakest preconditions for loop-free statements.
//!
//! Variables are named by their entry symbols (`in.x`, `len.a`), so the
//! result is a formula over the state before the statements. Array accesses
//! are assumed to be in bounds.

use crate::lang::{Expr, LValue, UnOp};
use crate::smt::model::{entry_symbol, length_symbol};
use crate::smt::term::Term;

use super::encode::binary;
use super::ivl::Stmt;
use super::VcError;

/// Translates an expression over the current state.
pub fn term_of(e: &Expr) -> Term {
    match e {
        Expr::Int(n) => Term::int(*n),
        Expr::Bool(b) => Term::Bool(*b),
        Expr::Var(x) => Term::sym(entry_symbol(x)),
        Expr::Index(a, i) => Term::select(term_of(a), term_of(i)),
        Expr::Len(a) => match &**a {
            Expr::Var(x) => Term::sym(length_symbol(x)),
            other => panic!("unsupported array expression {other:?}"),
        },
        Expr::Unary(UnOp::Neg, a) => Term::neg(term_of(a)),
        Expr::Unary(UnOp::Not, a) => Term::not(term_of(a)),
        Expr::Binary(op, l, r) => binary(*op, term_of(l), term_of(r)),
        Expr::Old(inner) => term_of(inner),
    }
}

pub fn wp(stmts: &[Stmt], post: Term) -> Result<Term, VcError> {
    let mut q = post;
    for s in stmts.iter().rev() {
        q = wp_stmt(s, q)?;
    }
    Ok(q)
}

fn wp_stmt(s: &Stmt, post: Term) -> Result<Term, VcError> {
    Ok(match s {
        Stmt::Assign(LValue::Var(x), value) => {
            let sym = entry_symbol(x);
            let v = term_of(value);
            // Whole-array assignment also replaces the length.
            let len = match value {
                Expr::Var(src) => Some((length_symbol(x), Term::sym(length_symbol(src)))),
                _ => None,
            };
            post.substitute(&|n| {
                if n == sym {
                    Some(v.clone())
                } else {
                    len.as_ref().filter(|(l, _)| l == n).map(|(_, t)| t.clone())
                }
            })
        }
        Stmt::Assign(LValue::Index(a, i), value) => {
            let sym = entry_symbol(a);
            let stored = Term::store(Term::sym(&sym), term_of(i), term_of(value));
            post.substitute(&|n| (n == sym).then(|| stored.clone()))
        }
        Stmt::Check(c, _) => Term::and([term_of(c), post]),
        Stmt::Assume(c) => Term::implies(term_of(c), post),
        Stmt::If(g, a, b) => {
            let g = term_of(g);
            Term::and([
                Term::implies(g.clone(), wp(a, post.clone())?),
                Term::implies(Term::not(g), wp(b, post)?),
            ])
        }
        Stmt::Havoc(_) | Stmt::HavocCells(_) => return Err(VcError::Unsupported("havoc has no quantifier-free wp".into())),
    })
}
