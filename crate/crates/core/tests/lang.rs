// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use seedcov::interp::{Interpreter, RunError};
use seedcov::lang::{parse_program, pretty_print, typecheck, BinOp, Expr, Instr, Program, Severity};
use seedcov::sampling::valid_inputs;

#[test]
fn corpus_round_trips() {
    for e in common::corpus() {
        let p = parse_program(&e.source).unwrap();
        let printed = pretty_print(&p);
        assert_eq!(parse_program(&printed).unwrap(), p, "{}", e.name());
        // Printing is a fixed point after one round.
        assert_eq!(pretty_print(&parse_program(&printed).unwrap()), printed);
    }
}

#[test]
fn corpus_typechecks_cleanly() {
    for e in common::corpus() {
        let p = parse_program(&e.source).unwrap();
        assert!(typecheck(&p).is_empty(), "{}", e.name());
    }
}

const OPS: [BinOp; 12] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
    BinOp::Implies,
];

/// Rewrites the `k`-th expression node (pre-order) with `f`.
fn mutate_expr(e: &mut Expr, k: &mut usize, f: &dyn Fn(&Expr) -> Expr) -> bool {
    if *k == 0 {
        *e = f(e);
        return true;
    }
    *k -= 1;
    match e {
        Expr::Index(a, b) | Expr::Binary(_, a, b) => mutate_expr(a, k, f) || mutate_expr(b, k, f),
        Expr::Unary(_, a) | Expr::Len(a) | Expr::Old(a) => mutate_expr(a, k, f),
        _ => false,
    }
}

fn mutate_block(b: &mut [Instr], k: &mut usize, f: &dyn Fn(&Expr) -> Expr) -> bool {
    for i in b {
        let done = match i {
            Instr::Assign { value, .. } => mutate_expr(value, k, f),
            Instr::Check { cond, .. } => mutate_expr(cond, k, f),
            Instr::If {
                branches,
                else_block,
                ..
            } => {
                branches
                    .iter_mut()
                    .any(|(g, body)| mutate_expr(g, k, f) || mutate_block(body, k, f))
                    || mutate_block(else_block, k, f)
            }
            Instr::While {
                guard,
                invariant,
                body,
                ..
            } => {
                mutate_expr(guard, k, f)
                    || invariant.iter_mut().any(|e| mutate_expr(e, k, f))
                    || mutate_block(body, k, f)
            }
        };
        if done {
            return true;
        }
    }
    false
}

fn mutant(p: &Program, site: usize, choice: usize) -> Program {
    let mut p = p.clone();
    let replace = move |e: &Expr| -> Expr {
        match (e, choice % 4) {
            (Expr::Binary(_, l, r), _) => Expr::Binary(OPS[choice % OPS.len()], l.clone(), r.clone()),
            (Expr::Int(n), 0) => Expr::Bool(*n % 2 == 0),
            (Expr::Int(n), _) => Expr::Int(n.wrapping_add(choice as i64 - 2)),
            (Expr::Bool(b), 0) => Expr::Int(*b as i64),
            (Expr::Bool(b), _) => Expr::Bool(!b),
            (Expr::Var(_), 1) => Expr::Int(0),
            (Expr::Var(_), 2) => Expr::Bool(true),
            (Expr::Unary(_, a), _) => (**a).clone(),
            (other, _) => other.clone(),
        }
    };
    let mut k = site;
    mutate_block(&mut p.routines[0].body, &mut k, &replace);
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Mutants of corpus routines that still typecheck never make the
    /// interpreter apply an operator to a wrong-typed value.
    #[test]
    fn typecheck_is_sound_on_mutants(entry in 0usize..14, site in 0usize..60, choice in 0usize..24, seed in 0u64..1000) {
        let corpus = common::corpus();
        let e = &corpus[entry % corpus.len()];
        let p = mutant(&parse_program(&e.source).unwrap(), site, choice);
        prop_assume!(!typecheck(&p).iter().any(|d| d.severity == Severity::Error));
        let interp = Interpreter::new(&p.routines[0]).with_step_limit(20_000);
        for inputs in valid_inputs(&interp, seed, 8) {
            let r = interp.run(&inputs);
            prop_assert!(!matches!(r, Err(RunError::IllTyped(_))), "{:?} on {}", r, pretty_print(&p));
        }
        // Mutants also round-trip through the printer.
        prop_assert_eq!(parse_program(&pretty_print(&p)).unwrap(), p);
    }
}
