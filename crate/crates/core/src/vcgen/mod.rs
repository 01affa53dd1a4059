// SPDX-License-Identifier: Apache-2.0

//! Verification conditions for seeded blocks and for plain verification.

pub mod encode;
pub mod ivl;
pub mod wp;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BlockId, BLOCK_NUMBER};
use crate::lang::{Decl, Routine, Type};
use crate::seeder::SeededRoutine;
use crate::smt::eval::{eval_bool, ArrayValue, Env, EvalError, GroundValue};
use crate::smt::model::{entry_symbol, length_symbol, EntryModel};
use crate::smt::term::{Sort, Term};

pub use encode::{EncodeMode, Encoded, Event, EventOrigin};
pub use ivl::{desugar_loops, desugar_seeded, Origin, Stmt};
pub use wp::wp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    InvariantHavoc,
    Unroll(u32),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::InvariantHavoc => f.write_str("invariant-havoc"),
            Strategy::Unroll(k) => write!(f, "unroll({k})"),
        }
    }
}

/// Bounds assumed on entry values so that every model is executable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputBounds {
    pub scalar: (i64, i64),
    pub len_max: usize,
    pub element: (i64, i64),
}

impl Default for InputBounds {
    fn default() -> Self {
        let w = (i32::MIN as i64, i32::MAX as i64);
        InputBounds {
            scalar: w,
            len_max: 8,
            element: w,
        }
    }
}

impl InputBounds {
    /// Scalars in [-8, 8], arrays of length at most 3 with cells in [-2, 2].
    pub fn small_domain() -> Self {
        InputBounds {
            scalar: (-8, 8),
            len_max: 3,
            element: (-2, 2),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VcError {
    #[error("line {line}: loop has no invariant")]
    MissingInvariant { line: u32 },
    #[error("{0}")]
    Unsupported(String),
    #[error("block {id} out of range: routine has {count} blocks")]
    BlockIdOutOfRange { id: BlockId, count: u32 },
}

/// One satisfiability question over entry values.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationCondition {
    /// `None` for plain verification of an unseeded routine.
    pub target: Option<BlockId>,
    pub strategy: Strategy,
    pub entry: Vec<Decl>,
    pub declarations: Vec<(String, Sort)>,
    pub definitions: Vec<(String, Sort, Term)>,
    pub formula: Term,
    pub len_max: usize,
}

/// The encoding of a whole seeded routine, shared by all its block queries.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub strategy: Strategy,
    pub entry: Vec<Decl>,
    pub declarations: Vec<(String, Sort)>,
    pub definitions: Vec<(String, Sort, Term)>,
    pub events: Vec<Event>,
    pub has_bn: bool,
    pub len_max: usize,
}

impl Encoding {
    /// Disjunction of the violation events of block `i`'s seeds.
    pub fn goal(&self, i: BlockId) -> Term {
        Term::or(
            self.events
                .iter()
                .filter(|e| e.origin == EventOrigin::Stmt(Origin::Seed(i)))
                .map(|e| e.term.clone()),
        )
    }

    /// Per-query assertions on top of the shared definitions.
    pub fn assertions(&self, i: BlockId) -> Vec<Term> {
        let mut out = Vec::new();
        if self.has_bn {
            out.push(Term::eq(
                Term::sym(entry_symbol(BLOCK_NUMBER)),
                Term::int(i.0),
            ));
        }
        out.push(self.goal(i));
        out
    }

    pub fn vc(&self, i: BlockId) -> VerificationCondition {
        VerificationCondition {
            target: Some(i),
            strategy: self.strategy,
            entry: self.entry.clone(),
            declarations: self.declarations.clone(),
            definitions: self.definitions.clone(),
            formula: Term::and(self.assertions(i)),
            len_max: self.len_max,
        }
    }

    /// Whether the encoding is exact, i.e. introduced no havoc symbols.
    pub fn is_exact(&self) -> bool {
        self.declarations.len() == entry_symbol_count(&self.entry)
    }
}

fn entry_symbol_count(entry: &[Decl]) -> usize {
    entry
        .iter()
        .map(|d| if d.ty == Type::IntArray { 2 } else { 1 })
        .sum()
}

impl VerificationCondition {
    /// Symbols the formula depends on once definitions are expanded.
    pub fn free_symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut pending = self.formula.symbols();
        let mut seen = std::collections::HashSet::new();
        while let Some(s) = pending.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            match self.definitions.iter().find(|(n, _, _)| *n == s) {
                Some((_, _, t)) => pending.extend(t.symbols()),
                None => out.push(s),
            }
        }
        out.sort();
        out
    }

    /// Terms requested with `get-value`: scalars, lengths and the cells
    /// an array of maximal length can have.
    pub fn value_terms(&self) -> Vec<String> {
        value_terms(&self.entry, self.len_max)
    }

    /// Evaluates the formula under `model` without a solver. Fails on
    /// symbols the model does not cover (havoc symbols included).
    pub fn holds_in(&self, model: &EntryModel) -> Result<bool, EvalError> {
        let mut env = Env::new();
        for (sym, sort) in &self.declarations {
            match (model.values.get(sym), sort) {
                (Some(v), _) => {
                    env.insert(sym.clone(), v.clone());
                }
                (None, Sort::IntArray) => {
                    env.insert(sym.clone(), GroundValue::Array(ArrayValue::constant(0)));
                }
                (None, _) => return Err(EvalError::Unbound(sym.clone())),
            }
        }
        for (name, _, t) in &self.definitions {
            let v = crate::smt::eval::eval(t, &env)?;
            env.insert(name.clone(), v);
        }
        eval_bool(&self.formula, &env)
    }
}

pub(crate) fn value_terms(entry: &[Decl], len_max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for d in entry {
        let sym = entry_symbol(&d.name);
        match d.ty {
            Type::IntArray => {
                out.push(length_symbol(&d.name));
                for k in 0..len_max {
                    out.push(format!("(select {sym} {k})"));
                }
            }
            _ => out.push(sym),
        }
    }
    out
}

/// Encodes every seed of `s` at once.
pub fn encode_seeded(
    s: &SeededRoutine,
    strategy: Strategy,
    bounds: &InputBounds,
) -> Result<Encoding, VcError> {
    let stmts = desugar_seeded(s, strategy)?;
    let r = &s.routine;
    let enc = encode::Encoder::encode(
        EncodeMode::Target,
        &r.params,
        &r.initialised_vars(),
        bounds,
        &r.precondition,
        &stmts,
        &[],
    );
    Ok(Encoding {
        strategy,
        entry: r.params.clone(),
        declarations: enc.declarations,
        definitions: enc.definitions,
        events: enc.events,
        has_bn: s.has_bn(),
        len_max: bounds.len_max,
    })
}

/// Satisfiable iff some precondition-satisfying entry state drives execution
/// to the seed of block `i` (under the strategy's loop semantics).
pub fn vc_for_block(
    s: &SeededRoutine,
    i: BlockId,
    strategy: Strategy,
    bounds: &InputBounds,
) -> Result<VerificationCondition, VcError> {
    let count = s.block_map.count();
    if i.0 == 0 || i.0 > count {
        return Err(VcError::BlockIdOutOfRange { id: i, count });
    }
    Ok(encode_seeded(s, strategy, bounds)?.vc(i))
}

/// Satisfiable iff some precondition-satisfying entry violates a check,
/// invariant, array bound or the postcondition of `r`.
pub fn verification_vc(
    r: &Routine,
    strategy: Strategy,
    bounds: &InputBounds,
) -> Result<VerificationCondition, VcError> {
    let stmts = desugar_loops(r, strategy)?;
    let enc = encode::Encoder::encode(
        EncodeMode::Verify,
        &r.params,
        &r.initialised_vars(),
        bounds,
        &r.precondition,
        &stmts,
        &r.postcondition,
    );
    Ok(VerificationCondition {
        target: None,
        strategy,
        entry: r.params.clone(),
        declarations: enc.declarations,
        definitions: enc.definitions,
        formula: Term::or(enc.events.into_iter().map(|e| e.term)),
        len_max: bounds.len_max,
    })
}

/// Whether every loop of `r` declares an invariant.
pub fn all_loops_have_invariants(r: &Routine) -> bool {
    use crate::lang::Instr;
    fn walk(instrs: &[Instr]) -> bool {
        instrs.iter().all(|i| match i {
            Instr::While { invariant, body, .. } => !invariant.is_empty() && walk(body),
            Instr::If {
                branches,
                else_block,
                ..
            } => branches.iter().all(|(_, b)| walk(b)) && walk(else_block),
            _ => true,
        })
    }
    walk(&r.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{enumerate_blocks, normalize};
    use crate::lang::{parse_expr, parse_program};
    use crate::seeder::{seed_msp, seed_rssp};
    use crate::smt::term::TRUE;

    fn routine(src: &str) -> Routine {
        normalize(&parse_program(src).unwrap().routines.remove(0))
    }

    const SIMPLE: &str = "routine simple(a: INTEGER) local x: INTEGER do \
        if a > 0 then x := 1 else x := 2 end end";

    #[test]
    fn wp_of_assignment_and_check() {
        let s = vec![Stmt::Assign(
            crate::lang::LValue::Var("x".into()),
            crate::lang::Expr::Int(1),
        )];
        let post = wp::term_of(&parse_expr("x = 1").unwrap());
        assert_eq!(wp(&s, post).unwrap(), TRUE);
        let c = vec![Stmt::Check(
            crate::lang::Expr::Bool(false),
            Origin::Check { line: 0 },
        )];
        assert!(wp(&c, TRUE).unwrap().is_false());
    }

    #[test]
    fn wp_of_seeded_simple_is_not_positive() {
        let r = routine(SIMPLE);
        let m = enumerate_blocks(&r);
        let s = seed_msp(&r, &m, BlockId(1)).unwrap();
        let stmts = desugar_seeded(&s, Strategy::Unroll(1)).unwrap();
        let w = wp(&stmts, TRUE).unwrap();
        // Oracle: truth table of not (a > 0) over a small range.
        for a in -3i128..=3 {
            let mut env = Env::new();
            env.insert("in.a".into(), GroundValue::Int(a));
            env.insert("in.x".into(), GroundValue::Int(0));
            assert_eq!(eval_bool(&w, &env).unwrap(), a <= 0, "a = {a}");
        }
    }

    #[test]
    fn formula_mentions_only_entry_variables() {
        let r = routine(SIMPLE);
        let m = enumerate_blocks(&r);
        let s = seed_rssp(&r, &m);
        let enc = encode_seeded(&s, Strategy::Unroll(1), &InputBounds::default()).unwrap();
        assert!(enc.is_exact());
        let vc = enc.vc(BlockId(1));
        assert_eq!(vc.free_symbols(), vec!["in.__bn".to_string(), "in.a".to_string()]);
    }

    #[test]
    fn ground_evaluation_matches_reachability() {
        let r = routine(SIMPLE);
        let m = enumerate_blocks(&r);
        let s = seed_rssp(&r, &m);
        let enc = encode_seeded(&s, Strategy::Unroll(1), &InputBounds::default()).unwrap();
        for (block, a, expect) in [(1, 5, true), (1, 0, false), (2, 0, true), (2, 3, false)] {
            let vc = enc.vc(BlockId(block));
            let mut model = EntryModel::default();
            model.values.insert("in.a".into(), GroundValue::Int(a));
            model.values.insert("in.__bn".into(), GroundValue::Int(block as i128));
            assert_eq!(vc.holds_in(&model).unwrap(), expect, "block {block}, a = {a}");
        }
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let r = routine(SIMPLE);
        let s = seed_rssp(&r, &enumerate_blocks(&r));
        assert_eq!(
            vc_for_block(&s, BlockId(3), Strategy::Unroll(1), &InputBounds::default()),
            Err(VcError::BlockIdOutOfRange {
                id: BlockId(3),
                count: 2
            })
        );
    }
}
