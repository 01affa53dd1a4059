// SPDX-License-Identifier: Apache-2.0

//! Loop-free intermediate form: source instructions plus `assume` and
//! `havoc`, with loops desugared according to a strategy.

use std::collections::BTreeSet;

use crate::blocks::{is_seed_guard, normalize, BlockId, BlockPath, Child, SeedSite};
use crate::lang::{Expr, Instr, LValue, Routine, Span};
use crate::seeder::SeededRoutine;

use super::{Strategy, VcError};

/// Why a check exists; decides how the encoder treats it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Seed(BlockId),
    Check { line: u32 },
    InvariantEntry { line: u32 },
    InvariantPreserved { line: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign(LValue, Expr),
    Check(Expr, Origin),
    Assume(Expr),
    Havoc(Vec<String>),
    /// Arrays whose cells, but not lengths, become arbitrary.
    HavocCells(Vec<String>),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
}

/// Lowers an unseeded routine (normalised first). Seeds written as
/// `if __bn = k then check c end end` are still recognised.
pub fn desugar_loops(r: &Routine, strategy: Strategy) -> Result<Vec<Stmt>, VcError> {
    let r = normalize(r);
    Lowering {
        strategy,
        seed_of: &|_| None,
    }
    .block(&r.body, &BlockPath::root())
}

/// Lowers a seeded routine, tagging each seeded check with its block.
pub fn desugar_seeded(s: &SeededRoutine, strategy: Strategy) -> Result<Vec<Stmt>, VcError> {
    Lowering {
        strategy,
        seed_of: &|site| s.block_of_check(site),
    }
    .block(&s.routine.body, &BlockPath::root())
}

struct Lowering<'a> {
    strategy: Strategy,
    seed_of: &'a dyn Fn(&SeedSite) -> Option<BlockId>,
}

impl Lowering<'_> {
    fn block(&self, instrs: &[Instr], path: &BlockPath) -> Result<Vec<Stmt>, VcError> {
        let mut out = Vec::new();
        for (idx, i) in instrs.iter().enumerate() {
            self.instr(i, path, idx, &mut out)?;
        }
        Ok(out)
    }

    fn instr(
        &self,
        instr: &Instr,
        path: &BlockPath,
        idx: usize,
        out: &mut Vec<Stmt>,
    ) -> Result<(), VcError> {
        match instr {
            Instr::Assign { target, value, .. } => {
                out.push(Stmt::Assign(target.clone(), value.clone()))
            }
            Instr::Check { cond, span } => {
                let origin = match (self.seed_of)(&SeedSite::new(path.clone(), idx)) {
                    Some(b) => Origin::Seed(b),
                    None => Origin::Check { line: span.line },
                };
                out.push(Stmt::Check(cond.clone(), origin));
            }
            Instr::If {
                branches,
                else_block,
                ..
            } => {
                let (guard, then_block) = &branches[0];
                let then_path = path.child(idx, Child::Then);
                let mut then_s = self.block(then_block, &then_path)?;
                if let Some(k) = seed_number(guard) {
                    // Syntactic seed: its checks belong to block k.
                    for s in &mut then_s {
                        if let Stmt::Check(_, o @ Origin::Check { .. }) = s {
                            *o = Origin::Seed(BlockId(k));
                        }
                    }
                }
                // Arms beyond the first only occur in unnormalised input.
                let else_s = if branches.len() > 1 {
                    let rest = Instr::If {
                        branches: branches[1..].to_vec(),
                        else_block: else_block.clone(),
                        else_explicit: true,
                        span: instr.span(),
                    };
                    let mut v = Vec::new();
                    self.instr(&rest, &path.child(idx, Child::Else), 0, &mut v)?;
                    v
                } else {
                    self.block(else_block, &path.child(idx, Child::Else))?
                };
                out.push(Stmt::If(guard.clone(), then_s, else_s));
            }
            Instr::While {
                guard,
                invariant,
                body,
                span,
                ..
            } => {
                let body_s = self.block(body, &path.child(idx, Child::Body))?;
                self.lower_loop(guard, invariant, body, body_s, *span, out)?;
            }
        }
        Ok(())
    }

    fn lower_loop(
        &self,
        guard: &Expr,
        invariant: &[Expr],
        body: &[Instr],
        body_s: Vec<Stmt>,
        span: Span,
        out: &mut Vec<Stmt>,
    ) -> Result<(), VcError> {
        let line = span.line;
        let entry = || {
            invariant
                .iter()
                .map(|e| Stmt::Check(e.clone(), Origin::InvariantEntry { line }))
        };
        let preserved = || {
            invariant
                .iter()
                .map(|e| Stmt::Check(e.clone(), Origin::InvariantPreserved { line }))
        };
        out.extend(entry());
        match self.strategy {
            Strategy::InvariantHavoc => {
                if invariant.is_empty() {
                    return Err(VcError::MissingInvariant { line });
                }
                let (whole, cells) = modified_split(body);
                out.push(Stmt::Havoc(whole));
                if !cells.is_empty() {
                    out.push(Stmt::HavocCells(cells));
                }
                out.extend(invariant.iter().map(|e| Stmt::Assume(e.clone())));
                let mut iteration = body_s;
                iteration.extend(preserved());
                iteration.push(Stmt::Assume(Expr::Bool(false)));
                out.push(Stmt::If(guard.clone(), iteration, Vec::new()));
            }
            Strategy::Unroll(k) => {
                for _ in 0..k {
                    let mut iteration = body_s.clone();
                    iteration.extend(preserved());
                    out.push(Stmt::If(guard.clone(), iteration, Vec::new()));
                }
            }
        }
        out.push(Stmt::Assume(Expr::not(guard.clone())));
        Ok(())
    }
}

fn seed_number(guard: &Expr) -> Option<u32> {
    if !is_seed_guard(guard) {
        return None;
    }
    match guard {
        Expr::Binary(_, _, r) => match **r {
            Expr::Int(k) => u32::try_from(k).ok(),
            _ => None,
        },
        _ => None,
    }
}

/// Variables assigned anywhere in `instrs`.
pub fn modified(instrs: &[Instr]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(instrs: &[Instr], out: &mut BTreeSet<String>) {
        for i in instrs {
            match i {
                Instr::Assign { target, .. } => {
                    out.insert(target.root().to_string());
                }
                Instr::If {
                    branches,
                    else_block,
                    ..
                } => {
                    for (_, b) in branches {
                        walk(b, out);
                    }
                    walk(else_block, out);
                }
                Instr::While { body, .. } => walk(body, out),
                Instr::Check { .. } => {}
            }
        }
    }
    walk(instrs, &mut out);
    out
}

/// Modified variables split into those assigned as a whole and arrays
/// only written cell by cell.
pub fn modified_split(instrs: &[Instr]) -> (Vec<String>, Vec<String>) {
    let mut whole = BTreeSet::new();
    fn walk(instrs: &[Instr], out: &mut BTreeSet<String>) {
        for i in instrs {
            match i {
                Instr::Assign {
                    target: LValue::Var(x),
                    ..
                } => {
                    out.insert(x.clone());
                }
                Instr::If {
                    branches,
                    else_block,
                    ..
                } => {
                    for (_, b) in branches {
                        walk(b, out);
                    }
                    walk(else_block, out);
                }
                Instr::While { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    walk(instrs, &mut whole);
    let cells = modified(instrs).difference(&whole).cloned().collect();
    (whole.into_iter().collect(), cells)
}

/// Whether any statement still needs quantification (havoc).
pub fn has_havoc(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| match s {
        Stmt::Havoc(_) | Stmt::HavocCells(_) => true,
        Stmt::If(_, a, b) => has_havoc(a) || has_havoc(b),
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, parse_program, BinOp};

    fn routine(src: &str) -> Routine {
        parse_program(src).unwrap().routines.remove(0)
    }

    #[test]
    fn single_unrolling_has_one_copy_and_exit_assumption() {
        let r = routine(
            "routine down(a: INTEGER) do while a > 0 invariant True do a := a - 1 end end",
        );
        let s = desugar_loops(&r, Strategy::Unroll(1)).unwrap();
        let g = parse_expr("a > 0").unwrap();
        assert_eq!(
            s,
            vec![
                Stmt::Check(Expr::Bool(true), Origin::InvariantEntry { line: 1 }),
                Stmt::If(
                    g.clone(),
                    vec![
                        Stmt::Assign(
                            LValue::Var("a".into()),
                            Expr::bin(BinOp::Sub, Expr::var("a"), Expr::Int(1))
                        ),
                        Stmt::Check(Expr::Bool(true), Origin::InvariantPreserved { line: 1 }),
                    ],
                    vec![]
                ),
                Stmt::Assume(Expr::not(g)),
            ]
        );
    }

    #[test]
    fn havoc_requires_invariants() {
        let r = routine("routine spin(a: INTEGER)\ndo\n   while a > 0 do a := a - 1 end\nend");
        assert_eq!(
            desugar_loops(&r, Strategy::InvariantHavoc),
            Err(VcError::MissingInvariant { line: 3 })
        );
    }

    #[test]
    fn havoc_encoding_shape() {
        let r = routine(
            "routine down(a: INTEGER) local i: INTEGER do while i < a invariant i >= 0 do i := i + 1 end end",
        );
        let s = desugar_loops(&r, Strategy::InvariantHavoc).unwrap();
        assert!(matches!(s[0], Stmt::Check(_, Origin::InvariantEntry { .. })));
        assert_eq!(s[1], Stmt::Havoc(vec!["i".into()]));
        assert!(matches!(s[2], Stmt::Assume(_)));
        let Stmt::If(_, body, els) = &s[3] else { panic!() };
        assert!(els.is_empty());
        assert_eq!(body.last(), Some(&Stmt::Assume(Expr::Bool(false))));
        assert!(matches!(s[4], Stmt::Assume(Expr::Unary(..))));
    }
}
