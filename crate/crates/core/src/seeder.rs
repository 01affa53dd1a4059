// SPDX-License-Identifier: Apache-2.0

//! Insertion of always-false checks into leaf blocks.
//!
//! RSSP keeps one routine and guards each seed with `__bn = i`, where `__bn`
//! is an appended parameter constrained to `0..=N`. MSP builds one routine
//! per block with an unconditional seed. Loop blocks are seeded just before
//! the loop: body entry as `check not guard end`, zero iteration as
//! `check guard end`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{
    is_seed_guard, BlockEntry, BlockId, BlockKind, BlockMap, BlockPath, Child, SeedSite,
    BLOCK_NUMBER,
};
use crate::lang::{BinOp, Decl, Expr, Instr, Routine, Span, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedMode {
    Rssp,
    Msp,
}

impl fmt::Display for SeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedMode::Rssp => "rssp",
            SeedMode::Msp => "msp",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SeedError {
    #[error("block {id} out of range: routine has {count} blocks")]
    BlockIdOutOfRange { id: BlockId, count: u32 },
}

/// Where one seed ended up in the instrumented routine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedRecord {
    pub block: BlockId,
    /// The inserted instruction (the guarding `if` under RSSP).
    pub instr: SeedSite,
    /// The seeded `check` itself.
    pub check: SeedSite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeededRoutine {
    pub routine: Routine,
    pub bn_param: String,
    pub block_map: BlockMap,
    pub mode: SeedMode,
    pub msp_target: Option<BlockId>,
    pub seeds: Vec<SeedRecord>,
    original_pre_len: usize,
}

impl SeededRoutine {
    /// The block whose seeded check sits at `check`, if any.
    pub fn block_of_check(&self, check: &SeedSite) -> Option<BlockId> {
        self.seeds
            .iter()
            .find(|s| &s.check == check)
            .map(|s| s.block)
    }

    pub fn check_site(&self, id: BlockId) -> Option<&SeedSite> {
        self.seeds.iter().find(|s| s.block == id).map(|s| &s.check)
    }

    pub fn has_bn(&self) -> bool {
        self.mode == SeedMode::Rssp
    }
}

fn bn_eq(i: BlockId) -> Expr {
    Expr::bin(BinOp::Eq, Expr::var(BLOCK_NUMBER), Expr::Int(i.0 as i64))
}

/// The condition a seed checks: false for a leaf, the loop-entry state for
/// loop blocks.
fn seed_condition(entry: &BlockEntry, r: &Routine) -> Expr {
    match entry.kind {
        BlockKind::LoopBodyEntry | BlockKind::LoopZeroIteration => {
            let list = crate::blocks::block_at(&r.body, &entry.site.block)
                .expect("loop site resolves");
            let Instr::While { guard, .. } = &list[entry.site.index] else {
                panic!("loop site {} does not point at a loop", entry.site)
            };
            if entry.kind == BlockKind::LoopBodyEntry {
                Expr::not(guard.clone())
            } else {
                guard.clone()
            }
        }
        _ => Expr::Bool(false),
    }
}

/// Repeatedly Seeded Single Program: all blocks, each behind `__bn = i`.
pub fn seed_rssp(r: &Routine, m: &BlockMap) -> SeededRoutine {
    let mut inserts: HashMap<SeedSite, Vec<(BlockId, Instr, bool)>> = HashMap::new();
    for e in &m.entries {
        let span = Span::new(e.line, 0);
        let seed = Instr::If {
            branches: vec![(
                bn_eq(e.id),
                vec![Instr::Check {
                    cond: seed_condition(e, r),
                    span,
                }],
            )],
            else_block: Vec::new(),
            else_explicit: false,
            span,
        };
        inserts.entry(e.site.clone()).or_default().push((e.id, seed, true));
    }
    let mut seeds = Vec::new();
    let body = rebuild(&r.body, &BlockPath::root(), &BlockPath::root(), &inserts, &mut seeds);
    seeds.sort_by_key(|s| s.block);

    let mut routine = r.clone();
    routine.body = body;
    routine.params.push(Decl::new(BLOCK_NUMBER, Type::Int));
    routine.precondition.push(Expr::bin(
        BinOp::Ge,
        Expr::var(BLOCK_NUMBER),
        Expr::Int(0),
    ));
    routine.precondition.push(Expr::bin(
        BinOp::Le,
        Expr::var(BLOCK_NUMBER),
        Expr::Int(m.count() as i64),
    ));
    SeededRoutine {
        routine,
        bn_param: BLOCK_NUMBER.to_string(),
        block_map: m.clone(),
        mode: SeedMode::Rssp,
        msp_target: None,
        seeds,
        original_pre_len: r.precondition.len(),
    }
}

/// Multiple Seeded Programs: the variant for block `i` alone.
pub fn seed_msp(r: &Routine, m: &BlockMap, i: BlockId) -> Result<SeededRoutine, SeedError> {
    let entry = m.get(i).ok_or(SeedError::BlockIdOutOfRange {
        id: i,
        count: m.count(),
    })?;
    let seed = Instr::Check {
        cond: seed_condition(entry, r),
        span: Span::new(entry.line, 0),
    };
    let mut inserts = HashMap::new();
    inserts.insert(entry.site.clone(), vec![(i, seed, false)]);
    let mut seeds = Vec::new();
    let body = rebuild(&r.body, &BlockPath::root(), &BlockPath::root(), &inserts, &mut seeds);
    let mut routine = r.clone();
    routine.body = body;
    Ok(SeededRoutine {
        routine,
        bn_param: BLOCK_NUMBER.to_string(),
        block_map: m.clone(),
        mode: SeedMode::Msp,
        msp_target: Some(i),
        seeds,
        original_pre_len: r.precondition.len(),
    })
}

fn rebuild(
    instrs: &[Instr],
    orig: &BlockPath,
    new: &BlockPath,
    inserts: &HashMap<SeedSite, Vec<(BlockId, Instr, bool)>>,
    seeds: &mut Vec<SeedRecord>,
) -> Vec<Instr> {
    let mut out = Vec::with_capacity(instrs.len());
    for idx in 0..=instrs.len() {
        if let Some(list) = inserts.get(&SeedSite::new(orig.clone(), idx)) {
            for (id, seed, guarded) in list {
                let at = SeedSite::new(new.clone(), out.len());
                let check = if *guarded {
                    SeedSite::new(new.child(out.len(), Child::Then), 0)
                } else {
                    at.clone()
                };
                seeds.push(SeedRecord {
                    block: *id,
                    instr: at,
                    check,
                });
                out.push(seed.clone());
            }
        }
        let Some(instr) = instrs.get(idx) else { break };
        let k = out.len();
        let rebuilt = match instr {
            Instr::If {
                branches,
                else_block,
                else_explicit,
                span,
            } => {
                let then = rebuild(
                    &branches[0].1,
                    &orig.child(idx, Child::Then),
                    &new.child(k, Child::Then),
                    inserts,
                    seeds,
                );
                let els = rebuild(
                    else_block,
                    &orig.child(idx, Child::Else),
                    &new.child(k, Child::Else),
                    inserts,
                    seeds,
                );
                let mut branches = branches.clone();
                branches[0].1 = then;
                Instr::If {
                    branches,
                    else_block: els,
                    else_explicit: *else_explicit,
                    span: *span,
                }
            }
            Instr::While {
                guard,
                invariant,
                variant,
                body,
                span,
            } => Instr::While {
                guard: guard.clone(),
                invariant: invariant.clone(),
                variant: variant.clone(),
                body: rebuild(
                    body,
                    &orig.child(idx, Child::Body),
                    &new.child(k, Child::Body),
                    inserts,
                    seeds,
                ),
                span: *span,
            },
            other => other.clone(),
        };
        out.push(rebuilt);
    }
    out
}

/// Removes every seed and the block-number parameter, recovering the
/// normalised routine the seeds were placed into.
pub fn erase(s: &SeededRoutine) -> Routine {
    let mut r = s.routine.clone();
    let mut sites: Vec<&SeedSite> = s.seeds.iter().map(|x| &x.instr).collect();
    // Later sites first so earlier removals cannot shift pending paths.
    sites.sort();
    for site in sites.into_iter().rev() {
        if let Some(list) = block_at_mut(&mut r.body, &site.block) {
            list.remove(site.index);
        }
    }
    if s.mode == SeedMode::Rssp {
        r.params.retain(|d| d.name != s.bn_param);
        r.precondition.truncate(s.original_pre_len);
    }
    r
}

/// Syntactic seed removal for routines of unknown provenance: drops
/// `__bn`-guarded conditionals, the `__bn` parameter and any precondition
/// mentioning it. Identity on unseeded routines.
pub fn strip_seeds(r: &Routine) -> Routine {
    fn strip(instrs: &[Instr]) -> Vec<Instr> {
        instrs
            .iter()
            .filter(|i| {
                !matches!(i, Instr::If { branches, .. }
                    if branches.len() == 1 && is_seed_guard(&branches[0].0))
            })
            .map(|i| match i {
                Instr::If {
                    branches,
                    else_block,
                    else_explicit,
                    span,
                } => Instr::If {
                    branches: branches
                        .iter()
                        .map(|(g, b)| (g.clone(), strip(b)))
                        .collect(),
                    else_block: strip(else_block),
                    else_explicit: *else_explicit,
                    span: *span,
                },
                Instr::While {
                    guard,
                    invariant,
                    variant,
                    body,
                    span,
                } => Instr::While {
                    guard: guard.clone(),
                    invariant: invariant.clone(),
                    variant: variant.clone(),
                    body: strip(body),
                    span: *span,
                },
                other => other.clone(),
            })
            .collect()
    }
    let mut out = r.clone();
    out.body = strip(&r.body);
    out.params.retain(|d| d.name != BLOCK_NUMBER);
    out.precondition.retain(|e| !e.mentions(BLOCK_NUMBER));
    out
}

fn block_at_mut<'a>(body: &'a mut Vec<Instr>, path: &BlockPath) -> Option<&'a mut Vec<Instr>> {
    let mut cur = body;
    for (idx, child) in &path.0 {
        cur = match (cur.get_mut(*idx)?, child) {
            (Instr::If { branches, .. }, Child::Then) => &mut branches.first_mut()?.1,
            (Instr::If { else_block, .. }, Child::Else) => else_block,
            (Instr::While { body, .. }, Child::Body) => body,
            _ => return None,
        };
    }
    Some(cur)
}
