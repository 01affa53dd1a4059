// SPDX-License-Identifier: Apache-2.0

//! Control-flow normalisation and numbering of the seedable leaf blocks.
//!
//! Blocks are addressed structurally. A [`BlockPath`] walks from the routine
//! body through `(instruction index, child)` steps to an instruction list; a
//! [`SeedSite`] adds the position inside that list where a seed goes.
//!
//! Numbering is depth-first in source order: then before else, and for a
//! loop the body-entry block, then any blocks nested in the body, then the
//! zero-iteration block.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{BinOp, Expr, Instr, Routine};

/// Name of the appended block-number parameter of a seeded routine.
pub const BLOCK_NUMBER: &str = "__bn";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Child {
    /// The guarded arm of a normalised conditional.
    Then,
    Else,
    /// The body of a loop.
    Body,
}

impl Child {
    fn name(self) -> &'static str {
        match self {
            Child::Then => "then",
            Child::Else => "else",
            Child::Body => "body",
        }
    }
}

/// Path from the routine body to a nested instruction list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockPath(pub Vec<(usize, Child)>);

impl BlockPath {
    pub fn root() -> Self {
        BlockPath(Vec::new())
    }

    pub fn child(&self, index: usize, child: Child) -> Self {
        let mut steps = self.0.clone();
        steps.push((index, child));
        BlockPath(steps)
    }
}

impl fmt::Display for BlockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("body")?;
        for (i, c) in &self.0 {
            write!(f, "/{i}.{}", c.name())?;
        }
        Ok(())
    }
}

/// A position inside an instruction list: the list's path plus an index.
/// Used both for seed insertion points and for instruction locations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedSite {
    pub block: BlockPath,
    pub index: usize,
}

impl SeedSite {
    pub fn new(block: BlockPath, index: usize) -> Self {
        SeedSite { block, index }
    }
}

impl fmt::Display for SeedSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.block, self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    ThenLeaf,
    ElseLeaf,
    LoopBodyEntry,
    LoopZeroIteration,
    PlainBody,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockKind::ThenLeaf => "ThenLeaf",
            BlockKind::ElseLeaf => "ElseLeaf",
            BlockKind::LoopBodyEntry => "LoopBodyEntry",
            BlockKind::LoopZeroIteration => "LoopZeroIteration",
            BlockKind::PlainBody => "PlainBody",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockEntry {
    pub id: BlockId,
    pub kind: BlockKind,
    pub site: SeedSite,
    /// Source line of the block (or of the loop, for loop entries).
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    pub entries: Vec<BlockEntry>,
}

impl BlockMap {
    pub fn count(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn get(&self, id: BlockId) -> Option<&BlockEntry> {
        id.0.checked_sub(1)
            .and_then(|i| self.entries.get(i as usize))
    }

    /// The `dump-blocks` listing: `<id>\t<kind>\t<path>\t<source line>`.
    pub fn dump(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\t{}\n", e.id, e.kind, e.site, e.line))
            .collect()
    }
}

/// Rewrites `elseif` chains into nested conditionals and makes every `else`
/// explicit. Idempotent.
pub fn normalize(r: &Routine) -> Routine {
    let mut out = r.clone();
    out.body = normalize_block(&r.body);
    out
}

fn normalize_block(instrs: &[Instr]) -> Vec<Instr> {
    instrs.iter().map(normalize_instr).collect()
}

fn normalize_instr(i: &Instr) -> Instr {
    match i {
        Instr::If {
            branches,
            else_block,
            span,
            ..
        } => {
            let (guard, then_block) = &branches[0];
            let else_block = if branches.len() > 1 {
                vec![normalize_instr(&Instr::If {
                    branches: branches[1..].to_vec(),
                    else_block: else_block.clone(),
                    else_explicit: true,
                    span: *span,
                })]
            } else {
                normalize_block(else_block)
            };
            Instr::If {
                branches: vec![(guard.clone(), normalize_block(then_block))],
                else_block,
                else_explicit: true,
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
            body: normalize_block(body),
            span: *span,
        },
        other => other.clone(),
    }
}

/// `__bn = <literal>`: the guard of a conditional seed.
pub fn is_seed_guard(e: &Expr) -> bool {
    matches!(e, Expr::Binary(BinOp::Eq, l, r)
        if matches!(&**l, Expr::Var(v) if v == BLOCK_NUMBER) && matches!(**r, Expr::Int(_)))
}

fn is_seed_if(i: &Instr) -> bool {
    matches!(i, Instr::If { branches, .. } if branches.len() == 1 && is_seed_guard(&branches[0].0))
}

/// Conditionals and loops, ignoring conditional seeds.
fn is_structural(i: &Instr) -> bool {
    match i {
        Instr::While { .. } => true,
        Instr::If { .. } => !is_seed_if(i),
        _ => false,
    }
}

fn is_leaf(instrs: &[Instr]) -> bool {
    !instrs.iter().any(is_structural)
}

/// Numbers the leaf blocks of a normalised routine.
pub fn enumerate_blocks(r: &Routine) -> BlockMap {
    let mut entries = Vec::new();
    if is_leaf(&r.body) {
        let line = r.body.first().map_or(r.span.line, |i| i.span().line);
        push(&mut entries, BlockKind::PlainBody, SeedSite::new(BlockPath::root(), 0), line);
    } else {
        walk(&r.body, &BlockPath::root(), &mut entries);
    }
    BlockMap { entries }
}

fn push(entries: &mut Vec<BlockEntry>, kind: BlockKind, site: SeedSite, line: u32) {
    let id = BlockId(entries.len() as u32 + 1);
    entries.push(BlockEntry {
        id,
        kind,
        site,
        line,
    });
}

fn walk(instrs: &[Instr], path: &BlockPath, entries: &mut Vec<BlockEntry>) {
    for (idx, instr) in instrs.iter().enumerate() {
        if !is_structural(instr) {
            continue;
        }
        match instr {
            Instr::If {
                branches,
                else_block,
                span,
                ..
            } => {
                let arms = [
                    (Child::Then, &branches[0].1, BlockKind::ThenLeaf),
                    (Child::Else, else_block, BlockKind::ElseLeaf),
                ];
                for (child, block, kind) in arms {
                    let bpath = path.child(idx, child);
                    if is_leaf(block) {
                        let line = block.first().map_or(span.line, |i| i.span().line);
                        push(entries, kind, SeedSite::new(bpath, 0), line);
                    } else {
                        walk(block, &bpath, entries);
                    }
                }
            }
            Instr::While { body, span, .. } => {
                let site = SeedSite::new(path.clone(), idx);
                push(entries, BlockKind::LoopBodyEntry, site.clone(), span.line);
                walk(body, &path.child(idx, Child::Body), entries);
                push(entries, BlockKind::LoopZeroIteration, site, span.line);
            }
            _ => unreachable!(),
        }
    }
}

/// Branches as written: each conditional arm including an implicit `else`,
/// and two per loop (entered, skipped). Nested non-leaf arms count too.
pub fn count_branches(instrs: &[Instr]) -> u32 {
    instrs
        .iter()
        .filter(|i| is_structural(i))
        .map(|i| match i {
            Instr::If {
                branches,
                else_block,
                ..
            } => {
                branches.len() as u32
                    + 1
                    + branches.iter().map(|(_, b)| count_branches(b)).sum::<u32>()
                    + count_branches(else_block)
            }
            Instr::While { body, .. } => 2 + count_branches(body),
            _ => 0,
        })
        .sum()
}

/// Where the interpreter records block hits while executing a routine.
#[derive(Clone, Debug, Default)]
pub struct TraceIndex {
    leaves: HashMap<BlockPath, BlockId>,
    /// Loop instruction location to (body-entry, zero-iteration) blocks.
    loops: HashMap<SeedSite, (BlockId, BlockId)>,
    plain: Option<BlockId>,
}

impl TraceIndex {
    /// Builds the index for a normalised routine, possibly carrying seeds.
    /// Loop entries are keyed by the loop's own location in this routine.
    pub fn build(r: &Routine) -> Self {
        let map = enumerate_blocks(r);
        let mut index = TraceIndex::default();
        let mut pending_loops: HashMap<SeedSite, BlockId> = HashMap::new();
        for e in &map.entries {
            match e.kind {
                BlockKind::PlainBody => index.plain = Some(e.id),
                BlockKind::ThenLeaf | BlockKind::ElseLeaf => {
                    index.leaves.insert(e.site.block.clone(), e.id);
                }
                BlockKind::LoopBodyEntry => {
                    pending_loops.insert(e.site.clone(), e.id);
                }
                BlockKind::LoopZeroIteration => {
                    let body = pending_loops[&e.site];
                    index.loops.insert(e.site.clone(), (body, e.id));
                }
            }
        }
        index
    }

    pub fn plain(&self) -> Option<BlockId> {
        self.plain
    }

    pub fn leaf(&self, path: &BlockPath) -> Option<BlockId> {
        self.leaves.get(path).copied()
    }

    pub fn loop_blocks(&self, at: &SeedSite) -> Option<(BlockId, BlockId)> {
        self.loops.get(at).copied()
    }
}

/// The instruction list at `path`, if the path resolves.
pub fn block_at<'a>(body: &'a [Instr], path: &BlockPath) -> Option<&'a [Instr]> {
    let mut cur = body;
    for (idx, child) in &path.0 {
        cur = match (cur.get(*idx)?, child) {
            (Instr::If { branches, .. }, Child::Then) => &branches.first()?.1,
            (Instr::If { else_block, .. }, Child::Else) => else_block,
            (Instr::While { body, .. }, Child::Body) => body,
            _ => return None,
        };
    }
    Some(cur)
}
