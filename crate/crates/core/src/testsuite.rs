// SPDX-License-Identifier: Apache-2.0

//! Turning solver models into tests: projection, replay, minimisation,
//! classification and the suite file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BlockId, BLOCK_NUMBER};
use crate::interp::{coverage_of, CoverageReport, Execution, Inputs, Interpreter, Outcome, RunError, Value};
use crate::seeder::{SeedMode, SeededRoutine};
use crate::smt::EntryModel;
use crate::vcgen::Strategy;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// `sc` for solver-generated tests, `random` for the baseline.
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SeedMode>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub solver: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    #[serde(skip)]
    pub routine: String,
    pub target: BlockId,
    pub inputs: Inputs,
    pub minimized: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub routine: String,
    pub blocks: u32,
    pub tests: Vec<TestCase>,
    pub unreachable: Vec<BlockId>,
    pub undetermined: Vec<BlockId>,
    #[serde(default)]
    pub manifest: serde_json::Value,
}

impl TestSuite {
    pub fn empty(routine: &str, blocks: u32) -> Self {
        TestSuite {
            routine: routine.to_string(),
            blocks,
            tests: Vec::new(),
            unreachable: Vec::new(),
            undetermined: Vec::new(),
            manifest: serde_json::json!({}),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serialises")
    }

    pub fn from_json(text: &str) -> Result<TestSuite, serde_json::Error> {
        let mut s: TestSuite = serde_json::from_str(text)?;
        for t in &mut s.tests {
            t.routine = s.routine.clone();
        }
        Ok(s)
    }

    /// Targets of the tests, sorted.
    pub fn covered_targets(&self) -> Vec<BlockId> {
        let mut v: Vec<_> = self.tests.iter().map(|t| t.target).collect();
        v.sort();
        v
    }

    /// Covered, unreachable and undetermined blocks are disjoint and
    /// together make up `1..=blocks`.
    pub fn is_partition(&self) -> bool {
        let mut all: Vec<u32> = self
            .tests
            .iter()
            .map(|t| t.target.0)
            .chain(self.unreachable.iter().map(|b| b.0))
            .chain(self.undetermined.iter().map(|b| b.0))
            .collect();
        all.sort_unstable();
        all == (1..=self.blocks).collect::<Vec<_>>()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("model does not cover block {target} on replay: {reason}")]
    ReplayMismatch { target: BlockId, reason: String },
}

fn mismatch(target: BlockId, reason: impl Into<String>) -> ExtractError {
    ExtractError::ReplayMismatch {
        target,
        reason: reason.into(),
    }
}

/// Projects a model onto the original routine's inputs (dropping `__bn`)
/// and checks by replay that the inputs satisfy the precondition and
/// cover `target`. `original` runs the unseeded routine.
pub fn extract_test(
    m: &EntryModel,
    s: &SeededRoutine,
    target: BlockId,
    original: &Interpreter,
    provenance: Provenance,
) -> Result<TestCase, ExtractError> {
    let mut inputs = m
        .to_inputs(&s.routine.params)
        .map_err(|e| mismatch(target, e.to_string()))?;
    if s.has_bn() {
        match inputs.remove(BLOCK_NUMBER) {
            Some(Value::Int(bn)) if bn == target.0 as i64 => {}
            other => {
                return Err(mismatch(
                    target,
                    format!("model has {BLOCK_NUMBER} = {other:?}, expected {target}"),
                ))
            }
        }
    }
    let exec = original
        .run(&inputs)
        .map_err(|e| mismatch(target, e.to_string()))?;
    if let Outcome::PreconditionViolation(k) = exec.outcome {
        return Err(mismatch(target, format!("precondition clause {} fails", k + 1)));
    }
    if !exec.covers(target) {
        return Err(mismatch(target, "target block not executed"));
    }
    Ok(TestCase {
        routine: s.routine.name.clone(),
        target,
        inputs,
        minimized: false,
        provenance,
    })
}

/// Bound up to which small magnitudes are tried one by one.
const LINEAR_SHRINK: i64 = 16;

struct Shrinker<'a> {
    interp: &'a Interpreter,
    target: BlockId,
    baseline_passed: bool,
}

impl Shrinker<'_> {
    fn acceptable(&self, inputs: &Inputs) -> bool {
        let Ok(exec) = self.interp.run(inputs) else {
            return false;
        };
        self.accepts(&exec)
    }

    fn accepts(&self, exec: &Execution) -> bool {
        !matches!(exec.outcome, Outcome::PreconditionViolation(_))
            && exec.covers(self.target)
            && (!self.baseline_passed || exec.outcome.passed())
    }

    /// Smallest-magnitude replacement for an integer, ties toward the
    /// nonnegative value.
    fn shrink_int(&self, current: i64, with: &dyn Fn(i64) -> Inputs) -> i64 {
        let mag = current.unsigned_abs() as i128;
        let better = |c: i64| {
            let m = c.unsigned_abs() as i128;
            m < mag || (m == mag && c >= 0 && current < 0)
        };
        for m in 0..=LINEAR_SHRINK {
            let cands: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
            for &c in cands {
                if better(c) && self.acceptable(&with(c)) {
                    return c;
                }
            }
            if m as i128 >= mag {
                return current;
            }
        }
        // Binary search on the magnitude, keeping the sign.
        let sign = current.signum() as i128;
        let (mut lo, mut hi) = (LINEAR_SHRINK as i128 + 1, mag);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.acceptable(&with((sign * mid) as i64)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if hi <= i64::MAX as i128 {
            for c in [hi as i64, (sign * hi) as i64] {
                if better(c) && self.acceptable(&with(c)) {
                    return c;
                }
            }
        }
        current
    }
}

/// Shrinks each input toward zero while the replay still satisfies the
/// precondition, covers the target, and (if it passed before) passes.
/// Integers are minimised one at a time; arrays lose length first, then
/// their cells shrink.
pub fn minimize(t: &TestCase, original: &Interpreter) -> TestCase {
    let Ok(exec) = original.run(&t.inputs) else {
        return t.clone();
    };
    let sh = Shrinker {
        interp: original,
        target: t.target,
        baseline_passed: exec.outcome.passed(),
    };
    if !sh.accepts(&exec) {
        return t.clone();
    }
    let mut inputs = t.inputs.clone();
    let names: Vec<String> = inputs.keys().cloned().collect();
    // A second pass catches shrinks enabled by earlier ones.
    for _ in 0..2 {
        for name in &names {
            match inputs[name].clone() {
                Value::Int(v) => {
                    let base = inputs.clone();
                    let with = |c: i64| {
                        let mut i = base.clone();
                        i.insert(name.clone(), Value::Int(c));
                        i
                    };
                    let best = sh.shrink_int(v, &with);
                    inputs.insert(name.clone(), Value::Int(best));
                }
                Value::Bool(true) => {
                    let mut cand = inputs.clone();
                    cand.insert(name.clone(), Value::Bool(false));
                    if sh.acceptable(&cand) {
                        inputs = cand;
                    }
                }
                Value::Bool(false) => {}
                Value::Array(cells) => {
                    let mut cells = cells;
                    for len in 0..cells.len() {
                        let mut cand = inputs.clone();
                        cand.insert(name.clone(), Value::Array(cells[..len].to_vec()));
                        if sh.acceptable(&cand) {
                            cells.truncate(len);
                            break;
                        }
                    }
                    inputs.insert(name.clone(), Value::Array(cells.clone()));
                    for k in 0..cells.len() {
                        let base = inputs.clone();
                        let cur = cells.clone();
                        let with = |c: i64| {
                            let mut i = base.clone();
                            let mut v = cur.clone();
                            v[k] = c;
                            i.insert(name.clone(), Value::Array(v));
                            i
                        };
                        cells[k] = sh.shrink_int(cells[k], &with);
                        inputs.insert(name.clone(), Value::Array(cells.clone()));
                    }
                }
            }
        }
    }
    TestCase {
        inputs,
        minimized: true,
        ..t.clone()
    }
}

/// Final outcome of the strategy ladder for one block.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockResult {
    Covered(TestCase),
    /// Unsatisfiable at every rung.
    Unsat,
    /// Unknown or replay failure at some rung, never covered.
    Unknown(String),
    SolverFailure(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Partition {
    pub tests: Vec<TestCase>,
    pub unreachable: Vec<BlockId>,
    pub undetermined: Vec<BlockId>,
    pub failures: Vec<(BlockId, String)>,
}

/// Sorts per-block results into tests, unreachable and undetermined
/// blocks. Solver failures count as undetermined and are also listed
/// separately.
pub fn classify(results: BTreeMap<BlockId, BlockResult>) -> Partition {
    let mut p = Partition::default();
    for (id, r) in results {
        match r {
            BlockResult::Covered(t) => p.tests.push(t),
            BlockResult::Unsat => p.unreachable.push(id),
            BlockResult::Unknown(_) => p.undetermined.push(id),
            BlockResult::SolverFailure(msg) => {
                p.undetermined.push(id);
                p.failures.push((id, msg));
            }
        }
    }
    p
}

/// Replays every test of `suite` on the routine `interp` runs.
pub fn measure_coverage(interp: &Interpreter, suite: &TestSuite) -> Result<CoverageReport, RunError> {
    coverage_of(interp, suite.tests.iter().map(|t| &t.inputs), &suite.unreachable)
}

/// Human-readable summary of a suite.
pub fn report(suite: &TestSuite, coverage: Option<&CoverageReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "routine {} ({} blocks)", suite.routine, suite.blocks);
    for t in &suite.tests {
        let inputs: Vec<String> = t.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let how = t
            .provenance
            .strategy
            .map(|s| format!(" via {s}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  block {:>3}: {}{}{}",
            t.target,
            inputs.join(", "),
            if t.minimized { " (minimized)" } else { "" },
            how
        );
    }
    let list = |ids: &[BlockId]| ids.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ");
    if !suite.unreachable.is_empty() {
        let _ = writeln!(out, "  unreachable: {}", list(&suite.unreachable));
    }
    if !suite.undetermined.is_empty() {
        let _ = writeln!(out, "  undetermined: {}", list(&suite.undetermined));
    }
    if let Some(c) = coverage {
        let _ = writeln!(
            out,
            "  coverage: {}/{} ({:.1}%), exhaustive: {}",
            c.exercised,
            c.total,
            100.0 * c.ratio,
            c.exhaustive
        );
    }
    let m = &suite.manifest;
    if let Some(hash) = m.get("corpus_sha256").and_then(|h| h.as_str()) {
        let _ = writeln!(out, "  generator: {}", m["generator"].as_str().unwrap_or(""));
        let _ = writeln!(out, "  solver: {}", m["solver"].as_str().unwrap_or(""));
        let _ = writeln!(out, "  corpus sha256: {hash}");
        let _ = writeln!(out, "  config: {}", m["config"]);
    }
    out
}

/// Writes `<routine>.suite.json` and `<routine>.report.txt` into `dir`.
pub fn emit_suite(
    suite: &TestSuite,
    coverage: Option<&CoverageReport>,
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join(format!("{}.suite.json", suite.routine));
    std::fs::write(&json, suite.to_json() + "\n")?;
    let txt = dir.join(format!("{}.report.txt", suite.routine));
    std::fs::write(&txt, report(suite, coverage))?;
    Ok(vec![json, txt])
}
