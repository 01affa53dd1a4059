// SPDX-License-Identifier: Apache-2.0

//! Reference interpreter with contract checking and block tracing.
//!
//! Arithmetic is 64-bit and traps on overflow; out-of-bounds array access
//! traps too. `and`, `or` and `implies` short-circuit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{normalize, BlockId, BlockPath, Child, SeedSite, TraceIndex};
use crate::lang::{BinOp, Expr, Instr, LValue, Routine, Type, UnOp};
use crate::seeder::SeededRoutine;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Vec<i64>),
}

impl Value {
    pub fn default_for(t: Type) -> Value {
        match t {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::IntArray => Value::Array(Vec::new()),
        }
    }

    pub fn has_type(&self, t: Type) -> bool {
        matches!(
            (self, t),
            (Value::Int(_), Type::Int) | (Value::Bool(_), Type::Bool) | (Value::Array(_), Type::IntArray)
        )
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(cells) => {
                let cells: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
                write!(f, "[{}]", cells.join(", "))
            }
        }
    }
}

/// JSON form: integers and booleans as themselves, arrays as
/// `{"len": n, "cells": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Int(i64),
    Bool(bool),
    Array { len: usize, cells: Vec<i64> },
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(n) => ValueRepr::Int(*n),
            Value::Bool(b) => ValueRepr::Bool(*b),
            Value::Array(cells) => ValueRepr::Array {
                len: cells.len(),
                cells: cells.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ValueRepr::deserialize(d)? {
            ValueRepr::Int(n) => Ok(Value::Int(n)),
            ValueRepr::Bool(b) => Ok(Value::Bool(b)),
            ValueRepr::Array { len, cells } => {
                if len != cells.len() {
                    return Err(serde::de::Error::custom(format!(
                        "array len {len} does not match {} cells",
                        cells.len()
                    )));
                }
                Ok(Value::Array(cells))
            }
        }
    }
}

pub type Inputs = BTreeMap<String, Value>;
pub type State = BTreeMap<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssertionKind {
    Check,
    Invariant,
    Variant,
}

/// Location of a failed inline assertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// For `check`, the instruction itself; for loop assertions, the loop.
    pub site: SeedSite,
    pub kind: AssertionKind,
    pub line: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trap {
    Overflow,
    IndexOutOfBounds { index: i64, len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Normal(State),
    CheckViolation(Violation),
    /// Index of the first failing precondition clause.
    PreconditionViolation(usize),
    PostconditionViolation(usize),
    StepLimitExceeded,
    ArithmeticTrap(Trap),
}

impl Outcome {
    /// The run completed without any contract violation or trap.
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Normal(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Normal(_) => "normal",
            Outcome::CheckViolation(_) => "check violation",
            Outcome::PreconditionViolation(_) => "precondition violation",
            Outcome::PostconditionViolation(_) => "postcondition violation",
            Outcome::StepLimitExceeded => "step limit exceeded",
            Outcome::ArithmeticTrap(_) => "arithmetic trap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub outcome: Outcome,
    /// Blocks entered, in order, with repetitions.
    pub trace: Vec<BlockId>,
}

impl Execution {
    pub fn covers(&self, id: BlockId) -> bool {
        self.trace.contains(&id)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("input `{0}` has the wrong type")]
    WrongType(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    /// An operator met a value of the wrong type: the program was not
    /// typechecked.
    #[error("ill-typed evaluation: {0}")]
    IllTyped(String),
}

enum Stop {
    Outcome(Outcome),
    Error(RunError),
}

impl From<Trap> for Stop {
    fn from(t: Trap) -> Self {
        Stop::Outcome(Outcome::ArithmeticTrap(t))
    }
}

fn ill_typed(msg: impl Into<String>) -> Stop {
    Stop::Error(RunError::IllTyped(msg.into()))
}

/// A routine prepared for repeated execution.
#[derive(Clone, Debug)]
pub struct Interpreter {
    routine: Routine,
    index: TraceIndex,
    step_limit: u64,
}

impl Interpreter {
    /// Normalises `r` so traces use the block numbering of `enumerate_blocks`.
    pub fn new(r: &Routine) -> Self {
        Self::prepared(normalize(r))
    }

    /// Runs `r` without normalising it. Traces are only meaningful for
    /// routines that are already normalised.
    pub fn as_written(r: &Routine) -> Self {
        Self::prepared(r.clone())
    }

    /// Runs the instrumented routine exactly as seeded.
    pub fn for_seeded(s: &SeededRoutine) -> Self {
        Self::prepared(s.routine.clone())
    }

    fn prepared(routine: Routine) -> Self {
        let index = TraceIndex::build(&routine);
        Interpreter {
            routine,
            index,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn routine(&self) -> &Routine {
        &self.routine
    }

    pub fn run(&self, inputs: &Inputs) -> Result<Execution, RunError> {
        let r = &self.routine;
        for d in &r.params {
            match inputs.get(&d.name) {
                None => return Err(RunError::MissingInput(d.name.clone())),
                Some(v) if !v.has_type(d.ty) => return Err(RunError::WrongType(d.name.clone())),
                Some(_) => {}
            }
        }
        if let Some(extra) = inputs.keys().find(|k| !r.is_param(k)) {
            return Err(RunError::UnknownInput(extra.clone()));
        }

        let mut env: State = inputs.clone();
        for d in r.initialised_vars() {
            env.insert(d.name.clone(), Value::default_for(d.ty));
        }
        let mut machine = Machine {
            index: &self.index,
            old: env.clone(),
            env,
            trace: Vec::new(),
            steps: 0,
            step_limit: self.step_limit,
        };
        let outcome = match machine.execute(r) {
            Ok(()) => Outcome::Normal(machine.env),
            Err(Stop::Outcome(o)) => o,
            Err(Stop::Error(e)) => return Err(e),
        };
        Ok(Execution {
            outcome,
            trace: machine.trace,
        })
    }
}

/// One-off run of a routine (normalised first).
pub fn run(r: &Routine, inputs: &Inputs) -> Result<Execution, RunError> {
    Interpreter::new(r).run(inputs)
}

/// One-off run of a seeded routine; `inputs` include the block number.
pub fn run_seeded(s: &SeededRoutine, inputs: &Inputs) -> Result<Execution, RunError> {
    Interpreter::for_seeded(s).run(inputs)
}

/// The seeded block whose check failed, if the run stopped on a seed.
pub fn reached_seed(s: &SeededRoutine, e: &Execution) -> Option<BlockId> {
    match &e.outcome {
        Outcome::CheckViolation(v) if v.kind == AssertionKind::Check => s.block_of_check(&v.site),
        _ => None,
    }
}

struct Machine<'a> {
    index: &'a TraceIndex,
    env: State,
    old: State,
    trace: Vec<BlockId>,
    steps: u64,
    step_limit: u64,
}

impl Machine<'_> {
    fn execute(&mut self, r: &Routine) -> Result<(), Stop> {
        for (k, pre) in r.precondition.iter().enumerate() {
            match self.eval(pre) {
                Ok(Value::Bool(true)) => {}
                Ok(Value::Bool(false)) | Err(Stop::Outcome(Outcome::ArithmeticTrap(_))) => {
                    return Err(Stop::Outcome(Outcome::PreconditionViolation(k)))
                }
                Ok(_) => return Err(ill_typed("precondition is not boolean")),
                Err(e) => return Err(e),
            }
        }
        if let Some(id) = self.index.plain() {
            self.trace.push(id);
        }
        self.block(&r.body, &BlockPath::root())?;
        for (k, post) in r.postcondition.iter().enumerate() {
            if !self.truth(post)? {
                return Err(Stop::Outcome(Outcome::PostconditionViolation(k)));
            }
        }
        Ok(())
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.step_limit {
            return Err(Stop::Outcome(Outcome::StepLimitExceeded));
        }
        Ok(())
    }

    fn block(&mut self, instrs: &[Instr], path: &BlockPath) -> Result<(), Stop> {
        if let Some(id) = self.index.leaf(path) {
            self.trace.push(id);
        }
        for (idx, instr) in instrs.iter().enumerate() {
            self.tick()?;
            self.instr(instr, path, idx)?;
        }
        Ok(())
    }

    fn instr(&mut self, instr: &Instr, path: &BlockPath, idx: usize) -> Result<(), Stop> {
        match instr {
            Instr::Assign { target, value, .. } => {
                let v = self.eval(value)?;
                match target {
                    LValue::Var(name) => {
                        self.env.insert(name.clone(), v);
                    }
                    LValue::Index(name, index) => {
                        let i = self.int(index)?;
                        let Value::Int(x) = v else {
                            return Err(ill_typed("array element must be an integer"));
                        };
                        let Some(Value::Array(cells)) = self.env.get_mut(name) else {
                            return Err(ill_typed(format!("`{name}` is not an array")));
                        };
                        let len = cells.len();
                        let slot = usize::try_from(i)
                            .ok()
                            .and_then(|u| cells.get_mut(u))
                            .ok_or(Trap::IndexOutOfBounds { index: i, len })?;
                        *slot = x;
                    }
                }
            }
            Instr::Check { cond, span } => {
                if !self.truth(cond)? {
                    return Err(Stop::Outcome(Outcome::CheckViolation(Violation {
                        site: SeedSite::new(path.clone(), idx),
                        kind: AssertionKind::Check,
                        line: span.line,
                    })));
                }
            }
            Instr::If {
                branches,
                else_block,
                ..
            } => {
                for (k, (guard, block)) in branches.iter().enumerate() {
                    if self.truth(guard)? {
                        // Only the first arm of a normalised conditional is addressable.
                        let child = if k == 0 { Child::Then } else { Child::Else };
                        return self.block(block, &path.child(idx, child));
                    }
                }
                self.block(else_block, &path.child(idx, Child::Else))?;
            }
            Instr::While {
                guard,
                invariant,
                variant,
                body,
                span,
            } => {
                let at = SeedSite::new(path.clone(), idx);
                let loop_violation = |kind| {
                    Stop::Outcome(Outcome::CheckViolation(Violation {
                        site: at.clone(),
                        kind,
                        line: span.line,
                    }))
                };
                let body_path = path.child(idx, Child::Body);
                let mut previous: Option<i64> = None;
                let mut first = true;
                loop {
                    for inv in invariant {
                        if !self.truth(inv)? {
                            return Err(loop_violation(AssertionKind::Invariant));
                        }
                    }
                    self.tick()?;
                    let enter = self.truth(guard)?;
                    if first {
                        if let Some((body_id, zero_id)) = self.index.loop_blocks(&at) {
                            self.trace.push(if enter { body_id } else { zero_id });
                        }
                        first = false;
                    }
                    if !enter {
                        break;
                    }
                    if let Some(v) = variant {
                        let now = self.int(v)?;
                        if now < 0 || previous.is_some_and(|p| now >= p) {
                            return Err(loop_violation(AssertionKind::Variant));
                        }
                        previous = Some(now);
                    }
                    self.block(body, &body_path)?;
                }
            }
        }
        Ok(())
    }

    fn truth(&mut self, e: &Expr) -> Result<bool, Stop> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            _ => Err(ill_typed("expected a boolean")),
        }
    }

    fn int(&mut self, e: &Expr) -> Result<i64, Stop> {
        match self.eval(e)? {
            Value::Int(n) => Ok(n),
            _ => Err(ill_typed("expected an integer")),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, Stop> {
        eval_in(e, &self.env, &self.old)
    }
}

fn eval_in(e: &Expr, env: &State, old: &State) -> Result<Value, Stop> {
    let int = |e: &Expr| -> Result<i64, Stop> {
        match eval_in(e, env, old)? {
            Value::Int(n) => Ok(n),
            _ => Err(ill_typed("expected an integer")),
        }
    };
    let truth = |e: &Expr| -> Result<bool, Stop> {
        match eval_in(e, env, old)? {
            Value::Bool(b) => Ok(b),
            _ => Err(ill_typed("expected a boolean")),
        }
    };
    let array = |e: &Expr| -> Result<Vec<i64>, Stop> {
        match eval_in(e, env, old)? {
            Value::Array(a) => Ok(a),
            _ => Err(ill_typed("expected an array")),
        }
    };
    Ok(match e {
        Expr::Int(n) => Value::Int(*n),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| ill_typed(format!("unbound variable `{v}`")))?,
        Expr::Old(inner) => eval_in(inner, old, old)?,
        Expr::Len(a) => Value::Int(array(a)?.len() as i64),
        Expr::Index(a, i) => {
            let cells = array(a)?;
            let i = int(i)?;
            let len = cells.len();
            let v = usize::try_from(i)
                .ok()
                .and_then(|u| cells.get(u).copied())
                .ok_or(Trap::IndexOutOfBounds { index: i, len })?;
            Value::Int(v)
        }
        Expr::Unary(UnOp::Neg, a) => Value::Int(int(a)?.checked_neg().ok_or(Trap::Overflow)?),
        Expr::Unary(UnOp::Not, a) => Value::Bool(!truth(a)?),
        Expr::Binary(op, l, r) => match op {
            BinOp::And => Value::Bool(truth(l)? && truth(r)?),
            BinOp::Or => Value::Bool(truth(l)? || truth(r)?),
            BinOp::Implies => Value::Bool(!truth(l)? || truth(r)?),
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                let (a, b) = (int(l)?, int(r)?);
                let v = match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                };
                Value::Int(v.ok_or(Trap::Overflow)?)
            }
            BinOp::Eq | BinOp::Ne => {
                let (a, b) = (eval_in(l, env, old)?, eval_in(r, env, old)?);
                if std::mem::discriminant(&a) != std::mem::discriminant(&b) {
                    return Err(ill_typed("comparison of different types"));
                }
                Value::Bool((a == b) == (*op == BinOp::Eq))
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let (a, b) = (int(l)?, int(r)?);
                Value::Bool(match op {
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    _ => a >= b,
                })
            }
        },
    })
}

/// Evaluates a closed expression over an input assignment (no `old`).
pub fn eval_expr(e: &Expr, env: &State) -> Option<Value> {
    eval_in(e, env, env).ok()
}

/// Per-block hit counts of a test suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub hits: BTreeMap<BlockId, u64>,
    pub exercised: u32,
    pub total: u32,
    pub unreachable: Vec<BlockId>,
    pub ratio: f64,
    /// Every block outside `unreachable` was exercised.
    pub exhaustive: bool,
}

impl CoverageReport {
    pub fn from_hits(hits: BTreeMap<BlockId, u64>, total: u32, unreachable: &[BlockId]) -> Self {
        let exercised = hits.values().filter(|&&n| n > 0).count() as u32;
        let ratio = if total == 0 {
            0.0
        } else {
            exercised as f64 / total as f64
        };
        let unreachable_set: BTreeSet<_> = unreachable.iter().copied().collect();
        CoverageReport {
            exercised,
            total,
            unreachable: unreachable_set.iter().copied().collect(),
            ratio,
            exhaustive: exercised == total.saturating_sub(unreachable_set.len() as u32),
            hits,
        }
    }

    /// Coverage of reachable blocks only.
    pub fn reachable_ratio(&self) -> f64 {
        let reachable = self.total.saturating_sub(self.unreachable.len() as u32);
        if reachable == 0 {
            1.0
        } else {
            self.exercised as f64 / reachable as f64
        }
    }

    /// `{"blocks": N, "hits": {id: n}, "ratio": r, ...}`
    pub fn to_json(&self) -> serde_json::Value {
        let hits: serde_json::Map<String, serde_json::Value> = self
            .hits
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::from(*v)))
            .collect();
        serde_json::json!({
            "blocks": self.total,
            "hits": hits,
            "ratio": self.ratio,
            "exercised": self.exercised,
            "unreachable": self.unreachable,
            "exhaustive": self.exhaustive,
        })
    }
}

/// Runs every input set and unions the traces.
pub fn coverage_of<'a>(
    interp: &Interpreter,
    inputs: impl IntoIterator<Item = &'a Inputs>,
    unreachable: &[BlockId],
) -> Result<CoverageReport, RunError> {
    let total = crate::blocks::enumerate_blocks(interp.routine()).count();
    let mut hits: BTreeMap<BlockId, u64> = (1..=total).map(|i| (BlockId(i), 0)).collect();
    for inp in inputs {
        let exec = interp.run(inp)?;
        for id in exec.trace {
            *hits.entry(id).or_default() += 1;
        }
    }
    Ok(CoverageReport::from_hits(hits, total, unreachable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::enumerate_blocks;
    use crate::lang::parse_program;
    use crate::seeder::seed_rssp;

    pub(crate) fn ints(pairs: &[(&str, i64)]) -> Inputs {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), Value::Int(*v)))
            .collect()
    }

    fn routine(src: &str) -> Routine {
        parse_program(src).unwrap().routines.remove(0)
    }

    const SIMPLE: &str = "routine simple(a: INTEGER) local x: INTEGER do
        if a > 0 then x := 1 else x := 2 end
    ensure a > 0 implies x = 1 end";

    const SIMPLE2: &str = "routine simple2(a: INTEGER) local x: INTEGER do
        if a > 0 then x := 1 else x := 2 end
        if a * a > a then x := 3 else x := 4 end
    end";

    #[test]
    fn simple_traces_each_branch() {
        let r = routine(SIMPLE);
        let e = run(&r, &ints(&[("a", 1)])).unwrap();
        assert_eq!(e.trace, vec![BlockId(1)]);
        let Outcome::Normal(state) = e.outcome else {
            panic!()
        };
        assert_eq!(state["x"], Value::Int(1));
        let e = run(&r, &ints(&[("a", 0)])).unwrap();
        assert_eq!(e.trace, vec![BlockId(2)]);
        assert!(matches!(e.outcome, Outcome::Normal(ref s) if s["x"] == Value::Int(2)));
    }

    #[test]
    fn divergence_hits_step_limit() {
        let r = routine("routine spin() local x: INTEGER do while True do x := x end end");
        let e = run(&r, &Inputs::new()).unwrap();
        assert_eq!(e.outcome, Outcome::StepLimitExceeded);
    }

    #[test]
    fn contracts_are_checked() {
        let r = routine("routine r(a: INTEGER): INTEGER require a > 0 do Result := a ensure Result = 2 end");
        assert_eq!(
            run(&r, &ints(&[("a", 0)])).unwrap().outcome,
            Outcome::PreconditionViolation(0)
        );
        assert_eq!(
            run(&r, &ints(&[("a", 1)])).unwrap().outcome,
            Outcome::PostconditionViolation(0)
        );
        assert!(run(&r, &ints(&[("a", 2)])).unwrap().outcome.passed());
    }

    #[test]
    fn old_refers_to_entry_values() {
        let r = routine(
            "routine inc(a: ARRAY [INTEGER]) require len(a) > 0 do a[0] := a[0] + 1
             ensure a[0] = old a[0] + 1 end",
        );
        let mut inp = Inputs::new();
        inp.insert("a".into(), Value::Array(vec![4, 5]));
        assert!(run(&r, &inp).unwrap().outcome.passed());
    }

    #[test]
    fn traps_on_overflow_and_bounds() {
        let r = routine("routine r(a: INTEGER): INTEGER do Result := a * a end");
        assert_eq!(
            run(&r, &ints(&[("a", i64::MAX)])).unwrap().outcome,
            Outcome::ArithmeticTrap(Trap::Overflow)
        );
        let r = routine("routine r(a: ARRAY [INTEGER]): INTEGER do Result := a[2] end");
        let mut inp = Inputs::new();
        inp.insert("a".into(), Value::Array(vec![1]));
        assert_eq!(
            run(&r, &inp).unwrap().outcome,
            Outcome::ArithmeticTrap(Trap::IndexOutOfBounds { index: 2, len: 1 })
        );
    }

    #[test]
    fn short_circuit_guards_index() {
        let r = routine(
            "routine r(a: ARRAY [INTEGER]; i: INTEGER): BOOLEAN do
                Result := i >= 0 and i < len(a) and a[i] = 3 end",
        );
        let mut inp = Inputs::new();
        inp.insert("a".into(), Value::Array(vec![]));
        inp.insert("i".into(), Value::Int(5));
        assert!(run(&r, &inp).unwrap().outcome.passed());
    }

    #[test]
    fn variant_must_decrease() {
        let r = routine(
            "routine r(n: INTEGER) local i: INTEGER do
                while i < n variant i do i := i + 1 end end",
        );
        let e = run(&r, &ints(&[("n", 3)])).unwrap();
        assert!(matches!(
            e.outcome,
            Outcome::CheckViolation(Violation { kind: AssertionKind::Variant, .. })
        ));
    }

    #[test]
    fn loop_blocks_record_entry_state() {
        let r = routine(
            "routine r(n: INTEGER) local i: INTEGER do
                while i < n invariant i >= 0 variant n - i do i := i + 1 end end",
        );
        assert_eq!(run(&r, &ints(&[("n", 3)])).unwrap().trace, vec![BlockId(1)]);
        assert_eq!(run(&r, &ints(&[("n", 0)])).unwrap().trace, vec![BlockId(2)]);
    }

    #[test]
    fn bad_inputs_are_errors() {
        let r = routine(SIMPLE);
        assert_eq!(run(&r, &Inputs::new()), Err(RunError::MissingInput("a".into())));
        let mut inp = Inputs::new();
        inp.insert("a".into(), Value::Bool(true));
        assert_eq!(run(&r, &inp), Err(RunError::WrongType("a".into())));
        assert_eq!(
            run(&r, &ints(&[("a", 1), ("z", 0)])),
            Err(RunError::UnknownInput("z".into()))
        );
    }

    #[test]
    fn seeded_run_conventions() {
        let r = normalize(&routine(SIMPLE2));
        let s = seed_rssp(&r, &enumerate_blocks(&r));
        let plain = run(&r, &ints(&[("a", 5)])).unwrap();
        let seeded = run_seeded(&s, &ints(&[("a", 5), ("__bn", 0)])).unwrap();
        assert_eq!(seeded.trace, plain.trace);
        let (Outcome::Normal(mut with_bn), Outcome::Normal(without)) = (seeded.outcome, plain.outcome)
        else {
            panic!()
        };
        with_bn.remove("__bn");
        assert_eq!(with_bn, without);

        let hit = run_seeded(&s, &ints(&[("a", 1), ("__bn", 1)])).unwrap();
        assert_eq!(reached_seed(&s, &hit), Some(BlockId(1)));
        let miss = run_seeded(&s, &ints(&[("a", 0), ("__bn", 1)])).unwrap();
        assert!(miss.outcome.passed());
        assert_eq!(reached_seed(&s, &miss), None);
    }

    #[test]
    fn coverage_ratio() {
        let interp = Interpreter::new(&routine(SIMPLE));
        let both = [ints(&[("a", 1)]), ints(&[("a", 0)])];
        let c = coverage_of(&interp, &both, &[]).unwrap();
        assert_eq!(c.ratio, 1.0);
        assert!(c.exhaustive);
        let none: [Inputs; 0] = [];
        let c = coverage_of(&interp, &none, &[]).unwrap();
        assert_eq!(c.ratio, 0.0);
        assert!(!c.exhaustive);
        let j = c.to_json();
        assert_eq!(j["blocks"], 2);
        assert_eq!(j["hits"]["1"], 0);
    }

    #[test]
    fn value_json_shape() {
        let v = Value::Array(vec![1, -2]);
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j, serde_json::json!({"len": 2, "cells": [1, -2]}));
        assert_eq!(serde_json::from_value::<Value>(j).unwrap(), v);
        assert!(serde_json::from_value::<Value>(serde_json::json!({"len": 3, "cells": [1]})).is_err());
        assert_eq!(serde_json::from_str::<Value>("true").unwrap(), Value::Bool(true));
        assert_eq!(serde_json::from_str::<Value>("-7").unwrap(), Value::Int(-7));
    }
}
