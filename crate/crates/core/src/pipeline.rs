// SPDX-License-Identifier: Apache-2.0

//! End-to-end test generation and verification for one routine.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blocks::{enumerate_blocks, normalize, BlockId, BlockMap};
use crate::interp::{CoverageReport, Inputs, Interpreter, Outcome, RunError};
use crate::lang::Routine;
use crate::seeder::{erase, seed_msp, seed_rssp, SeedMode, SeededRoutine};
use crate::smt::{emit_prelude, emit_query, solve, value_request, Session, SolverConfig, SolverVerdict};
use crate::testsuite::{
    classify, extract_test, measure_coverage, minimize, BlockResult, Provenance, TestCase, TestSuite,
};
use crate::vcgen::{
    all_loops_have_invariants, encode_seeded, verification_vc, Encoding, InputBounds, Strategy, VcError,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub solver: SolverConfig,
    pub mode: SeedMode,
    pub minimize: bool,
    pub unroll_max: u32,
    pub jobs: usize,
    pub bounds: InputBounds,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            solver: SolverConfig::default(),
            mode: SeedMode::Rssp,
            minimize: true,
            unroll_max: 64,
            jobs: default_jobs(),
            bounds: InputBounds::default(),
        }
    }
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Vc(#[from] VcError),
    #[error("replay failed: {0}")]
    Run(#[from] RunError),
}

/// Strategies tried in order. Loop-free routines are encoded exactly, so
/// one rung suffices.
pub fn ladder(r: &Routine, unroll_max: u32) -> Vec<Strategy> {
    if !r.has_loops() {
        return vec![Strategy::InvariantHavoc];
    }
    let mut out = Vec::new();
    if all_loops_have_invariants(r) {
        out.push(Strategy::InvariantHavoc);
    }
    let mut k = 1;
    while k < unroll_max {
        out.push(Strategy::Unroll(k));
        k *= 2;
    }
    out.push(Strategy::Unroll(unroll_max.max(1)));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub block: BlockId,
    pub strategy: Strategy,
    pub verdict: String,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct GenResult {
    pub suite: TestSuite,
    pub coverage: CoverageReport,
    pub block_map: BlockMap,
    pub queries: Vec<QueryRecord>,
    pub failures: Vec<(BlockId, String)>,
    pub wall: Duration,
}

impl GenResult {
    /// Some block ended without a verdict.
    pub fn has_undetermined(&self) -> bool {
        !self.suite.undetermined.is_empty()
    }

    pub fn has_solver_failure(&self) -> bool {
        !self.failures.is_empty()
    }
}

#[derive(Default)]
struct Attempts {
    unknown: Option<String>,
    replay: Option<String>,
    failure: Option<String>,
}

struct Job<'a> {
    block: BlockId,
    seeded: &'a SeededRoutine,
    enc: &'a Encoding,
}

struct Answer {
    block: BlockId,
    verdict: SolverVerdict,
    wall: Duration,
}

/// Runs each job's query; workers keep one incremental session per shared
/// encoding.
fn run_jobs(jobs: &[Job<'_>], cfg: &SolverConfig, workers: usize) -> Vec<Answer> {
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| {
                let mut session: Option<(*const Encoding, Session)> = None;
                loop {
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(job) = jobs.get(k) else { break };
                    let start = Instant::now();
                    let verdict = if cfg.incremental {
                        let key = job.enc as *const Encoding;
                        if session.as_ref().map(|(p, _)| *p) != Some(key) {
                            session = Some((key, Session::new(cfg, emit_prelude(job.enc))));
                        }
                        let (_, s) = session.as_mut().unwrap();
                        let asserts: Vec<String> =
                            job.enc.assertions(job.block).iter().map(|t| t.to_string()).collect();
                        s.check(&asserts, &value_request(job.enc))
                    } else {
                        solve(cfg, &emit_query(&job.enc.vc(job.block)))
                    };
                    out.lock().unwrap().push(Answer {
                        block: job.block,
                        verdict,
                        wall: start.elapsed(),
                    });
                }
            });
        }
    });
    let mut v = out.into_inner().unwrap();
    v.sort_by_key(|a| a.block);
    v
}

/// Generates a test suite for `r`: seed, solve each block along the
/// strategy ladder, replay, minimise, and measure coverage.
pub fn generate(r: &Routine, cfg: &GenConfig, solver_name: &str) -> Result<GenResult, PipelineError> {
    let start = Instant::now();
    let original = normalize(r);
    let map = enumerate_blocks(&original);
    let interp = Interpreter::new(&original);
    let n = map.count();
    let seeded: Vec<SeededRoutine> = match cfg.mode {
        SeedMode::Rssp => vec![seed_rssp(&original, &map)],
        SeedMode::Msp => map
            .ids()
            .map(|i| seed_msp(&original, &map, i).expect("block id from the map"))
            .collect(),
    };
    debug_assert!(seeded.iter().all(|s| erase(s) == original));

    let mut pending: Vec<BlockId> = map.ids().collect();
    let mut attempts: BTreeMap<BlockId, Attempts> = pending.iter().map(|&b| (b, Attempts::default())).collect();
    let mut covered: BTreeMap<BlockId, TestCase> = BTreeMap::new();
    let mut queries = Vec::new();

    for strategy in ladder(&original, cfg.unroll_max) {
        if pending.is_empty() {
            break;
        }
        let encodings: Vec<Encoding> = seeded
            .iter()
            .map(|s| encode_seeded(s, strategy, &cfg.bounds))
            .collect::<Result<_, _>>()?;
        let jobs: Vec<Job> = pending
            .iter()
            .map(|&b| {
                let k = match cfg.mode {
                    SeedMode::Rssp => 0,
                    SeedMode::Msp => (b.0 - 1) as usize,
                };
                Job {
                    block: b,
                    seeded: &seeded[k],
                    enc: &encodings[k],
                }
            })
            .collect();
        let answers = run_jobs(&jobs, &cfg.solver, cfg.jobs);
        log::debug!("{}: {} queries under {strategy}", r.name, answers.len());
        for (job, ans) in jobs.iter().zip(answers) {
            debug_assert_eq!(job.block, ans.block);
            queries.push(QueryRecord {
                block: ans.block,
                strategy,
                verdict: ans.verdict.label().to_string(),
                wall_ms: ans.wall.as_secs_f64() * 1e3,
            });
            let a = attempts.get_mut(&ans.block).unwrap();
            match ans.verdict {
                SolverVerdict::Sat(model) => {
                    let prov = Provenance {
                        generator: "sc".into(),
                        strategy: Some(strategy),
                        mode: Some(cfg.mode),
                        solver: solver_name.to_string(),
                    };
                    match extract_test(&model, job.seeded, ans.block, &interp, prov) {
                        Ok(t) => {
                            covered.insert(ans.block, t);
                        }
                        Err(e) => {
                            if matches!(strategy, Strategy::Unroll(_)) {
                                log::warn!("{}: exact model failed replay: {e}", r.name);
                            }
                            a.replay = Some(e.to_string());
                        }
                    }
                }
                SolverVerdict::Unsat => {}
                SolverVerdict::Unknown(reason) => a.unknown = Some(reason),
                SolverVerdict::SolverFailure(msg) => a.failure = Some(msg),
            }
        }
        pending.retain(|b| !covered.contains_key(b));
    }

    let mut results = BTreeMap::new();
    for id in map.ids() {
        let res = if let Some(t) = covered.remove(&id) {
            BlockResult::Covered(t)
        } else {
            let a = &attempts[&id];
            if let Some(f) = &a.failure {
                BlockResult::SolverFailure(f.clone())
            } else if let Some(u) = a.unknown.as_ref().or(a.replay.as_ref()) {
                BlockResult::Unknown(u.clone())
            } else {
                BlockResult::Unsat
            }
        };
        results.insert(id, res);
    }
    let mut part = classify(results);
    if cfg.minimize {
        part.tests = minimize_all(&part.tests, &interp, cfg.jobs);
    }
    let mut suite = TestSuite::empty(&r.name, n);
    suite.tests = part.tests;
    suite.unreachable = part.unreachable;
    suite.undetermined = part.undetermined;
    let coverage = measure_coverage(&interp, &suite)?;
    Ok(GenResult {
        suite,
        coverage,
        block_map: map,
        queries,
        failures: part.failures,
        wall: start.elapsed(),
    })
}

fn minimize_all(tests: &[TestCase], interp: &Interpreter, workers: usize) -> Vec<TestCase> {
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, tests.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(t) = tests.get(k) else { break };
                let m = minimize(t, interp);
                out.lock().unwrap().push(m);
            });
        }
    });
    let mut v = out.into_inner().unwrap();
    v.sort_by_key(|t| t.target);
    v
}

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyOutcome {
    /// Unsat under an invariant-based (or exact) encoding.
    Proved,
    /// Unsat only up to the given unrolling depth.
    BoundedProof(u32),
    /// Inputs confirmed by the interpreter to violate a contract.
    Counterexample { inputs: Inputs, outcome: String },
    Unknown(String),
    SolverFailure(String),
}

impl VerifyOutcome {
    pub fn label(&self) -> String {
        match self {
            VerifyOutcome::Proved => "proved".into(),
            VerifyOutcome::BoundedProof(k) => format!("proved up to {k} iterations"),
            VerifyOutcome::Counterexample { .. } => "counterexample".into(),
            VerifyOutcome::Unknown(r) => format!("unknown ({r})"),
            VerifyOutcome::SolverFailure(m) => format!("solver failure: {m}"),
        }
    }
}

/// Checks the unseeded routine's contracts, checks and array accesses.
pub fn verify(r: &Routine, cfg: &GenConfig) -> Result<VerifyOutcome, PipelineError> {
    let original = normalize(r);
    let interp = Interpreter::new(&original);
    let mut unconfirmed = None;
    let mut unknown = None;
    let mut bounded = None;
    let mut strategies = ladder(&original, cfg.unroll_max);
    if original.has_loops() && !all_loops_have_invariants(&original) {
        // Without invariants only the deepest bounded check says anything.
        strategies.retain(|s| *s == Strategy::Unroll(cfg.unroll_max.max(1)));
    }
    for strategy in strategies {
        let vc = verification_vc(&original, strategy, &cfg.bounds)?;
        match solve(&cfg.solver, &emit_query(&vc)) {
            SolverVerdict::Unsat => match strategy {
                Strategy::InvariantHavoc => return Ok(VerifyOutcome::Proved),
                // Deeper unrollings may still find a violation.
                Strategy::Unroll(k) => bounded = Some(k),
            },
            SolverVerdict::Sat(model) => {
                let inputs = model
                    .to_inputs(&original.params)
                    .map_err(|e| VcError::Unsupported(e.to_string()))?;
                let exec = interp.run(&inputs)?;
                match exec.outcome {
                    Outcome::Normal(_) | Outcome::PreconditionViolation(_) => {
                        unconfirmed = Some("counterexample not confirmed by replay".to_string());
                    }
                    o => {
                        return Ok(VerifyOutcome::Counterexample {
                            inputs,
                            outcome: o.label().to_string(),
                        })
                    }
                }
            }
            SolverVerdict::Unknown(reason) => unknown = Some(reason),
            SolverVerdict::SolverFailure(m) => return Ok(VerifyOutcome::SolverFailure(m)),
        }
    }
    if let (Some(k), None) = (bounded, &unknown) {
        return Ok(VerifyOutcome::BoundedProof(k));
    }
    Ok(VerifyOutcome::Unknown(
        unknown.or(unconfirmed).unwrap_or_else(|| "no strategy applies".into()),
    ))
}

/// SHA-256 over `(name, content)` pairs in the given order.
pub fn corpus_hash<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut h = Sha256::new();
    for (name, content) in files {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(content.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

/// Reproducibility record attached to every emitted artefact.
pub fn manifest(
    generator: &str,
    config: serde_json::Value,
    solver: &str,
    corpus_hash: &str,
    queries: &[QueryRecord],
    wall: Duration,
) -> serde_json::Value {
    serde_json::json!({
        "generator": generator,
        "tool": concat!("seedcov ", env!("CARGO_PKG_VERSION")),
        "config": config,
        "solver": solver,
        "corpus_sha256": corpus_hash,
        "queries": queries,
        "wall_ms": wall.as_secs_f64() * 1e3,
    })
}
