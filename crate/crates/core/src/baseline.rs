// SPDX-License-Identifier: Apache-2.0

//! Adaptive random testing: the comparison baseline.
//!
//! Candidates are drawn in batches; the one farthest (by minimum normalised
//! Euclidean distance) from every input executed so far is run next. Inputs
//! that violate the precondition are counted but contribute no coverage.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{enumerate_blocks, normalize, BlockId};
use crate::interp::{CoverageReport, Inputs, Interpreter, Outcome, RunError, Value};
use crate::lang::{Decl, Routine, Type};
use crate::testsuite::{Provenance, TestCase, TestSuite};

pub const BATCH: usize = 10;
pub const MAX_ARRAY_LEN: usize = 8;
const SPECIAL: [i64; 11] = [0, 1, -1, 2, -2, 10, -10, 100, -100, 1000, -1000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomBudget {
    pub max_tests: u64,
    pub time_limit: Duration,
    pub rng_seed: u64,
}

impl Default for RandomBudget {
    fn default() -> Self {
        RandomBudget {
            max_tests: 1000,
            time_limit: Duration::from_secs(600),
            rng_seed: 42,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomResult {
    pub suite: TestSuite,
    pub coverage: CoverageReport,
    /// Inputs executed, including precondition violations.
    pub executed: u64,
    pub precondition_violations: u64,
    pub wall: Duration,
}

fn draw_int<R: Rng>(rng: &mut R) -> i64 {
    // Half the draws come from the special values, half uniform over i32.
    if rng.gen_bool(0.5) {
        *SPECIAL.choose(rng).unwrap()
    } else {
        rng.gen_range(i32::MIN as i64..=i32::MAX as i64)
    }
}

fn draw_value<R: Rng>(rng: &mut R, ty: Type) -> Value {
    match ty {
        Type::Int => Value::Int(draw_int(rng)),
        Type::Bool => Value::Bool(rng.gen()),
        Type::IntArray => {
            let len = rng.gen_range(0..=MAX_ARRAY_LEN);
            Value::Array((0..len).map(|_| draw_int(rng)).collect())
        }
    }
}

pub fn draw_inputs<R: Rng>(rng: &mut R, params: &[Decl]) -> Inputs {
    params
        .iter()
        .map(|d| (d.name.clone(), draw_value(rng, d.ty)))
        .collect()
}

/// Signed log scale mapping the i32 range into [-1, 1], so that small
/// values stay apart from each other.
pub fn scale_int(n: i64) -> f64 {
    let m = ((n.unsigned_abs() as f64) + 1.0).log2() / 32.0;
    if n < 0 {
        -m
    } else {
        m
    }
}

/// Coordinates of an input in the unit-scaled space used for distances.
pub fn features(params: &[Decl], inputs: &Inputs) -> Vec<f64> {
    let mut out = Vec::new();
    for d in params {
        match inputs.get(&d.name) {
            Some(Value::Int(n)) => out.push(scale_int(*n)),
            Some(Value::Bool(b)) => out.push(if *b { 1.0 } else { 0.0 }),
            Some(Value::Array(cells)) => {
                out.push(cells.len() as f64 / MAX_ARRAY_LEN as f64);
                for k in 0..MAX_ARRAY_LEN {
                    out.push(cells.get(k).map_or(0.0, |&n| scale_int(n)));
                }
            }
            None => {}
        }
    }
    out
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Index of the candidate whose nearest executed neighbour is farthest.
/// Ties go to the earliest candidate.
pub fn select(candidates: &[Vec<f64>], executed: &[Vec<f64>]) -> usize {
    if executed.is_empty() {
        return 0;
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let d = executed
            .iter()
            .map(|e| distance(c, e))
            .fold(f64::INFINITY, f64::min);
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

pub fn generate_random_suite(r: &Routine, b: &RandomBudget) -> Result<RandomResult, RunError> {
    let start = Instant::now();
    let r = normalize(r);
    let interp = Interpreter::new(&r);
    let total = enumerate_blocks(&r).count();
    let mut rng = ChaCha8Rng::seed_from_u64(b.rng_seed);
    let mut suite = TestSuite::empty(&r.name, total);
    let mut hits: std::collections::BTreeMap<BlockId, u64> = (1..=total).map(|i| (BlockId(i), 0)).collect();
    let mut covered = BTreeSet::new();
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut executed = 0;
    let mut violations = 0;
    while executed < b.max_tests && start.elapsed() < b.time_limit {
        let batch: Vec<Inputs> = (0..BATCH).map(|_| draw_inputs(&mut rng, &r.params)).collect();
        let feats: Vec<Vec<f64>> = batch.iter().map(|i| features(&r.params, i)).collect();
        let pick = select(&feats, &history);
        let inputs = batch.into_iter().nth(pick).unwrap();
        history.push(feats.into_iter().nth(pick).unwrap());
        executed += 1;
        let exec = interp.run(&inputs)?;
        if matches!(exec.outcome, Outcome::PreconditionViolation(_)) {
            violations += 1;
            continue;
        }
        let fresh: Vec<BlockId> = exec.trace.iter().copied().filter(|id| !covered.contains(id)).collect();
        for id in &exec.trace {
            *hits.entry(*id).or_default() += 1;
        }
        if let Some(&target) = fresh.first() {
            covered.extend(fresh.iter().copied());
            suite.tests.push(TestCase {
                routine: r.name.clone(),
                target,
                inputs,
                minimized: false,
                provenance: Provenance {
                    generator: "random".into(),
                    strategy: None,
                    mode: None,
                    solver: String::new(),
                },
            });
        }
    }
    let coverage = CoverageReport::from_hits(hits, total, &[]);
    Ok(RandomResult {
        suite,
        coverage,
        executed,
        precondition_violations: violations,
        wall: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_prefers_far_candidate() {
        let cands = vec![vec![0.1], vec![0.9], vec![0.5]];
        assert_eq!(select(&cands, &[vec![0.0]]), 1);
        assert_eq!(select(&cands, &[]), 0);
    }

    #[test]
    fn int_scale_is_signed_and_bounded() {
        assert_eq!(scale_int(0), 0.0);
        assert_eq!(scale_int(1), 1.0 / 32.0);
        assert_eq!(scale_int(-1), -1.0 / 32.0);
        assert!(scale_int(i32::MAX as i64) <= 1.0);
        assert!(scale_int(i32::MIN as i64) >= -1.0);
    }

    #[test]
    fn features_pad_arrays() {
        let params = vec![Decl::new("a", Type::IntArray), Decl::new("b", Type::Bool)];
        let inputs: Inputs = [
            ("a".to_string(), Value::Array(vec![(1 << 16) - 1])),
            ("b".to_string(), Value::Bool(true)),
        ]
        .into_iter()
        .collect();
        let f = features(&params, &inputs);
        assert_eq!(f.len(), 1 + MAX_ARRAY_LEN + 1);
        assert_eq!(f[0], 1.0 / 8.0);
        assert_eq!(f[1], 0.5);
        assert_eq!(f[2], 0.0);
        assert_eq!(f[9], 1.0);
    }
}
