// SPDX-License-Identifier: Apache-2.0

mod common;

use std::time::Duration;

use seedcov::baseline::{generate_random_suite, RandomBudget};
use seedcov::interp::Interpreter;
use seedcov::pipeline::{generate, GenConfig};

fn budget(max_tests: u64) -> RandomBudget {
    RandomBudget {
        max_tests,
        time_limit: Duration::from_secs(600),
        rng_seed: 42,
    }
}

#[test]
fn runs_are_reproducible() {
    for e in common::corpus() {
        let a = generate_random_suite(&e.routine, &budget(200)).unwrap();
        let b = generate_random_suite(&e.routine, &budget(200)).unwrap();
        assert_eq!(a.suite.tests, b.suite.tests, "{}", e.name());
        assert_eq!(a.coverage.hits, b.coverage.hits, "{}", e.name());
    }
}

#[test]
fn simple_is_covered_quickly() {
    let r = generate_random_suite(&common::entry("simple").routine, &budget(100)).unwrap();
    assert_eq!(r.coverage.ratio, 1.0);
}

#[test]
fn deep_guard_defeats_random_inputs() {
    let r = generate_random_suite(&common::entry("deep_guard").routine, &budget(1000)).unwrap();
    assert_eq!(r.executed, 1000);
    assert!(r.coverage.ratio < 1.0);
}

#[test]
fn zero_budget_runs_nothing() {
    let r = generate_random_suite(&common::entry("max").routine, &budget(0)).unwrap();
    assert!(r.suite.tests.is_empty());
    assert_eq!(r.executed, 0);
    assert_eq!(r.coverage.ratio, 0.0);
}

#[test]
fn kept_tests_replay_to_their_coverage() {
    for e in common::corpus() {
        let r = generate_random_suite(&e.routine, &budget(300)).unwrap();
        let interp = Interpreter::new(&seedcov::blocks::normalize(&e.routine));
        let mut seen = std::collections::BTreeSet::new();
        for t in &r.suite.tests {
            assert_eq!(t.provenance.generator, "random");
            let x = interp.run(&t.inputs).unwrap();
            assert!(x.covers(t.target), "{}", e.name());
            seen.extend(x.trace);
        }
        assert_eq!(seen.len() as u32, r.coverage.exercised, "{}", e.name());
    }
}

#[test]
fn seeding_dominates_the_baseline() {
    let Some(solver) = common::solver() else { return };
    let cfg = GenConfig {
        solver,
        ..GenConfig::default()
    };
    for e in common::corpus() {
        let sc = generate(&e.routine, &cfg, "z3").unwrap();
        let art = generate_random_suite(&e.routine, &budget(1000)).unwrap();
        assert!(sc.coverage.ratio >= art.coverage.ratio, "{}", e.name());
        if e.name() == "deep_guard" {
            assert!(sc.coverage.ratio > art.coverage.ratio);
        }
    }
}
