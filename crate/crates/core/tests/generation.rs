// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use seedcov::blocks::{enumerate_blocks, normalize, BlockId};
use seedcov::corpus::corpus_check;
use seedcov::interp::{Interpreter, Outcome};
use seedcov::lang::parse_program;
use seedcov::pipeline::{generate, GenConfig};
use seedcov::sampling::{small_domain, valid_inputs};
use seedcov::seeder::{seed_msp, seed_rssp, SeedMode};
use seedcov::smt::sexp::is_balanced;
use seedcov::smt::{emit_query, solve, SolverVerdict};
use seedcov::testsuite::{minimize, Provenance, TestCase};
use seedcov::vcgen::{vc_for_block, InputBounds, Strategy};

fn config() -> Option<GenConfig> {
    Some(GenConfig {
        solver: common::solver()?,
        ..GenConfig::default()
    })
}

#[test]
fn corpus_passes_its_check() {
    let Some(cfg) = config() else { return };
    let corpus = common::corpus();
    for c in corpus_check(&corpus, &cfg, "z3") {
        assert!(c.passed(), "{}: {:?}", c.name, c.problems);
    }
}

#[test]
fn suites_are_non_redundant() {
    let Some(cfg) = config() else { return };
    for e in common::corpus() {
        let g = generate(&e.routine, &cfg, "z3").unwrap();
        let targets: BTreeSet<BlockId> = g.suite.tests.iter().map(|t| t.target).collect();
        assert_eq!(targets.len(), g.suite.tests.len(), "{}", e.name());
        assert!(g.suite.tests.len() as u32 <= g.suite.blocks);
        assert!(g.suite.is_partition(), "{}", e.name());
    }
}

#[test]
fn seeding_modes_agree() {
    let Some(cfg) = config() else { return };
    for e in common::corpus() {
        let rssp = generate(&e.routine, &cfg, "z3").unwrap();
        let msp_cfg = GenConfig {
            mode: SeedMode::Msp,
            ..cfg.clone()
        };
        let msp = generate(&e.routine, &msp_cfg, "z3").unwrap();
        assert_eq!(rssp.suite.covered_targets(), msp.suite.covered_targets(), "{}", e.name());
        assert_eq!(rssp.suite.unreachable, msp.suite.unreachable, "{}", e.name());
        assert_eq!(rssp.suite.undetermined, msp.suite.undetermined, "{}", e.name());
    }
}

/// Per block of a loop-free routine: the query is satisfiable exactly when
/// some input of the small domain covers the block.
#[test]
fn small_domain_oracle() {
    let Some(cfg) = common::solver() else { return };
    let bounds = InputBounds::small_domain();
    let mut checked = 0;
    for e in common::corpus().into_iter().filter(|e| !e.routine.has_loops()) {
        let r = normalize(&e.routine);
        let map = enumerate_blocks(&r);
        let interp = Interpreter::new(&r);
        let mut covered = BTreeSet::new();
        for v in small_domain(&r.params, &bounds) {
            let x = interp.run(&v).unwrap();
            if !matches!(x.outcome, Outcome::PreconditionViolation(_)) {
                covered.extend(x.trace);
            }
        }
        let s = seed_rssp(&r, &map);
        for i in map.ids() {
            let vc = vc_for_block(&s, i, Strategy::InvariantHavoc, &bounds).unwrap();
            let sat = match solve(&cfg, &emit_query(&vc)) {
                SolverVerdict::Sat(_) => true,
                SolverVerdict::Unsat => false,
                other => panic!("{} block {i}: {other:?}", e.name()),
            };
            assert_eq!(sat, covered.contains(&i), "{} block {i}", e.name());
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

/// Every model satisfies the formula under the built-in evaluator.
#[test]
fn models_check_against_the_formula() {
    let Some(cfg) = common::solver() else { return };
    let bounds = InputBounds::default();
    let mut sat = 0;
    for e in common::corpus() {
        let r = normalize(&e.routine);
        let map = enumerate_blocks(&r);
        let strategies = if r.has_loops() {
            vec![Strategy::Unroll(1), Strategy::Unroll(2)]
        } else {
            vec![Strategy::InvariantHavoc]
        };
        for i in map.ids() {
            let seeded = [seed_rssp(&r, &map), seed_msp(&r, &map, i).unwrap()];
            for (s, strategy) in seeded.iter().flat_map(|s| strategies.iter().map(move |k| (s, *k))) {
                let vc = vc_for_block(s, i, strategy, &bounds).unwrap();
                if let SolverVerdict::Sat(m) = solve(&cfg, &emit_query(&vc)) {
                    assert_eq!(vc.holds_in(&m), Ok(true), "{} block {i} {strategy}", e.name());
                    sat += 1;
                }
            }
        }
    }
    assert!(sat >= 50);
}

#[test]
fn golden_query_for_simple() {
    let e = common::entry("simple");
    let r = normalize(&e.routine);
    let s = seed_rssp(&r, &enumerate_blocks(&r));
    let vc = vc_for_block(&s, BlockId(1), Strategy::InvariantHavoc, &InputBounds::default()).unwrap();
    let text = emit_query(&vc);
    assert!(is_balanced(&text));
    assert_eq!(text, include_str!("golden/simple_block1.smt2"));
}

fn prov() -> Provenance {
    Provenance {
        generator: "test".into(),
        strategy: None,
        mode: None,
        solver: String::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Minimising any covering input keeps the target covered, the
    /// precondition satisfied and a passing run passing.
    #[test]
    fn minimisation_is_safe(entry in 0usize..14, seed in any::<u64>()) {
        let corpus = common::corpus();
        let e = &corpus[entry % corpus.len()];
        let interp = Interpreter::new(&e.routine);
        for v in valid_inputs(&interp, seed, 3) {
            let before = interp.run(&v).unwrap();
            for &target in before.trace.iter().collect::<BTreeSet<_>>() {
                let t = TestCase { routine: e.name().into(), target, inputs: v.clone(), minimized: false, provenance: prov() };
                let m = minimize(&t, &interp);
                let after = interp.run(&m.inputs).unwrap();
                prop_assert!(after.covers(target));
                prop_assert!(!matches!(after.outcome, Outcome::PreconditionViolation(_)));
                if before.outcome.passed() {
                    prop_assert!(after.outcome.passed());
                }
            }
        }
    }
}

#[test]
fn simple2_inputs_are_fixed() {
    let Some(cfg) = config() else { return };
    let r = parse_program(&common::entry("simple2").source).unwrap().routines.remove(0);
    let g = generate(&r, &cfg, "z3").unwrap();
    let pairs: Vec<(u32, String)> = g
        .suite
        .tests
        .iter()
        .map(|t| (t.target.0, t.inputs["a"].to_string()))
        .collect();
    let want: Vec<(u32, String)> = [(1, "1"), (2, "0"), (3, "-1"), (4, "0")]
        .iter()
        .map(|(b, a)| (*b, a.to_string()))
        .collect();
    assert_eq!(pairs, want);
}
