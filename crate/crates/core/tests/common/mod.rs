// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use seedcov::blocks::BLOCK_NUMBER;
use seedcov::corpus::{bundled_dir, load_corpus, CorpusEntry};
use seedcov::interp::{Execution, Outcome};
use seedcov::smt::{solver_identity, SolverConfig};

pub fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&bundled_dir()).expect("bundled corpus loads")
}

pub fn entry(name: &str) -> CorpusEntry {
    corpus().into_iter().find(|e| e.name() == name).expect("corpus entry")
}

/// The default solver, or `None` (with a note) when it cannot be started.
pub fn solver() -> Option<SolverConfig> {
    let cfg = SolverConfig::default();
    match solver_identity(&cfg) {
        Ok(_) => Some(cfg),
        Err(e) => {
            eprintln!("skipping: {e}");
            None
        }
    }
}

/// An execution with the block-number variable removed from its final state.
pub fn without_bn(x: &Execution) -> Execution {
    let mut x = x.clone();
    if let Outcome::Normal(st) = &mut x.outcome {
        st.remove(BLOCK_NUMBER);
    }
    x
}

/// Outcome kind and, for normal termination, the final state.
pub fn observable(x: &Execution) -> (String, Option<String>, Vec<seedcov::blocks::BlockId>) {
    let x = without_bn(x);
    let state = match &x.outcome {
        Outcome::Normal(st) => Some(format!("{st:?}")),
        _ => None,
    };
    (x.outcome.label().to_string(), state, x.trace)
}
