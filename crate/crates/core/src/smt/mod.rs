// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB queries, solver processes and model parsing.

pub mod eval;
pub mod model;
pub mod sexp;
pub mod solver;
pub mod term;

use std::fmt::Write;

use crate::vcgen::{Encoding, VerificationCondition};

pub use model::{parse_model, EntryModel, ModelParseError};
pub use solver::{solve, solver_identity, Session, SolverConfig, SolverVerdict, SOLVER_ENV};
pub use term::{Sort, Term};

const HEADER: &str = "(set-option :produce-models true)\n(set-logic ALL)\n";

fn declarations_text(decls: &[(String, Sort)], defs: &[(String, Sort, Term)]) -> String {
    let mut out = String::from(HEADER);
    for (name, sort) in decls {
        let _ = writeln!(out, "(declare-fun {name} () {sort})");
    }
    for (name, sort, t) in defs {
        let _ = writeln!(out, "(define-fun {name} () {sort} {t})");
    }
    out
}

fn get_value_text(terms: &[String]) -> String {
    format!("({})", terms.join(" "))
}

/// The complete one-shot script for `vc`.
pub fn emit_query(vc: &VerificationCondition) -> String {
    let mut out = declarations_text(&vc.declarations, &vc.definitions);
    let _ = writeln!(out, "(assert {})", vc.formula);
    out.push_str("(check-sat)\n");
    let terms = vc.value_terms();
    if !terms.is_empty() {
        let _ = writeln!(out, "(get-value {})", get_value_text(&terms));
    }
    out
}

/// Shared prelude of an incremental session over `enc`.
pub fn emit_prelude(enc: &Encoding) -> String {
    declarations_text(&enc.declarations, &enc.definitions)
}

/// The `get-value` argument list for an encoding's entry variables.
pub fn value_request(enc: &Encoding) -> String {
    let terms = crate::vcgen::value_terms(&enc.entry, enc.len_max);
    if terms.is_empty() {
        // get-value needs at least one term.
        "(true)".to_string()
    } else {
        get_value_text(&terms)
    }
}
