// SPDX-License-Identifier: Apache-2.0

//! Test-suite generation by seeding contradictions.
//!
//! Every leaf block of a routine receives a guarded `check False end`; an SMT
//! solver then produces one counterexample per block, and each counterexample
//! becomes a test that exercises its block in the original routine.

pub mod blocks;
pub mod lang;
pub mod interp;
pub mod seeder;
pub mod smt;
pub mod vcgen;
pub mod testsuite;
pub mod pipeline;
pub mod baseline;
pub mod corpus;
pub mod sampling;
