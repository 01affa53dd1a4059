// SPDX-License-Identifier: Apache-2.0

//! The bundled corpus of example routines and their expected block structure.
//!
//! Each `<name>.scl` holds one routine; `<name>.expected.json` records its
//! block count, branch count, unreachable blocks and, where known, the
//! minimised test inputs per block.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{count_branches, enumerate_blocks, normalize, BlockId};
use crate::interp::Inputs;
use crate::lang::{parse_program, typecheck, ParseError, Routine, Severity};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub name: String,
    pub blocks: u32,
    pub branches: u32,
    #[serde(default)]
    pub unreachable: Vec<BlockId>,
    /// Minimised inputs keyed by target block, where they are pinned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimized: Option<BTreeMap<BlockId, Inputs>>,
    /// Branch count of the original program this entry is modelled on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_branches: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub source: String,
    pub routine: Routine,
    pub expected: Expected,
}

impl CorpusEntry {
    pub fn name(&self) -> &str {
        &self.routine.name
    }
}

/// Directory of the corpus shipped with this crate.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses and typechecks one corpus file, which must hold exactly one routine.
pub fn load_entry(path: &Path) -> Result<CorpusEntry, CorpusError> {
    let source = read(path)?;
    let program = parse_program(&source).map_err(|source| CorpusError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let invalid = |message: String| CorpusError::Invalid {
        path: path.to_path_buf(),
        message,
    };
    if let Some(d) = typecheck(&program)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(invalid(d.render(&path.display().to_string())));
    }
    let [routine]: [Routine; 1] = program
        .routines
        .try_into()
        .map_err(|rs: Vec<Routine>| invalid(format!("expected one routine, found {}", rs.len())))?;
    let json_path = path.with_extension("expected.json");
    let expected: Expected =
        serde_json::from_str(&read(&json_path)?).map_err(|source| CorpusError::Json {
            path: json_path.clone(),
            source,
        })?;
    Ok(CorpusEntry {
        path: path.to_path_buf(),
        source,
        routine,
        expected,
    })
}

/// All `.scl` entries of `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_entry(p)).collect()
}

/// Mismatches between an entry's routine and its recorded structure.
pub fn check_structure(e: &CorpusEntry) -> Vec<String> {
    let mut problems = Vec::new();
    let map = enumerate_blocks(&normalize(&e.routine));
    if e.expected.name != e.routine.name {
        problems.push(format!("name {} != {}", e.expected.name, e.routine.name));
    }
    if map.count() != e.expected.blocks {
        problems.push(format!("blocks {} != {}", map.count(), e.expected.blocks));
    }
    let branches = count_branches(&e.routine.body);
    if branches != e.expected.branches {
        problems.push(format!("branches {} != {}", branches, e.expected.branches));
    }
    if let Some(id) = e.expected.unreachable.iter().find(|id| id.0 == 0 || id.0 > map.count()) {
        problems.push(format!("unreachable block {id} out of range"));
    }
    problems
}

/// `(file name, contents)` pairs for hashing.
pub fn hash_inputs(entries: &[CorpusEntry]) -> Vec<(String, String)> {
    entries
        .iter()
        .map(|e| {
            let name = e
                .path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, e.source.clone())
        })
        .collect()
}

/// Outcome of generating tests for one corpus entry.
#[derive(Clone, Debug)]
pub struct EntryCheck {
    pub name: String,
    pub problems: Vec<String>,
}

impl EntryCheck {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Generates a suite for every entry and checks exhaustive coverage, suite
/// size, the recorded structure and that every test passes.
pub fn corpus_check(
    entries: &[CorpusEntry],
    cfg: &crate::pipeline::GenConfig,
    solver_name: &str,
) -> Vec<EntryCheck> {
    entries
        .iter()
        .map(|e| {
            let mut problems = check_structure(e);
            match crate::pipeline::generate(&e.routine, cfg, solver_name) {
                Err(err) => problems.push(err.to_string()),
                Ok(g) => problems.extend(check_result(e, &g)),
            }
            EntryCheck {
                name: e.name().to_string(),
                problems,
            }
        })
        .collect()
}

fn check_result(e: &CorpusEntry, g: &crate::pipeline::GenResult) -> Vec<String> {
    let mut problems = Vec::new();
    let suite = &g.suite;
    if !g.coverage.exhaustive || !suite.undetermined.is_empty() {
        problems.push(format!(
            "not exhaustive: {}/{} exercised, undetermined {:?}",
            g.coverage.exercised, g.coverage.total, suite.undetermined
        ));
    }
    if suite.unreachable != e.expected.unreachable {
        problems.push(format!(
            "unreachable {:?}, expected {:?}",
            suite.unreachable, e.expected.unreachable
        ));
    }
    if suite.tests.len() as u32 > suite.blocks {
        problems.push(format!("{} tests for {} blocks", suite.tests.len(), suite.blocks));
    }
    let interp = crate::interp::Interpreter::new(&normalize(&e.routine));
    for t in &suite.tests {
        match interp.run(&t.inputs) {
            Ok(x) if x.outcome.passed() => {}
            Ok(x) => problems.push(format!("test for block {} fails: {}", t.target, x.outcome.label())),
            Err(err) => problems.push(format!("test for block {}: {err}", t.target)),
        }
    }
    if let Some(pinned) = &e.expected.minimized {
        for t in &suite.tests {
            if pinned.get(&t.target).is_some_and(|want| *want != t.inputs) {
                problems.push(format!("block {} minimised to {:?}", t.target, t.inputs));
            }
        }
    }
    problems
}
