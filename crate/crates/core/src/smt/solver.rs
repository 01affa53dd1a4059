// SPDX-License-Identifier: Apache-2.0

//! External solver driver: one-shot queries and incremental sessions over
//! stdin/stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::{parse_model, EntryModel};
use super::sexp::{is_balanced, parse_all, Sexp};

/// Environment variable that overrides the configured solver executable.
pub const SOLVER_ENV: &str = "SC_SOLVER_PATH";

/// Grace period past the solver's own timeout before the process is killed.
const KILL_GRACE: Duration = Duration::from_millis(1500);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub incremental: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::new(None, Duration::from_secs(10))
    }
}

impl SolverConfig {
    /// `program` falls back to `$SC_SOLVER_PATH`, then `z3`.
    pub fn new(program: Option<&str>, timeout: Duration) -> Self {
        let program = std::env::var(SOLVER_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| program.map(str::to_string))
            .unwrap_or_else(|| "z3".to_string());
        let args = default_args(&program);
        SolverConfig {
            program,
            args,
            timeout,
            incremental: true,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn timeout_ms(&self) -> u128 {
        self.timeout.as_millis().max(1)
    }

    fn spawn(&self) -> std::io::Result<Proc> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Proc { child, stdin, rx })
    }
}

fn default_args(program: &str) -> Vec<String> {
    let stem = std::path::Path::new(program)
        .file_name()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    if stem.starts_with("z3") {
        vec!["-in".into()]
    } else if stem.starts_with("cvc") {
        vec!["--lang=smt2".into(), "--incremental".into()]
    } else {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat(EntryModel),
    Unsat,
    Unknown(String),
    SolverFailure(String),
}

impl SolverVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SolverVerdict::Sat(_) => "sat",
            SolverVerdict::Unsat => "unsat",
            SolverVerdict::Unknown(_) => "unknown",
            SolverVerdict::SolverFailure(_) => "failure",
        }
    }
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<String>,
}

enum Read {
    Line(String),
    Eof,
    Deadline,
}

impl Proc {
    fn send(&mut self, text: &str) -> bool {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .is_ok()
    }

    /// Next meaningful line, skipping acknowledgements.
    fn line(&self, deadline: Instant) -> Read {
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(left) {
                Ok(l) => {
                    let t = l.trim();
                    if t.is_empty() || t == "success" || t == "unsupported" {
                        continue;
                    }
                    return Read::Line(t.to_string());
                }
                Err(RecvTimeoutError::Timeout) => return Read::Deadline,
                Err(RecvTimeoutError::Disconnected) => return Read::Eof,
            }
        }
    }

    /// One complete s-expression response.
    fn response(&self, deadline: Instant) -> Read {
        let mut buf = String::new();
        loop {
            match self.line(deadline) {
                Read::Line(l) => {
                    buf.push_str(&l);
                    buf.push('\n');
                    if is_balanced(&buf) || !buf.trim_start().starts_with('(') {
                        return Read::Line(buf);
                    }
                }
                other => return other,
            }
        }
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn classify_unknown(reason: &str, elapsed: Duration, timeout: Duration) -> String {
    let r = reason.to_lowercase();
    if elapsed >= timeout || r.contains("timeout") || r.contains("canceled") || r.contains("resource") {
        "timeout".to_string()
    } else if r.is_empty() {
        "unknown".to_string()
    } else {
        reason.to_string()
    }
}

fn reason_text(resp: &str) -> String {
    match parse_all(resp).ok().as_deref() {
        Some([Sexp::List(l)]) => match l.get(1) {
            Some(Sexp::Str(s)) | Some(Sexp::Atom(s)) => s.clone(),
            _ => String::new(),
        },
        _ => String::new(),
    }
}

/// Runs a complete script in a fresh solver process. The script is expected
/// to end with `(check-sat)` optionally followed by `(get-value ...)`.
pub fn solve(cfg: &SolverConfig, query: &str) -> SolverVerdict {
    let start = Instant::now();
    let mut proc = match cfg.spawn() {
        Ok(p) => p,
        Err(e) => return SolverVerdict::SolverFailure(format!("cannot start `{}`: {e}", cfg.program)),
    };
    let script = format!("(set-option :timeout {})\n{query}\n(exit)\n", cfg.timeout_ms());
    // A solver that exits early closes its stdin; the reply still tells us why.
    let _ = proc.send(&script);
    let deadline = start + cfg.timeout + KILL_GRACE;
    let mut lines = Vec::new();
    loop {
        match proc.line(deadline) {
            Read::Line(l) => lines.push(l),
            Read::Eof => break,
            Read::Deadline => {
                proc.kill();
                return SolverVerdict::Unknown("timeout".into());
            }
        }
    }
    let status = proc.child.wait();
    let elapsed = start.elapsed();
    let Some(pos) = lines
        .iter()
        .position(|l| matches!(l.as_str(), "sat" | "unsat" | "unknown"))
    else {
        let detail = lines.first().cloned().unwrap_or_default();
        return SolverVerdict::SolverFailure(match status {
            Ok(s) if !s.success() => format!("solver exited with {s}: {detail}"),
            _ => format!("no verdict in solver output: {detail}"),
        });
    };
    if let Some(err) = lines[..pos].iter().find(|l| l.starts_with("(error")) {
        return SolverVerdict::SolverFailure(err.clone());
    }
    let rest = lines[pos + 1..].join("\n");
    match lines[pos].as_str() {
        "unsat" => SolverVerdict::Unsat,
        "unknown" => {
            let reason = lines[pos + 1..]
                .iter()
                .find(|l| l.contains(":reason-unknown"))
                .map(|l| reason_text(l))
                .unwrap_or_default();
            SolverVerdict::Unknown(classify_unknown(&reason, elapsed, cfg.timeout))
        }
        _ => match parse_model(&rest) {
            Ok(m) => SolverVerdict::Sat(m),
            Err(e) => SolverVerdict::SolverFailure(e.to_string()),
        },
    }
}

/// An incremental solver process: the prelude is sent once, each query runs
/// between `push` and `pop`. A timed-out process is killed and restarted
/// on the next query.
pub struct Session {
    cfg: SolverConfig,
    prelude: String,
    proc: Option<Proc>,
}

impl Session {
    pub fn new(cfg: &SolverConfig, prelude: impl Into<String>) -> Self {
        Session {
            cfg: cfg.clone(),
            prelude: prelude.into(),
            proc: None,
        }
    }

    fn ensure(&mut self) -> Result<&mut Proc, String> {
        if self.proc.is_none() {
            let mut p = self
                .cfg
                .spawn()
                .map_err(|e| format!("cannot start `{}`: {e}", self.cfg.program))?;
            let head = format!("(set-option :timeout {})\n{}\n", self.cfg.timeout_ms(), self.prelude);
            if !p.send(&head) {
                p.kill();
                return Err("solver closed its input".into());
            }
            self.proc = Some(p);
        }
        Ok(self.proc.as_mut().unwrap())
    }

    fn abandon(&mut self) {
        if let Some(p) = self.proc.take() {
            p.kill();
        }
    }

    /// Checks the prelude together with `assertions`; on sat, `get_value`
    /// (a parenthesised term list) is requested.
    pub fn check(&mut self, assertions: &[String], get_value: &str) -> SolverVerdict {
        let start = Instant::now();
        let deadline = start + self.cfg.timeout + KILL_GRACE;
        let timeout = self.cfg.timeout;
        let proc = match self.ensure() {
            Ok(p) => p,
            Err(e) => return SolverVerdict::SolverFailure(e),
        };
        let mut cmd = String::from("(push 1)\n");
        for a in assertions {
            cmd.push_str(&format!("(assert {a})\n"));
        }
        cmd.push_str("(check-sat)\n");
        if !proc.send(&cmd) {
            self.abandon();
            return SolverVerdict::SolverFailure("solver closed its input".into());
        }
        let verdict = match proc.line(deadline) {
            Read::Line(l) => l,
            Read::Eof => {
                self.abandon();
                return SolverVerdict::SolverFailure("solver exited unexpectedly".into());
            }
            Read::Deadline => {
                self.abandon();
                return SolverVerdict::Unknown("timeout".into());
            }
        };
        let follow_up = match verdict.as_str() {
            "sat" => format!("(get-value {get_value})\n"),
            "unknown" => "(get-info :reason-unknown)\n".to_string(),
            "unsat" => String::new(),
            other => {
                let msg = other.to_string();
                self.abandon();
                return SolverVerdict::SolverFailure(msg);
            }
        };
        let mut resp = String::new();
        if !follow_up.is_empty() {
            if !proc.send(&follow_up) {
                self.abandon();
                return SolverVerdict::SolverFailure("solver closed its input".into());
            }
            match proc.response(deadline) {
                Read::Line(r) => resp = r,
                Read::Eof => {
                    self.abandon();
                    return SolverVerdict::SolverFailure("solver exited unexpectedly".into());
                }
                Read::Deadline => {
                    self.abandon();
                    return SolverVerdict::Unknown("timeout".into());
                }
            }
        }
        if !proc.send("(pop 1)\n") {
            self.abandon();
        }
        let elapsed = start.elapsed();
        match verdict.as_str() {
            "unsat" => SolverVerdict::Unsat,
            "unknown" => SolverVerdict::Unknown(classify_unknown(&reason_text(&resp), elapsed, timeout)),
            _ => match parse_model(&resp) {
                Ok(m) => SolverVerdict::Sat(m),
                Err(e) => SolverVerdict::SolverFailure(e.to_string()),
            },
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(mut p) = self.proc.take() {
            let _ = p.send("(exit)\n");
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }
}

/// `name version` as reported by the solver itself.
pub fn solver_identity(cfg: &SolverConfig) -> Result<String, String> {
    let mut p = cfg
        .spawn()
        .map_err(|e| format!("cannot start `{}`: {e}", cfg.program))?;
    p.send("(get-info :name)\n(get-info :version)\n(exit)\n");
    let deadline = Instant::now() + Duration::from_secs(10);
    let mut parts = Vec::new();
    for _ in 0..2 {
        match p.response(deadline) {
            Read::Line(r) => parts.push(reason_text(&r)),
            _ => break,
        }
    }
    p.kill();
    if parts.len() == 2 && !parts[0].is_empty() {
        Ok(format!("{} {}", parts[0], parts[1]))
    } else {
        Err(format!("`{}` did not report its name and version", cfg.program))
    }
}

/// Whether the configured solver can be started at all.
pub fn solver_available(cfg: &SolverConfig) -> bool {
    solver_identity(cfg).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_reasons_are_classified() {
        let t = Duration::from_millis(10);
        assert_eq!(classify_unknown("", Duration::from_millis(20), t), "timeout");
        assert_eq!(classify_unknown("canceled", Duration::ZERO, t), "timeout");
        assert_eq!(classify_unknown("(incomplete quantifiers)", Duration::ZERO, t), "(incomplete quantifiers)");
        assert_eq!(reason_text("(:reason-unknown \"timeout\")"), "timeout");
    }

    #[test]
    fn default_arguments_follow_the_executable() {
        assert_eq!(default_args("/usr/bin/z3"), vec!["-in".to_string()]);
        assert!(default_args("mysolver").is_empty());
    }
}
