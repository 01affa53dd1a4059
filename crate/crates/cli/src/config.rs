// SPDX-License-Identifier: Apache-2.0

//! Run settings: defaults, `key = value` config files and flag overrides.

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, bail, Result};
use clap::ValueEnum;
use seedcov::baseline::RandomBudget;
use seedcov::pipeline::{default_jobs, GenConfig};
use seedcov::seeder::SeedMode;
use seedcov::smt::SolverConfig;
use seedcov::vcgen::InputBounds;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Rssp,
    Msp,
}

impl From<ModeArg> for SeedMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rssp => SeedMode::Rssp,
            ModeArg::Msp => SeedMode::Msp,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub solver: Option<String>,
    /// Seconds per query.
    pub timeout: f64,
    pub mode: SeedMode,
    pub minimize: bool,
    pub unroll_max: u32,
    pub seed: u64,
    pub tests: u64,
    /// Seconds of random testing per routine.
    pub time_limit: f64,
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for Settings {
    fn default() -> Self {
        let budget = RandomBudget::default();
        Settings {
            solver: None,
            timeout: 10.0,
            mode: SeedMode::Rssp,
            minimize: true,
            unroll_max: 64,
            seed: budget.rng_seed,
            tests: budget.max_tests,
            time_limit: budget.time_limit.as_secs_f64(),
            jobs: default_jobs(),
            out: PathBuf::from("sc-out"),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("expected a boolean, got `{v}`"),
    }
}

fn parse_seconds(v: &str) -> Result<f64> {
    let x: f64 = v.parse()?;
    if !(x.is_finite() && x > 0.0) {
        bail!("expected a positive number of seconds, got `{v}`");
    }
    Ok(x)
}

impl Settings {
    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| anyhow!("line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "solver" => self.solver = Some(v.to_string()),
            "timeout" => self.timeout = parse_seconds(v)?,
            "mode" => {
                self.mode = ModeArg::from_str(v, true)
                    .map_err(|_| anyhow!("unknown mode `{v}`"))?
                    .into()
            }
            "minimize" => self.minimize = parse_bool(v)?,
            "unroll_max" => self.unroll_max = v.parse()?,
            "seed" => self.seed = v.parse()?,
            "tests" => self.tests = v.parse()?,
            "time_limit" => self.time_limit = parse_seconds(v)?,
            "jobs" => self.jobs = v.parse::<usize>()?.max(1),
            "out" => self.out = PathBuf::from(v),
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig::new(self.solver.as_deref(), Duration::from_secs_f64(self.timeout))
    }

    pub fn gen_config(&self) -> GenConfig {
        GenConfig {
            solver: self.solver_config(),
            mode: self.mode,
            minimize: self.minimize,
            unroll_max: self.unroll_max,
            jobs: self.jobs,
            bounds: InputBounds::default(),
        }
    }

    pub fn budget(&self) -> RandomBudget {
        RandomBudget {
            max_tests: self.tests,
            time_limit: Duration::from_secs_f64(self.time_limit),
            rng_seed: self.seed,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cfg = self.solver_config();
        serde_json::json!({
            "solver": cfg.program,
            "solver_args": cfg.args,
            "timeout_s": self.timeout,
            "mode": self.mode.to_string(),
            "minimize": self.minimize,
            "unroll_max": self.unroll_max,
            "seed": self.seed,
            "tests": self.tests,
            "time_limit_s": self.time_limit,
            "jobs": self.jobs,
            "bounds": InputBounds::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_apply() {
        let mut s = Settings::default();
        s.apply_file("# comment\ntimeout = 2.5\nmode=msp\nminimize = no\nunroll_max = 8 # inline\n")
            .unwrap();
        assert_eq!(s.timeout, 2.5);
        assert_eq!(s.mode, SeedMode::Msp);
        assert!(!s.minimize);
        assert_eq!(s.unroll_max, 8);
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut s = Settings::default();
        assert!(s.apply_file("colour = blue").unwrap_err().to_string().contains("line 1"));
        assert!(s.apply_file("timeout").is_err());
        assert!(s.apply_file("timeout = -1").is_err());
    }
}
