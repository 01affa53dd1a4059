// SPDX-License-Identifier: Apache-2.0

//! `seedcov`: generate, check and compare branch-covering test suites.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use seedcov::baseline::generate_random_suite;
use seedcov::blocks::{enumerate_blocks, normalize, BlockId};
use seedcov::interp::{CoverageReport, Interpreter};
use seedcov::lang::{parse_program, print_routine, typecheck, Routine, Severity};
use seedcov::pipeline::{corpus_hash, generate, ladder, manifest, verify, GenResult, VerifyOutcome};
use seedcov::seeder::{seed_msp, seed_rssp, SeedMode};
use seedcov::smt::{emit_query, solver_identity};
use seedcov::testsuite::{emit_suite, measure_coverage, report, TestSuite};
use seedcov::vcgen::vc_for_block;

use config::{ModeArg, Settings};

const EXIT_INPUT: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_COUNTEREXAMPLE: u8 = 4;

#[derive(Parser)]
#[command(name = "seedcov", version, about = "Branch-covering test generation by seeding contradictions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a test suite for every routine.
    Gentests(Common),
    /// Check each routine's contracts.
    Verify(Common),
    /// Replay saved suites and report block coverage.
    Coverage(Common),
    /// Compare generated suites with adaptive random testing.
    Compare(Common),
    /// Print intermediate artefacts.
    Dump {
        what: DumpKind,
        /// Block to target (seeded listing in msp mode, SMT query).
        #[arg(long)]
        block: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpKind {
    Blocks,
    Seeded,
    Smt,
}

#[derive(Args)]
struct Common {
    /// An .scl file or a directory of them.
    path: PathBuf,
    /// Solver executable (default: $SC_SOLVER_PATH or z3).
    #[arg(long)]
    solver: Option<String>,
    /// Per-query timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    no_minimize: bool,
    #[arg(long)]
    unroll_max: Option<u32>,
    /// Seed of the random baseline.
    #[arg(long)]
    seed: Option<u64>,
    /// Random baseline budget in tests.
    #[arg(long)]
    tests: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            s.apply_file(&text).with_context(|| format!("in {}", path.display()))?;
        }
        if let Some(v) = &self.solver {
            s.solver = Some(v.clone());
        }
        if let Some(v) = self.timeout {
            if !(v.is_finite() && v > 0.0) {
                bail!("--timeout must be a positive number of seconds");
            }
            s.timeout = v;
        }
        if let Some(v) = self.mode {
            s.mode = v.into();
        }
        if self.no_minimize {
            s.minimize = false;
        }
        if let Some(v) = self.unroll_max {
            s.unroll_max = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.tests {
            s.tests = v;
        }
        if let Some(v) = self.jobs {
            s.jobs = v.max(1);
        }
        if let Some(v) = &self.out {
            s.out = v.clone();
        }
        Ok(s)
    }
}

struct Loaded {
    routines: Vec<Routine>,
    hash: String,
}

/// Parses and typechecks `path`; on failure prints diagnostics and returns
/// `None`.
fn load(path: &Path) -> Result<Option<Loaded>> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "scl"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut sources = Vec::new();
    let mut routines = Vec::new();
    let mut ok = true;
    for f in &files {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let shown = f.display().to_string();
        match parse_program(&text) {
            Err(e) => {
                eprintln!("{}", e.to_diagnostic().render(&shown));
                ok = false;
            }
            Ok(p) => {
                for d in typecheck(&p) {
                    eprintln!("{}", d.render(&shown));
                    ok &= d.severity != Severity::Error;
                }
                routines.extend(p.routines);
            }
        }
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        sources.push((name, text));
    }
    if !ok {
        return Ok(None);
    }
    let hash = corpus_hash(sources.iter().map(|(n, t)| (n.as_str(), t.as_str())));
    Ok(Some(Loaded { routines, hash }))
}

fn ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

fn percent(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

fn solver_name(s: &Settings) -> String {
    let cfg = s.solver_config();
    solver_identity(&cfg).unwrap_or_else(|_| cfg.program.clone())
}

fn exit_for(results: &[GenResult]) -> u8 {
    if results.iter().any(|g| g.has_solver_failure()) {
        EXIT_SOLVER
    } else if results.iter().any(|g| g.has_undetermined()) {
        EXIT_UNDETERMINED
    } else {
        0
    }
}

fn run_generate(loaded: &Loaded, s: &Settings, solver: &str) -> Result<Vec<GenResult>> {
    let cfg = s.gen_config();
    let mut out = Vec::new();
    for r in &loaded.routines {
        let mut g = generate(r, &cfg, solver).with_context(|| format!("routine {}", r.name))?;
        g.suite.manifest = manifest("sc", s.to_json(), solver, &loaded.hash, &g.queries, g.wall);
        out.push(g);
    }
    Ok(out)
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gentests(loaded: &Loaded, s: &Settings) -> Result<u8> {
    let solver = solver_name(s);
    let results = run_generate(loaded, s, &solver)?;
    fs::create_dir_all(&s.out).with_context(|| format!("creating {}", s.out.display()))?;
    println!(
        "{:<20} {:>4} {:>6} {:>12} {:>13} {:>10}",
        "routine", "N", "tests", "unreachable", "undetermined", "wall"
    );
    for g in &results {
        emit_suite(&g.suite, Some(&g.coverage), &s.out)?;
        write_json(
            &s.out.join(format!("{}.coverage.json", g.suite.routine)),
            &with_manifest(g.coverage.to_json(), &g.suite.manifest),
        )?;
        println!(
            "{:<20} {:>4} {:>6} {:>12} {:>13} {:>10}",
            g.suite.routine,
            g.suite.blocks,
            g.suite.tests.len(),
            g.suite.unreachable.len(),
            g.suite.undetermined.len(),
            ms(g.wall)
        );
        for (id, why) in &g.failures {
            eprintln!("{}: block {id}: solver failure: {why}", g.suite.routine);
        }
        if !g.suite.unreachable.is_empty() {
            eprintln!(
                "note: {}: blocks proved unreachable: {}",
                g.suite.routine,
                ids(&g.suite.unreachable)
            );
        }
        if !g.suite.undetermined.is_empty() {
            eprintln!("{}: undetermined blocks: {}", g.suite.routine, ids(&g.suite.undetermined));
        }
    }
    Ok(exit_for(&results))
}

fn with_manifest(mut v: serde_json::Value, m: &serde_json::Value) -> serde_json::Value {
    v["manifest"] = m.clone();
    v
}

fn ids(v: &[BlockId]) -> String {
    v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
}

fn cmd_verify(loaded: &Loaded, s: &Settings) -> Result<u8> {
    let cfg = s.gen_config();
    let mut code = 0;
    for r in &loaded.routines {
        let v = verify(r, &cfg).with_context(|| format!("routine {}", r.name))?;
        println!("{}: {}", r.name, v.label());
        let c = match &v {
            VerifyOutcome::Proved | VerifyOutcome::BoundedProof(_) => 0,
            VerifyOutcome::Counterexample { inputs, outcome } => {
                println!("  inputs {} -> {outcome}", serde_json::to_string(inputs)?);
                EXIT_COUNTEREXAMPLE
            }
            VerifyOutcome::Unknown(_) => EXIT_UNDETERMINED,
            VerifyOutcome::SolverFailure(_) => EXIT_SOLVER,
        };
        code = code.max(c);
    }
    Ok(code)
}

fn cmd_coverage(loaded: &Loaded, s: &Settings) -> Result<u8> {
    for r in &loaded.routines {
        let path = s.out.join(format!("{}.suite.json", r.name));
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {} (run gentests first)", path.display()))?;
        let suite = TestSuite::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        let interp = Interpreter::new(&normalize(r));
        let cov = measure_coverage(&interp, &suite).with_context(|| format!("replaying {}", path.display()))?;
        print!("{}", report(&suite, Some(&cov)));
        write_json(
            &s.out.join(format!("{}.coverage.json", r.name)),
            &with_manifest(cov.to_json(), &suite.manifest),
        )?;
    }
    Ok(0)
}

struct Row {
    coverage: f64,
    exhaustive: bool,
    wall: Duration,
    size: usize,
}

fn summary(rows: &[Row]) -> (f64, usize, Duration, f64) {
    let n = rows.len().max(1) as f64;
    (
        rows.iter().map(|r| r.coverage).sum::<f64>() / n,
        rows.iter().filter(|r| r.exhaustive).count(),
        rows.iter().map(|r| r.wall).sum::<Duration>().div_f64(n),
        rows.iter().map(|r| r.size as f64).sum::<f64>() / n,
    )
}

fn cmd_compare(loaded: &Loaded, s: &Settings) -> Result<u8> {
    let solver = solver_name(s);
    let results = run_generate(loaded, s, &solver)?;
    let budget = s.budget();
    let random_dir = s.out.join("random");
    fs::create_dir_all(&random_dir).with_context(|| format!("creating {}", random_dir.display()))?;
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<20} {:>4} | {:>8} {:>6} {:>10} | {:>8} {:>6} {:>10} {:>8}",
        "routine", "N", "sc cov", "tests", "time", "rnd cov", "tests", "time", "pre-viol"
    );
    let (mut sc_rows, mut rnd_rows, mut json_rows) = (Vec::new(), Vec::new(), Vec::new());
    for (r, g) in loaded.routines.iter().zip(&results) {
        let mut rnd = generate_random_suite(r, &budget).with_context(|| format!("routine {}", r.name))?;
        // Judge both suites against the same unreachable set.
        let rc = CoverageReport::from_hits(rnd.coverage.hits.clone(), rnd.coverage.total, &g.suite.unreachable);
        rnd.suite.manifest = manifest("random", s.to_json(), "", &loaded.hash, &[], rnd.wall);
        emit_suite(&rnd.suite, Some(&rc), &random_dir)?;
        emit_suite(&g.suite, Some(&g.coverage), &s.out)?;
        let _ = writeln!(
            table,
            "{:<20} {:>4} | {:>8} {:>6} {:>10} | {:>8} {:>6} {:>10} {:>8}",
            r.name,
            g.suite.blocks,
            percent(g.coverage.ratio),
            g.suite.tests.len(),
            ms(g.wall),
            percent(rc.ratio),
            rnd.suite.tests.len(),
            ms(rnd.wall),
            rnd.precondition_violations
        );
        sc_rows.push(Row {
            coverage: g.coverage.ratio,
            exhaustive: g.coverage.exhaustive,
            wall: g.wall,
            size: g.suite.tests.len(),
        });
        rnd_rows.push(Row {
            coverage: rc.ratio,
            exhaustive: rc.exhaustive,
            wall: rnd.wall,
            size: rnd.suite.tests.len(),
        });
        json_rows.push(serde_json::json!({
            "routine": r.name,
            "blocks": g.suite.blocks,
            "sc": g.coverage.to_json(),
            "sc_tests": g.suite.tests.len(),
            "sc_wall_ms": g.wall.as_secs_f64() * 1e3,
            "random": rc.to_json(),
            "random_tests": rnd.suite.tests.len(),
            "random_wall_ms": rnd.wall.as_secs_f64() * 1e3,
            "random_executed": rnd.executed,
            "random_precondition_violations": rnd.precondition_violations,
        }));
    }
    let (sc, rnd) = (summary(&sc_rows), summary(&rnd_rows));
    let _ = writeln!(table, "\n{:<28} {:>12} {:>12}", "", "sc", "random");
    let _ = writeln!(table, "{:<28} {:>12} {:>12}", "average coverage", percent(sc.0), percent(rnd.0));
    let _ = writeln!(table, "{:<28} {:>12} {:>12}", "exhaustive routines", sc.1, rnd.1);
    let _ = writeln!(table, "{:<28} {:>12} {:>12}", "average time", ms(sc.2), ms(rnd.2));
    let _ = writeln!(table, "{:<28} {:>12.2} {:>12.2}", "average suite size", sc.3, rnd.3);
    let _ = writeln!(
        table,
        "(random: adaptive random testing, {} tests, seed {}; value distribution is a stand-in)",
        budget.max_tests, budget.rng_seed
    );
    print!("{table}");
    let _ = writeln!(table, "solver: {solver}\ncorpus sha256: {}\nconfig: {}", loaded.hash, s.to_json());
    fs::write(s.out.join("compare.txt"), &table)?;
    write_json(
        &s.out.join("compare.json"),
        &serde_json::json!({
            "config": s.to_json(),
            "solver": solver,
            "corpus_sha256": loaded.hash,
            "routines": json_rows,
        }),
    )?;
    Ok(exit_for(&results))
}

fn cmd_dump(loaded: &Loaded, s: &Settings, what: DumpKind, block: Option<u32>) -> Result<u8> {
    for r in &loaded.routines {
        let n = normalize(r);
        let map = enumerate_blocks(&n);
        match what {
            DumpKind::Blocks => {
                println!("routine {} ({} blocks)", r.name, map.count());
                println!("{:>4}  {:<16} {:<20} line", "id", "kind", "site");
                for e in &map.entries {
                    println!("{:>4}  {:<16} {:<20} {}", e.id.to_string(), e.kind.to_string(), e.site.to_string(), e.line);
                }
            }
            DumpKind::Seeded => {
                let seeded = match s.mode {
                    SeedMode::Rssp => seed_rssp(&n, &map),
                    SeedMode::Msp => {
                        let Some(b) = block else {
                            bail!("dump seeded in msp mode needs --block");
                        };
                        seed_msp(&n, &map, BlockId(b))?
                    }
                };
                print!("{}", print_routine(&seeded.routine));
            }
            DumpKind::Smt => {
                let b = BlockId(block.unwrap_or(1));
                let seeded = match s.mode {
                    SeedMode::Rssp => seed_rssp(&n, &map),
                    SeedMode::Msp => seed_msp(&n, &map, b)?,
                };
                let strategy = ladder(&n, s.unroll_max)[0];
                let vc = vc_for_block(&seeded, b, strategy, &s.gen_config().bounds)?;
                print!("{}", emit_query(&vc));
            }
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let (common, dump) = match &cli.cmd {
        Cmd::Gentests(c) | Cmd::Verify(c) | Cmd::Coverage(c) | Cmd::Compare(c) => (c, None),
        Cmd::Dump { what, block, common } => (common, Some((*what, *block))),
    };
    let settings = common.settings()?;
    let Some(loaded) = load(&common.path)? else {
        return Ok(EXIT_INPUT);
    };
    let start = Instant::now();
    let code = match (&cli.cmd, dump) {
        (Cmd::Gentests(_), _) => cmd_gentests(&loaded, &settings)?,
        (Cmd::Verify(_), _) => cmd_verify(&loaded, &settings)?,
        (Cmd::Coverage(_), _) => cmd_coverage(&loaded, &settings)?,
        (Cmd::Compare(_), _) => cmd_compare(&loaded, &settings)?,
        (Cmd::Dump { .. }, Some((what, block))) => cmd_dump(&loaded, &settings, what, block)?,
        (Cmd::Dump { .. }, None) => unreachable!(),
    };
    if !matches!(cli.cmd, Cmd::Dump { .. }) {
        println!("total wall time {}", ms(start.elapsed()));
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
