//! `ellipsoid-lab`: scans, sweeps and verification runs for two-qubit
//! steering ellipsoids.
//!
//! Exit codes: 0 pass, 1 bound or suite violation, 2 usage, input or IO error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ellipsoid_lab::harness::{self, ScanOutcome, SweepOutcome};
use ellipsoid_lab::states::{self, EnsembleKind, EnsembleSpec, Rank};

#[derive(Debug, Parser)]
#[command(name = "ellipsoid-lab", version, about)]
struct Cli {
    /// Absolute tolerance for bound and closed-form comparisons.
    #[arg(long, global = true, env = "ELLIPSOID_LAB_TOL", default_value_t = harness::DEFAULT_TOL)]
    tol: f64,

    /// Worker threads (0 = all cores). Output does not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score random states against the conjectured CHSH and FEF bounds.
    Scan {
        #[arg(long, default_value_t = harness::DEFAULT_SCAN_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// 1, 2, 3, 4 or mixed.
        #[arg(long, default_value = "mixed")]
        rank: Rank,
        /// ginibre-mixed, pure or canonical-filtered.
        #[arg(long, default_value = "ginibre-mixed")]
        ensemble: EnsembleKind,
        /// Output file, stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate the maximally obese family on a uniform grid of centres.
    Sweep {
        #[arg(long = "points", visible_alias = "grid", default_value_t = harness::DEFAULT_SWEEP_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run every property suite and emit a JSON summary.
    Verify {
        #[arg(long, default_value_t = harness::DEFAULT_VERIFY_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report every measure and the steering ellipsoid of one state file.
    State {
        /// JSON file of the form {"matrix": [[re, im], ...16 entries]}.
        input: PathBuf,
    },
}

enum Outcome {
    Pass,
    Violation,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing stdout")?;
            stdout.flush().context("writing stdout")
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct ScanJson<'a> {
    records: &'a [harness::ScanRecord],
    skipped_singular: usize,
    max_beta_gap: f64,
    max_fef_gap: f64,
    violations: &'a [harness::Counterexample],
}

fn scan(spec: &EnsembleSpec, out: Option<&Path>, format: Format, tol: f64) -> Result<Outcome> {
    let outcome: ScanOutcome = harness::run_scan(spec, tol)?;
    let text = match format {
        Format::Csv => outcome.csv(),
        Format::Json => to_json(&ScanJson {
            records: &outcome.records,
            skipped_singular: outcome.skipped_singular,
            max_beta_gap: outcome.max_beta_gap,
            max_fef_gap: outcome.max_fef_gap,
            violations: &outcome.violations,
        })?,
    };
    emit(out, &text)?;
    eprintln!("{}", outcome.summary_line());

    if outcome.passed() {
        return Ok(Outcome::Pass);
    }
    let report = to_json(&outcome.violations)?;
    match out {
        Some(path) => {
            let mut name = path.as_os_str().to_owned();
            name.push(".counterexamples.json");
            let path = PathBuf::from(name);
            fs::write(&path, report).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("counterexamples written to {}", path.display());
        }
        None => eprint!("{report}"),
    }
    Ok(Outcome::Violation)
}

fn sweep(points: usize, out: Option<&Path>, format: Format, tol: f64) -> Result<Outcome> {
    let outcome: SweepOutcome = harness::run_sweep(points, tol)?;
    let text = match format {
        Format::Csv => outcome.csv(),
        Format::Json => to_json(&outcome.records)?,
    };
    emit(out, &text)?;
    for (c, name, d) in &outcome.mismatches {
        eprintln!("sweep mismatch at c = {c}: {name} off by {d:e}");
    }
    Ok(if outcome.passed() { Outcome::Pass } else { Outcome::Violation })
}

fn verify(samples: usize, seed: u64, out: Option<&Path>, tol: f64) -> Result<Outcome> {
    let summary = harness::run_verify(samples, seed, tol)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for s in &summary.suites {
        let status = match (s.passed, s.fatal) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "report",
        };
        let margin = s.worst_margin.map_or_else(|| "-".to_string(), |m| format!("{m:e}"));
        eprintln!("{status:>6}  {:<44} n={:<6} worst={margin}", s.name, s.checked);
    }
    emit(out, &to_json(&summary)?)?;
    Ok(if summary.passed { Outcome::Pass } else { Outcome::Violation })
}

fn state(input: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let rho = states::read_state(&text).with_context(|| format!("loading {}", input.display()))?;
    emit(None, &to_json(&harness::state_report(&rho))?)?;
    Ok(Outcome::Pass)
}

fn run(cli: Cli) -> Result<Outcome> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Scan { samples, seed, rank, ensemble, out, format } => {
            let spec = EnsembleSpec::new(ensemble, rank, seed, samples);
            scan(&spec, out.as_deref(), format, cli.tol)
        }
        Command::Sweep { points, out, format } => sweep(points, out.as_deref(), format, cli.tol),
        Command::Verify { samples, seed, out } => verify(samples, seed, out.as_deref(), cli.tol),
        Command::State { input } => state(&input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
