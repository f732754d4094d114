//! `trihlab`: runs sweeps, the cell and limit problems, and the numerical self-checks.
//!
//! Exit status is 0 when everything passes, 2 when a check or regime verdict
//! fails, and 1 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trihlab_core::cell::CellResolution;
use trihlab_core::eig::OracleBc;
use trihlab_core::geometry::PeriodicProfile;
use trihlab_core::lab::{self, CheckReport, ExperimentConfig, FlatSettings, K1Setting, LabError, Reference, VerdictStatus};
use trihlab_core::par::Parallelism;

#[derive(Parser)]
#[command(name = "trihlab", version, about = "Triharmonic eigenvalues on domains with oscillating boundaries")]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Print check reports as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep over epsilon and write `<output>.csv` and `<output>.json`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output prefix; overrides `output` in the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the cell problem and report the strange constant K1.
    Cell {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Truncation depth L; results at L and 2L are reported.
        #[arg(long, default_value_t = 4.0)]
        depth: f64,
    },
    /// Solve the four flat limit problems.
    Limit {
        /// `auto` solves the cell problem.
        #[arg(long, default_value = "auto")]
        k1: K1Setting,
        /// Mesh and profile settings; the canonical defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Green formula on the periodic strip and the box.
    GreenCheck,
    /// Exact-integration identities and the polynomial-defect projector.
    UnfoldCheck,
    /// O(eps^2) rate of the local average.
    AvgCheck,
    /// 1D Galerkin eigenvalues against the determinant oracle.
    Oracle1d {
        #[arg(long, value_enum)]
        bc: BcArg,
        #[arg(long, default_value_t = 64)]
        elements: usize,
        #[arg(long, default_value_t = 5)]
        degree: usize,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile `b = offset + amplitude cos(2 pi y)`.
    #[arg(long, default_value_t = 1.5)]
    offset: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Take profile and cell resolution from a sweep config instead.
    #[arg(long, conflicts_with_all = ["offset", "amplitude"])]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Wbc,
    Sbc,
    Dbc,
}

impl From<BcArg> for OracleBc {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Wbc => OracleBc::Wbc,
            BcArg::Sbc => OracleBc::Sbc,
            BcArg::Dbc => OracleBc::Dbc,
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.clone(), source })?;
    ExperimentConfig::from_toml(&text)
}

fn print_report(r: &CheckReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(r).expect("report serializes"));
        return;
    }
    println!("[{}] {}", r.name, if r.passed { "PASS" } else { "FAIL" });
    for line in &r.lines {
        println!("  {line}");
    }
}

/// `true` when every report passed.
fn report_all(reports: &[CheckReport], json: bool) -> bool {
    reports.iter().for_each(|r| print_report(r, json));
    reports.iter().all(|r| r.passed)
}

fn sweep(config: &PathBuf, output: Option<PathBuf>, mode: Parallelism) -> Result<bool, LabError> {
    let cfg = load_config(config)?;
    let prefix = output.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| config.with_extension(""));
    let result = lab::run_sweep(&cfg, mode)?;
    let (csv, json) = lab::emit_results(&result, &prefix.with_extension("csv"))?;
    println!("alpha {} regime {:?} K1 {:.6}", cfg.alpha, result.regime, result.k1);
    for (r, s) in Reference::ALL.iter().map(|&r| (r, result.references.get(r))) {
        println!("  {:4} lambda_1 {:.6}", r.label(), s.eigenvalues[0]);
    }
    for p in &result.points {
        let g = &p.gaps[0];
        println!(
            "  eps {:<8} dofs {:5} lambda_1 {:.6}  gaps A {:.4} Ahat {:.4} S {:.4} D {:.4}  ({:.1} s)",
            p.epsilon, p.dofs, p.spectrum.eigenvalues[0], g[0], g[1], g[2], g[3], p.seconds
        );
    }
    let v = &result.verdict;
    println!(
        "verdict {} (expected {}, discriminated {}, monotone {}) status {:?}",
        v.label(),
        v.expected.map_or("none", |r| r.label()),
        v.discriminated,
        v.monotone,
        v.status
    );
    println!("traces decreasing: first {} second {}", result.traces.first_decreasing, result.traces.second_decreasing);
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(v.status != VerdictStatus::Fail && result.reference_ordering)
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let mode = if cli.sequential { Parallelism::Sequential } else { Parallelism::Parallel };
    match cli.command {
        Command::Sweep { config, output } => sweep(&config, output, mode),
        Command::Cell { profile, depth } => {
            let (profile, resolution) = match &profile.config {
                Some(path) => {
                    let cfg = load_config(path)?;
                    (cfg.profile, cfg.cell)
                }
                None => (PeriodicProfile::cosine(profile.offset, profile.amplitude)?, CellResolution::default()),
            };
            let (k1, report) = lab::cell_check(&profile, depth, resolution, mode)?;
            let ok = report_all(&[report], cli.json);
            if !cli.json {
                println!("K1 {k1:.10}");
            }
            Ok(ok)
        }
        Command::Limit { k1, config, count } => {
            let mut cfg = match &config {
                Some(path) => load_config(path)?,
                None => ExperimentConfig::canonical(2.5),
            };
            cfg.k1 = k1;
            let (k1, _) = lab::resolve_k1(&cfg, mode)?;
            let (_, report) = lab::limit_check(&FlatSettings::from_config(&cfg)?, k1, count, mode)?;
            if !cli.json {
                println!("K1 {k1:.10}");
            }
            Ok(report_all(&[report], cli.json))
        }
        Command::GreenCheck => Ok(report_all(&[lab::green_check()?], cli.json)),
        Command::UnfoldCheck => Ok(report_all(&[lab::unfold_check()?], cli.json)),
        Command::AvgCheck => Ok(report_all(&[lab::average_check()?], cli.json)),
        Command::Oracle1d { bc, elements, degree, count } => Ok(report_all(&[lab::oracle1d_check(bc.into(), degree, elements, count)?], cli.json)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
