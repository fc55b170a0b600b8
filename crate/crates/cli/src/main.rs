//! `pqfi`: sweeps, figure presets, landmark reports and the oracle check.
//!
//! Exit codes: 0 success, 1 a check failed or evaluation broke down,
//! 2 invalid configuration.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pqfi_core::experiments::{
    evaluate_in, figure_preset, meter_phase_report, run_oracle_check, write_outputs, Grid, LandmarkReport,
    OracleCheckConfig, Quantity, Scale, SweepConfig,
};
use pqfi_core::optimize::SearchOptions;
use pqfi_core::{ChannelParams, EigenLaw, Error, EstimationBudget, Execution, HalfInt, MeterSpec};

#[derive(Parser, Debug)]
#[command(name = "pqfi", version, about = "Quantum Fisher information of postselected compression channels")]
struct Cli {
    /// Worker threads for parallel evaluation (0 = all cores).
    #[arg(long, env = "PQFI_THREADS", global = true, default_value_t = 0)]
    threads: usize,

    /// Evaluate on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate quantities on a (j, lambda, Theta) grid and write CSV plus manifest.
    Sweep(SweepArgs),
    /// Report Theta_T, Theta_perp, Theta_par and the per-trial QFI at each.
    Landmarks(LandmarkArgs),
    /// Compare the analytic engine with the brute-force state-vector oracle.
    OracleCheck(OracleArgs),
    /// Run a figure preset (1..6) end to end.
    Figure(FigureArgs),
    /// Meter phase and visibility of <O_lambda>.
    Phase(PhaseArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LawArg {
    Pancharatnam,
    Symmetric,
    Fractional,
    Explicit,
}

#[derive(Args, Debug)]
struct MeterArgs {
    /// Meter dimension (ignored for --law explicit, which uses the length of --u-list).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of meter copies.
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, value_enum, default_value_t = LawArg::Pancharatnam)]
    law: LawArg,
    /// Exponent of the fractional law.
    #[arg(long)]
    eps: Option<f64>,
    /// Eigenvalues of the explicit law, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u_list: Vec<f64>,
}

impl MeterArgs {
    fn spec(&self) -> pqfi_core::Result<MeterSpec> {
        match self.law {
            LawArg::Pancharatnam => MeterSpec::pancharatnam(self.d, self.n),
            LawArg::Symmetric => MeterSpec::symmetric(self.d, self.n),
            LawArg::Fractional => {
                let eps = self.eps.ok_or_else(|| Error::Config("--law fractional needs --eps".into()))?;
                MeterSpec::new(self.d, self.n, EigenLaw::Fractional { eps })
            }
            LawArg::Explicit => {
                if self.u_list.is_empty() {
                    return Err(Error::Config("--law explicit needs --u-list".into()));
                }
                MeterSpec::explicit(self.n, self.u_list.clone())
            }
        }
    }
}

/// Spin values: a fraction ("3/2") or decimal ("1.5") is the value itself, a
/// bare integer is twice the value ("3" means 3/2).
fn parse_spin(s: &str) -> Result<HalfInt, String> {
    let s = s.trim();
    if s.contains('/') || s.contains('.') {
        s.parse::<HalfInt>().map_err(|e| e.to_string())
    } else {
        s.parse::<i32>().map(HalfInt::from_twice).map_err(|e| format!("bad spin '{s}': {e}"))
    }
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse::<Quantity>().map_err(|e| e.to_string())
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse::<Scale>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SpinArgs {
    /// Spin j, as a fraction ("3/2") or twice-integer ("3").
    #[arg(long, value_parser = parse_spin, default_value = "1/2")]
    j: HalfInt,
    /// Initial magnetic number (default j).
    #[arg(long, value_parser = parse_spin, allow_hyphen_values = true)]
    m_i: Option<HalfInt>,
    /// Final magnetic number (default -j).
    #[arg(long, value_parser = parse_spin, allow_hyphen_values = true)]
    m_f: Option<HalfInt>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    meter: MeterArgs,
    /// Spin values, comma separated.
    #[arg(long, value_parser = parse_spin, value_delimiter = ',', default_value = "1/2")]
    j: Vec<HalfInt>,
    /// Single coupling value; overrides the lambda grid flags.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 64)]
    lambda_count: usize,
    /// linear or log.
    #[arg(long, value_parser = parse_scale, default_value = "log")]
    lambda_scale: Scale,
    /// Single postselection phase; overrides the Theta grid flags.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_min: f64,
    #[arg(long, default_value_t = TAU, allow_hyphen_values = true)]
    theta_max: f64,
    #[arg(long, default_value_t = 256)]
    theta_count: usize,
    /// Include theta-max itself (off by default: a full period is [0, 2 pi)).
    #[arg(long)]
    theta_endpoint: bool,
    /// Output columns, comma separated: P,QT,Qpar,IT,Ipar,Iperp,T,SNR,dlambda and the *_n2 variants.
    #[arg(long, value_parser = parse_quantity, value_delimiter = ',', default_value = "P,IT,Ipar,Iperp,T")]
    outputs: Vec<Quantity>,
    /// Trials M behind the Cramér-Rao column dlambda.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LandmarkArgs {
    #[command(flatten)]
    meter: MeterArgs,
    #[command(flatten)]
    spin: SpinArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 4)]
    max_j_twice: i32,
    #[arg(long, default_value_t = 8)]
    max_d: usize,
    #[arg(long, default_value_t = 3)]
    max_n: u32,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Negative control: evaluate the analytic side with 4x moments.
    #[arg(long, hide = true)]
    inject_prefactor: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// Figure number, 1..6.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    id: u8,
    /// CSV path (default fig<N>.csv); the manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[command(flatten)]
    meter: MeterArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Check(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidMeter(_)
            | Error::InvalidMagnetic { .. }
            | Error::SpinTooLarge { .. }
            | Error::MeterMismatch(_)
    )
}

fn search_options(exec: Execution) -> SearchOptions {
    SearchOptions { exec, ..Default::default() }
}

fn run_sweep(a: &SweepArgs, exec: Execution) -> Result<(), Failure> {
    let spec = a.meter.spec()?;
    let lambda = match a.lambda {
        Some(l) => Grid::single(l),
        None => {
            Grid { min: a.lambda_min, max: a.lambda_max, count: a.lambda_count, scale: a.lambda_scale, endpoint: true }
        }
    };
    let theta = match a.theta {
        Some(t) => Grid::single(t),
        None => Grid {
            min: a.theta_min,
            max: a.theta_max,
            count: a.theta_count,
            scale: Scale::Linear,
            endpoint: a.theta_endpoint,
        },
    };
    let mut config = SweepConfig::single(spec, a.j.clone(), lambda, theta, a.outputs.clone());
    config.trials = EstimationBudget::new(a.trials)?;
    write_table(&config, "sweep", &a.out, exec)
}

fn write_table(config: &SweepConfig, command: &str, out: &Path, exec: Execution) -> Result<(), Failure> {
    let table = evaluate_in(config, exec)?;
    let manifest = write_outputs(&table, command, out, &search_options(exec))?;
    eprintln!("wrote {} rows to {} (manifest {})", table.rows(), out.display(), manifest.display());
    Ok(())
}

fn run_landmarks(a: &LandmarkArgs, exec: Execution) -> Result<(), Failure> {
    let spec = a.meter.spec()?;
    let j = a.spin.j;
    let params = ChannelParams::new(a.lambda, 0.0, j, a.spin.m_i.unwrap_or(j), a.spin.m_f.unwrap_or(-j))?;
    let report = LandmarkReport::compute(&params, &spec, &search_options(exec))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(())
}

fn run_oracle(a: &OracleArgs, exec: Execution) -> Result<(), Failure> {
    let cfg = OracleCheckConfig {
        max_twice_j: a.max_j_twice,
        max_d: a.max_d,
        max_n: a.max_n,
        points: a.points,
        seed: a.seed,
        inject_prefactor: a.inject_prefactor,
        exec,
        ..Default::default()
    };
    let report = run_oracle_check(&cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("points {} (skipped {}) seed {}", report.points, report.skipped, cfg.seed);
        for (name, w) in [("P", &report.probability), ("IT", &report.i_total), ("Iperp", &report.i_perp)] {
            println!(
                "{name:<6} max error {:.3e}  max relative {:.3e}  worst/allowed {:.3e}",
                w.max_error, w.max_relative, w.max_ratio_to_allowed
            );
        }
    }
    match report.failures.first() {
        None => {
            if !a.json {
                println!("PASS");
            }
            Ok(())
        }
        Some(f) => {
            let p = &f.point;
            Err(Failure::Check(format!(
                "{} failures; first: point {} ({} 2j={} 2m_i={} 2m_f={} d={} n={} lambda={:e} theta={:e}) {} analytic {:e} oracle {:e} error {:e} > {:e}",
                report.failures.len(),
                f.index,
                p.meter.law().name(),
                p.twice_j,
                p.twice_m_i,
                p.twice_m_f,
                p.meter.d(),
                p.meter.n(),
                p.lambda,
                p.theta,
                f.quantity,
                f.analytic,
                f.oracle,
                f.error,
                f.allowed
            )))
        }
    }
}

fn run_figure(a: &FigureArgs, exec: Execution) -> Result<(), Failure> {
    let config = figure_preset(a.id)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("fig{}.csv", a.id)));
    write_table(&config, &format!("figure {}", a.id), &out, exec)
}

fn run_phase(a: &PhaseArgs) -> Result<(), Failure> {
    let report = meter_phase_report(&a.meter.spec()?, a.lambda);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(())
}

fn configure_threads(threads: usize) -> Result<(), Failure> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(Error::Config(format!("thread pool: {e}"))))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let result = configure_threads(cli.threads).and_then(|_| match &cli.command {
        Command::Sweep(a) => run_sweep(a, exec),
        Command::Landmarks(a) => run_landmarks(a, exec),
        Command::OracleCheck(a) => run_oracle(a, exec),
        Command::Figure(a) => run_figure(a, exec),
        Command::Phase(a) => run_phase(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
