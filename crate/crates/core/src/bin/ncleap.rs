//! `ncleap` command line: trajectories, identity suites and invariant
//! reports for the non-commutative leapfrog map.

use clap::{Parser, Subcommand, ValueEnum};
use ncleap::algebra::Backend;
use ncleap::cli::{cmd_biortho, cmd_brackets, cmd_invariants, cmd_simulate, RunConfig};
use ncleap::leapfrog::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Rational,
    Float,
    Scalar,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Rational => Backend::Rational,
            BackendArg::Float => Backend::Float,
            BackendArg::Scalar => Backend::Scalar,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Periodic,
    Windowed,
}

#[derive(Parser, Debug)]
#[command(
    name = "ncleap",
    about = "non-commutative leapfrog map: trajectories, identity suites, invariants"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Parser)]
struct CommonOpts {
    /// arithmetic backend
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendArg,
    /// matrix dimension of the backend
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// number of sites / squares
    #[arg(long = "N", default_value_t = 5)]
    n: usize,
    /// boundary mode for trajectories
    #[arg(long, value_enum, default_value = "windowed")]
    mode: ModeArg,
    /// window half-width beyond [0, N) in windowed mode
    #[arg(long, default_value_t = 4)]
    w: usize,
    /// RNG seed (runs are byte-identical for identical seeds)
    #[arg(long)]
    seed: u64,
    /// number of map steps
    #[arg(long, default_value_t = 5)]
    steps: usize,
    /// top polynomial degree for the bi-orthogonal suites
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    /// output directory
    #[arg(long, default_value = "ncleap-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a leapfrog trajectory; writes per-step JSON states and a residual CSV
    Simulate(CommonOpts),
    /// Conservation of the network invariants t_{i,j}; writes a drift CSV
    Invariants(CommonOpts),
    /// Bi-orthogonality, spectral transformations, Toda and flows; writes JSON
    Biortho(CommonOpts),
    /// Symbolic double-bracket relation suite (N <= 4); writes JSON
    Brackets(CommonOpts),
}

fn config_of(opts: &CommonOpts) -> RunConfig {
    RunConfig {
        backend: opts.backend.into(),
        d: opts.d,
        n: opts.n,
        mode: match opts.mode {
            ModeArg::Periodic => Mode::Periodic,
            ModeArg::Windowed => Mode::Windowed,
        },
        w: opts.w,
        seed: opts.seed,
        steps: opts.steps,
        n_max: opts.n_max,
        out_dir: opts.out.clone(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match &args.command {
        Command::Simulate(o) => cmd_simulate(&config_of(o)).map(|p| ("simulate", p)),
        Command::Invariants(o) => cmd_invariants(&config_of(o)).map(|p| ("invariants", p)),
        Command::Biortho(o) => cmd_biortho(&config_of(o)).map(|p| ("biortho", p)),
        Command::Brackets(o) => cmd_brackets(&config_of(o)).map(|p| ("brackets", p)),
    };
    match result {
        Ok((name, path)) => {
            println!("{name}: wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
