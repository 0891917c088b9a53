//! `sglab`: run generator checks, reproduce the worked examples, and
//! simulate network transport.
//!
//! Exit status: 0 all checks passed, 1 a check failed, 2 invalid input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semigroup_lab::commands::{run, CommandKind, ExitStatus, RunConfig, Solver};

#[derive(Parser, Debug)]
#[command(name = "sglab", version, about = "Contraction semigroups on grids and metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lumer–Phillips verdict for an operator or a network config.
    Check {
        /// left_shift, right_translation or laplacian (same as --operator).
        #[arg(value_name = "OPERATOR")]
        label: Option<String>,
    },
    /// Euler approximations (m/t R(m/t))^m f against the exact shift.
    Euler,
    /// Ramp counterexample for the right translation on a left half line.
    Counterexample,
    /// x² against the Laplacian with symmetric windows.
    Heat,
    /// Evolve a network config and write t,edge,x,u frames.
    Simulate,
    /// Exact resolvent against the Laplace transform of the semigroup.
    Resolvent {
        #[arg(value_name = "OPERATOR")]
        label: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long, global = true)]
    operator: Option<String>,
    /// Network config (JSON).
    #[arg(long, global = true)]
    network: Option<PathBuf>,
    /// Resolvent parameter; repeat or separate with commas.
    #[arg(long = "lambda", global = true, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Euler step counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    m_ladder: Vec<usize>,
    /// Number of grid cells.
    #[arg(long = "grid", global = true)]
    n_cells: Option<usize>,
    /// Seminorm or ramp index.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// characteristics or upwind.
    #[arg(long, global = true, default_value = "characteristics")]
    solver: String,
    #[arg(long, global = true, default_value_t = 0.9)]
    cfl: f64,
    /// Truncation time of the Laplace integral.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Time steps of the Laplace quadrature.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Number of output frames for simulate.
    #[arg(long, global = true, default_value_t = 10)]
    frames: usize,
    /// Directory for JSON/CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

fn config(cli: Cli) -> Result<RunConfig, semigroup_lab::Error> {
    let (kind, positional) = match cli.command {
        Command::Check { label } => (CommandKind::Check, label),
        Command::Euler => (CommandKind::Euler, None),
        Command::Counterexample => (CommandKind::Counterexample, None),
        Command::Heat => (CommandKind::Heat, None),
        Command::Simulate => (CommandKind::Simulate, None),
        Command::Resolvent { label } => (CommandKind::Resolvent, label),
    };
    let o = cli.opts;
    let mut cfg = RunConfig::new(kind);
    cfg.operator = positional.or(o.operator);
    cfg.network = o.network;
    cfg.lambdas = o.lambdas;
    cfg.t = o.t;
    cfg.m_ladder = o.m_ladder;
    cfg.n_cells = o.n_cells;
    cfg.n = o.n;
    cfg.solver = o.solver.parse::<Solver>()?;
    cfg.cfl = o.cfl;
    cfg.horizon = o.horizon;
    cfg.steps = o.steps;
    cfg.frames = o.frames;
    cfg.out = o.out;
    cfg.seed = o.seed;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match config(cli).and_then(|cfg| run(&cfg)) {
        Ok(out) => {
            println!("{}", out.summary);
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::Invalid.code() as u8)
        }
    }
}
