//! `frontlab`: command-line front end for regime classification, barrier
//! construction, travelling-wave shooting, simulations and sweeps.

mod commands;
mod config;
mod error;
mod output;
mod pipeline;
mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "frontlab", version, about = "Front propagation for u_t = (u^m)_xx + f(u)")]
pub struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Directory for artifacts (CSV, JSON, manifest).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps; defaults to the number of CPUs.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Print machine-readable JSON instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

/// `--alpha` accepts a positive number or `inf`.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let v = match s {
        "inf" | "Inf" | "infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|e| format!("{s}: {e}"))?,
    };
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("alpha must be positive, got {s}"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Lower reaction rate `r`.
    #[arg(long)]
    pub r: Option<f64>,
    /// Upper reaction rate; defaults to `r`.
    #[arg(long)]
    pub r_bar: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct WaveArgs {
    #[arg(long)]
    pub m: f64,
    /// Reaction `r s^beta (1 - s)`.
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Starting level `V(0) = delta` of the trajectory.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Points in the written profile.
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    PmeBump,
    FdeSub,
    AppendixSub,
    GrowthSuper,
    ConstantSpeed,
    RightTail,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify (m, alpha, beta) and print the level-set envelopes as JSON.
    Classify {
        #[arg(long)]
        m: f64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Envelope slack; `0.1 r` by default.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Build a sub- or supersolution, print its constants and check its
    /// residual sign.
    Construct {
        #[arg(long, value_enum)]
        kind: BarrierKind,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Plateau height for the fast-diffusion subsolution.
        #[arg(long, default_value_t = 1.0)]
        plateau: f64,
        /// Sample points per time level in the residual check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        x1: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t_start: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Integrate the travelling-wave phase-plane system at speed c.
    Shoot {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long)]
        c: f64,
    },
    /// Build a compactly supported wave profile; without --c the speed is
    /// found by the halving search.
    Wave {
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Run the solver for --config and write the trajectory.
    Simulate,
    /// Track, fit and check a trajectory written by `simulate`.
    Analyze {
        /// Run directory holding `manifest.json` and `trajectory.csv`.
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// simulate followed by analyze.
    Experiment,
    /// Classify every cell of an (alpha, beta) grid at fixed m.
    Sweep {
        #[arg(long)]
        m: f64,
        /// `lo:hi:n`
        #[arg(long, default_value = "0.2:5:25")]
        alpha: String,
        /// `lo:hi:n`
        #[arg(long, default_value = "1:3:25")]
        beta: String,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = commands::dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
