use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use weylroof::bounds::{BOUND_TOL, SUPERADD_TOL};
use weylroof::{ChannelSpec, EnsembleSize, OptimizerConfig};

#[derive(Parser, Debug)]
#[command(
    name = "weylroof",
    version,
    about = "Weyl channels, output-entropy roofs and entropy-bound experiments"
)]
pub struct Cli {
    /// Worker threads for restarts and samples [default: 1, or $WEYLROOF_THREADS]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Record wall-clock time in the report; timed reports are not byte-reproducible
    #[arg(long, global = true)]
    pub timing: bool,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kraus weights, validity and decomposition diagnostics of a Weyl channel
    ChannelShow {
        #[arg(long)]
        d: usize,
        /// Weight of each pure shift W_{m,0}
        #[arg(long)]
        r: f64,
        /// Weight of each displacement W_{m,n}, n >= 1
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Check the MUB entropy lower bound for depolarizing ⊗ identity on random states
    VerifyBound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 2)]
        dimk: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gaps below -tolerance count as violations
        #[arg(long, default_value_t = BOUND_TOL, allow_negative_numbers = true)]
        tolerance: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Estimate the constrained output-entropy roof of a channel at one state
    Hhat {
        /// dep | qc | id | weyl | xi | kraus:<path>, or an inline spec such as dep:0.5
        #[arg(long)]
        channel: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t = StateKind::Random)]
        state: StateKind,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Strong-superadditivity experiment for Weyl channel ⊗ Ψ
    Superadd {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        p: f64,
        /// dep:<q> | qc:<q> | id | kraus:<path>
        #[arg(long)]
        psi: ChannelSpec,
        #[arg(long, default_value_t = 2)]
        dimk: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = SUPERADD_TOL, allow_negative_numbers = true)]
        tolerance: f64,
        /// Product states for the equality probe
        #[arg(long, value_name = "N", num_args = 0..=1, default_value_t = 0, default_missing_value = "4")]
        product_probe: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Rerun the configuration echoed in a JSON report and compare result rows
    Replay {
        report: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Default)]
pub struct Output {
    /// Write the JSON report to PATH ("-" for stdout)
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write result rows as CSV to PATH
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Ensemble size, or "auto" for rank²
    #[arg(long, default_value = "auto")]
    pub k: EnsembleSize,
    /// Maximum sweeps per restart
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub obj_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl From<&OptimizerArgs> for OptimizerConfig {
    fn from(a: &OptimizerArgs) -> Self {
        OptimizerConfig {
            k: a.k,
            restarts: a.restarts,
            max_iters: a.max_iters,
            obj_tol: a.obj_tol,
            seed: a.seed,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    /// Full-rank random density matrix
    Random,
    /// Haar-random pure state
    Pure,
    /// I/d
    Maxmixed,
}
