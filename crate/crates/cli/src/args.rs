use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "hardlinrl", version, about = "Hard linearly-realizable MDPs built from 3-CNF formulas")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON file with default values for any of the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for grid checks and rollout batches.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the report here instead of stdout (for `gen`, the bundle directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wallclock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an instance bundle from a DIMACS file.
    Gen(GenArgs),
    /// Check the reward-polynomial claims and the linearity / greedy-optimality sweep.
    VerifyClaims(VerifyArgs),
    /// Roll out an agent on an instance bundle.
    Run(RunArgs),
    /// Decide a formula through the RL-to-SAT reduction.
    Reduce(ReduceArgs),
    /// Apply the bounded-occurrence transformation.
    Transform(TransformArgs),
    /// Print the features of the state reached by an action prefix.
    Features(FeaturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Full,
    Simulator,
}

impl From<ModeArg> for hardlinrl_core::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => hardlinrl_core::Mode::Full,
            ModeArg::Simulator => hardlinrl_core::Mode::Simulator,
        }
    }
}

impl From<hardlinrl_core::Mode> for ModeArg {
    fn from(m: hardlinrl_core::Mode) -> Self {
        match m {
            hardlinrl_core::Mode::Full => ModeArg::Full,
            hardlinrl_core::Mode::Simulator => ModeArg::Simulator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// Walk toward the planted assignment.
    Greedy,
    /// Uniform random actions.
    Random,
    /// Argmax of the exact optimal Q-values (small instances only).
    Optimal,
}

/// Reward parameters; unset fields come from the config file, then defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamArgs {
    /// Taylor degree.
    #[arg(long)]
    pub p: Option<u32>,
    /// Horizon exponent.
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Occurrence bound.
    #[arg(long)]
    pub b: Option<usize>,
    /// Override the number of rounds h.
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Planted satisfying assignment as a 0/1 string (skips the exhaustive search).
    #[arg(long)]
    pub wstar: Option<String>,
    /// Accept clauses of width 1 to 3 (needs --transform).
    #[arg(long)]
    pub lenient: bool,
    /// Apply the bounded-occurrence transformation with bound b first.
    #[arg(long)]
    pub transform: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated values of v for the grid checks.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<usize>>,
    /// Largest v of the monotone-step doubling search (0 skips it).
    #[arg(long)]
    pub v_cap: Option<usize>,
    /// Random planted instances for the linearity and optimality sweep.
    #[arg(long)]
    pub sweep_instances: Option<usize>,
    #[arg(long)]
    pub sweep_v: Option<usize>,
    #[arg(long)]
    pub sweep_h: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Bundle directory written by `gen`, or its instance.json.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub agent: Option<AgentKind>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// JSON-lines trajectory dump.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
    /// Node budget for the optimal agent's exact DP.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long, value_enum)]
    pub agent: Option<AgentKind>,
    /// Oracle query budget.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Episodes of the random learner.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub cnf: PathBuf,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub lenient: bool,
    /// Write the transformed formula here.
    #[arg(long)]
    pub out_cnf: Option<PathBuf>,
    /// Check satisfiability equivalence and the Max-SAT bound by search.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma-separated actions applied from the initial state.
    #[arg(long, value_delimiter = ',')]
    pub actions: Vec<usize>,
}
