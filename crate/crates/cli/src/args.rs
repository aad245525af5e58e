use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::StepChoice;

#[derive(Debug, Parser)]
#[command(name = "phsim", version, about = "Port-Hamiltonian plate and beam scenario runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write trajectory and snapshot CSVs.
    Simulate(RunArgs),
    /// Run verification suites and write residual reports.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    /// JSON scenario configuration; missing keys take the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Nodes per side for both plants.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Step size in seconds, or "auto".
    #[arg(long)]
    pub dt: Option<StepChoice>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub log_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: RunArgs,
    /// Suites to run; all of them when omitted.
    #[arg(long = "check", value_enum)]
    pub checks: Vec<CheckKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Casimir,
    Decomposition,
    Gradient,
    Power,
}

impl CheckKind {
    pub const ALL: [CheckKind; 4] = [Self::Casimir, Self::Decomposition, Self::Gradient, Self::Power];

    pub fn name(self) -> &'static str {
        match self {
            Self::Casimir => "casimir",
            Self::Decomposition => "decomposition",
            Self::Gradient => "gradient",
            Self::Power => "power",
        }
    }
}
