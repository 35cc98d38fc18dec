use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use navq_core::agent::{AgentKind, Fusion, S2Mode};
use navq_core::qmodel::Optimizer;
use navq_core::rollout::RolloutMode;
use navq_core::worldgen::WorldKind;

#[derive(Debug, Parser)]
#[command(name = "navq", version, about = "Foresighted navigation benchmark on synthetic graphs")]
pub struct Cli {
    /// Master seed; every artifact is a function of it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Benchmark configuration as JSON (missing fields take defaults).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate seeded worlds and a manifest.
    GenWorlds(GenWorldsArgs),
    /// Sample trajectories and label them with Q-feature targets.
    BuildQdata(BuildQdataArgs),
    /// Fit the Q-feature regressor.
    TrainQmodel(TrainQmodelArgs),
    /// Fit the distance-to-go heads.
    TrainS2(TrainS2Args),
    /// Run the agent comparison on held-out worlds.
    RunBench(RunBenchArgs),
    /// Sweep γ and/or the rollout policy.
    Ablate(AblateArgs),
    /// Per-candidate support maps with decay weights for one origin.
    ExportSupports(ExportSupportsArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Grid,
    Geometric,
    Tree,
}

impl From<KindArg> for WorldKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Grid => WorldKind::GridRooms,
            KindArg::Geometric => WorldKind::RandomGeometric,
            KindArg::Tree => WorldKind::RandomTree,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    #[value(alias = "shortest-canonical")]
    Canonical,
    #[value(alias = "shortest-all")]
    All,
    #[value(alias = "uniform-random")]
    Random,
}

impl From<ModeArg> for RolloutMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Canonical => RolloutMode::ShortestCanonical,
            ModeArg::All => RolloutMode::ShortestAll,
            ModeArg::Random => RolloutMode::UniformRandom,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenWorldsArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Number of worlds.
    #[arg(long)]
    pub n: Option<usize>,
    /// Worlds held out for validation and episodes.
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Node count (geometric and tree worlds).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildQdataArgs {
    /// Directory written by gen-worlds.
    #[arg(long)]
    pub worlds: PathBuf,
    /// Training samples (drawn from the training worlds).
    #[arg(long)]
    pub n: Option<usize>,
    /// Validation samples (drawn from the held-out worlds).
    #[arg(long)]
    pub val_n: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub max_traj_len: Option<usize>,
    #[arg(long)]
    pub mc_rollouts: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainQmodelArgs {
    #[arg(long)]
    pub worlds: PathBuf,
    /// Directory written by build-qdata.
    #[arg(long)]
    pub qdata: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Hidden layer widths, e.g. `128` or `64,64`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
}

impl From<OptimizerArg> for Optimizer {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adam => Optimizer::Adam,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainS2Args {
    #[arg(long)]
    pub worlds: PathBuf,
    /// Directory written by train-qmodel.
    #[arg(long)]
    pub qmodel: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_enum)]
    pub s2_mode: Option<S2ModeArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum S2ModeArg {
    Regression,
    Bins,
}

impl From<S2ModeArg> for S2Mode {
    fn from(m: S2ModeArg) -> Self {
        match m {
            S2ModeArg::Regression => S2Mode::Regression,
            S2ModeArg::Bins => S2Mode::Bins,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunBenchArgs {
    #[arg(long)]
    pub worlds: PathBuf,
    #[arg(long)]
    pub qmodel: PathBuf,
    /// Directory written by train-s2.
    #[arg(long)]
    pub s2: PathBuf,
    /// Comma-separated: random, history, gtq, learnedq, expert.
    #[arg(long, value_delimiter = ',', value_parser = parse_agent)]
    pub agents: Option<Vec<AgentKind>>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Decision budget as a multiple of each world's hop diameter.
    #[arg(long)]
    pub budget_factor: Option<f64>,
    /// Fixed stop threshold for every agent (skips calibration).
    #[arg(long)]
    pub stop_tau: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub fusion: Option<FusionArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FusionArg {
    WeightedSum,
    Softmax,
}

impl From<FusionArg> for Fusion {
    fn from(f: FusionArg) -> Self {
        match f {
            FusionArg::WeightedSum => Fusion::WeightedSum,
            FusionArg::Softmax => Fusion::SoftmaxNormalized,
        }
    }
}

fn parse_agent(s: &str) -> Result<AgentKind, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Decay ratios for the γ sweep, e.g. `0,0.3,0.5,0.7`.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "policy")]
    pub gammas: Option<Vec<f64>>,
    /// Also compare shortest-canonical and uniform-random rollout targets.
    #[arg(long)]
    pub policy: bool,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub q_samples: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportSupportsArgs {
    /// Graph JSON file.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub graph: Option<PathBuf>,
    /// Built-in fixture instead of a file.
    #[arg(long, value_enum)]
    pub fixture: Option<FixtureArg>,
    #[arg(long)]
    pub origin: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "canonical")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FixtureArg {
    Line3,
    Star,
    Diamond,
    Cycle4,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Reduced sample counts for a fast smoke run.
    #[arg(long)]
    pub quick: bool,
    /// Also write the check lines as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
