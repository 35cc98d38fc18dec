//! End-to-end benchmark stages: worlds → Q-data → Q-model → distance-to-go
//! heads → episodes → metrics, plus the γ and rollout-policy ablations.
//!
//! Every stage draws its randomness from `derive_seed(master, stage, index)`,
//! so a master seed fixes every artifact and stages can be rerun in isolation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{
    self, Agent, AgentKind, Environment, EpisodeResult, GoalSpec, QSource, S2Head, S2Mode, S2Model, ScoreWeights,
};
use crate::error::{Error, Result};
use crate::eval::{self, FirstErrorHistogram, MetricsReport};
use crate::navgraph::{DistanceTable, NavGraph, NodeId};
use crate::par;
use crate::qmodel::{self, EpochLoss, Example, Loss, Mlp, TrainConfig, TrainOutcome};
use crate::qoracle::{self, QOracleConfig, TrainingSample};
use crate::rng::{self, derive_seed};
use crate::rollout::RolloutMode;
use crate::worldgen::{self, WorldConfig};

pub fn world_name(i: usize) -> String {
    format!("world_{i:03}")
}

/// `n` worlds from `base`, world `i` seeded with `derive_seed(seed, "worlds", i)`.
pub fn generate_worlds(base: &WorldConfig, n: usize, seed: u64) -> Result<Vec<(WorldConfig, NavGraph)>> {
    par::try_map_indexed(n, |i| {
        let cfg = WorldConfig { seed: derive_seed(seed, "worlds", i as u64), ..base.clone() };
        let g = worldgen::generate(&cfg)?;
        Ok((cfg, g))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct S2Config {
    pub samples: usize,
    pub val_samples: usize,
    pub mode: S2Mode,
    pub train: TrainConfig,
}

impl Default for S2Config {
    fn default() -> Self {
        S2Config {
            samples: 5000,
            val_samples: 1000,
            mode: S2Mode::Regression,
            train: TrainConfig { hidden: vec![64], learning_rate: 5e-3, ..TrainConfig::default() },
        }
    }
}

/// How distance-to-go records are drawn; mirrors the episode sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Sampling {
    pub min_goal_hops: usize,
    pub goal_sigma: f64,
    pub max_traj_len: usize,
}

/// Supervision for the distance-to-go head. Each record draws a trajectory
/// and candidate `A`, a goal at least `min_goal_hops` from the trajectory
/// start `S`, and targets `clip(dist(A, G) / dist(S, G))` from
/// `[Q(A) ‖ goal_feature]`. Matching `min_goal_hops` to the episode sampler
/// keeps the `dist(S, G)` normalizer on the same scale as at test time.
pub fn s2_examples(
    worlds: &[NavGraph],
    tables: &[DistanceTable],
    qsource: QSource,
    n: usize,
    sampling: S2Sampling,
    mode: S2Mode,
    seed: u64,
) -> Result<Vec<Example>> {
    let min_goal_hops = sampling.min_goal_hops;
    if worlds.is_empty() {
        return Err(Error::InvalidConfig("no worlds for distance-to-go data".into()));
    }
    par::try_map_indexed(n, |i| {
        let mut r = rng::child_rng(seed, "s2/sample", i as u64);
        let w = r.random_range(0..worlds.len());
        let (g, dist) = (&worlds[w], &tables[w]);
        let (traj, cand) = qoracle::sample_trajectory(g, sampling.max_traj_len, &mut r)?;
        let start = traj.nodes()[0];
        let far: Vec<NodeId> = (0..g.len()).filter(|&v| dist.hops(start, v) >= min_goal_hops.max(1)).collect();
        if far.is_empty() {
            return Err(Error::InvalidConfig(format!("no goal {min_goal_hops} hops from node {start}")));
        }
        let goal = *rng::pick(&mut r, &far);
        let spec = GoalSpec::for_node(g, goal, sampling.goal_sigma, 0, &mut r);
        let q = match qsource {
            QSource::GroundTruth(oc) => qoracle::gt_qfeature(g, traj.tail(), cand, &oc)?.values,
            QSource::Learned(net) => net.forward(&qmodel::encode_input(g, &traj, cand)?)?,
            QSource::None => return Err(Error::InvalidConfig("distance-to-go head needs a Q source".into())),
        };
        let s2 = (dist.metric(cand, goal) / dist.metric(start, goal)).clamp(0.0, 1.0);
        let y = match mode {
            S2Mode::Regression => vec![s2],
            S2Mode::Bins => {
                let mut y = vec![0.0; agent::S2_BINS];
                y[agent::s2_bin(s2)] = 1.0;
                y
            }
        };
        Ok(Example { x: q.into_iter().chain(spec.goal_feature).collect(), y })
    })
}

pub fn train_s2_head(
    train_worlds: &[NavGraph],
    val_worlds: &[NavGraph],
    qsource: QSource,
    sampling: S2Sampling,
    cfg: &S2Config,
    seed: u64,
) -> Result<(S2Model, Vec<EpochLoss>)> {
    let examples = |ws: &[NavGraph], n: usize, stage: &str| {
        let tables = par::map_slice(ws, DistanceTable::new);
        s2_examples(ws, &tables, qsource, n, sampling, cfg.mode, derive_seed(seed, stage, 0))
    };
    let data = examples(train_worlds, cfg.samples, "s2/train")?;
    let val = if val_worlds.is_empty() || cfg.val_samples == 0 {
        Vec::new()
    } else {
        examples(val_worlds, cfg.val_samples, "s2/val")?
    };
    let loss = match cfg.mode {
        S2Mode::Regression => Loss::Mse,
        S2Mode::Bins => Loss::CrossEntropy,
    };
    let tc = TrainConfig { loss, seed: derive_seed(seed, "s2/fit", 0), ..cfg.train.clone() };
    let out = qmodel::train(&data, &val, &tc)?;
    Ok((S2Model { mode: cfg.mode, net: out.params }, out.curve))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub world: usize,
    pub start: NodeId,
    pub goal: NodeId,
}

/// Uniform (world, goal, start) triples with `hops(start, goal) >= min_hops`.
pub fn sample_episodes(worlds: &[NavGraph], n: usize, min_hops: usize, seed: u64) -> Result<Vec<EpisodeSpec>> {
    par::try_map_indexed(n, |i| {
        let mut r = rng::child_rng(seed, "episodes", i as u64);
        for _ in 0..qoracle::SAMPLE_RETRIES {
            let world = r.random_range(0..worlds.len());
            let g = &worlds[world];
            let goal = r.random_range(0..g.len());
            let start = r.random_range(0..g.len());
            if g.hops_from(goal)[start] >= min_hops {
                return Ok(EpisodeSpec { world, start, goal });
            }
        }
        Err(Error::RetriesExhausted(qoracle::SAMPLE_RETRIES))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub seed: u64,
    pub world: WorldConfig,
    pub n_worlds: usize,
    /// The last `n_holdout` worlds are held out for validation and episodes.
    pub n_holdout: usize,
    pub oracle: QOracleConfig,
    pub q_samples: usize,
    pub q_val_samples: usize,
    pub max_traj_len: usize,
    pub qmodel: TrainConfig,
    pub s2: S2Config,
    pub episodes: usize,
    pub min_start_hops: usize,
    pub goal_sigma: f64,
    pub success_radius: usize,
    /// Decision budget as a multiple of the world's hop diameter.
    pub budget_factor: f64,
    pub weights: ScoreWeights,
    /// Stop threshold on ŝ2 used when `stop_tau_grid` is empty.
    pub stop_tau: f64,
    /// Candidate stop thresholds. When nonempty, each agent's threshold is the
    /// one with the best SR (then SPL) on training-world episodes.
    pub stop_tau_grid: Vec<f64>,
    pub calibration_episodes: usize,
    pub agents: Vec<AgentKind>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 0,
            world: WorldConfig::default(),
            n_worlds: 10,
            n_holdout: 2,
            oracle: QOracleConfig::default(),
            q_samples: 5000,
            q_val_samples: 1000,
            max_traj_len: 8,
            qmodel: TrainConfig::default(),
            s2: S2Config::default(),
            episodes: 200,
            min_start_hops: 3,
            goal_sigma: 0.1,
            success_radius: 1,
            budget_factor: 1.0,
            weights: ScoreWeights::default(),
            stop_tau: 0.3,
            stop_tau_grid: (1..=12).map(|k| k as f64 / 20.0).collect(),
            calibration_episodes: 100,
            agents: AgentKind::ALL.to_vec(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_worlds == 0 || self.n_holdout == 0 || self.n_holdout >= self.n_worlds {
            return Err(Error::InvalidConfig("need 0 < n_holdout < n_worlds".into()));
        }
        if self.episodes == 0 || self.q_samples == 0 {
            return Err(Error::InvalidConfig("episodes and q_samples must be positive".into()));
        }
        self.oracle.validate()?;
        self.weights.validate()?;
        self.world.validate()
    }

    pub fn budget_for(&self, g: &NavGraph) -> usize {
        ((self.budget_factor * g.hop_diameter() as f64).ceil() as usize).max(1)
    }

    pub fn s2_sampling(&self) -> S2Sampling {
        S2Sampling { min_goal_hops: self.min_start_hops, goal_sigma: self.goal_sigma, max_traj_len: self.max_traj_len }
    }

    pub fn split(&self) -> std::ops::Range<usize> {
        0..self.n_worlds - self.n_holdout
    }
}

/// Trained models shared by the agents of one benchmark run.
#[derive(Debug, Clone)]
pub struct Models {
    pub qmodel: Mlp,
    /// Head over `[R(A) ‖ goal]`, the stop signal of agents without Q.
    pub s2_history: S2Model,
    pub s2_gt: Option<S2Model>,
    pub s2_learned: S2Model,
}

pub type StopTaus = BTreeMap<AgentKind, f64>;

/// Runs every `(episode, agent)` pair. Episodes fan out over workers; the
/// random agent draws from `derive_seed(seed, "episode-run", index)`.
pub fn run_agents(
    bench: &BenchConfig,
    worlds: &[NavGraph],
    names: &[String],
    specs: &[EpisodeSpec],
    models: &Models,
    taus: &StopTaus,
    seed: u64,
) -> Result<Vec<EpisodeResult>> {
    let envs = par::map_indexed(worlds.len(), |i| Environment::new(&worlds[i]));
    let budgets: Vec<usize> = worlds.iter().map(|g| bench.budget_for(g)).collect();
    let per_episode = par::try_map_indexed(specs.len(), |i| {
        let spec = specs[i];
        let env = &envs[spec.world];
        let mut goal_rng = rng::child_rng(seed, "episode-goal", i as u64);
        let goal = GoalSpec::for_node(env.graph, spec.goal, bench.goal_sigma, bench.success_radius, &mut goal_rng);
        bench
            .agents
            .iter()
            .map(|&kind| {
                let agent = make_agent(bench, kind, models, taus)?;
                let mut run_rng = rng::child_rng(seed, "episode-run", i as u64);
                agent::run_episode(env, &names[spec.world], &agent, spec.start, &goal, budgets[spec.world], &mut run_rng)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    // Group by agent so each agent's episodes are contiguous.
    let mut by_agent: BTreeMap<usize, Vec<EpisodeResult>> = BTreeMap::new();
    for results in per_episode {
        for (k, r) in results.into_iter().enumerate() {
            by_agent.entry(k).or_default().push(r);
        }
    }
    Ok(by_agent.into_values().flatten().collect())
}

fn make_agent<'a>(bench: &BenchConfig, kind: AgentKind, models: &'a Models, taus: &StopTaus) -> Result<Agent<'a>> {
    let tau = taus.get(&kind).copied().unwrap_or(bench.stop_tau);
    let history_head = S2Head::Learned(&models.s2_history);
    Ok(match kind {
        AgentKind::Random => Agent::random(history_head, tau),
        AgentKind::HistoryOnly => Agent::history_only(bench.weights.alpha, history_head, tau),
        AgentKind::PseudoExpert => Agent::pseudo_expert(),
        AgentKind::ForesightedGtQ => {
            let head = models
                .s2_gt
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("gt-q agent needs a shortest rollout mode".into()))?;
            Agent::foresighted(kind, bench.weights, S2Head::Learned(head), QSource::GroundTruth(bench.oracle), tau)
        }
        AgentKind::ForesightedLearnedQ => Agent::foresighted(
            kind,
            bench.weights,
            S2Head::Learned(&models.s2_learned),
            QSource::Learned(&models.qmodel),
            tau,
        ),
    })
}

fn runnable_agents(bench: &BenchConfig, models: &Models) -> Vec<AgentKind> {
    let mut agents = bench.agents.clone();
    if models.s2_gt.is_none() {
        agents.retain(|k| *k != AgentKind::ForesightedGtQ);
    }
    agents
}

/// Per-agent stop thresholds picked on training-world episodes, so no
/// threshold is tuned on the evaluation worlds.
pub fn calibrate_stop_taus(bench: &BenchConfig, worlds: &[NavGraph], names: &[String], models: &Models) -> Result<StopTaus> {
    let agents: Vec<AgentKind> =
        runnable_agents(bench, models).into_iter().filter(|k| *k != AgentKind::PseudoExpert).collect();
    if bench.stop_tau_grid.is_empty() || agents.is_empty() || bench.calibration_episodes == 0 {
        return Ok(agents.into_iter().map(|k| (k, bench.stop_tau)).collect());
    }
    let n_train = bench.split().end;
    let specs = sample_episodes(
        &worlds[..n_train],
        bench.calibration_episodes,
        bench.min_start_hops,
        derive_seed(bench.seed, "calibrate", 0),
    )?;
    let cfg = BenchConfig { agents: agents.clone(), ..bench.clone() };
    let mut best: BTreeMap<AgentKind, (f64, f64, f64)> = BTreeMap::new();
    for &tau in &bench.stop_tau_grid {
        let taus = agents.iter().map(|&k| (k, tau)).collect();
        let episodes = run_agents(&cfg, worlds, names, &specs, models, &taus, derive_seed(bench.seed, "calibrate-run", 0))?;
        let (report, _) = summarize(&episodes, worlds, names)?;
        for &k in &agents {
            let row = report.row(k.short_name()).expect("every agent ran");
            let better = best.get(&k).is_none_or(|&(_, sr, spl)| (row.sr, row.spl) > (sr, spl));
            if better {
                best.insert(k, (tau, row.sr, row.spl));
            }
        }
    }
    Ok(best.into_iter().map(|(k, (tau, _, _))| (k, tau)).collect())
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Worlds `[0, n_train)` train the models; the rest are held out.
    pub n_train: usize,
    pub names: Vec<String>,
    pub worlds: Vec<NavGraph>,
    pub world_configs: Vec<WorldConfig>,
    pub train_samples: Vec<TrainingSample>,
    pub val_samples: Vec<TrainingSample>,
    pub qmodel: TrainOutcome,
    pub s2_history_curve: Vec<EpochLoss>,
    pub s2_gt_curve: Option<Vec<EpochLoss>>,
    pub s2_learned_curve: Vec<EpochLoss>,
    pub models: Models,
    pub stop_taus: StopTaus,
    pub episodes: Vec<EpisodeResult>,
    pub report: MetricsReport,
    pub histograms: BTreeMap<String, FirstErrorHistogram>,
}

impl PipelineOutput {
    pub fn train_worlds(&self) -> &[NavGraph] {
        &self.worlds[..self.n_train]
    }

    pub fn val_worlds(&self) -> &[NavGraph] {
        &self.worlds[self.n_train..]
    }
}

/// Worlds for a benchmark, named `world_000`, `world_001`, ...
pub fn stage_worlds(bench: &BenchConfig) -> Result<(Vec<String>, Vec<WorldConfig>, Vec<NavGraph>)> {
    bench.validate()?;
    let (configs, worlds): (Vec<_>, Vec<_>) = generate_worlds(&bench.world, bench.n_worlds, bench.seed)?.into_iter().unzip();
    Ok(((0..worlds.len()).map(world_name).collect(), configs, worlds))
}

/// Q-feature records: training samples from the training worlds, validation
/// samples from the held-out worlds. `world` indexes into `worlds`.
pub fn stage_qdata(bench: &BenchConfig, worlds: &[NavGraph]) -> Result<(Vec<TrainingSample>, Vec<TrainingSample>)> {
    let n_train = bench.split().end;
    let (train_worlds, val_worlds) = worlds.split_at(n_train);
    let build = |ws: &[NavGraph], n: usize, stage: &str| {
        qoracle::build_training_set(ws, n, &bench.oracle, bench.max_traj_len, derive_seed(bench.seed, stage, 0))
    };
    let train = build(train_worlds, bench.q_samples, "qdata/train")?;
    let mut val = build(val_worlds, bench.q_val_samples.max(1), "qdata/val")?;
    for s in &mut val {
        s.world += n_train;
    }
    Ok((train, val))
}

pub fn stage_qmodel(
    bench: &BenchConfig,
    worlds: &[NavGraph],
    train: &[TrainingSample],
    val: &[TrainingSample],
) -> Result<TrainOutcome> {
    train_qmodel(worlds, train, val, &bench.qmodel, bench.seed)
}

/// A trained distance-to-go head and its loss curve.
pub type FittedHead = (S2Model, Vec<EpochLoss>);

#[derive(Debug, Clone)]
pub struct S2Heads {
    pub history: FittedHead,
    pub gt: Option<FittedHead>,
    pub learned: FittedHead,
}

/// Distance-to-go heads fed by the node's own feature (γ = 0 ground truth),
/// by ground-truth Q (shortest modes only) and by the Q-model.
pub fn stage_s2(bench: &BenchConfig, worlds: &[NavGraph], qmodel: &Mlp) -> Result<S2Heads> {
    let (train_worlds, val_worlds) = worlds.split_at(bench.split().end);
    let own = QSource::GroundTruth(QOracleConfig { gamma: 0.0, mode: RolloutMode::ShortestCanonical, ..bench.oracle });
    let seed = derive_seed(bench.seed, "s2-history", 0);
    let history = train_s2_head(train_worlds, val_worlds, own, bench.s2_sampling(), &bench.s2, seed)?;
    let gt = if bench.oracle.mode.is_shortest() {
        let q = QSource::GroundTruth(bench.oracle);
        let seed = derive_seed(bench.seed, "s2-gt", 0);
        Some(train_s2_head(train_worlds, val_worlds, q, bench.s2_sampling(), &bench.s2, seed)?)
    } else {
        None
    };
    let seed = derive_seed(bench.seed, "s2-learned", 0);
    let learned = train_s2_head(train_worlds, val_worlds, QSource::Learned(qmodel), bench.s2_sampling(), &bench.s2, seed)?;
    Ok(S2Heads { history, gt, learned })
}

/// Episodes on the held-out worlds for every configured agent. The gt-Q
/// agent is skipped when the rollout mode has no exact Q.
pub fn stage_episodes(
    bench: &BenchConfig,
    worlds: &[NavGraph],
    names: &[String],
    models: &Models,
    taus: &StopTaus,
) -> Result<Vec<EpisodeResult>> {
    let n_train = bench.split().end;
    let specs = sample_episodes(&worlds[n_train..], bench.episodes, bench.min_start_hops, derive_seed(bench.seed, "bench", 0))?;
    let specs: Vec<EpisodeSpec> = specs.into_iter().map(|s| EpisodeSpec { world: s.world + n_train, ..s }).collect();
    let cfg = BenchConfig { agents: runnable_agents(bench, models), ..bench.clone() };
    run_agents(&cfg, worlds, names, &specs, models, taus, derive_seed(bench.seed, "run", 0))
}

/// Full benchmark for one configuration.
pub fn run_pipeline(bench: &BenchConfig) -> Result<PipelineOutput> {
    let (names, world_configs, worlds) = stage_worlds(bench)?;
    let (train_samples, val_samples) = stage_qdata(bench, &worlds)?;
    let qmodel = stage_qmodel(bench, &worlds, &train_samples, &val_samples)?;
    let heads = stage_s2(bench, &worlds, &qmodel.params)?;
    let (s2_gt, s2_gt_curve) = heads.gt.map_or((None, None), |(m, c)| (Some(m), Some(c)));
    let models = Models {
        qmodel: qmodel.params.clone(),
        s2_history: heads.history.0,
        s2_gt,
        s2_learned: heads.learned.0,
    };
    let stop_taus = calibrate_stop_taus(bench, &worlds, &names, &models)?;
    let episodes = stage_episodes(bench, &worlds, &names, &models, &stop_taus)?;
    let (report, histograms) = summarize(&episodes, &worlds, &names)?;
    Ok(PipelineOutput {
        n_train: bench.split().end,
        names,
        worlds,
        world_configs,
        train_samples,
        val_samples,
        qmodel,
        s2_history_curve: heads.history.1,
        s2_gt_curve,
        s2_learned_curve: heads.learned.1,
        models,
        stop_taus,
        episodes,
        report,
        histograms,
    })
}

/// Q-model fit on `train` samples, validated on `val` samples (held-out worlds).
pub fn train_qmodel(
    worlds: &[NavGraph],
    train: &[TrainingSample],
    val: &[TrainingSample],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    let data = qmodel::samples_to_examples(worlds, train)?;
    let val = qmodel::samples_to_examples(worlds, val)?;
    let tc = TrainConfig { seed: derive_seed(seed, "qmodel", 0), ..cfg.clone() };
    qmodel::train(&data, &val, &tc)
}

pub fn summarize(
    episodes: &[EpisodeResult],
    worlds: &[NavGraph],
    names: &[String],
) -> Result<(MetricsReport, BTreeMap<String, FirstErrorHistogram>)> {
    let report = eval::report(episodes, |name| names.iter().position(|n| n == name).map(|i| &worlds[i]))?;
    let mut histograms = BTreeMap::new();
    for row in &report.rows {
        let mine: Vec<EpisodeResult> = episodes.iter().filter(|e| e.agent == row.agent).cloned().collect();
        histograms.insert(row.agent.clone(), eval::first_error_histogram(&mine));
    }
    Ok((report, histograms))
}

/// One ablation cell: the learned-Q agent's metrics under a given γ and mode.
#[derive(Debug, Clone)]
pub struct AblationCell {
    pub gamma: f64,
    pub mode: RolloutMode,
    pub output: PipelineOutput,
}

impl AblationCell {
    pub fn row(&self) -> eval::AgentMetrics {
        let mut row = self
            .output
            .report
            .row(AgentKind::ForesightedLearnedQ.short_name())
            .cloned()
            .expect("learned-q agent always runs in ablations");
        row.gamma = Some(self.gamma);
        row.mode = Some(self.mode.to_string());
        row
    }
}

pub fn ablation_table(cells: &[AblationCell]) -> MetricsReport {
    MetricsReport { rows: cells.iter().map(AblationCell::row).collect() }
}

fn ablate(bench: &BenchConfig, grid: &[(f64, RolloutMode)]) -> Result<Vec<AblationCell>> {
    par::try_map_indexed(grid.len(), |i| {
        let (gamma, mode) = grid[i];
        let cfg = BenchConfig {
            oracle: QOracleConfig { gamma, mode, ..bench.oracle },
            agents: vec![AgentKind::ForesightedLearnedQ],
            ..bench.clone()
        };
        Ok(AblationCell { gamma, mode, output: run_pipeline(&cfg)? })
    })
}

/// Full pipeline per γ under the benchmark's rollout mode. Cells share the
/// benchmark seed, so worlds and episodes are identical across γ.
pub fn ablate_gamma(bench: &BenchConfig, gammas: &[f64]) -> Result<Vec<AblationCell>> {
    if gammas.is_empty() {
        return Err(Error::InvalidConfig("empty gamma list".into()));
    }
    let grid: Vec<(f64, RolloutMode)> = gammas.iter().map(|&g| (g, bench.oracle.mode)).collect();
    ablate(bench, &grid)
}

/// Shortest-canonical versus uniform-random rollout targets at the benchmark γ.
pub fn ablate_policy(bench: &BenchConfig) -> Result<Vec<AblationCell>> {
    let g = bench.oracle.gamma;
    ablate(bench, &[(g, RolloutMode::ShortestCanonical), (g, RolloutMode::UniformRandom)])
}
