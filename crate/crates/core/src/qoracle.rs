//! Ground-truth Q-features.
//!
//! The Q-feature of a candidate is the expected decay-weighted sum of the
//! features of every node a rollout visits after choosing it:
//!
//! ```text
//! Q(T, a) = Σ_N p(N) · γ^t(N) · R(N)
//! ```
//!
//! which is the closed form of the recursion
//! `Q(T, a) = R(A) + γ · E_{a'}[Q(T ∪ {A}, a')]`. Both routes are provided
//! ([`gt_qfeature`] and [`bellman_qfeature`]) so they can check each other,
//! plus a Monte-Carlo estimator for modes without a closed form.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{NavGraph, NodeId, PartialTrajectory};
use crate::par;
use crate::rng;
use crate::rollout::{self, OriginLevels, RolloutMode};

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_BELLMAN_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QOracleConfig {
    pub gamma: f64,
    pub mode: RolloutMode,
    /// Rollouts per estimate in uniform-random mode.
    pub mc_rollouts: usize,
    /// Node-count cap for the recursive reference.
    pub bellman_cap: usize,
}

impl Default for QOracleConfig {
    fn default() -> Self {
        QOracleConfig { gamma: DEFAULT_GAMMA, mode: RolloutMode::ShortestCanonical, mc_rollouts: 64, bellman_cap: DEFAULT_BELLMAN_CAP }
    }
}

impl QOracleConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        QOracleConfig { gamma, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if self.mode == RolloutMode::UniformRandom && self.mc_rollouts == 0 {
            return Err(Error::InvalidConfig("mc_rollouts must be >= 1 in uniform-random mode".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFeatureVector {
    pub values: Vec<f64>,
    pub gamma: f64,
    pub origin: NodeId,
    pub candidate: NodeId,
}

fn axpy(acc: &mut [f64], scale: f64, x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += scale * v;
    }
}

/// Closed-form Q-feature from the exact node-step distribution.
pub fn gt_qfeature(g: &NavGraph, origin: NodeId, candidate: NodeId, cfg: &QOracleConfig) -> Result<QFeatureVector> {
    let levels = OriginLevels::new(g, origin);
    gt_qfeature_with(g, &levels, candidate, cfg)
}

pub fn gt_qfeature_with(
    g: &NavGraph,
    levels: &OriginLevels,
    candidate: NodeId,
    cfg: &QOracleConfig,
) -> Result<QFeatureVector> {
    cfg.validate()?;
    let dist = rollout::node_step_distribution_with(g, levels, candidate, cfg.mode)?;
    let mut terms: Vec<(usize, NodeId, f64)> = dist.entries.iter().map(|(&n, e)| (e.t, n, e.p)).collect();
    terms.sort_unstable_by_key(|&(t, n, _)| (t, n));
    let mut values = vec![0.0; g.feature_dim()];
    for (t, n, p) in terms {
        axpy(&mut values, p * cfg.gamma.powi(t as i32), g.feature(n));
    }
    Ok(QFeatureVector { values, gamma: cfg.gamma, origin: levels.origin, candidate })
}

/// Recursive reference: `R(current) + γ · mean over feasible next nodes`.
/// Exponential in the worst case; refuses graphs above `cfg.bellman_cap` nodes.
pub fn bellman_qfeature(g: &NavGraph, origin: NodeId, candidate: NodeId, cfg: &QOracleConfig) -> Result<QFeatureVector> {
    cfg.validate()?;
    if g.len() > cfg.bellman_cap {
        return Err(Error::GraphTooLarge { nodes: g.len(), cap: cfg.bellman_cap });
    }
    if !g.contains(origin) || !g.contains(candidate) || !g.has_edge(origin, candidate) {
        return Err(Error::NotANeighbor { origin, candidate });
    }

    fn recurse(g: &NavGraph, origin: NodeId, gamma: f64, mode: RolloutMode, path: &mut Vec<NodeId>) -> Vec<f64> {
        let current = *path.last().expect("nonempty");
        let next = rollout::feasible_candidates(g, origin, current, mode, path);
        let mut q = g.feature(current).to_vec();
        if next.is_empty() {
            return q;
        }
        let mut mean = vec![0.0; q.len()];
        for n in &next {
            path.push(*n);
            let sub = recurse(g, origin, gamma, mode, path);
            path.pop();
            axpy(&mut mean, 1.0, &sub);
        }
        let k = next.len() as f64;
        for (qi, mi) in q.iter_mut().zip(&mean) {
            *qi += gamma * (mi / k);
        }
        q
    }

    let mut path = vec![origin, candidate];
    let values = recurse(g, origin, cfg.gamma, cfg.mode, &mut path);
    Ok(QFeatureVector { values, gamma: cfg.gamma, origin, candidate })
}

/// Monte-Carlo estimate over `cfg.mc_rollouts` sampled rollouts. The t = 0
/// term is the candidate in every rollout and is added exactly.
pub fn mc_qfeature<R: Rng + ?Sized>(
    g: &NavGraph,
    origin: NodeId,
    candidate: NodeId,
    cfg: &QOracleConfig,
    rng: &mut R,
) -> Result<QFeatureVector> {
    cfg.validate()?;
    if cfg.mc_rollouts == 0 {
        return Err(Error::InvalidConfig("mc_rollouts must be >= 1".into()));
    }
    if !g.contains(origin) || !g.contains(candidate) || !g.has_edge(origin, candidate) {
        return Err(Error::NotANeighbor { origin, candidate });
    }
    let levels = cfg.mode.is_shortest().then(|| OriginLevels::new(g, origin));
    let d = g.feature_dim();
    let mut tail_sum = vec![0.0; d];
    for _ in 0..cfg.mc_rollouts {
        let walk = rollout::simulate_with(g, levels.as_ref(), origin, candidate, cfg.mode, rng);
        let mut w = 1.0;
        for &n in &walk[2..] {
            w *= cfg.gamma;
            axpy(&mut tail_sum, w, g.feature(n));
        }
    }
    let k = cfg.mc_rollouts as f64;
    let values = g.feature(candidate).iter().zip(&tail_sum).map(|(r, s)| r + s / k).collect();
    Ok(QFeatureVector { values, gamma: cfg.gamma, origin, candidate })
}

/// Exact target for shortest modes, Monte-Carlo estimate otherwise.
pub fn target_qfeature<R: Rng + ?Sized>(
    g: &NavGraph,
    origin: NodeId,
    candidate: NodeId,
    cfg: &QOracleConfig,
    rng: &mut R,
) -> Result<QFeatureVector> {
    if cfg.mode.is_shortest() {
        gt_qfeature(g, origin, candidate, cfg)
    } else {
        mc_qfeature(g, origin, candidate, cfg, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    /// Index into the world list the sample was drawn from.
    pub world: usize,
    pub trajectory: PartialTrajectory,
    pub candidate: NodeId,
    pub gamma: f64,
    pub target: Vec<f64>,
}

pub const SAMPLE_RETRIES: usize = 1000;

/// Self-avoiding random walk of length `~U[1, max_len]` from a uniform start,
/// plus a uniformly chosen unvisited neighbor of its tail. Dead ends are
/// resampled, up to [`SAMPLE_RETRIES`] attempts.
pub fn sample_trajectory<R: Rng + ?Sized>(
    g: &NavGraph,
    max_len: usize,
    rng: &mut R,
) -> Result<(PartialTrajectory, NodeId)> {
    let max_len = max_len.max(1);
    for _ in 0..SAMPLE_RETRIES {
        let len = rng.random_range(1..=max_len);
        let mut walk = vec![rng.random_range(0..g.len())];
        while walk.len() < len {
            let tail = *walk.last().expect("nonempty");
            let options: Vec<NodeId> = g.neighbors(tail).iter().copied().filter(|n| !walk.contains(n)).collect();
            if options.is_empty() {
                break;
            }
            walk.push(*rng::pick(rng, &options));
        }
        if walk.len() < len {
            continue;
        }
        let traj = PartialTrajectory::new(g, walk)?;
        let cands = traj.candidates(g);
        if cands.is_empty() {
            continue;
        }
        let cand = *rng::pick(rng, &cands);
        return Ok((traj, cand));
    }
    Err(Error::RetriesExhausted(SAMPLE_RETRIES))
}

/// Builds `n_samples` records. Sample `i` draws from its own child seed, so the
/// list is identical regardless of how the work is scheduled.
pub fn build_training_set(
    worlds: &[NavGraph],
    n_samples: usize,
    cfg: &QOracleConfig,
    max_traj_len: usize,
    seed: u64,
) -> Result<Vec<TrainingSample>> {
    cfg.validate()?;
    if worlds.is_empty() {
        return Err(Error::InvalidConfig("no worlds to sample from".into()));
    }
    if max_traj_len == 0 {
        return Err(Error::InvalidConfig("max_traj_len must be >= 1".into()));
    }
    par::try_map_indexed(n_samples, |i| {
        let mut r = rng::child_rng(seed, "qdata/sample", i as u64);
        let world = r.random_range(0..worlds.len());
        let g = &worlds[world];
        let (trajectory, candidate) = sample_trajectory(g, max_traj_len, &mut r)?;
        let q = target_qfeature(g, trajectory.tail(), candidate, cfg, &mut r)?;
        Ok(TrainingSample { world, trajectory, candidate, gamma: cfg.gamma, target: q.values })
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleJson {
    world: String,
    traj: Vec<NodeId>,
    cand: NodeId,
    gamma: f64,
    q: Vec<f64>,
}

/// JSON Lines, one record per sample; `world_names[i]` names world `i`.
pub fn samples_to_jsonl(samples: &[TrainingSample], world_names: &[String]) -> String {
    let mut out = String::new();
    for s in samples {
        let rec = SampleJson {
            world: world_names[s.world].clone(),
            traj: s.trajectory.nodes().to_vec(),
            cand: s.candidate,
            gamma: s.gamma,
            q: s.target.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("sample serializes"));
        out.push('\n');
    }
    out
}

pub fn read_samples_jsonl(path: &Path, worlds: &[NavGraph], world_names: &[String]) -> Result<Vec<TrainingSample>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |m: String| Error::schema(path, format!("line {}: {m}", lineno + 1));
        let rec: SampleJson = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        let world = world_names
            .iter()
            .position(|n| *n == rec.world)
            .ok_or_else(|| at(format!("unknown world {}", rec.world)))?;
        let g = &worlds[world];
        let trajectory = PartialTrajectory::new(g, rec.traj).map_err(|e| at(e.to_string()))?;
        crate::navgraph::CandidateAction::new(g, &trajectory, rec.cand).map_err(|e| at(e.to_string()))?;
        if rec.q.len() != g.feature_dim() {
            return Err(at(format!("q has {} entries, expected {}", rec.q.len(), g.feature_dim())));
        }
        out.push(TrainingSample { world, trajectory, candidate: rec.cand, gamma: rec.gamma, target: rec.q });
    }
    Ok(out)
}
