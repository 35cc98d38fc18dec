//! Navigation metrics (SR, OSR, SPL) and first-error analysis.
//!
//! Every metric is a pure function of episode logs and the world graphs, so a
//! report can be recomputed exactly from persisted JSONL.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::EpisodeResult;
use crate::error::{Error, Result};
use crate::navgraph::{NavGraph, NodeId};

fn within_radius(g: &NavGraph, node: NodeId, goal: NodeId, radius: usize) -> bool {
    node == goal || g.hop_distances(goal)[node].is_some_and(|h| h <= radius)
}

/// Final node within the goal's success radius.
pub fn success(result: &EpisodeResult, g: &NavGraph) -> bool {
    within_radius(g, result.final_node(), result.goal, result.radius)
}

/// Some visited node within the goal's success radius.
pub fn oracle_success(result: &EpisodeResult, g: &NavGraph) -> bool {
    let hops = g.hop_distances(result.goal);
    result.path.iter().any(|&n| hops[n].is_some_and(|h| h <= result.radius))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeScore {
    pub success: bool,
    pub oracle_success: bool,
    /// Traversed metric length.
    pub length: f64,
    /// Metric shortest-path length start → goal.
    pub shortest: f64,
}

impl EpisodeScore {
    /// `S · ℓ* / max(ℓ, ℓ*)`.
    pub fn spl(&self) -> f64 {
        if !self.success {
            return 0.0;
        }
        let denom = self.length.max(self.shortest);
        if denom == 0.0 {
            1.0
        } else {
            self.shortest / denom
        }
    }
}

pub fn score_episode(result: &EpisodeResult, g: &NavGraph) -> Result<EpisodeScore> {
    let length = g
        .walk_length(&result.path)
        .ok_or_else(|| Error::InvalidTrajectory(format!("episode path in {} is not a walk", result.world)))?;
    Ok(EpisodeScore {
        success: success(result, g),
        oracle_success: oracle_success(result, g),
        length,
        shortest: g.metric_distance(result.start(), result.goal),
    })
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Mean SPL over episodes on one graph.
pub fn spl(results: &[EpisodeResult], g: &NavGraph) -> Result<f64> {
    let scores = results.iter().map(|r| score_episode(r, g)).collect::<Result<Vec<_>>>()?;
    Ok(mean(scores.iter().map(EpisodeScore::spl)))
}

/// Fraction of episodes on one graph that ever touched the goal region.
pub fn osr(results: &[EpisodeResult], g: &NavGraph) -> f64 {
    mean(results.iter().map(|r| f64::from(u8::from(oracle_success(r, g)))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub agent: String,
    pub gamma: Option<f64>,
    pub mode: Option<String>,
    pub n: usize,
    pub sr: f64,
    pub osr: f64,
    pub spl: f64,
    pub mean_len: f64,
}

impl AgentMetrics {
    pub fn from_scores(agent: &str, scores: &[EpisodeScore]) -> Self {
        let frac = |f: fn(&EpisodeScore) -> bool| mean(scores.iter().map(|s| f64::from(u8::from(f(s)))));
        AgentMetrics {
            agent: agent.to_string(),
            gamma: None,
            mode: None,
            n: scores.len(),
            sr: frac(|s| s.success),
            osr: frac(|s| s.oracle_success),
            spl: mean(scores.iter().map(EpisodeScore::spl)),
            mean_len: mean(scores.iter().map(|s| s.length)),
        }
    }

    /// `0 ≤ SPL ≤ SR ≤ OSR ≤ 1`.
    pub fn is_consistent(&self) -> bool {
        0.0 <= self.spl && self.spl <= self.sr + 1e-12 && self.sr <= self.osr && self.osr <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FirstErrorHistogram {
    /// `bins[k]`: episodes whose first deviation from the expert was decision `k`.
    pub bins: Vec<usize>,
    pub identical: usize,
}

impl FirstErrorHistogram {
    pub fn total(&self) -> usize {
        self.bins.iter().sum::<usize>() + self.identical
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,count\n");
        for (k, c) in self.bins.iter().enumerate() {
            let _ = writeln!(s, "{k},{c}");
        }
        let _ = writeln!(s, "identical,{}", self.identical);
        s
    }
}

/// Index of the first frontier choice that leaves the expert path, or `None`
/// when the choices reproduce it exactly. Stopping early or continuing past
/// the goal counts as an error at that decision.
pub fn first_error(result: &EpisodeResult) -> Option<usize> {
    let expert_moves = result.expert.get(1..).unwrap_or(&[]);
    let k = result.front_choices.iter().zip(expert_moves).take_while(|(a, b)| a == b).count();
    if k == expert_moves.len() && k == result.front_choices.len() {
        None
    } else {
        Some(k)
    }
}

pub fn first_error_histogram(results: &[EpisodeResult]) -> FirstErrorHistogram {
    let mut h = FirstErrorHistogram::default();
    for r in results {
        match first_error(r) {
            None => h.identical += 1,
            Some(k) => {
                if h.bins.len() <= k {
                    h.bins.resize(k + 1, 0);
                }
                h.bins[k] += 1;
            }
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<AgentMetrics>,
}

impl MetricsReport {
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(AgentMetrics::is_consistent)
    }

    pub fn row(&self, agent: &str) -> Option<&AgentMetrics> {
        self.rows.iter().find(|r| r.agent == agent)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("agent,gamma,mode,n,SR,OSR,SPL,mean_len\n");
        for r in &self.rows {
            let gamma = r.gamma.map(|g| g.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.agent,
                gamma,
                r.mode.as_deref().unwrap_or(""),
                r.n,
                r.sr,
                r.osr,
                r.spl,
                r.mean_len
            );
        }
        s
    }
}

/// Report with one row per agent, in first-appearance order. `graph_of` maps
/// a world name to its graph.
pub fn report<'g>(results: &[EpisodeResult], graph_of: impl Fn(&str) -> Option<&'g NavGraph>) -> Result<MetricsReport> {
    let mut agents: Vec<&str> = Vec::new();
    for r in results {
        if !agents.contains(&r.agent.as_str()) {
            agents.push(&r.agent);
        }
    }
    let rows = agents
        .into_iter()
        .map(|agent| {
            let scores = results
                .iter()
                .filter(|r| r.agent == agent)
                .map(|r| {
                    let g = graph_of(&r.world).ok_or_else(|| Error::InvalidConfig(format!("unknown world {}", r.world)))?;
                    score_episode(r, g)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AgentMetrics::from_scores(agent, &scores))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport { rows })
}

pub fn episodes_to_jsonl(results: &[EpisodeResult]) -> String {
    let mut s = String::new();
    for r in results {
        s.push_str(&serde_json::to_string(r).expect("episode serializes"));
        s.push('\n');
    }
    s
}

pub fn read_episodes_jsonl(path: &Path) -> Result<Vec<EpisodeResult>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::schema(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}
