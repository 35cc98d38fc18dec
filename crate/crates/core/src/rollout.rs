//! Rollout policy and the exact node-step reachability distribution.
//!
//! A rollout starts at `[origin, candidate]` and repeatedly steps to a
//! feasible neighbor chosen uniformly, terminating when none is feasible.
//! In the shortest modes a neighbor is feasible only when the one-step-longer
//! rollout is still a hop-shortest path from the origin; canonical mode
//! further restricts each node to a single parent (its smallest-id neighbor on
//! the previous BFS level), so every node is reached through exactly one
//! candidate.
//!
//! Step convention: the candidate sits at `t = 0` and any other node `N`
//! reached in a shortest mode sits at `t = hop(origin, N) - 1`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{NavGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RolloutMode {
    #[default]
    ShortestCanonical,
    ShortestAll,
    UniformRandom,
}

impl RolloutMode {
    pub fn is_shortest(self) -> bool {
        !matches!(self, RolloutMode::UniformRandom)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RolloutMode::ShortestCanonical => "shortest-canonical",
            RolloutMode::ShortestAll => "shortest-all",
            RolloutMode::UniformRandom => "uniform-random",
        }
    }
}

impl std::str::FromStr for RolloutMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "shortest-canonical" | "canonical" => Ok(RolloutMode::ShortestCanonical),
            "shortest-all" | "all" => Ok(RolloutMode::ShortestAll),
            "uniform-random" | "random" => Ok(RolloutMode::UniformRandom),
            other => Err(format!("unknown rollout mode `{other}`")),
        }
    }
}

impl std::fmt::Display for RolloutMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// BFS levels from one origin plus the canonical parent of every node.
#[derive(Debug, Clone)]
pub struct OriginLevels {
    pub origin: NodeId,
    pub hops: Vec<usize>,
    canonical_parent: Vec<Option<NodeId>>,
}

impl OriginLevels {
    pub fn new(g: &NavGraph, origin: NodeId) -> Self {
        let hops = g.hops_from(origin);
        let canonical_parent = (0..g.len())
            .map(|n| {
                if hops[n] == 0 {
                    None
                } else {
                    g.neighbors(n).iter().copied().find(|&m| hops[m] + 1 == hops[n])
                }
            })
            .collect();
        OriginLevels { origin, hops, canonical_parent }
    }

    pub fn canonical_parent(&self, n: NodeId) -> Option<NodeId> {
        self.canonical_parent[n]
    }

    /// Feasible next nodes from `current` in a shortest mode, ascending.
    pub fn shortest_children(&self, g: &NavGraph, current: NodeId, mode: RolloutMode) -> Vec<NodeId> {
        let level = self.hops[current] + 1;
        g.neighbors(current)
            .iter()
            .copied()
            .filter(|&n| self.hops[n] == level)
            .filter(|&n| mode != RolloutMode::ShortestCanonical || self.canonical_parent[n] == Some(current))
            .collect()
    }
}

/// Feasible next nodes for a rollout from `origin` currently at `current`.
/// `visited` is only consulted in uniform-random mode.
pub fn feasible_candidates(
    g: &NavGraph,
    origin: NodeId,
    current: NodeId,
    mode: RolloutMode,
    visited: &[NodeId],
) -> Vec<NodeId> {
    match mode {
        RolloutMode::UniformRandom => {
            g.neighbors(current).iter().copied().filter(|n| *n != origin && !visited.contains(n)).collect()
        }
        _ => OriginLevels::new(g, origin).shortest_children(g, current, mode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepProb {
    pub t: usize,
    pub p: f64,
}

/// Exact distribution of (future node, rollout step) for one origin/candidate
/// pair in a shortest mode. Nodes absent from `entries` have probability 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStepDistribution {
    pub origin: NodeId,
    pub candidate: NodeId,
    pub mode: RolloutMode,
    pub entries: BTreeMap<NodeId, StepProb>,
    /// Mass ending at each terminal node (no feasible continuation).
    pub terminal_mass: BTreeMap<NodeId, f64>,
}

impl NodeStepDistribution {
    pub fn prob(&self, n: NodeId) -> f64 {
        self.entries.get(&n).map_or(0.0, |e| e.p)
    }

    pub fn support(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }
}

fn check_neighbor(g: &NavGraph, origin: NodeId, candidate: NodeId) -> Result<()> {
    if !g.contains(origin) || !g.contains(candidate) || !g.has_edge(origin, candidate) {
        return Err(Error::NotANeighbor { origin, candidate });
    }
    Ok(())
}

/// Mass propagation over the rollout DAG in ascending step order.
pub fn node_step_distribution(
    g: &NavGraph,
    origin: NodeId,
    candidate: NodeId,
    mode: RolloutMode,
) -> Result<NodeStepDistribution> {
    let levels = OriginLevels::new(g, origin);
    node_step_distribution_with(g, &levels, candidate, mode)
}

/// As [`node_step_distribution`], reusing precomputed BFS levels of the origin.
pub fn node_step_distribution_with(
    g: &NavGraph,
    levels: &OriginLevels,
    candidate: NodeId,
    mode: RolloutMode,
) -> Result<NodeStepDistribution> {
    let origin = levels.origin;
    check_neighbor(g, origin, candidate)?;
    if !mode.is_shortest() {
        return Err(Error::ShortestModeRequired);
    }
    let mut mass = vec![0.0f64; g.len()];
    mass[candidate] = 1.0;
    let mut entries = BTreeMap::new();
    let mut terminal_mass = BTreeMap::new();
    // Frontier of the current level, kept sorted for a deterministic sweep.
    let mut layer: BTreeSet<NodeId> = BTreeSet::from([candidate]);
    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for &m in &layer {
            let p = mass[m];
            entries.insert(m, StepProb { t: levels.hops[m] - 1, p });
            let children = levels.shortest_children(g, m, mode);
            if children.is_empty() {
                terminal_mass.insert(m, p);
                continue;
            }
            let share = p / children.len() as f64;
            for c in children {
                mass[c] += share;
                next.insert(c);
            }
        }
        layer = next;
    }
    Ok(NodeStepDistribution { origin, candidate, mode, entries, terminal_mass })
}

/// One sampled rollout `[origin, candidate, ...]`, run until no feasible step remains.
pub fn simulate_rollout<R: Rng + ?Sized>(
    g: &NavGraph,
    origin: NodeId,
    candidate: NodeId,
    mode: RolloutMode,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    check_neighbor(g, origin, candidate)?;
    let levels = mode.is_shortest().then(|| OriginLevels::new(g, origin));
    Ok(simulate_with(g, levels.as_ref(), origin, candidate, mode, rng))
}

pub(crate) fn simulate_with<R: Rng + ?Sized>(
    g: &NavGraph,
    levels: Option<&OriginLevels>,
    origin: NodeId,
    candidate: NodeId,
    mode: RolloutMode,
    rng: &mut R,
) -> Vec<NodeId> {
    let mut walk = vec![origin, candidate];
    loop {
        let cur = *walk.last().expect("nonempty");
        let options = match levels {
            Some(l) => l.shortest_children(g, cur, mode),
            None => g.neighbors(cur).iter().copied().filter(|n| !walk.contains(n)).collect(),
        };
        if options.is_empty() {
            return walk;
        }
        walk.push(options[rng.random_range(0..options.len())]);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessViolation {
    pub node: NodeId,
    pub candidates: Vec<NodeId>,
}

/// Nodes that receive positive probability from two or more candidates of
/// `origin`. In uniform-random mode a node is reachable from a candidate when
/// some simple path origin → candidate → … → node exists.
pub fn verify_uniqueness(g: &NavGraph, origin: NodeId, mode: RolloutMode) -> Vec<UniquenessViolation> {
    let mut owners: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let levels = OriginLevels::new(g, origin);
    for &cand in g.neighbors(origin) {
        let support: Vec<NodeId> = if mode.is_shortest() {
            node_step_distribution_with(g, &levels, cand, mode)
                .expect("candidate is a neighbor")
                .support()
                .collect()
        } else {
            reachable_avoiding(g, cand, origin)
        };
        for n in support {
            owners.entry(n).or_default().push(cand);
        }
    }
    owners
        .into_iter()
        .filter(|(_, c)| c.len() > 1)
        .map(|(node, candidates)| UniquenessViolation { node, candidates })
        .collect()
}

fn reachable_avoiding(g: &NavGraph, start: NodeId, blocked: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.len()];
    seen[blocked] = true;
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen[blocked] = false;
    (0..g.len()).filter(|&v| seen[v]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportNode {
    pub id: NodeId,
    pub t: usize,
    pub p: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSupport {
    pub candidate: NodeId,
    pub nodes: Vec<SupportNode>,
}

/// Per-candidate support of `origin`, with decay weight `w = γ^t`.
pub fn export_support_map(g: &NavGraph, origin: NodeId, gamma: f64, mode: RolloutMode) -> Result<Vec<CandidateSupport>> {
    let levels = OriginLevels::new(g, origin);
    g.neighbors(origin)
        .iter()
        .map(|&cand| {
            let dist = node_step_distribution_with(g, &levels, cand, mode)?;
            let nodes = dist
                .entries
                .iter()
                .map(|(&id, e)| SupportNode { id, t: e.t, p: e.p, w: gamma.powi(e.t as i32) })
                .collect();
            Ok(CandidateSupport { candidate: cand, nodes })
        })
        .collect()
}
