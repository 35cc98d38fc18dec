//! Foresighted frontier agent.
//!
//! The agent keeps an explored graph of visited nodes and observed-but-unvisited
//! frontier nodes. Each decision scores every frontier node with an A*-style
//! cost: normalized traversed distance `s1` (the `g` term) plus a
//! distance-to-go estimate `ŝ2` (the `h` term) read off the node's Q-feature.
//! The chosen node is reached along the shortest path through known edges.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{DistanceTable, NavGraph, NodeId};
use crate::qmodel::{self, Mlp};
use crate::qoracle::{self, QOracleConfig};
use crate::rng::{self, SplitMix64};
use crate::worldgen::category_embedding;

/// Number of classes in the binned distance-to-go head.
pub const S2_BINS: usize = 5;
/// Temperature of the softmax-normalized fusion.
pub const SOFTMAX_TEMPERATURE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    /// Semantic description of the target (category embedding plus noise).
    pub goal_feature: Vec<f64>,
    /// Hidden from the agent's scoring; used by the environment and metrics.
    pub goal_node: NodeId,
    pub success_radius_hops: usize,
}

impl GoalSpec {
    pub fn for_node(g: &NavGraph, goal_node: NodeId, sigma: f64, radius: usize, rng: &mut SplitMix64) -> Self {
        let mut goal_feature = category_embedding(g.node(goal_node).category, g.feature_dim());
        if sigma > 0.0 {
            for v in &mut goal_feature {
                *v += sigma * rng::normal(rng);
            }
        }
        GoalSpec { goal_feature, goal_node, success_radius_hops: radius }
    }
}

/// Read-only episode environment: the full graph plus precomputed distances.
pub struct Environment<'g> {
    pub graph: &'g NavGraph,
    pub dist: DistanceTable,
}

impl<'g> Environment<'g> {
    pub fn new(graph: &'g NavGraph) -> Self {
        Environment { graph, dist: DistanceTable::new(graph) }
    }
}

/// Per-episode normalizers: `D1 = 2ℓ*`, `D2 = ℓ*` with `ℓ*` the expert length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    pub d1: f64,
    pub d2: f64,
}

impl Normalizers {
    pub fn from_expert_length(len: f64) -> Self {
        let l = if len > 0.0 { len } else { 1.0 };
        Normalizers { d1: 2.0 * l, d2: l }
    }
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `(dist(start, current) + dist(current, frontier)) / D1`, clipped to `[0, 1]`.
pub fn progress_s1(env: &Environment, start: NodeId, current: NodeId, frontier: NodeId, d1: f64) -> f64 {
    clip01((env.dist.metric(start, current) + env.dist.metric(current, frontier)) / d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum S2Mode {
    #[default]
    Regression,
    Bins,
}

/// Learned distance-to-go head over `[Q ‖ goal_feature]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Model {
    pub mode: S2Mode,
    pub net: Mlp,
}

impl S2Model {
    pub fn predict(&self, q: &[f64], goal: &[f64]) -> Result<f64> {
        let x: Vec<f64> = q.iter().chain(goal).copied().collect();
        let out = self.net.forward(&x)?;
        Ok(match self.mode {
            S2Mode::Regression => clip01(out[0]),
            // Expected bin center under the predicted class distribution.
            S2Mode::Bins => qmodel::softmax(&out)
                .iter()
                .enumerate()
                .map(|(k, p)| p * (k as f64 + 0.5) / S2_BINS as f64)
                .sum(),
        })
    }
}

/// Target encoding for the binned head.
pub fn s2_bin(s2: f64) -> usize {
    ((clip01(s2) * S2_BINS as f64) as usize).min(S2_BINS - 1)
}

#[derive(Debug, Clone, Copy)]
pub enum S2Head<'a> {
    /// True metric distance to the goal node.
    Oracle,
    Learned(&'a S2Model),
}

/// Estimated normalized distance-to-go of `frontier`.
pub fn heuristic_s2(
    env: &Environment,
    frontier: NodeId,
    q: Option<&[f64]>,
    goal: &GoalSpec,
    head: S2Head,
    d2: f64,
) -> Result<f64> {
    match head {
        S2Head::Oracle => Ok(clip01(env.dist.metric(frontier, goal.goal_node) / d2)),
        S2Head::Learned(model) => {
            let q = q.ok_or_else(|| Error::InvalidConfig(format!("frontier {frontier} has no Q-feature")))?;
            model.predict(q, &goal.goal_feature)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Fusion {
    #[default]
    WeightedSum,
    SoftmaxNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub alpha: f64,
    pub beta: f64,
    pub fusion: Fusion,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { alpha: 1.0, beta: 1.0, fusion: Fusion::WeightedSum }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) || self.alpha + self.beta == 0.0 {
            return Err(Error::InvalidConfig("score weights must be nonnegative and not both zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Random,
    HistoryOnly,
    ForesightedLearnedQ,
    ForesightedGtQ,
    PseudoExpert,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Random,
        AgentKind::HistoryOnly,
        AgentKind::ForesightedGtQ,
        AgentKind::ForesightedLearnedQ,
        AgentKind::PseudoExpert,
    ];

    /// Short name used on the command line and in reports.
    pub fn short_name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::HistoryOnly => "history",
            AgentKind::ForesightedLearnedQ => "learnedq",
            AgentKind::ForesightedGtQ => "gtq",
            AgentKind::PseudoExpert => "expert",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(AgentKind::Random),
            "history" | "history-only" => Ok(AgentKind::HistoryOnly),
            "learnedq" | "foresighted-learned-q" => Ok(AgentKind::ForesightedLearnedQ),
            "gtq" | "foresighted-gt-q" => Ok(AgentKind::ForesightedGtQ),
            "expert" | "pseudo-expert" => Ok(AgentKind::PseudoExpert),
            other => Err(format!("unknown agent `{other}`")),
        }
    }
}

/// Where frontier Q-features come from.
#[derive(Debug, Clone, Copy)]
pub enum QSource<'a> {
    None,
    GroundTruth(QOracleConfig),
    Learned(&'a Mlp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry {
    /// Visited node the entry was most recently observed from.
    pub observed_from: NodeId,
    pub q: Option<Vec<f64>>,
}

/// Visited nodes, frontier nodes and the agent's position.
#[derive(Debug, Clone)]
pub struct ExploredGraph {
    pub start: NodeId,
    pub current: NodeId,
    visited: Vec<bool>,
    /// Visited nodes in order of first visit.
    pub history: Vec<NodeId>,
    pub frontier: BTreeMap<NodeId, FrontierEntry>,
    /// Q-features held by visited nodes at the time they were entered.
    pub visited_q: BTreeMap<NodeId, Vec<f64>>,
}

impl ExploredGraph {
    pub fn new(env: &Environment, start: NodeId, qsource: QSource) -> Result<Self> {
        let mut state = ExploredGraph {
            start,
            current: start,
            visited: vec![false; env.graph.len()],
            history: vec![start],
            frontier: BTreeMap::new(),
            visited_q: BTreeMap::new(),
        };
        state.visited[start] = true;
        state.reveal(env, start, qsource)?;
        Ok(state)
    }

    pub fn is_visited(&self, n: NodeId) -> bool {
        self.visited[n]
    }

    fn reveal(&mut self, env: &Environment, from: NodeId, qsource: QSource) -> Result<()> {
        let g = env.graph;
        for &n in g.neighbors(from) {
            if self.visited[n] {
                continue;
            }
            let q = match qsource {
                QSource::None => None,
                QSource::GroundTruth(cfg) => Some(qoracle::gt_qfeature(g, from, n, &cfg)?.values),
                QSource::Learned(net) => Some(net.forward(&qmodel::encode_parts(g, &self.history, from, n)?)?),
            };
            self.frontier.insert(n, FrontierEntry { observed_from: from, q });
        }
        Ok(())
    }

    /// Checks the structural invariants against the true graph.
    pub fn check_invariants(&self, g: &NavGraph) -> Result<(), String> {
        if !self.visited[self.start] {
            return Err("start not visited".into());
        }
        for (&n, e) in &self.frontier {
            if self.visited[n] {
                return Err(format!("frontier node {n} is visited"));
            }
            if !g.neighbors(n).iter().any(|&m| self.visited[m]) || !self.visited[e.observed_from] {
                return Err(format!("frontier node {n} has no visited neighbor"));
            }
        }
        Ok(())
    }
}

/// Frontier scores, lower is better.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    Foresighted { weights: ScoreWeights, head: S2Head<'a> },
    /// `−cos(feature, goal) + α·s1`.
    HistoryOnly { alpha: f64 },
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn score_frontiers(
    env: &Environment,
    state: &ExploredGraph,
    goal: &GoalSpec,
    scorer: Scorer,
    norm: Normalizers,
) -> Result<BTreeMap<NodeId, f64>> {
    if state.frontier.is_empty() {
        return Err(Error::EmptyFrontier);
    }
    let s1: Vec<f64> =
        state.frontier.keys().map(|&a| progress_s1(env, state.start, state.current, a, norm.d1)).collect();
    let scores: Vec<f64> = match scorer {
        Scorer::HistoryOnly { alpha } => state
            .frontier
            .keys()
            .zip(&s1)
            .map(|(&a, s1)| -cosine(env.graph.feature(a), &goal.goal_feature) + alpha * s1)
            .collect(),
        Scorer::Foresighted { weights, head } => {
            weights.validate()?;
            let s2 = state
                .frontier
                .iter()
                .map(|(&a, e)| heuristic_s2(env, a, e.q.as_deref(), goal, head, norm.d2))
                .collect::<Result<Vec<f64>>>()?;
            match weights.fusion {
                Fusion::WeightedSum => s1.iter().zip(&s2).map(|(a, b)| weights.alpha * a + weights.beta * b).collect(),
                Fusion::SoftmaxNormalized => {
                    let neg = |v: &[f64]| v.iter().map(|x| -x / SOFTMAX_TEMPERATURE).collect::<Vec<_>>();
                    let (p1, p2) = (qmodel::softmax(&neg(&s1)), qmodel::softmax(&neg(&s2)));
                    let total = weights.alpha + weights.beta;
                    p1.iter().zip(&p2).map(|(a, b)| -(weights.alpha * a + weights.beta * b) / total).collect()
                }
            }
        }
    };
    Ok(state.frontier.keys().copied().zip(scores).collect())
}

/// Lowest score, smallest id among ties.
pub fn argmin(scores: &BTreeMap<NodeId, f64>) -> Option<NodeId> {
    let mut best: Option<(NodeId, f64)> = None;
    for (&n, &s) in scores {
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((n, s));
        }
    }
    best.map(|(n, _)| n)
}

/// Shortest metric path from `from` to `to` that only passes through visited
/// nodes (known edges), ending at `to`.
fn known_path(env: &Environment, state: &ExploredGraph, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
    #[derive(PartialEq)]
    struct Item(f64, NodeId);
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    let g = env.graph;
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut prev = vec![None; g.len()];
    dist[from] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, from)]);
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == to {
            break;
        }
        for &v in g.neighbors(u) {
            if !(state.is_visited(v) || v == to) {
                continue;
            }
            let nd = d + g.edge_length(u, v).expect("adjacent");
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = Some(u);
                heap.push(Item(nd, v));
            }
        }
    }
    if !dist[to].is_finite() {
        return None;
    }
    let mut path = vec![to];
    while let Some(p) = prev[*path.last().expect("nonempty")] {
        path.push(p);
    }
    path.reverse();
    Some(path)
}

/// Moves to `choice` along known edges, marks it visited and reveals its
/// neighbors. Returns the traversed sub-path (excluding the starting node) and
/// the frontier entry the chosen node held.
pub fn step(env: &Environment, state: &mut ExploredGraph, choice: NodeId, qsource: QSource) -> Result<(Vec<NodeId>, FrontierEntry)> {
    let entry = state.frontier.remove(&choice).ok_or(Error::UnknownFrontier(choice))?;
    let path = known_path(env, state, state.current, choice).ok_or(Error::UnknownFrontier(choice))?;
    state.visited[choice] = true;
    state.history.push(choice);
    state.current = choice;
    if let Some(q) = &entry.q {
        state.visited_q.insert(choice, q.clone());
    }
    state.reveal(env, choice, qsource)?;
    Ok((path[1..].to_vec(), entry))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    StopRule,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub world: String,
    pub goal: NodeId,
    pub radius: usize,
    pub agent: String,
    /// Every physically traversed node, starting at the start node.
    pub path: Vec<NodeId>,
    #[serde(rename = "frontchoices")]
    pub front_choices: Vec<NodeId>,
    pub stop: StopReason,
    pub expert: Vec<NodeId>,
}

impl EpisodeResult {
    pub fn start(&self) -> NodeId {
        self.path[0]
    }

    pub fn final_node(&self) -> NodeId {
        *self.path.last().expect("path starts at the start node")
    }
}

/// A configured agent.
#[derive(Debug, Clone, Copy)]
pub struct Agent<'a> {
    pub kind: AgentKind,
    pub weights: ScoreWeights,
    pub head: S2Head<'a>,
    pub qsource: QSource<'a>,
    /// Stop once the current node's distance-to-go estimate is at most this.
    pub stop_tau: f64,
}

impl<'a> Agent<'a> {
    pub fn pseudo_expert() -> Self {
        Agent {
            kind: AgentKind::PseudoExpert,
            weights: ScoreWeights::default(),
            head: S2Head::Oracle,
            qsource: QSource::None,
            stop_tau: 0.0,
        }
    }

    /// `head` only drives the stop rule, fed with the entered node's own
    /// feature in place of a Q-feature.
    pub fn history_only(alpha: f64, head: S2Head<'a>, stop_tau: f64) -> Self {
        Agent {
            kind: AgentKind::HistoryOnly,
            weights: ScoreWeights { alpha, beta: 0.0, fusion: Fusion::WeightedSum },
            head,
            qsource: QSource::None,
            stop_tau,
        }
    }

    pub fn random(head: S2Head<'a>, stop_tau: f64) -> Self {
        Agent { kind: AgentKind::Random, ..Self::history_only(1.0, head, stop_tau) }
    }

    pub fn foresighted(kind: AgentKind, weights: ScoreWeights, head: S2Head<'a>, qsource: QSource<'a>, stop_tau: f64) -> Self {
        Agent { kind, weights, head, qsource, stop_tau }
    }

    /// Frontier choice for the current state.
    pub fn choose(&self, env: &Environment, state: &ExploredGraph, goal: &GoalSpec, norm: Normalizers, rng: &mut SplitMix64) -> Result<NodeId> {
        if state.frontier.is_empty() {
            return Err(Error::EmptyFrontier);
        }
        match self.kind {
            AgentKind::Random => {
                let keys: Vec<NodeId> = state.frontier.keys().copied().collect();
                Ok(keys[rng.random_range(0..keys.len())])
            }
            AgentKind::PseudoExpert => {
                let scores = state
                    .frontier
                    .keys()
                    .map(|&a| (a, env.dist.metric(state.current, a) + env.dist.metric(a, goal.goal_node)))
                    .collect();
                Ok(argmin(&scores).expect("frontier nonempty"))
            }
            AgentKind::HistoryOnly => {
                let scores = score_frontiers(env, state, goal, Scorer::HistoryOnly { alpha: self.weights.alpha }, norm)?;
                Ok(argmin(&scores).expect("frontier nonempty"))
            }
            AgentKind::ForesightedGtQ | AgentKind::ForesightedLearnedQ => {
                let scores = score_frontiers(env, state, goal, Scorer::Foresighted { weights: self.weights, head: self.head }, norm)?;
                Ok(argmin(&scores).expect("frontier nonempty"))
            }
        }
    }

    /// Distance-to-go estimate at the node just entered. Agents without a
    /// Q channel feed the node's own feature to their head.
    fn stop_estimate(&self, env: &Environment, node: NodeId, entry: &FrontierEntry, goal: &GoalSpec, norm: Normalizers) -> Result<f64> {
        match self.kind {
            AgentKind::PseudoExpert => Ok(if node == goal.goal_node { 0.0 } else { 1.0 }),
            AgentKind::Random | AgentKind::HistoryOnly => {
                heuristic_s2(env, node, Some(env.graph.feature(node)), goal, self.head, norm.d2)
            }
            AgentKind::ForesightedGtQ | AgentKind::ForesightedLearnedQ => {
                heuristic_s2(env, node, entry.q.as_deref(), goal, self.head, norm.d2)
            }
        }
    }
}

/// Runs one episode of at most `budget` frontier decisions.
pub fn run_episode(
    env: &Environment,
    world: &str,
    agent: &Agent,
    start: NodeId,
    goal: &GoalSpec,
    budget: usize,
    rng: &mut SplitMix64,
) -> Result<EpisodeResult> {
    let g = env.graph;
    let expert = g.shortest_path(start, goal.goal_node);
    let norm = Normalizers::from_expert_length(env.dist.metric(start, goal.goal_node));
    let mut state = ExploredGraph::new(env, start, agent.qsource)?;
    let mut path = vec![start];
    let mut choices = Vec::new();
    let mut stop = StopReason::Budget;

    if agent.kind == AgentKind::PseudoExpert && start == goal.goal_node {
        stop = StopReason::StopRule;
    } else {
        for _ in 0..budget {
            if state.frontier.is_empty() {
                stop = StopReason::StopRule;
                break;
            }
            let choice = agent.choose(env, &state, goal, norm, rng)?;
            let (sub, entry) = step(env, &mut state, choice, agent.qsource)?;
            path.extend(sub);
            choices.push(choice);
            if agent.stop_estimate(env, choice, &entry, goal, norm)? <= agent.stop_tau {
                stop = StopReason::StopRule;
                break;
            }
        }
    }
    Ok(EpisodeResult {
        world: world.to_string(),
        goal: goal.goal_node,
        radius: goal.success_radius_hops,
        agent: agent.kind.short_name().to_string(),
        path,
        front_choices: choices,
        stop,
        expert,
    })
}
