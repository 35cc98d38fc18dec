//! Immutable navigation graph: node records, metric edges and shortest-path
//! queries.
//!
//! Adjacency lists are sorted by ascending node id. That order is the single
//! tie-breaking order used everywhere downstream (rollout parents, expert
//! paths, frontier ties).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

const EDGE_LENGTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub position: [f64; 2],
    pub feature: Vec<f64>,
    pub category: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<NodeId>>,
    feature_dim: usize,
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl NavGraph {
    /// Validates the inputs and computes edge lengths from node positions.
    pub fn build(nodes: Vec<NodeRecord>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let with_len: Vec<(NodeId, NodeId, Option<f64>)> =
            edges.iter().map(|&(u, v)| (u, v, None)).collect();
        Self::build_inner(nodes, &with_len)
    }

    /// Like [`NavGraph::build`] but checks supplied edge lengths against the
    /// node positions.
    pub fn build_with_lengths(nodes: Vec<NodeRecord>, edges: &[Edge]) -> Result<Self> {
        let with_len: Vec<(NodeId, NodeId, Option<f64>)> =
            edges.iter().map(|e| (e.u, e.v, Some(e.length))).collect();
        Self::build_inner(nodes, &with_len)
    }

    fn build_inner(nodes: Vec<NodeRecord>, edges: &[(NodeId, NodeId, Option<f64>)]) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::BadIdRange(format!(
                    "node at index {i} has id {}, ids must be 0..{n} in order",
                    node.id
                )));
            }
            if !node.position.iter().all(|c| c.is_finite()) || !node.feature.iter().all(|c| c.is_finite()) {
                return Err(Error::BadIdRange(format!("node {i} has non-finite data")));
            }
        }
        let feature_dim = nodes[0].feature.len();
        if let Some(bad) = nodes.iter().find(|r| r.feature.len() != feature_dim) {
            return Err(Error::FeatureDim { node: bad.id, expected: feature_dim, got: bad.feature.len() });
        }

        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        let mut out_edges = Vec::with_capacity(edges.len());
        for &(u, v, given) in edges {
            if u >= n || v >= n {
                return Err(Error::BadIdRange(format!("edge {u}-{v} references a node outside 0..{n}")));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let (a, b) = (u.min(v), u.max(v));
            if !seen.insert((a, b)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            let length = euclid(nodes[a].position, nodes[b].position);
            if length == 0.0 {
                return Err(Error::CoincidentPositions(a, b));
            }
            if let Some(l) = given {
                if (l - length).abs() > EDGE_LENGTH_TOL {
                    return Err(Error::BadEdgeLength(a, b));
                }
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            out_edges.push(Edge { u: a, v: b, length });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        out_edges.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)));

        let graph = NavGraph { nodes, edges: out_edges, adjacency, feature_dim };
        let hops = graph.hop_distances(0);
        if let Some(unreached) = hops.iter().position(|h| h.is_none()) {
            return Err(Error::DisconnectedGraph(unreached));
        }
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeRecord {
        &self.nodes[id]
    }

    pub fn feature(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].feature
    }

    pub fn position(&self, id: NodeId) -> [f64; 2] {
        self.nodes[id].position
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edge_length(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.has_edge(u, v).then(|| euclid(self.position(u), self.position(v)))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id < self.nodes.len()
    }

    /// Unweighted BFS hop counts from `src`; `None` for unreachable nodes
    /// (only possible while validating a candidate graph).
    pub fn hop_distances(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let next = dist[u].map(|d| d + 1);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop counts from `src` on a validated (connected) graph.
    pub fn hops_from(&self, src: NodeId) -> Vec<usize> {
        self.hop_distances(src)
            .into_iter()
            .map(|h| h.expect("validated graph is connected"))
            .collect()
    }

    /// Dijkstra from `src` over metric edge lengths. Returns distances and the
    /// predecessor of each node on its shortest path (smallest id among ties).
    pub fn metric_tree(&self, src: NodeId) -> (Vec<f64>, Vec<Option<NodeId>>) {
        #[derive(PartialEq)]
        struct Item(f64, NodeId);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::from([Item(0.0, src)]);
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &v in &self.adjacency[u] {
                let nd = d + euclid(self.position(u), self.position(v));
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        // Canonical predecessor: smallest-id neighbor that realizes the distance.
        let pred = (0..n)
            .map(|v| {
                if v == src {
                    return None;
                }
                self.adjacency[v].iter().copied().find(|&u| {
                    let via = dist[u] + euclid(self.position(u), self.position(v));
                    (via - dist[v]).abs() <= 1e-12 * dist[v].max(1.0)
                })
            })
            .collect();
        (dist, pred)
    }

    pub fn metric_distances_from(&self, src: NodeId) -> Vec<f64> {
        self.metric_tree(src).0
    }

    /// Length of the metric shortest path between `u` and `v`.
    pub fn metric_distance(&self, u: NodeId, v: NodeId) -> f64 {
        if u == v {
            return 0.0;
        }
        self.metric_distances_from(u)[v]
    }

    /// Metric shortest path `from → to` (inclusive), canonical under ties.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let (_, pred) = self.metric_tree(to);
        // Walking predecessors of the tree rooted at `to` yields from → to.
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = pred[cur].expect("validated graph is connected");
            path.push(cur);
        }
        path
    }

    /// Metric length of a walk; `None` if consecutive nodes are not adjacent.
    pub fn walk_length(&self, walk: &[NodeId]) -> Option<f64> {
        walk.windows(2).map(|w| self.edge_length(w[0], w[1])).sum()
    }

    /// `(sin θ, cos θ)` of the straight segment `from → to`.
    pub fn heading_encoding(&self, from: NodeId, to: NodeId) -> Result<(f64, f64)> {
        let (a, b) = (self.position(from), self.position(to));
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        if dx == 0.0 && dy == 0.0 {
            return Err(Error::CoincidentPositions(from, to));
        }
        let theta = dy.atan2(dx);
        Ok(theta.sin_cos())
    }

    /// Largest hop distance between any two nodes.
    pub fn hop_diameter(&self) -> usize {
        (0..self.len())
            .map(|s| self.hops_from(s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// All-pairs metric and hop distances, precomputed for repeated queries.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    metric: Vec<Vec<f64>>,
    hops: Vec<Vec<usize>>,
}

impl DistanceTable {
    pub fn new(g: &NavGraph) -> Self {
        let metric = (0..g.len()).map(|s| g.metric_distances_from(s)).collect();
        let hops = (0..g.len()).map(|s| g.hops_from(s)).collect();
        DistanceTable { metric, hops }
    }

    pub fn metric(&self, u: NodeId, v: NodeId) -> f64 {
        self.metric[u][v]
    }

    pub fn hops(&self, u: NodeId, v: NodeId) -> usize {
        self.hops[u][v]
    }
}

/// A validated partial trajectory: nonempty, consecutive nodes adjacent, no repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialTrajectory(Vec<NodeId>);

impl PartialTrajectory {
    pub fn new(g: &NavGraph, nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidTrajectory("empty".into()));
        }
        if let Some(&bad) = nodes.iter().find(|&&v| !g.contains(v)) {
            return Err(Error::InvalidTrajectory(format!("node {bad} not in graph")));
        }
        if let Some(w) = nodes.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Error::InvalidTrajectory(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        let mut seen = HashSet::new();
        if let Some(&dup) = nodes.iter().find(|&&v| !seen.insert(v)) {
            return Err(Error::InvalidTrajectory(format!("node {dup} repeated")));
        }
        Ok(PartialTrajectory(nodes))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn tail(&self) -> NodeId {
        *self.0.last().expect("nonempty by construction")
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unvisited neighbors of the tail, ascending.
    pub fn candidates(&self, g: &NavGraph) -> Vec<NodeId> {
        g.neighbors(self.tail()).iter().copied().filter(|v| !self.contains(*v)).collect()
    }
}

/// A candidate action: move from the trajectory tail to an unvisited neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateAction {
    target: NodeId,
}

impl CandidateAction {
    pub fn new(g: &NavGraph, traj: &PartialTrajectory, target: NodeId) -> Result<Self> {
        if !g.contains(target) || !g.has_edge(traj.tail(), target) {
            return Err(Error::NotANeighbor { origin: traj.tail(), candidate: target });
        }
        if traj.contains(target) {
            return Err(Error::InvalidTrajectory(format!("candidate {target} already visited")));
        }
        Ok(CandidateAction { target })
    }

    pub fn target(&self) -> NodeId {
        self.target
    }
}

/// Small hand-built graphs with known answers.
pub mod fixtures {
    use super::*;

    pub fn node(id: NodeId, x: f64, y: f64, feature: Vec<f64>) -> NodeRecord {
        NodeRecord { id, position: [x, y], feature, category: 0 }
    }

    pub fn line3() -> NavGraph {
        let nodes = (0..3).map(|i| node(i, i as f64, 0.0, vec![i as f64])).collect();
        NavGraph::build(nodes, &[(0, 1), (1, 2)]).unwrap()
    }

    /// Center 0 with leaves 1, 2, 3; scalar features R(0)=4, R(2)=6, R(3)=10.
    pub fn star() -> NavGraph {
        let nodes = vec![
            node(0, 0.0, 0.0, vec![4.0]),
            node(1, -1.0, 0.0, vec![1.0]),
            node(2, 1.0, 0.5, vec![6.0]),
            node(3, 1.0, -0.5, vec![10.0]),
        ];
        NavGraph::build(nodes, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    /// 0–1, 0–2, 1–3, 2–3.
    pub fn diamond() -> NavGraph {
        let nodes = vec![
            node(0, 0.0, 0.0, vec![1.0]),
            node(1, 1.0, 1.0, vec![2.0]),
            node(2, 1.0, -1.0, vec![3.0]),
            node(3, 2.0, 0.0, vec![4.0]),
        ];
        NavGraph::build(nodes, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    pub fn cycle4() -> NavGraph {
        let nodes = vec![
            node(0, 0.0, 0.0, vec![1.0]),
            node(1, 1.0, 0.0, vec![1.0]),
            node(2, 1.0, 1.0, vec![1.0]),
            node(3, 0.0, 1.0, vec![1.0]),
        ];
        NavGraph::build(nodes, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }
}
