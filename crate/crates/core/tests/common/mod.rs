//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's BFS, rollout or oracle code.

#![allow(dead_code)]

use navq_core::navgraph::{NavGraph, NodeId};
use navq_core::rollout::RolloutMode;
use navq_core::worldgen::{self, WorldConfig, WorldKind};

pub const UNREACHABLE: usize = usize::MAX;

/// All-pairs hop counts.
pub fn floyd_warshall_hops(g: &NavGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in g.neighbors(u) {
            row[v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != UNREACHABLE && d[k][j] != UNREACHABLE && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// All-pairs metric distances over edge lengths.
pub fn floyd_warshall_metric(g: &NavGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
        for &v in g.neighbors(u) {
            row[v] = g.edge_length(u, v).unwrap();
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every complete rollout `[origin, candidate, ...]` with its probability.
/// Shortest modes take only hop-increasing steps; canonical mode further
/// requires the step to enter a node from its smallest-id shorter neighbor.
/// Uniform-random mode is a self-avoiding walk that never revisits the origin.
pub fn enumerate_rollouts(g: &NavGraph, origin: NodeId, candidate: NodeId, mode: RolloutMode) -> Vec<(Vec<NodeId>, f64)> {
    let hops = floyd_warshall_hops(g);
    let h = &hops[origin];
    let options = |walk: &[NodeId]| -> Vec<NodeId> {
        let cur = *walk.last().unwrap();
        let mut out: Vec<NodeId> = g
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&n| match mode {
                RolloutMode::UniformRandom => !walk.contains(&n),
                RolloutMode::ShortestAll => h[n] == h[cur] + 1,
                RolloutMode::ShortestCanonical => {
                    h[n] == h[cur] + 1 && (0..g.len()).filter(|&m| g.has_edge(m, n) && h[m] + 1 == h[n]).min() == Some(cur)
                }
            })
            .collect();
        out.sort_unstable();
        out
    };
    let mut done = Vec::new();
    let mut stack = vec![(vec![origin, candidate], 1.0)];
    while let Some((walk, p)) = stack.pop() {
        let next = options(&walk);
        if next.is_empty() {
            done.push((walk, p));
            continue;
        }
        let share = p / next.len() as f64;
        for n in next {
            let mut w = walk.clone();
            w.push(n);
            stack.push((w, share));
        }
    }
    done
}

/// Probability that each node appears after the origin in a rollout.
pub fn visit_probabilities(g: &NavGraph, origin: NodeId, candidate: NodeId, mode: RolloutMode) -> Vec<f64> {
    let mut p = vec![0.0; g.len()];
    for (walk, pw) in enumerate_rollouts(g, origin, candidate, mode) {
        for &n in &walk[1..] {
            p[n] += pw;
        }
    }
    p
}

/// `E[Σ_t γ^t R(n_t)]` over enumerated rollouts, `t = 0` at the candidate.
pub fn brute_force_q(g: &NavGraph, origin: NodeId, candidate: NodeId, gamma: f64, mode: RolloutMode) -> Vec<f64> {
    let mut q = vec![0.0; g.feature_dim()];
    for (walk, pw) in enumerate_rollouts(g, origin, candidate, mode) {
        let mut w = 1.0;
        for &n in &walk[1..] {
            for (qi, r) in q.iter_mut().zip(g.feature(n)) {
                *qi += pw * w * r;
            }
            w *= gamma;
        }
    }
    q
}

pub fn geometric(seed: u64, n_nodes: usize) -> NavGraph {
    worldgen::generate(&WorldConfig {
        kind: WorldKind::RandomGeometric,
        n_nodes,
        feature_dim: 4,
        n_categories: 4,
        extent: 1.0,
        connect_radius: 0.45,
        seed,
        ..WorldConfig::default()
    })
    .unwrap()
}

pub fn tree(seed: u64, n_nodes: usize) -> NavGraph {
    worldgen::generate(&WorldConfig {
        kind: WorldKind::RandomTree,
        n_nodes,
        feature_dim: 4,
        n_categories: 4,
        extent: 1.0,
        connect_radius: 0.45,
        seed,
        ..WorldConfig::default()
    })
    .unwrap()
}

pub fn grid(seed: u64) -> NavGraph {
    worldgen::generate(&WorldConfig { seed, ..WorldConfig::default() }).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(origin, candidate)` for every directed edge.
pub fn pairs(g: &NavGraph) -> Vec<(NodeId, NodeId)> {
    (0..g.len()).flat_map(|o| g.neighbors(o).iter().map(move |&c| (o, c))).collect()
}
