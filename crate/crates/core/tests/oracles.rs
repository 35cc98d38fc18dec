mod common;

use common::*;
use navq_core::navgraph::{fixtures, DistanceTable};
use navq_core::qoracle::{self, QOracleConfig};
use navq_core::rng::rng_from_seed;
use navq_core::rollout::{self, RolloutMode};

const SHORTEST: [RolloutMode; 2] = [RolloutMode::ShortestCanonical, RolloutMode::ShortestAll];

#[test]
fn hop_and_metric_distances_match_floyd_warshall() {
    for seed in 0..6 {
        for g in [geometric(seed, 18), grid(seed), tree(seed, 15)] {
            let hops = floyd_warshall_hops(&g);
            let metric = floyd_warshall_metric(&g);
            let table = DistanceTable::new(&g);
            for u in 0..g.len() {
                assert_eq!(g.hops_from(u), hops[u]);
                for v in 0..g.len() {
                    assert_eq!(table.hops(u, v), hops[u][v]);
                    assert!((table.metric(u, v) - metric[u][v]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn shortest_path_is_a_metric_geodesic() {
    for seed in 0..4 {
        let g = geometric(seed, 16);
        let metric = floyd_warshall_metric(&g);
        for u in 0..g.len() {
            for v in 0..g.len() {
                let p = g.shortest_path(u, v);
                assert_eq!((p[0], *p.last().unwrap()), (u, v));
                assert!((g.walk_length(&p).unwrap() - metric[u][v]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hop_diameter_matches_floyd_warshall() {
    for seed in 0..5 {
        let g = grid(seed);
        let fw = floyd_warshall_hops(&g).into_iter().flatten().max().unwrap();
        assert_eq!(g.hop_diameter(), fw);
    }
}

#[test]
fn step_distribution_matches_path_enumeration() {
    for seed in 0..8 {
        let g = geometric(seed, 14);
        let hops = floyd_warshall_hops(&g);
        for (o, c) in pairs(&g) {
            for mode in SHORTEST {
                let d = rollout::node_step_distribution(&g, o, c, mode).unwrap();
                let p = visit_probabilities(&g, o, c, mode);
                for n in 0..g.len() {
                    assert!((d.prob(n) - p[n]).abs() < 1e-12, "seed {seed} ({o},{c}) node {n} {mode}");
                }
                for (n, e) in &d.entries {
                    assert_eq!(e.t, hops[o][*n] - 1);
                }
                let terminal: f64 = d.terminal_mass.values().sum();
                assert!((terminal - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn closed_form_q_matches_path_enumeration() {
    for seed in 0..6 {
        let g = geometric(100 + seed, 14);
        for (o, c) in pairs(&g) {
            for mode in SHORTEST {
                for gamma in [0.0, 0.5, 0.9] {
                    let cfg = QOracleConfig { gamma, mode, ..Default::default() };
                    let q = qoracle::gt_qfeature(&g, o, c, &cfg).unwrap();
                    let b = brute_force_q(&g, o, c, gamma, mode);
                    assert!(max_abs_diff(&q.values, &b) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn recursive_q_matches_enumeration_in_random_mode() {
    // Self-avoiding walks blow up quickly; keep graphs tiny.
    for seed in 0..4 {
        let g = geometric(200 + seed, 8);
        for (o, c) in pairs(&g) {
            let cfg = QOracleConfig { gamma: 0.6, mode: RolloutMode::UniformRandom, ..Default::default() };
            let q = qoracle::bellman_qfeature(&g, o, c, &cfg).unwrap();
            let b = brute_force_q(&g, o, c, 0.6, RolloutMode::UniformRandom);
            assert!(max_abs_diff(&q.values, &b) < 1e-12);
        }
    }
}

#[test]
fn monte_carlo_q_converges_to_enumeration() {
    let g = geometric(7, 9);
    let mut rng = rng_from_seed(3);
    for (o, c) in pairs(&g).into_iter().step_by(3) {
        for mode in [RolloutMode::ShortestAll, RolloutMode::UniformRandom] {
            let cfg = QOracleConfig { gamma: 0.5, mode, mc_rollouts: 20_000, ..Default::default() };
            let q = qoracle::mc_qfeature(&g, o, c, &cfg, &mut rng).unwrap();
            let b = brute_force_q(&g, o, c, 0.5, mode);
            // Features are bounded by ~1.5, tails by Σ γ^t ≤ 1, so σ/√n ≪ 0.03.
            assert!(max_abs_diff(&q.values, &b) < 0.03, "({o},{c}) {mode}");
        }
    }
}

#[test]
fn canonical_supports_partition_reachable_nodes() {
    for seed in 0..10 {
        let g = grid(seed);
        for o in 0..g.len() {
            let map = rollout::export_support_map(&g, o, 0.5, RolloutMode::ShortestCanonical).unwrap();
            let mut owner = vec![0usize; g.len()];
            for cs in &map {
                for s in &cs.nodes {
                    owner[s.id] += 1;
                    assert!(s.p > 0.0 && s.p <= 1.0);
                    assert_eq!(s.w, 0.5f64.powi(s.t as i32));
                }
            }
            for (n, &k) in owner.iter().enumerate() {
                assert_eq!(k, usize::from(n != o), "origin {o} node {n}");
            }
        }
    }
}

#[test]
fn star_candidates_own_only_themselves() {
    let g = fixtures::star();
    let map = rollout::export_support_map(&g, 0, 0.5, RolloutMode::ShortestCanonical).unwrap();
    assert_eq!(map.len(), g.neighbors(0).len());
    for cs in &map {
        assert_eq!(cs.nodes.len(), 1);
        assert_eq!((cs.nodes[0].id, cs.nodes[0].t, cs.nodes[0].p, cs.nodes[0].w), (cs.candidate, 0, 1.0, 1.0));
    }
}

#[test]
fn diamond_shares_its_sink_only_in_all_mode() {
    let g = fixtures::diamond();
    let sink = (0..g.len()).find(|&n| n != 0 && !g.has_edge(0, n)).unwrap();
    let shared = |mode| {
        rollout::export_support_map(&g, 0, 0.5, mode)
            .unwrap()
            .iter()
            .filter(|cs| cs.nodes.iter().any(|s| s.id == sink))
            .count()
    };
    assert_eq!(shared(RolloutMode::ShortestAll), 2);
    assert_eq!(shared(RolloutMode::ShortestCanonical), 1);
}

/// Minimum metric length over every simple path, by depth-first enumeration.
fn simple_path_minimum(g: &navq_core::navgraph::NavGraph, from: usize, to: usize) -> f64 {
    fn dfs(g: &navq_core::navgraph::NavGraph, at: usize, to: usize, len: f64, seen: &mut Vec<bool>, best: &mut f64) {
        if at == to {
            *best = best.min(len);
            return;
        }
        for &n in g.neighbors(at) {
            if !seen[n] {
                seen[n] = true;
                dfs(g, n, to, len + g.edge_length(at, n).unwrap(), seen, best);
                seen[n] = false;
            }
        }
    }
    let mut seen = vec![false; g.len()];
    seen[from] = true;
    let mut best = f64::INFINITY;
    dfs(g, from, to, 0.0, &mut seen, &mut best);
    best
}

#[test]
fn metric_distance_matches_simple_path_enumeration() {
    for seed in 0..5 {
        let g = geometric(300 + seed, 8);
        for u in 0..g.len() {
            for v in 0..g.len() {
                assert!((g.metric_distance(u, v) - simple_path_minimum(&g, u, v)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fifty_node_hops_match_floyd_warshall() {
    let g = geometric(11, 50);
    let fw = floyd_warshall_hops(&g);
    for u in 0..g.len() {
        assert_eq!(g.hops_from(u), fw[u]);
    }
}

#[test]
fn star_rollouts_split_evenly_between_the_other_leaves() {
    let g = fixtures::star();
    let mut rng = rng_from_seed(8);
    let n = 10_000;
    let mut to_two = 0;
    for _ in 0..n {
        let walk = rollout::simulate_rollout(&g, 1, 0, RolloutMode::UniformRandom, &mut rng).unwrap();
        assert!(walk == [1, 0, 2] || walk == [1, 0, 3], "{walk:?}");
        to_two += usize::from(walk[2] == 2);
    }
    assert!((to_two as f64 / n as f64 - 0.5).abs() <= 0.02);
}

#[test]
fn monte_carlo_variance_shrinks_with_more_rollouts() {
    // Branching self-avoiding walks, so a single rollout is genuinely random.
    let g = geometric(5, 9);
    let (o, c) = pairs(&g).into_iter().find(|&(o, c)| enumerate_rollouts(&g, o, c, RolloutMode::UniformRandom).len() > 3).unwrap();
    let variance = |k: usize| {
        let cfg = QOracleConfig { gamma: 0.7, mode: RolloutMode::UniformRandom, mc_rollouts: k, ..Default::default() };
        let mut rng = rng_from_seed(k as u64);
        let est: Vec<f64> = (0..300).map(|_| qoracle::mc_qfeature(&g, o, c, &cfg, &mut rng).unwrap().values[0]).collect();
        let m = est.iter().sum::<f64>() / est.len() as f64;
        est.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (est.len() - 1) as f64
    };
    let (small, large) = (variance(4), variance(64));
    assert!(large < small, "var(4) = {small}, var(64) = {large}");
}

#[test]
fn training_targets_pass_the_recursive_cross_check() {
    let worlds: Vec<_> = (0..10).map(grid).collect();
    let cfg = QOracleConfig::default();
    let samples = qoracle::build_training_set(&worlds, 5000, &cfg, 8, 4).unwrap();
    assert_eq!(samples.len(), 5000);
    for s in samples.iter().step_by(50) {
        let g = &worlds[s.world];
        let b = qoracle::bellman_qfeature(g, s.trajectory.tail(), s.candidate, &cfg).unwrap();
        assert!(max_abs_diff(&s.target, &b.values) <= 1e-9);
        assert!(!s.trajectory.contains(s.candidate));
    }
}
