//! Invariant suite behind `navq verify`: each check runs over seeded graphs
//! and reports a single pass/fail line.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::navgraph::{fixtures, NavGraph};
use crate::par;
use crate::qmodel::{self, Activation, Mlp};
use crate::qoracle::{self, QOracleConfig};
use crate::rng::{self, derive_seed};
use crate::rollout::{self, RolloutMode};
use crate::worldgen::{self, WorldConfig, WorldKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Small random graphs for the closed-form versus recursive comparison.
    pub oracle_graphs: usize,
    pub mc_graphs: usize,
    pub mc_rollouts: usize,
    pub uniqueness_worlds: usize,
    pub grad_configs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, oracle_graphs: 50, mc_graphs: 10, mc_rollouts: 100_000, uniqueness_worlds: 100, grad_configs: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Connected random geometric graph with 8 to `max_nodes` nodes.
pub fn small_random_graph(seed: u64, max_nodes: usize) -> Result<NavGraph> {
    let mut r = rng::child_rng(seed, "verify/size", 0);
    let n = r.random_range(8..=max_nodes.max(8));
    worldgen::generate(&WorldConfig {
        kind: WorldKind::RandomGeometric,
        n_nodes: n,
        feature_dim: 4,
        n_categories: 4,
        extent: 1.0,
        connect_radius: 0.45,
        seed,
        ..WorldConfig::default()
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn check_oracle_equivalence(cfg: &VerifyConfig) -> Result<Check> {
    let worst = par::try_map_indexed(cfg.oracle_graphs, |i| {
        let g = small_random_graph(derive_seed(cfg.seed, "verify/oracle", i as u64), 20)?;
        let mut worst = 0.0f64;
        for gamma in [0.0, 0.3, 0.5, 0.7, 0.95] {
            for mode in [RolloutMode::ShortestCanonical, RolloutMode::ShortestAll] {
                let oc = QOracleConfig { gamma, mode, ..Default::default() };
                for o in 0..g.len() {
                    for &c in g.neighbors(o) {
                        let a = qoracle::gt_qfeature(&g, o, c, &oc)?;
                        let b = qoracle::bellman_qfeature(&g, o, c, &oc)?;
                        worst = worst.max(max_abs_diff(&a.values, &b.values));
                    }
                }
            }
        }
        Ok(worst)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Check {
        name: "closed-form-equals-recursive",
        passed: worst <= 1e-9,
        detail: format!("max |bellman - gt| = {worst:.3e} over {} graphs", cfg.oracle_graphs),
    })
}

pub fn check_distribution_mc(cfg: &VerifyConfig) -> Result<Check> {
    let worst = par::try_map_indexed(cfg.mc_graphs, |i| {
        let seed = derive_seed(cfg.seed, "verify/mc", i as u64);
        let g = worldgen::generate(&WorldConfig {
            kind: WorldKind::RandomGeometric,
            n_nodes: 12,
            feature_dim: 4,
            n_categories: 4,
            extent: 1.0,
            connect_radius: 0.45,
            seed,
            ..WorldConfig::default()
        })?;
        let mut r = rng::child_rng(seed, "verify/mc-pick", 0);
        let o = r.random_range(0..g.len());
        let c = *rng::pick(&mut r, g.neighbors(o));
        let mut worst = 0.0f64;
        for mode in [RolloutMode::ShortestCanonical, RolloutMode::ShortestAll] {
            let exact = rollout::node_step_distribution(&g, o, c, mode)?;
            let mut counts = vec![0usize; g.len()];
            for _ in 0..cfg.mc_rollouts {
                for &n in &rollout::simulate_rollout(&g, o, c, mode, &mut r)?[1..] {
                    counts[n] += 1;
                }
            }
            for (n, &k) in counts.iter().enumerate() {
                worst = worst.max((k as f64 / cfg.mc_rollouts as f64 - exact.prob(n)).abs());
            }
        }
        Ok(worst)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Check {
        name: "distribution-matches-monte-carlo",
        passed: worst <= 0.01,
        detail: format!("max |p - p_mc| = {worst:.4} ({} rollouts)", cfg.mc_rollouts),
    })
}

pub fn check_uniqueness(cfg: &VerifyConfig) -> Result<Check> {
    let violations = par::try_map_indexed(cfg.uniqueness_worlds, |i| {
        let g = worldgen::generate(&WorldConfig { seed: derive_seed(cfg.seed, "verify/unique", i as u64), ..Default::default() })?;
        Ok((0..g.len()).map(|o| rollout::verify_uniqueness(&g, o, RolloutMode::ShortestCanonical).len()).sum::<usize>())
    })?
    .into_iter()
    .sum::<usize>();
    let d = fixtures::diamond();
    let all = rollout::verify_uniqueness(&d, 0, RolloutMode::ShortestAll).len();
    let canon = rollout::verify_uniqueness(&d, 0, RolloutMode::ShortestCanonical).len();
    Ok(Check {
        name: "canonical-uniqueness",
        passed: violations == 0 && all == 1 && canon == 0,
        detail: format!(
            "{violations} violations over {} worlds; diamond: {all} (shortest-all), {canon} (canonical)",
            cfg.uniqueness_worlds
        ),
    })
}

pub fn check_gamma_zero() -> Result<Check> {
    let graphs = [fixtures::line3(), fixtures::star(), fixtures::diamond(), fixtures::cycle4()];
    let oc = QOracleConfig::with_gamma(0.0);
    let mut mismatches = 0;
    let mut pairs = 0;
    for g in &graphs {
        for o in 0..g.len() {
            for &c in g.neighbors(o) {
                pairs += 1;
                if qoracle::gt_qfeature(g, o, c, &oc)?.values != g.feature(c) {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(Check {
        name: "gamma-zero-reduction",
        passed: mismatches == 0,
        detail: format!("{mismatches} of {pairs} fixture pairs differ from R(candidate)"),
    })
}

/// Random network shape, activation, init scale and input for config `i`.
pub fn grad_check_case(seed: u64, i: usize) -> (Mlp, Vec<f64>, Vec<f64>) {
    let mut r = rng::child_rng(seed, "verify/grad", i as u64);
    let depth = r.random_range(1..=3);
    let mut dims = vec![r.random_range(1..=8)];
    for _ in 0..depth {
        dims.push(r.random_range(1..=8));
    }
    let act = if r.random_bool(0.5) { Activation::Tanh } else { Activation::Relu };
    let scale = r.random_range(0.5..2.0);
    let mut net = Mlp::init(&dims, act, scale, &mut r);
    // Zero biases behind a dead unit put the next layer exactly on the relu kink.
    for p in net.params_mut() {
        *p += 0.1 * rng::normal(&mut r);
    }
    let x = (0..dims[0]).map(|_| rng::normal(&mut r)).collect();
    let y = (0..*dims.last().expect("dims")).map(|_| rng::normal(&mut r)).collect();
    (net, x, y)
}

pub fn check_gradients(cfg: &VerifyConfig) -> Result<Check> {
    let worst = par::try_map_indexed(cfg.grad_configs, |i| {
        let (net, x, y) = grad_check_case(cfg.seed, i);
        qmodel::grad_check(&net, &x, &y)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Check {
        name: "gradient-check",
        passed: worst <= 1e-4,
        detail: format!("max relative error {worst:.3e} over {} networks", cfg.grad_configs),
    })
}

/// Every check, in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    Ok(vec![
        check_oracle_equivalence(cfg)?,
        check_distribution_mc(cfg)?,
        check_uniqueness(cfg)?,
        check_gamma_zero()?,
        check_gradients(cfg)?,
    ])
}
