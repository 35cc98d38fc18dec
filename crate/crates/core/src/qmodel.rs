//! Feed-forward regressor that predicts Q-features from a fixed-length summary
//! of (trajectory, candidate), trained by minibatch gradient descent.
//!
//! Hidden layers apply the activation; the output layer is linear. All
//! arithmetic is `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{NavGraph, NodeId, PartialTrajectory};
use crate::qoracle::TrainingSample;
use crate::rng::{self, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `w[o][i]`: weight from input `i` to output `o`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Layer { w: vec![vec![0.0; n_in]; n_out], b: vec![0.0; n_out] }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi))
            .collect()
    }
}

/// Network parameters. Serialized as
/// `{"dims":[...], "act":"tanh", "layers":[{"w":[[..]],"b":[..]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dims: Vec<usize>,
    pub act: Activation,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    /// Mean over output components of the squared error.
    #[default]
    Mse,
    /// Softmax cross-entropy against a one-hot (or probability) target.
    CrossEntropy,
}

impl Mlp {
    pub fn zeros(dims: &[usize], act: Activation) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers = dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Mlp { dims: dims.to_vec(), act, layers }
    }

    /// Weights uniform in `±scale/√fan_in`, biases zero.
    pub fn init(dims: &[usize], act: Activation, scale: f64, rng: &mut SplitMix64) -> Self {
        let mut net = Self::zeros(dims, act);
        for layer in &mut net.layers {
            let fan_in = layer.w.first().map_or(1, Vec::len).max(1);
            let bound = scale / (fan_in as f64).sqrt();
            for row in &mut layer.w {
                for w in row.iter_mut() {
                    *w = if bound > 0.0 { rng.random_range(-bound..bound) } else { 0.0 };
                }
            }
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("dims nonempty")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dims.len() < 2 || self.layers.len() != self.dims.len() - 1 {
            return bad(format!("{} dims for {} layers", self.dims.len(), self.layers.len()));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            let (n_in, n_out) = (self.dims[k], self.dims[k + 1]);
            if layer.w.len() != n_out || layer.b.len() != n_out || layer.w.iter().any(|r| r.len() != n_in) {
                return bad(format!("layer {k} does not match dims {n_in}->{n_out}"));
            }
            if layer.w.iter().flatten().chain(&layer.b).any(|v| !v.is_finite()) {
                return bad(format!("layer {k} has non-finite parameters"));
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch { expected: self.input_dim(), got: x.len() });
        }
        Ok(self.trace(x).pop().expect("output layer"))
    }

    /// Activations of every layer, input first.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(acts.last().expect("nonempty"));
            if k < last {
                for v in &mut z {
                    *v = self.act.apply(*v);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.b.len() * (1 + l.w.first().map_or(0, Vec::len))).sum()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().flatten().chain(l.b.iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().flatten().chain(l.b.iter()))
    }

    /// Single-example loss and its gradient, accumulated into `grad` with weight `scale`.
    fn backprop(&self, x: &[f64], y: &[f64], loss: Loss, grad: &mut Mlp, scale: f64) -> f64 {
        let acts = self.trace(x);
        let out = acts.last().expect("output");
        let (value, mut delta) = loss_and_output_grad(loss, out, y);
        for k in (0..self.layers.len()).rev() {
            let input = &acts[k];
            let g = &mut grad.layers[k];
            for (o, d) in delta.iter().enumerate() {
                let sd = scale * d;
                g.b[o] += sd;
                for (gw, xi) in g.w[o].iter_mut().zip(input) {
                    *gw += sd * xi;
                }
            }
            if k == 0 {
                break;
            }
            let layer = &self.layers[k];
            let mut prev = vec![0.0; input.len()];
            for (row, d) in layer.w.iter().zip(&delta) {
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * d;
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                *p *= self.act.grad_from_output(*a);
            }
            delta = prev;
        }
        value
    }

    /// Loss on one example and the gradient of that loss with respect to every parameter.
    pub fn loss_and_grad(&self, x: &[f64], y: &[f64], loss: Loss) -> Result<(f64, Mlp)> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch { expected: self.input_dim(), got: x.len() });
        }
        if y.len() != self.output_dim() {
            return Err(Error::ShapeMismatch { expected: self.output_dim(), got: y.len() });
        }
        let mut grad = Mlp::zeros(&self.dims, self.act);
        let value = self.backprop(x, y, loss, &mut grad, 1.0);
        Ok((value, grad))
    }

    pub fn loss(&self, x: &[f64], y: &[f64], loss: Loss) -> Result<f64> {
        if y.len() != self.output_dim() {
            return Err(Error::ShapeMismatch { expected: self.output_dim(), got: y.len() });
        }
        let out = self.forward(x)?;
        Ok(loss_and_output_grad(loss, &out, y).0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("params serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let net: Mlp = serde_json::from_str(text).map_err(|e| Error::schema(path, e))?;
        net.validate().map_err(|e| Error::schema(path, e))?;
        Ok(net)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn loss_and_output_grad(loss: Loss, out: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    match loss {
        Loss::Mse => {
            let d = out.len() as f64;
            let value = out.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / d;
            (value, out.iter().zip(y).map(|(o, t)| 2.0 * (o - t) / d).collect())
        }
        Loss::CrossEntropy => {
            let p = softmax(out);
            let value = -p.iter().zip(y).filter(|(_, t)| **t > 0.0).map(|(pi, t)| t * pi.max(1e-300).ln()).sum::<f64>();
            (value, p.iter().zip(y).map(|(pi, t)| pi - t).collect())
        }
    }
}

/// Largest relative error between the analytic MSE gradient and central
/// differences (step 1e-5), `|g_a − g_n| / max(|g_a|, |g_n|, 1e-8)`.
pub fn grad_check(params: &Mlp, x: &[f64], y: &[f64]) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let (_, analytic) = params.loss_and_grad(x, y, Loss::Mse)?;
    let analytic: Vec<f64> = analytic.params().copied().collect();
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for (i, ga) in analytic.iter().enumerate() {
        let orig = *probe.params_mut().nth(i).expect("param index");
        *probe.params_mut().nth(i).expect("param index") = orig + STEP;
        let up = probe.loss(x, y, Loss::Mse)?;
        *probe.params_mut().nth(i).expect("param index") = orig - STEP;
        let down = probe.loss(x, y, Loss::Mse)?;
        *probe.params_mut().nth(i).expect("param index") = orig;
        let gn = (up - down) / (2.0 * STEP);
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: Optimizer::Adam,
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 30,
            seed: 0,
            init_scale: 1.0,
            hidden: vec![128],
            activation: Activation::Tanh,
            loss: Loss::Mse,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || self.batch_size == 0 || !(self.init_scale >= 0.0) {
            return Err(Error::InvalidConfig("learning rate, batch size and init scale must be positive".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn dims(&self, input: usize, output: usize) -> Vec<usize> {
        std::iter::once(input).chain(self.hidden.iter().copied()).chain(std::iter::once(output)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub val: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: Mlp,
    pub curve: Vec<EpochLoss>,
}

pub fn mean_loss(params: &Mlp, data: &[Example], loss: Loss) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for e in data {
        total += params.loss(&e.x, &e.y, loss)?;
    }
    Ok(total / data.len() as f64)
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Minibatch training from a fresh initialization drawn from `cfg.seed`.
pub fn train(data: &[Example], val: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let first = data.first().ok_or(Error::EmptyDataset)?;
    let dims = cfg.dims(first.x.len(), first.y.len());
    let mut init_rng = rng::child_rng(cfg.seed, "train/init", 0);
    let params = Mlp::init(&dims, cfg.activation, cfg.init_scale, &mut init_rng);
    train_from(params, data, val, cfg)
}

/// Continues training `params`. Deterministic given `cfg.seed`.
pub fn train_from(mut params: Mlp, data: &[Example], val: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for e in data.iter().chain(val) {
        if e.x.len() != params.input_dim() {
            return Err(Error::ShapeMismatch { expected: params.input_dim(), got: e.x.len() });
        }
        if e.y.len() != params.output_dim() {
            return Err(Error::ShapeMismatch { expected: params.output_dim(), got: e.y.len() });
        }
    }
    let n_params = params.n_params();
    let mut adam = AdamState { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 };
    let mut shuffle_rng = rng::child_rng(cfg.seed, "train/shuffle", 0);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut grad = Mlp::zeros(&params.dims, params.act);

    for epoch in 1..=cfg.epochs {
        for i in (1..order.len()).rev() {
            order.swap(i, shuffle_rng.random_range(0..=i));
        }
        for batch in order.chunks(cfg.batch_size) {
            grad.params_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                params.backprop(&data[i].x, &data[i].y, cfg.loss, &mut grad, scale);
            }
            apply_update(&mut params, &grad, cfg, &mut adam);
        }
        let train_loss = mean_loss(&params, data, cfg.loss)?;
        let val_loss = if val.is_empty() { None } else { Some(mean_loss(&params, val, cfg.loss)?) };
        if !train_loss.is_finite() || val_loss.is_some_and(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss(epoch));
        }
        curve.push(EpochLoss { epoch, train: train_loss, val: val_loss });
    }
    Ok(TrainOutcome { params, curve })
}

fn apply_update(params: &mut Mlp, grad: &Mlp, cfg: &TrainConfig, adam: &mut AdamState) {
    let lr = cfg.learning_rate;
    match cfg.optimizer {
        Optimizer::Sgd => {
            for (p, g) in params.params_mut().zip(grad.params()) {
                *p -= lr * g;
            }
        }
        Optimizer::Adam => {
            adam.t += 1;
            let c1 = 1.0 - ADAM_BETA1.powi(adam.t);
            let c2 = 1.0 - ADAM_BETA2.powi(adam.t);
            for (((p, g), m), v) in params.params_mut().zip(grad.params()).zip(adam.m.iter_mut()).zip(adam.v.iter_mut()) {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// `epoch,train_mse,val_mse` CSV; the validation column is empty without a split.
pub fn curve_csv(curve: &[EpochLoss]) -> String {
    let mut s = String::from("epoch,train_mse,val_mse\n");
    for e in curve {
        match e.val {
            Some(v) => s.push_str(&format!("{},{},{}\n", e.epoch, e.train, v)),
            None => s.push_str(&format!("{},{},\n", e.epoch, e.train)),
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Input encoding
// ---------------------------------------------------------------------------

/// Input width for feature dimension `d`.
pub const fn input_dim(d: usize) -> usize {
    3 * d + 2
}

/// `[R(tail) ‖ mean R over nodes ‖ (sin θ, cos θ) of tail→candidate ‖ R(candidate)]`.
///
/// `nodes` need not form a walk; the agent passes its visit history here.
pub fn encode_parts(g: &NavGraph, nodes: &[NodeId], tail: NodeId, candidate: NodeId) -> Result<Vec<f64>> {
    let d = g.feature_dim();
    let mut x = Vec::with_capacity(input_dim(d));
    x.extend_from_slice(g.feature(tail));
    let mut mean = vec![0.0; d];
    for &n in nodes {
        for (m, f) in mean.iter_mut().zip(g.feature(n)) {
            *m += f;
        }
    }
    let k = nodes.len().max(1) as f64;
    x.extend(mean.iter().map(|m| m / k));
    let (s, c) = g.heading_encoding(tail, candidate)?;
    x.push(s);
    x.push(c);
    x.extend_from_slice(g.feature(candidate));
    Ok(x)
}

pub fn encode_input(g: &NavGraph, trajectory: &PartialTrajectory, candidate: NodeId) -> Result<Vec<f64>> {
    crate::navgraph::CandidateAction::new(g, trajectory, candidate)?;
    encode_parts(g, trajectory.nodes(), trajectory.tail(), candidate)
}

/// One prediction per unvisited neighbor of the trajectory tail.
pub fn predict_qfeatures(params: &Mlp, g: &NavGraph, trajectory: &PartialTrajectory) -> Result<BTreeMap<NodeId, Vec<f64>>> {
    trajectory
        .candidates(g)
        .into_iter()
        .map(|c| Ok((c, params.forward(&encode_parts(g, trajectory.nodes(), trajectory.tail(), c)?)?)))
        .collect()
}

pub fn samples_to_examples(worlds: &[NavGraph], samples: &[TrainingSample]) -> Result<Vec<Example>> {
    samples
        .iter()
        .map(|s| {
            let g = &worlds[s.world];
            Ok(Example { x: encode_input(g, &s.trajectory, s.candidate)?, y: s.target.clone() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navgraph::fixtures::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn zero_weights_output_bias() {
        let mut net = Mlp::zeros(&[3, 4, 2], Activation::Tanh);
        net.layers[1].b = vec![0.25, -1.5];
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.25, -1.5]);
    }

    #[test]
    fn zero_input_zero_bias_tanh_is_zero() {
        let net = Mlp::init(&[3, 5, 2], Activation::Tanh, 1.0, &mut rng_from_seed(1));
        assert_eq!(net.forward(&[0.0; 3]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn shape_mismatch() {
        let net = Mlp::zeros(&[3, 2], Activation::Tanh);
        assert!(matches!(net.forward(&[1.0]), Err(Error::ShapeMismatch { expected: 3, got: 1 })));
    }

    #[test]
    fn grad_check_relu_and_linear() {
        let mut r = rng_from_seed(9);
        let net = Mlp::init(&[4, 6, 3], Activation::Relu, 1.0, &mut r);
        let x = [0.3, -0.7, 1.1, 0.2];
        let y = [0.1, 0.2, -0.3];
        assert!(grad_check(&net, &x, &y).unwrap() <= 1e-4);
        let lin = Mlp::init(&[4, 3], Activation::Tanh, 1.0, &mut r);
        assert!(grad_check(&lin, &x, &y).unwrap() <= 1e-7);
    }

    #[test]
    fn gradient_vanishes_at_zero_loss() {
        let net = Mlp::init(&[3, 5, 2], Activation::Tanh, 1.0, &mut rng_from_seed(4));
        let x = [0.5, -0.2, 0.9];
        let y = net.forward(&x).unwrap();
        let (loss, g) = net.loss_and_grad(&x, &y, Loss::Mse).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.params().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let data = vec![Example { x: vec![1.0, 2.0], y: vec![3.0] }, Example { x: vec![0.0, -1.0], y: vec![1.0] }];
        let cfg = TrainConfig { learning_rate: 0.0, epochs: 5, hidden: vec![4], ..Default::default() };
        let init = Mlp::init(&cfg.dims(2, 1), cfg.activation, cfg.init_scale, &mut rng::child_rng(cfg.seed, "train/init", 0));
        let out = train(&data, &[], &cfg).unwrap();
        assert_eq!(out.params, init);
        assert!(out.curve.windows(2).all(|w| w[0].train == w[1].train));
    }

    #[test]
    fn memorizes_single_sample() {
        let data = vec![Example { x: vec![0.2, -0.4, 0.9], y: vec![0.7, -0.3] }];
        let cfg = TrainConfig { epochs: 2000, batch_size: 1, hidden: vec![16], ..Default::default() };
        let out = train(&data, &[], &cfg).unwrap();
        assert!(out.curve.last().unwrap().train < 1e-6);
    }

    #[test]
    fn cross_entropy_overfits_separable_classes() {
        let data: Vec<Example> = (0..5)
            .map(|k| {
                let mut x = vec![0.0; 5];
                x[k] = 1.0;
                let mut y = vec![0.0; 5];
                y[4 - k] = 1.0;
                Example { x, y }
            })
            .collect();
        let cfg = TrainConfig { epochs: 500, batch_size: 5, hidden: vec![8], loss: Loss::CrossEntropy, learning_rate: 1e-2, ..Default::default() };
        let out = train(&data, &[], &cfg).unwrap();
        for e in &data {
            let p = out.params.forward(&e.x).unwrap();
            let arg = (0..5).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
            assert_eq!(e.y[arg], 1.0);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let data = vec![Example { x: vec![1e3, 1e3], y: vec![1e3] }];
        let cfg = TrainConfig { optimizer: Optimizer::Sgd, learning_rate: 1e3, epochs: 50, hidden: vec![], ..Default::default() };
        assert!(matches!(train(&data, &[], &cfg), Err(Error::NonFiniteLoss(_))));
    }

    #[test]
    fn encoding_layout() {
        let g = line3();
        let t = PartialTrajectory::new(&g, vec![0]).unwrap();
        let x = encode_input(&g, &t, 1).unwrap();
        assert_eq!(x.len(), input_dim(1));
        assert_eq!(x[0], x[1]);
        assert_eq!((x[2], x[3]), (0.0, 1.0));
        assert_eq!(x[4], 1.0);
        assert!(encode_input(&g, &t, 2).is_err());
    }

    #[test]
    fn predictions_per_unvisited_neighbor() {
        let g = line3();
        let net = Mlp::zeros(&[input_dim(1), 1], Activation::Tanh);
        let t = PartialTrajectory::new(&g, vec![0, 1]).unwrap();
        let p = predict_qfeatures(&net, &g, &t).unwrap();
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![2]);
        let end = PartialTrajectory::new(&g, vec![0, 1, 2]).unwrap();
        assert!(predict_qfeatures(&net, &g, &end).unwrap().is_empty());
    }

    #[test]
    fn params_json_round_trip() {
        let net = Mlp::init(&[3, 4, 2], Activation::Relu, 1.0, &mut rng_from_seed(2));
        let back = Mlp::from_json(&net.to_json(), Path::new("p.json")).unwrap();
        assert_eq!(back, net);
        assert!(Mlp::from_json(r#"{"dims":[3,2],"act":"tanh","layers":[]}"#, Path::new("p.json")).is_err());
    }
}
