//! Multi-layer perceptrons mapped into the shape domain.
//!
//! A neuron is a sum of calibrated S-AC multipliers plus a bias current,
//! followed by one of the activation blocks. Classification reads the output
//! layer through a winner-take-all with budget `C`, whose normalized outputs
//! are the sparsemax of the scores; training minimises the matching
//! Fenchel-Young (sparsemax) loss by mini-batch subgradient descent.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blocks::{self, BlockParams};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::family::ShapeKind;
use crate::math;
use crate::mismatch::{self, MismatchSpec};
use crate::solver;
use crate::unit::SacUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Phi1,
    Phi2,
    Relu,
    Softplus,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Phi1,
        Activation::Phi2,
        Activation::Relu,
        Activation::Softplus,
        Activation::Identity,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Activation::Phi1 => "phi1",
            Activation::Phi2 => "phi2",
            Activation::Relu => "relu",
            Activation::Softplus => "softplus",
            Activation::Identity => "identity",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.id() == s)
    }
}

/// How a network is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// S-AC multipliers and activation blocks.
    Shape,
    /// Exact products and the ideal activation counterparts.
    Oracle,
}

/// Ideal counterpart of each activation, used in oracle mode.
pub fn ideal_activation(a: Activation, x: f64, k: f64, c: f64) -> (f64, f64) {
    match a {
        Activation::Phi1 | Activation::Phi2 => {
            let t = libm::tanh(x / k);
            let shift = if a == Activation::Phi2 { k } else { 0.0 };
            (k * t + shift, 1.0 - t * t)
        }
        Activation::Relu => {
            if x > 0.0 {
                (x, 1.0)
            } else {
                (0.0, 0.0)
            }
        }
        Activation::Softplus => (c * math::softplus(x / c), math::logistic(x / c)),
        Activation::Identity => (x, 1.0),
    }
}

/// Ratio `K / C` of the units inside a layer's activation block.
pub const ACTIVATION_SPAN: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
    /// Multiplier unit and the constant `K`.
    params: BlockParams,
    /// Activation-block unit: the multiplier unit rescaled to `K / ACTIVATION_SPAN`.
    act: BlockParams,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Activation, params: BlockParams) -> Result<Self> {
        if weights.is_empty() || weights[0].is_empty() {
            return Err(invalid("layer needs at least one input and one output"));
        }
        let width = weights[0].len();
        if weights.iter().any(|r| r.len() != width) {
            return Err(invalid("ragged weight matrix"));
        }
        if bias.len() != weights.len() {
            return Err(invalid("bias length differs from output count"));
        }
        if weights.iter().flatten().chain(&bias).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite weight or bias"));
        }
        let act = activation_params(activation, &params)?;
        Ok(Self { weights, bias, activation, params, act })
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    /// Parameters of the activation block.
    pub fn activation_params(&self) -> &BlockParams {
        &self.act
    }

    /// Same weights on a new multiplier unit; the activation unit follows.
    pub fn with_params(&self, params: BlockParams) -> Result<Self> {
        Self::new(self.weights.clone(), self.bias.clone(), self.activation, params)
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.len()
    }

    fn activate(&self, x: f64, mode: Mode) -> Result<(f64, f64)> {
        let p = &self.act;
        let k = self.params.constant_k;
        if mode == Mode::Oracle {
            return Ok(ideal_activation(self.activation, x, k, p.c()));
        }
        match self.activation {
            Activation::Phi1 => blocks::compressive_with_slope(x, k, p),
            Activation::Phi2 => {
                let (v, d) = blocks::compressive_with_slope(x, k, p)?;
                Ok((v + k, d))
            }
            Activation::Relu => blocks::relu_with_slope(x, 0.0, p),
            Activation::Softplus => blocks::softplus_with_slope(x, p),
            Activation::Identity => Ok((x, 1.0)),
        }
    }
}

fn activation_params(activation: Activation, params: &BlockParams) -> Result<BlockParams> {
    if activation == Activation::Identity {
        return Ok(params.clone());
    }
    let k = params.constant_k;
    if !(k > 0.0) {
        return Err(invalid(format!("{} layers need K > 0", activation.id())));
    }
    let unit = params.unit().rescaled(k / ACTIVATION_SPAN)?;
    BlockParams::with_k(unit, k)
}

/// Per-layer intermediate values kept for backpropagation.
struct LayerTrace {
    slope: Vec<f64>,
    /// `d product / d x` and `d product / d w`, row-major `out x in`.
    dx: Vec<f64>,
    dw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SacNetwork {
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Bound on `|w|` as a fraction of each layer's `C`.
    pub weight_clip: Option<f64>,
    /// Resamples branch mismatch for every mini-batch when set.
    pub mismatch_during_training: Option<MismatchSpec>,
    pub momentum: f64,
    /// Forward model used while training.
    pub mode: Mode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 16,
            seed: 0,
            weight_clip: None,
            mismatch_during_training: None,
            momentum: 0.9,
            mode: Mode::Shape,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid("learning rate must be finite and >= 0"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid("epochs and batch size must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid("momentum must lie in [0, 1)"));
        }
        if let Some(c) = self.weight_clip {
            if !(c > 0.0) {
                return Err(invalid("weight clip must be positive"));
            }
        }
        if let Some(m) = &self.mismatch_during_training {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training loss over the epoch.
    pub loss: f64,
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(net: &SacNetwork) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| vec![vec![0.0; l.input_dim()]; l.output_dim()])
                .collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.output_dim()]).collect(),
        }
    }

    fn add(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().flatten().zip(other.weights.iter().flatten()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Sparsemax loss of `scores` against `label` with readout budget `c`, and
/// its gradient with respect to the scores.
pub fn readout_loss(scores: &[f64], label: usize, c: f64) -> Result<(f64, Vec<f64>)> {
    if label >= scores.len() {
        return Err(Error::Data(format!("label {label} out of range for {} scores", scores.len())));
    }
    let sol = solver::solve_rectifier(scores, c)?;
    let tau = sol.h / c;
    let p: Vec<f64> = scores.iter().map(|s| math::pos(s - sol.h) / c).collect();
    let mut loss = 0.5 - scores[label] / c;
    for (s, pi) in scores.iter().zip(&p) {
        if *pi > 0.0 {
            let z = s / c;
            loss += 0.5 * (z * z - tau * tau);
        }
    }
    let mut grad: Vec<f64> = p.iter().map(|pi| pi / c).collect();
    grad[label] -= 1.0 / c;
    Ok((loss, grad))
}

/// Class scores: the outputs themselves, or `{0, o}` for a single output.
fn scores_of(out: &[f64]) -> Vec<f64> {
    if out.len() == 1 {
        vec![0.0, out[0]]
    } else {
        out.to_vec()
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
}

impl SacNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(invalid(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    w[0].output_dim(),
                    i + 1,
                    w[1].input_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Randomly initialised network with layer sizes `sizes`, hidden
    /// activation `hidden`, an identity output layer and `params[i]` for
    /// layer `i`. Weights are drawn uniformly from
    /// `+-C * sqrt(6 / (fan_in + fan_out))`, capped at `0.9C` of their layer.
    pub fn random(sizes: &[usize], hidden: Activation, params: &[BlockParams], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(invalid("need at least two non-zero layer sizes"));
        }
        if params.len() != sizes.len() - 1 {
            return Err(invalid(format!("{} layers but {} parameter sets", sizes.len() - 1, params.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (li, (w, p)) in sizes.windows(2).zip(params).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let c = p.c();
            let r = (c * libm::sqrt(6.0 / (fan_in + fan_out) as f64)).min(0.9 * c);
            let dist = Uniform::new_inclusive(-r, r).map_err(|_| invalid("bad init range"))?;
            let weights = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| dist.sample(&mut rng)).collect())
                .collect();
            let activation = if li + 2 == sizes.len() { Activation::Identity } else { hidden };
            layers.push(Layer::new(weights, vec![0.0; fan_out], activation, p.clone())?);
        }
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Number of classes the readout distinguishes.
    pub fn class_count(&self) -> usize {
        self.output_dim().max(2)
    }

    /// Readout budget of the output layer.
    pub fn readout_c(&self) -> f64 {
        self.layers[self.layers.len() - 1].params.c()
    }

    /// Same weights with every layer re-targeted to `kind` at `celsius`;
    /// multiplier scales are recalibrated.
    pub fn with_family(&self, kind: ShapeKind, celsius: f64) -> Result<Self> {
        let mut net = self.clone();
        for layer in &mut net.layers {
            let u = layer.params.unit();
            let unit = SacUnit::for_regime(u.spline_count(), u.c(), kind, celsius)?
                .with_reference(u.include_zero_reference);
            *layer = layer.with_params(layer.params.with_unit(unit)?)?;
        }
        Ok(net)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_mode(x, Mode::Shape)
    }

    pub fn forward_mode(&self, x: &[f64], mode: Mode) -> Result<Vec<f64>> {
        Ok(self.run(x, mode, false)?.0)
    }

    fn run(&self, x: &[f64], mode: Mode, keep: bool) -> Result<(Vec<f64>, Vec<LayerTrace>)> {
        if x.len() != self.input_dim() {
            return Err(invalid(format!("input has {} values, network expects {}", x.len(), self.input_dim())));
        }
        let mut traces = Vec::new();
        let mut a = x.to_vec();
        for layer in &self.layers {
            let n_in = layer.input_dim();
            let mut out = Vec::with_capacity(layer.output_dim());
            let mut slope = Vec::new();
            let (mut dx, mut dw) = (Vec::new(), Vec::new());
            if keep {
                dx.reserve(n_in * layer.output_dim());
                dw.reserve(n_in * layer.output_dim());
            }
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                let mut pre = *b;
                for (&xi, &wi) in a.iter().zip(row) {
                    let (y, gx, gw) = match mode {
                        Mode::Oracle => (xi * wi, wi, xi),
                        Mode::Shape if keep => blocks::multiplier_with_gradient(xi, wi, &layer.params)?,
                        Mode::Shape => (blocks::multiplier(xi, wi, &layer.params)?, 0.0, 0.0),
                    };
                    pre += y;
                    if keep {
                        dx.push(gx);
                        dw.push(gw);
                    }
                }
                let (v, d) = layer.activate(pre, mode)?;
                out.push(v);
                if keep {
                    slope.push(d);
                }
            }
            if keep {
                traces.push(LayerTrace { slope, dx, dw });
            }
            a = out;
        }
        Ok((a, traces))
    }

    /// Predicted class: argmax of the scores, ties to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.predict_mode(x, Mode::Shape)
    }

    pub fn predict_mode(&self, x: &[f64], mode: Mode) -> Result<usize> {
        Ok(argmax(&scores_of(&self.forward_mode(x, mode)?)))
    }

    /// Loss and parameter gradients for one labeled sample.
    pub fn loss_and_gradients(&self, x: &[f64], label: usize, mode: Mode) -> Result<(f64, Gradients)> {
        let (out, traces) = self.run(x, mode, true)?;
        let scores = scores_of(&out);
        let (loss, gs) = readout_loss(&scores, label, self.readout_c())?;
        let mut delta = if out.len() == 1 { vec![gs[1]] } else { gs };
        let mut grads = Gradients::zeros(self);
        for (li, (layer, t)) in self.layers.iter().zip(&traces).enumerate().rev() {
            let n_in = layer.input_dim();
            let mut back = vec![0.0; n_in];
            for (j, (&dj, &sj)) in delta.iter().zip(&t.slope).enumerate() {
                let d = dj * sj;
                grads.bias[li][j] = d;
                let row = &mut grads.weights[li][j];
                for i in 0..n_in {
                    row[i] = d * t.dw[j * n_in + i];
                    back[i] += d * t.dx[j * n_in + i];
                }
            }
            delta = back;
        }
        Ok((loss, grads))
    }

    /// Sample loss only.
    pub fn loss(&self, x: &[f64], label: usize, mode: Mode) -> Result<f64> {
        let scores = scores_of(&self.forward_mode(x, mode)?);
        Ok(readout_loss(&scores, label, self.readout_c())?.0)
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        accuracy_mode(self, data, Mode::Shape)
    }

    fn apply(&mut self, step: &Gradients, clip: Option<f64>) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(step.weights.iter().zip(&step.bias)) {
            let bound = clip.map(|f| f * layer.params.c());
            for (row, grow) in layer.weights.iter_mut().zip(gw) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= g;
                    if let Some(c) = bound {
                        *w = w.clamp(-c, c);
                    }
                }
            }
            for (b, g) in layer.bias.iter_mut().zip(gb) {
                *b -= g;
            }
        }
    }
}

pub(crate) fn accuracy_mode(net: &SacNetwork, data: &Dataset, mode: Mode) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data(String::from("empty dataset")));
    }
    let preds = predictions(net, data, mode)?;
    let hits = preds.iter().zip(&data.labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / data.len() as f64)
}

#[cfg(feature = "parallel")]
pub(crate) fn predictions(net: &SacNetwork, data: &Dataset, mode: Mode) -> Result<Vec<usize>> {
    use rayon::prelude::*;
    data.features.par_iter().map(|x| net.predict_mode(x, mode)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn predictions(net: &SacNetwork, data: &Dataset, mode: Mode) -> Result<Vec<usize>> {
    data.features.iter().map(|x| net.predict_mode(x, mode)).collect()
}

#[cfg(feature = "parallel")]
fn sample_gradients(net: &SacNetwork, data: &Dataset, idx: &[usize], mode: Mode) -> Result<Vec<(f64, Gradients)>> {
    use rayon::prelude::*;
    idx.par_iter()
        .map(|&i| net.loss_and_gradients(&data.features[i], data.labels[i], mode))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn sample_gradients(net: &SacNetwork, data: &Dataset, idx: &[usize], mode: Mode) -> Result<Vec<(f64, Gradients)>> {
    idx.iter()
        .map(|&i| net.loss_and_gradients(&data.features[i], data.labels[i], mode))
        .collect()
}

fn perturbed(p: &BlockParams, spec: MismatchSpec, rng: &mut ChaCha8Rng) -> Result<BlockParams> {
    let branches = mismatch::sample_with(p.unit().shape, spec, p.unit().term_count(1), rng)?;
    p.with_branches(branches)
}

pub fn train(net: &SacNetwork, data: &Dataset, cfg: &TrainConfig) -> Result<SacNetwork> {
    Ok(train_with_history(net, data, cfg)?.0)
}

/// Mini-batch subgradient descent with momentum. Per-sample gradients are
/// reduced in sample order, so results do not depend on thread count.
pub fn train_with_history(net: &SacNetwork, data: &Dataset, cfg: &TrainConfig) -> Result<(SacNetwork, Vec<EpochStats>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Data(String::from("training set is empty")));
    }
    if data.dim() != net.input_dim() {
        return Err(invalid(format!("dataset width {} but network input {}", data.dim(), net.input_dim())));
    }
    if data.class_count > net.class_count() {
        return Err(Error::Data(format!(
            "dataset has {} classes but the network reads out {}",
            data.class_count,
            net.class_count()
        )));
    }
    let mut net = net.clone();
    let nominal: Vec<(BlockParams, BlockParams)> =
        net.layers.iter().map(|l| (l.params.clone(), l.act.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut velocity = Gradients::zeros(&net);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch_counter: u64 = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            if let Some(spec) = cfg.mismatch_during_training {
                batch_counter += 1;
                let spec = spec.with_seed(spec.seed.wrapping_add(batch_counter.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
                let mut brng = ChaCha8Rng::seed_from_u64(spec.seed);
                for (layer, (base, act)) in net.layers.iter_mut().zip(&nominal) {
                    layer.params = perturbed(base, spec, &mut brng)?;
                    if layer.activation != Activation::Identity {
                        layer.act = perturbed(act, spec, &mut brng)?;
                    }
                }
            }
            let results = sample_gradients(&net, data, batch, cfg.mode)?;
            let mut sum = Gradients::zeros(&net);
            for (loss, g) in &results {
                total += loss;
                sum.add(g);
            }
            if !total.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            let scale = cfg.learning_rate / batch.len() as f64;
            for (v, g) in velocity
                .weights
                .iter_mut()
                .flatten()
                .flatten()
                .zip(sum.weights.iter().flatten().flatten())
                .chain(velocity.bias.iter_mut().flatten().zip(sum.bias.iter().flatten()))
            {
                *v = cfg.momentum * *v + scale * g;
            }
            if cfg.learning_rate > 0.0 {
                net.apply(&velocity, cfg.weight_clip);
            }
            if net.layers.iter().flat_map(|l| l.weights.iter().flatten().chain(&l.bias)).any(|v| !v.is_finite()) {
                return Err(Error::TrainingDiverged { epoch });
            }
        }
        if cfg.mismatch_during_training.is_some() {
            for (layer, (base, act)) in net.layers.iter_mut().zip(&nominal) {
                layer.params = base.clone();
                layer.act = act.clone();
            }
        }
        history.push(EpochStats { epoch, loss: total / data.len() as f64 });
    }
    Ok((net, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: usize) -> BlockParams {
        BlockParams::new(SacUnit::rectifier(s, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn neuron_zero_cases() {
        let p = params(1);
        let layer = Layer::new(vec![vec![0.0, 0.0, 0.0]], vec![0.25], Activation::Identity, p.clone()).unwrap();
        let net = SacNetwork::new(vec![layer]).unwrap();
        assert_eq!(net.forward(&[0.3, -0.8, 0.5]).unwrap(), vec![0.25]);
        let layer = Layer::new(vec![vec![0.4, -0.6, 0.2]], vec![0.25], Activation::Identity, p.clone()).unwrap();
        let net = SacNetwork::new(vec![layer]).unwrap();
        assert_eq!(net.forward(&[0.0, 0.0, 0.0]).unwrap(), vec![0.25]);
        let mut odd = net.clone();
        odd.layers[0].bias = vec![0.0];
        let a = odd.forward(&[0.3, -0.8, 0.5]).unwrap()[0];
        let b = odd.forward(&[-0.3, 0.8, -0.5]).unwrap()[0];
        assert_eq!(a, -b);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = SacNetwork::random(&[2, 3, 2], Activation::Phi2, &[params(1), params(1)], 1).unwrap();
        assert!(net.forward(&[1.0]).is_err());
        let a = Layer::new(vec![vec![0.1; 2]; 3], vec![0.0; 3], Activation::Phi1, params(1)).unwrap();
        let b = Layer::new(vec![vec![0.1; 2]; 2], vec![0.0; 2], Activation::Identity, params(1)).unwrap();
        assert!(SacNetwork::new(vec![a, b]).is_err());
    }

    #[test]
    fn readout_loss_is_sparsemax_loss() {
        let (l, g) = readout_loss(&[3.0, 0.0], 0, 1.0).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        let (l, g) = readout_loss(&[3.0, 0.0], 1, 1.0).unwrap();
        assert!(l > 0.0);
        assert_eq!(g, vec![1.0, -1.0]);
        let h = 1e-6;
        let s = [0.4, 0.1, -0.2];
        let (_, g) = readout_loss(&s, 2, 1.0).unwrap();
        for k in 0..3 {
            let mut a = s;
            let mut b = s;
            a[k] += h;
            b[k] -= h;
            let fd = (readout_loss(&a, 2, 1.0).unwrap().0 - readout_loss(&b, 2, 1.0).unwrap().0) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let net = SacNetwork::random(&[2, 4, 1], Activation::Phi2, &[params(1), params(1)], 3).unwrap();
        let data = Dataset::xor(1.0);
        let cfg = TrainConfig { learning_rate: 0.0, epochs: 3, ..TrainConfig::default() };
        assert_eq!(train(&net, &data, &cfg).unwrap(), net);
    }

    #[test]
    fn training_is_deterministic() {
        let net = SacNetwork::random(&[2, 4, 1], Activation::Phi2, &[params(1), params(1)], 3).unwrap();
        let data = Dataset::xor(1.0).jittered(0.1, 10, 1).unwrap();
        let cfg = TrainConfig { epochs: 5, seed: 4, ..TrainConfig::default() };
        assert_eq!(train(&net, &data, &cfg).unwrap(), train(&net, &data, &cfg).unwrap());
    }

    #[test]
    fn activation_ids_round_trip() {
        for a in Activation::ALL {
            assert_eq!(Activation::from_id(a.id()), Some(a));
        }
        assert_eq!(Activation::from_id("tanh"), None);
    }
}
