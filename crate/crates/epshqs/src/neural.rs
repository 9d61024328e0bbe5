//! From-scratch feed-forward networks with backpropagation and Adam.
//!
//! The same [`Mlp`] type serves as the student regressor (linear head,
//! MSE loss) and the teacher failure classifier (sigmoid head, binary
//! cross-entropy). Everything is `f64` so analytic gradients can be
//! checked against central finite differences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputHead {
    /// Unbounded output, paired with MSE loss.
    Linear,
    /// Output in (0,1), paired with binary cross-entropy loss.
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub output: OutputHead,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub minibatch: usize,
    pub epochs_initial: usize,
    pub epochs_warm: usize,
}

impl MlpConfig {
    /// Default student: d -> 128 -> 128 -> 128 -> 1 with a linear head.
    pub fn student_default(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![128, 128, 128],
            activation: Activation::ReLU,
            output: OutputHead::Linear,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            minibatch: 32,
            epochs_initial: 300,
            epochs_warm: 60,
        }
    }

    /// Default teacher: a small d -> 32 -> 32 -> 1 classifier.
    pub fn teacher_default(input_dim: usize) -> Self {
        Self {
            hidden: vec![32, 32],
            output: OutputHead::Sigmoid,
            ..Self::student_default(input_dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be >= 1".into()));
        }
        if self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::Config("all hidden widths must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) && self.learning_rate != 0.0 {
            return Err(Error::Config("learning_rate must be >= 0".into()));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("{name} must be in (0,1), got {b}")));
            }
        }
        if self.minibatch == 0 {
            return Err(Error::Config("minibatch must be >= 1".into()));
        }
        Ok(())
    }
}

/// One dense layer; weights are row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

impl Layer {
    fn new(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        // He-uniform for ReLU nets: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
        let bound = (6.0 / in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            w,
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
            m_w: vec![0.0; in_dim * out_dim],
            v_w: vec![0.0; in_dim * out_dim],
            m_b: vec![0.0; out_dim],
            v_b: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// z = W x + b
    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }
}

/// Per-layer gradients, same shapes as [`Layer::w`] / [`Layer::b`].
#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_loss: f64,
    pub loss_curve: Vec<f64>,
}

/// Feed-forward network with its Adam optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub config: MlpConfig,
    layers: Vec<Layer>,
    step: u64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Mean squared error.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "loss_mse: pred {} vs target {}",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Mean binary cross-entropy; predictions are clamped to
/// `[BCE_CLAMP, 1 - BCE_CLAMP]` before the logs.
pub fn loss_bce(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "loss_bce: pred {} vs target {}",
            pred.len(),
            target.len()
        )));
    }
    if target.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::Domain("loss_bce targets must be 0 or 1".into()));
    }
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / n)
}

impl Mlp {
    /// He-uniform weight init, zero biases, zeroed Adam state.
    pub fn init(config: MlpConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let mut dims = vec![config.input_dim];
        dims.extend_from_slice(&config.hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|d| Layer::new(d[0], d[1], rng))
            .collect();
        Ok(Self {
            config,
            layers,
            step: 0,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn output_head(&self) -> OutputHead {
        self.config.output
    }

    /// Forward pass for a single input row.
    pub fn forward_one(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.config.input_dim {
            return Err(Error::Shape(format!(
                "forward: input has {} columns, network expects {}",
                x.len(),
                self.config.input_dim
            )));
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if i < last {
                for v in next.iter_mut() {
                    *v = relu(*v);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let z = cur[0];
        Ok(match self.config.output {
            OutputHead::Linear => z,
            OutputHead::Sigmoid => sigmoid(z),
        })
    }

    /// Forward pass over a batch; output i corresponds to row i.
    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.forward_one(x)).collect()
    }

    /// Batch loss under the head's natural criterion (MSE for linear,
    /// BCE for sigmoid), with optional per-sample weights. Weights are
    /// normalized so the loss is a weighted mean.
    pub fn batch_loss(&self, xs: &[Vec<f64>], ys: &[f64], weights: Option<&[f64]>) -> Result<f64> {
        let preds = self.forward(xs)?;
        match weights {
            None => match self.config.output {
                OutputHead::Linear => loss_mse(&preds, ys),
                OutputHead::Sigmoid => loss_bce(&preds, ys),
            },
            Some(w) => {
                if w.len() != ys.len() {
                    return Err(Error::Shape("weights length mismatch".into()));
                }
                let total: f64 = w.iter().sum();
                let mut acc = 0.0;
                for i in 0..ys.len() {
                    let li = match self.config.output {
                        OutputHead::Linear => (preds[i] - ys[i]).powi(2),
                        OutputHead::Sigmoid => {
                            let p = preds[i].clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                            -(ys[i] * p.ln() + (1.0 - ys[i]) * (1.0 - p).ln())
                        }
                    };
                    acc += w[i] * li;
                }
                Ok(acc / total)
            }
        }
    }

    /// Analytic gradients of the (weighted) batch loss. Returns the loss
    /// alongside per-layer gradients.
    pub fn gradients(
        &self,
        xs: &[Vec<f64>],
        ys: &[f64],
        weights: Option<&[f64]>,
    ) -> Result<(f64, Vec<LayerGrad>)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Shape(format!(
                "gradients: {} inputs vs {} targets",
                xs.len(),
                ys.len()
            )));
        }
        if self.config.output == OutputHead::Sigmoid
            && ys.iter().any(|&t| t != 0.0 && t != 1.0)
        {
            return Err(Error::Domain("BCE targets must be 0 or 1".into()));
        }
        let weight_total: f64 = match weights {
            Some(w) => {
                if w.len() != ys.len() {
                    return Err(Error::Shape("weights length mismatch".into()));
                }
                w.iter().sum()
            }
            None => xs.len() as f64,
        };

        let mut grads: Vec<LayerGrad> = self
            .layers
            .iter()
            .map(|l| LayerGrad {
                w: vec![0.0; l.w.len()],
                b: vec![0.0; l.b.len()],
            })
            .collect();
        let last = self.layers.len() - 1;
        let mut loss = 0.0;

        for (i, x) in xs.iter().enumerate() {
            if x.len() != self.config.input_dim {
                return Err(Error::Shape(format!(
                    "gradients: row {i} has {} columns, expected {}",
                    x.len(),
                    self.config.input_dim
                )));
            }
            // Forward, caching post-activation values per layer.
            let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
            acts.push(x.clone());
            for (li, layer) in self.layers.iter().enumerate() {
                let mut z = Vec::new();
                layer.affine(acts.last().unwrap(), &mut z);
                if li < last {
                    for v in z.iter_mut() {
                        *v = relu(*v);
                    }
                }
                acts.push(z);
            }
            let z_out = acts.last().unwrap()[0];
            let wgt = weights.map_or(1.0, |w| w[i]) / weight_total;
            // Output delta is dL/dz of the head+loss pair.
            let delta_out = match self.config.output {
                OutputHead::Linear => {
                    loss += wgt * (z_out - ys[i]).powi(2);
                    wgt * 2.0 * (z_out - ys[i])
                }
                OutputHead::Sigmoid => {
                    let p = sigmoid(z_out);
                    let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                    loss += wgt * -(ys[i] * pc.ln() + (1.0 - ys[i]) * (1.0 - pc).ln());
                    wgt * (p - ys[i])
                }
            };

            let mut delta = vec![delta_out];
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &acts[li];
                let g = &mut grads[li];
                for o in 0..layer.out_dim {
                    g.b[o] += delta[o];
                    let row = &mut g.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (gw, xi) in row.iter_mut().zip(input) {
                        *gw += delta[o] * xi;
                    }
                }
                if li > 0 {
                    // delta_prev = (W^T delta) gated by ReLU activity of the
                    // previous layer's output.
                    let mut prev = vec![0.0; layer.in_dim];
                    for o in 0..layer.out_dim {
                        let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (p, wi) in prev.iter_mut().zip(row) {
                            *p += delta[o] * wi;
                        }
                    }
                    for (p, &a) in prev.iter_mut().zip(&acts[li]) {
                        if a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((loss, grads))
    }

    /// One Adam update on the batch; returns the pre-update loss.
    pub fn backward_step(&mut self, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
        self.backward_step_weighted(xs, ys, None)
    }

    pub fn backward_step_weighted(
        &mut self,
        xs: &[Vec<f64>],
        ys: &[f64],
        weights: Option<&[f64]>,
    ) -> Result<f64> {
        let (loss, grads) = self.gradients(xs, ys, weights)?;
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch: 0,
                step: self.step as usize,
            });
        }
        self.step += 1;
        let t = self.step as f64;
        let cfg = &self.config;
        let (b1, b2, eps, lr) = (cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate);
        let bc1 = 1.0 - b1.powf(t);
        let bc2 = 1.0 - b2.powf(t);
        for (layer, grad) in self.layers.iter_mut().zip(&grads) {
            for k in 0..layer.w.len() {
                let g = grad.w[k];
                layer.m_w[k] = b1 * layer.m_w[k] + (1.0 - b1) * g;
                layer.v_w[k] = b2 * layer.v_w[k] + (1.0 - b2) * g * g;
                layer.w[k] -= lr * (layer.m_w[k] / bc1) / ((layer.v_w[k] / bc2).sqrt() + eps);
            }
            for k in 0..layer.b.len() {
                let g = grad.b[k];
                layer.m_b[k] = b1 * layer.m_b[k] + (1.0 - b1) * g;
                layer.v_b[k] = b2 * layer.v_b[k] + (1.0 - b2) * g * g;
                layer.b[k] -= lr * (layer.m_b[k] / bc1) / ((layer.v_b[k] / bc2).sqrt() + eps);
            }
        }
        Ok(loss)
    }

    /// Minibatch training for `epochs` passes over shuffled data.
    /// Warm-starts from the current weights.
    pub fn fit(
        &mut self,
        xs: &[Vec<f64>],
        ys: &[f64],
        epochs: usize,
        rng: &mut impl Rng,
    ) -> Result<TrainReport> {
        self.fit_weighted(xs, ys, None, epochs, rng)
    }

    pub fn fit_weighted(
        &mut self,
        xs: &[Vec<f64>],
        ys: &[f64],
        weights: Option<&[f64]>,
        epochs: usize,
        rng: &mut impl Rng,
    ) -> Result<TrainReport> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Shape(format!(
                "fit: {} inputs vs {} targets",
                xs.len(),
                ys.len()
            )));
        }
        if epochs == 0 {
            return Err(Error::Config("fit requires epochs >= 1".into()));
        }
        let n = xs.len();
        let mut loss_curve = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            // Fresh Fisher-Yates each epoch, so the shuffle depends only on
            // the rng stream and split fits compose with one long fit.
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            let mut epoch_loss = 0.0;
            let mut seen = 0usize;
            for chunk in order.chunks(self.config.minibatch) {
                let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| xs[i].clone()).collect();
                let by: Vec<f64> = chunk.iter().map(|&i| ys[i]).collect();
                let bw: Option<Vec<f64>> =
                    weights.map(|w| chunk.iter().map(|&i| w[i]).collect());
                let loss = self
                    .backward_step_weighted(&bx, &by, bw.as_deref())
                    .map_err(|e| match e {
                        Error::Training { step, .. } => Error::Training { epoch, step },
                        other => other,
                    })?;
                epoch_loss += loss * chunk.len() as f64;
                seen += chunk.len();
            }
            loss_curve.push(epoch_loss / seen as f64);
        }
        Ok(TrainReport {
            epochs_run: epochs,
            final_loss: *loss_curve.last().unwrap(),
            loss_curve,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn small_cfg(input_dim: usize, hidden: Vec<usize>, output: OutputHead) -> MlpConfig {
        MlpConfig {
            input_dim,
            hidden,
            output,
            ..MlpConfig::student_default(input_dim)
        }
    }

    #[test]
    fn zeroed_final_layer_outputs_head_neutral_value() {
        for (head, expect) in [(OutputHead::Linear, 0.0), (OutputHead::Sigmoid, 0.5)] {
            let mut net = Mlp::init(small_cfg(3, vec![8], head), &mut rng(0)).unwrap();
            let last = net.layers.len() - 1;
            net.layers_mut()[last].w.iter_mut().for_each(|w| *w = 0.0);
            net.layers_mut()[last].b.iter_mut().for_each(|b| *b = 0.0);
            let y = net.forward_one(&[0.3, -0.2, 0.9]).unwrap();
            assert_eq!(y, expect);
        }
    }

    #[test]
    fn single_linear_unit_hand_computation() {
        // 1x1 net: y = 2x + 1, x = 3 -> 7
        let mut net = Mlp::init(small_cfg(1, vec![], OutputHead::Linear), &mut rng(0)).unwrap();
        net.layers_mut()[0].w[0] = 2.0;
        net.layers_mut()[0].b[0] = 1.0;
        assert_eq!(net.forward_one(&[3.0]).unwrap(), 7.0);
    }

    #[test]
    fn batch_forward_matches_single_sample_forward() {
        let net = Mlp::init(small_cfg(2, vec![8, 8], OutputHead::Linear), &mut rng(3)).unwrap();
        let xs: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64 * 0.1, 1.0 - i as f64 * 0.07])
            .collect();
        let batch = net.forward(&xs).unwrap();
        for (x, &b) in xs.iter().zip(&batch) {
            assert_eq!(net.forward_one(x).unwrap(), b);
        }
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = Mlp::init(small_cfg(2, vec![4], OutputHead::Linear), &mut rng(0)).unwrap();
        assert!(net.forward_one(&[1.0]).is_err());
    }

    #[test]
    fn mse_hand_values() {
        assert_eq!(loss_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(loss_mse(&[1.0, 3.0], &[2.0, 1.0]).unwrap(), 2.5);
        assert!(loss_mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn bce_hand_values() {
        let half = loss_bce(&[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert!((half - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(loss_bce(&[1.0], &[1.0]).unwrap() <= 1e-6);
        assert!(loss_bce(&[0.0], &[0.0]).unwrap() <= 1e-6);
        let v = loss_bce(&[0.9], &[0.0]).unwrap();
        assert!((v - 2.302585).abs() < 1e-5);
        assert!(loss_bce(&[0.5], &[0.3]).is_err());
    }

    fn finite_diff_check(output: OutputHead, seed: u64) {
        let cfg = small_cfg(2, vec![16], output);
        let mut net = Mlp::init(cfg, &mut rng(seed)).unwrap();
        let xs: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![0.1 * i as f64, 0.9 - 0.13 * i as f64])
            .collect();
        let ys: Vec<f64> = match output {
            OutputHead::Linear => xs.iter().map(|x| x[0] + x[1]).collect(),
            OutputHead::Sigmoid => (0..5).map(|i| (i % 2) as f64).collect(),
        };
        let (_, grads) = net.gradients(&xs, &ys, None).unwrap();
        let h = 1e-5;
        for li in 0..net.layers().len() {
            for k in 0..net.layers()[li].w.len() {
                let orig = net.layers()[li].w[k];
                net.layers_mut()[li].w[k] = orig + h;
                let lp = net.batch_loss(&xs, &ys, None).unwrap();
                net.layers_mut()[li].w[k] = orig - h;
                let lm = net.batch_loss(&xs, &ys, None).unwrap();
                net.layers_mut()[li].w[k] = orig;
                let numeric = (lp - lm) / (2.0 * h);
                let analytic = grads[li].w[k];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom < 1e-4,
                    "layer {li} w[{k}]: analytic {analytic} vs numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_diff_check(OutputHead::Linear, 11);
        finite_diff_check(OutputHead::Sigmoid, 12);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let mut cfg = small_cfg(2, vec![8], OutputHead::Linear);
        cfg.learning_rate = 0.0;
        let mut net = Mlp::init(cfg, &mut rng(5)).unwrap();
        let before = net.clone();
        let loss = net
            .backward_step(&[vec![0.1, 0.2]], &[1.0])
            .unwrap();
        assert!(loss > 0.0);
        assert_eq!(net.layers()[0].w, before.layers()[0].w);
        assert_eq!(net.layers()[1].w, before.layers()[1].w);
    }

    #[test]
    fn memorizes_a_single_point() {
        let mut net = Mlp::init(small_cfg(2, vec![16], OutputHead::Linear), &mut rng(9)).unwrap();
        let xs = vec![vec![0.4, 0.7]];
        let ys = vec![2.5];
        let mut last = f64::INFINITY;
        for _ in 0..2000 {
            last = net.backward_step(&xs, &ys).unwrap();
            if last < 1e-4 {
                break;
            }
        }
        assert!(last < 1e-4, "final loss {last}");
    }

    #[test]
    fn learns_a_linear_function() {
        let mut r = rng(21);
        let xs: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![r.random_range(0.0..1.0), r.random_range(0.0..1.0)])
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] + x[1]).collect();
        let mut net = Mlp::init(small_cfg(2, vec![32], OutputHead::Linear), &mut r).unwrap();
        let report = net.fit(&xs, &ys, 300, &mut r).unwrap();
        assert!(report.final_loss < 1e-2, "final MSE {}", report.final_loss);
        assert_eq!(report.loss_curve.len(), 300);
        assert!(report.loss_curve.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn fit_is_deterministic_given_seed() {
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * 2.0).collect();
        let cfg = small_cfg(1, vec![8], OutputHead::Linear);
        let mut a = Mlp::init(cfg.clone(), &mut rng(3)).unwrap();
        let mut b = Mlp::init(cfg, &mut rng(3)).unwrap();
        let ra = a.fit(&xs, &ys, 5, &mut rng(77)).unwrap();
        let rb = b.fit(&xs, &ys, 5, &mut rng(77)).unwrap();
        assert_eq!(ra.loss_curve, rb.loss_curve);
        assert_eq!(a, b);
    }

    #[test]
    fn warm_start_equals_one_long_fit() {
        let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 30.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0]).collect();
        let cfg = small_cfg(1, vec![8], OutputHead::Linear);
        let mut split = Mlp::init(cfg.clone(), &mut rng(4)).unwrap();
        let mut whole = Mlp::init(cfg, &mut rng(4)).unwrap();
        let mut shuffle = rng(55);
        split.fit(&xs, &ys, 3, &mut shuffle).unwrap();
        split.fit(&xs, &ys, 4, &mut shuffle).unwrap();
        whole.fit(&xs, &ys, 7, &mut rng(55)).unwrap();
        assert_eq!(split, whole);
    }

    #[test]
    fn init_respects_he_uniform_bound_and_seeding() {
        let cfg = small_cfg(4, vec![16, 8], OutputHead::Linear);
        let net = Mlp::init(cfg.clone(), &mut rng(1)).unwrap();
        for layer in net.layers() {
            let bound = (6.0 / layer.in_dim() as f64).sqrt();
            assert!(layer.w.iter().all(|w| w.abs() <= bound));
            assert!(layer.b.iter().all(|&b| b == 0.0));
        }
        let again = Mlp::init(cfg.clone(), &mut rng(1)).unwrap();
        assert_eq!(net, again);
        let other = Mlp::init(cfg, &mut rng(2)).unwrap();
        assert_ne!(net, other);
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let mut net =
            Mlp::init(small_cfg(2, vec![8], OutputHead::Sigmoid), &mut rng(8)).unwrap();
        net.backward_step(&[vec![0.1, 0.9]], &[1.0]).unwrap();
        net.save(&path).unwrap();
        let loaded = Mlp::load(&path).unwrap();
        assert_eq!(net, loaded);
    }

    #[test]
    fn single_epoch_large_minibatch_is_one_step() {
        let mut cfg = small_cfg(1, vec![4], OutputHead::Linear);
        cfg.minibatch = 100;
        let mut net = Mlp::init(cfg, &mut rng(2)).unwrap();
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ys = vec![0.0; 10];
        net.fit(&xs, &ys, 1, &mut rng(0)).unwrap();
        assert_eq!(net.step, 1);
    }
}
