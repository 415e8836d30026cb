//! Fully connected ReLU network mapping a predictor input to curve
//! parameters, with gradients of the curve-space absolute error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{basis, CurveParams};
use crate::metafeatures::{INPUT_DIM, LAYOUT_VERSION};
use crate::{Error, Result};

/// Layer widths: input, three hidden layers, the four curve parameters.
pub const LAYER_SIZES: [usize; 5] = [INPUT_DIM, 64, 64, 64, 4];

/// A dense layer; `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Per-dimension input standardization frozen from the training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Normalization {
    pub fn identity(dim: usize) -> Self {
        Normalization {
            mean: vec![0.0; dim],
            sd: vec![1.0; dim],
        }
    }

    /// Population mean and sd of `rows`; zero-variance dimensions get sd 1.
    pub fn fit(rows: &[[f64; INPUT_DIM]]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; INPUT_DIM];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = vec![0.0; INPUT_DIM];
        for r in rows {
            for k in 0..INPUT_DIM {
                sd[k] += (r[k] - mean[k]).powi(2);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / n).sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        Normalization { mean, sd }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.sd).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Predictor input tagged with the layout it was assembled under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorInput {
    pub layout_version: u32,
    pub values: [f64; INPUT_DIM],
}

impl PredictorInput {
    /// Tags `values` with the current layout version.
    pub fn new(values: [f64; INPUT_DIM]) -> Self {
        PredictorInput {
            layout_version: LAYOUT_VERSION,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub normalization: Normalization,
    /// The network output `z` maps to `offset + scale * z`, componentwise.
    pub output: OutputScaling,
    pub layout_version: u32,
}

/// Fixed affine map from network outputs to curve parameters, so that the
/// four parameters, whose natural scales differ by orders of magnitude, are
/// learned on comparable scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputScaling {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl OutputScaling {
    pub fn identity() -> Self {
        OutputScaling {
            offset: vec![0.0; 4],
            scale: vec![1.0; 4],
        }
    }

    /// Componentwise median and population sd of `targets`; a zero sd
    /// becomes 1.
    pub fn fit(targets: &[CurveParams]) -> Self {
        let mut offset = vec![0.0; 4];
        let mut scale = vec![1.0; 4];
        for j in 0..4 {
            let mut col: Vec<f64> = targets.iter().map(|t| t.to_array()[j]).collect();
            if col.is_empty() {
                continue;
            }
            col.sort_by(f64::total_cmp);
            offset[j] = crate::metafeatures::quantile_sorted(&col, 0.5);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 && sd.is_finite() {
                scale[j] = sd;
            }
        }
        OutputScaling { offset, scale }
    }

    fn apply(&self, z: &[f64]) -> CurveParams {
        CurveParams::from_array(std::array::from_fn(|j| self.offset[j] + self.scale[j] * z[j]))
    }
}

/// Activations kept from a forward pass for backpropagation.
struct Trace {
    /// Input to each layer (post-activation of the previous one).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Vec<f64>>,
}

impl PredictorModel {
    /// Fresh network: weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, zero
    /// biases, identity normalization.
    pub fn init<R: Rng>(rng: &mut R) -> Self {
        let layers = LAYER_SIZES
            .windows(2)
            .map(|w| {
                let (i, o) = (w[0], w[1]);
                let bound = 1.0 / (i as f64).sqrt();
                Layer {
                    inputs: i,
                    outputs: o,
                    weights: (0..i * o).map(|_| rng.random_range(-bound..bound)).collect(),
                    bias: vec![0.0; o],
                }
            })
            .collect();
        PredictorModel {
            layer_sizes: LAYER_SIZES.to_vec(),
            layers,
            normalization: Normalization::identity(INPUT_DIM),
            output: OutputScaling::identity(),
            layout_version: LAYOUT_VERSION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.first() != Some(&INPUT_DIM) || self.layer_sizes.last() != Some(&4) {
            return Err(Error::invalid("model must map 24 inputs to 4 outputs"));
        }
        if self.layers.len() + 1 != self.layer_sizes.len() {
            return Err(Error::invalid("layer count does not match layer_sizes"));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if l.inputs != self.layer_sizes[k]
                || l.outputs != self.layer_sizes[k + 1]
                || l.weights.len() != l.inputs * l.outputs
                || l.bias.len() != l.outputs
            {
                return Err(Error::invalid(format!("layer {k} has inconsistent shape")));
            }
        }
        if self.normalization.mean.len() != INPUT_DIM
            || self.normalization.sd.len() != INPUT_DIM
            || self.normalization.sd.iter().any(|&s| !(s > 0.0))
        {
            return Err(Error::invalid("normalization stats must have 24 entries with sd > 0"));
        }
        if self.output.offset.len() != 4
            || self.output.scale.len() != 4
            || self.output.offset.iter().chain(&self.output.scale).any(|v| !v.is_finite())
        {
            return Err(Error::invalid("output scaling must have 4 finite offsets and scales"));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    /// All weights and biases, layer by layer (weights first).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
    }

    /// Mutable access to parameter `idx` in [`params`](Self::params) order.
    pub fn param_mut(&mut self, mut idx: usize) -> &mut f64 {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                return &mut l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                return &mut l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// Adds `scale * delta` to every parameter.
    pub(crate) fn add_scaled(&mut self, delta: &[f64], scale: f64) {
        let mut off = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w += scale * delta[off];
                off += 1;
            }
        }
    }

    fn trace(&self, raw: &[f64]) -> Trace {
        let mut h = self.normalization.apply(raw);
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.iter().enumerate() {
            let z: Vec<f64> = (0..l.outputs)
                .map(|o| {
                    let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    l.bias[o] + row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>()
                })
                .collect();
            let next = if k == last { z.clone() } else { z.iter().map(|v| v.max(0.0)).collect() };
            inputs.push(std::mem::replace(&mut h, next));
            pre.push(z);
        }
        inputs.push(h);
        Trace { inputs, pre }
    }

    /// Curve parameters for a raw (unnormalized) input vector.
    pub fn forward(&self, raw: &[f64]) -> CurveParams {
        let out = self.trace(raw).inputs.pop().expect("output layer");
        self.output.apply(&out)
    }

    /// Curve parameters for a layout-tagged input.
    pub fn predict_params(&self, input: &PredictorInput) -> Result<CurveParams> {
        if input.layout_version != self.layout_version {
            return Err(Error::invalid(format!(
                "input layout version {} does not match model layout version {}",
                input.layout_version, self.layout_version
            )));
        }
        Ok(self.forward(&input.values))
    }

    /// Mean absolute error between the predicted law and `values[k..]` (at
    /// epochs `k+1..=T`), and its gradient with respect to [`params`].
    ///
    /// [`params`]: PredictorModel::params
    pub fn loss_and_gradient(&self, raw: &[f64], values: &[f64], k: usize) -> (f64, Vec<f64>) {
        let tr = self.trace(raw);
        let theta = self.output.apply(tr.inputs.last().expect("output"));
        let (loss, dtheta) = query_loss(&theta, values, k);

        let mut grad = vec![0.0; self.n_params()];
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.n_params();
        }
        let mut delta: Vec<f64> = dtheta.iter().zip(&self.output.scale).map(|(d, s)| d * s).collect();
        for (k, l) in self.layers.iter().enumerate().rev() {
            let input = &tr.inputs[k];
            let base = offsets[k];
            for o in 0..l.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[base + o * l.inputs..base + (o + 1) * l.inputs];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += d * x;
                }
                grad[base + l.weights.len() + o] += d;
            }
            if k > 0 {
                let prev_pre = &tr.pre[k - 1];
                let mut next = vec![0.0; l.inputs];
                for o in 0..l.outputs {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    for (n, w) in next.iter_mut().zip(row) {
                        *n += d * w;
                    }
                }
                for (n, z) in next.iter_mut().zip(prev_pre) {
                    if *z <= 0.0 {
                        *n = 0.0;
                    }
                }
                delta = next;
            }
        }
        (loss, grad)
    }

    /// Loss only; cheaper than [`loss_and_gradient`](Self::loss_and_gradient).
    pub fn loss(&self, raw: &[f64], values: &[f64], k: usize) -> f64 {
        query_loss(&self.forward(raw), values, k).0
    }

    /// Signs of every hidden pre-activation and of every query residual. The
    /// loss is linear in any single parameter while this pattern is fixed,
    /// which lets gradient checks skip points sitting on a kink.
    pub fn kink_pattern(&self, raw: &[f64], values: &[f64], k: usize) -> Vec<bool> {
        let tr = self.trace(raw);
        let theta = self.output.apply(tr.inputs.last().expect("output"));
        let hidden = tr.pre[..tr.pre.len() - 1].iter().flatten().map(|&z| z > 0.0);
        let residual = values[k..]
            .iter()
            .enumerate()
            .map(|(i, &a)| theta.at((k + i + 1) as f64) - a > 0.0);
        hidden.chain(residual).collect()
    }
}

/// Mean absolute error of `theta` against `values[k..]` and its gradient
/// with respect to `theta`.
pub fn query_loss(theta: &CurveParams, values: &[f64], k: usize) -> (f64, [f64; 4]) {
    let q = &values[k..];
    let n = q.len() as f64;
    let mut loss = 0.0;
    let mut g = [0.0; 4];
    for (i, &a) in q.iter().enumerate() {
        let t = (k + i + 1) as f64;
        let phi = basis(t);
        let r = theta.at(t) - a;
        loss += r.abs();
        let s = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        for j in 0..4 {
            g[j] += s * phi[j];
        }
    }
    for gj in g.iter_mut() {
        *gj /= n;
    }
    (loss / n, g)
}
