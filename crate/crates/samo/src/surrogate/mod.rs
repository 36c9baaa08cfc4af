//! From-scratch fully connected surrogate: two ReLU hidden layers and a
//! linear output unit, trained with Adam on mean squared error to mimic
//! an expensive objective. Inputs are min–max scaled, targets z-scored;
//! both scalers are fitted on the training data only.

mod analysis;
mod io;
mod train;

pub use analysis::{sparsity, LayerHistogram, SparsityReport, HISTOGRAM_BINS};
pub use io::{load_net, save_net, CHECKPOINT_FORMAT_VERSION};
pub use train::{retrain, train, TrainConfig, TrainReport};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traffic::Solution;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("network spec has a zero-sized layer")]
    BadSpec,
    #[error("prediction requested from an untrained network")]
    Untrained,
    #[error("input has {got} dimensions, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite objective value at dataset index {0}")]
    NonFiniteTarget(usize),
    #[error("sparsity probes are empty")]
    NoProbes,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format_version {got} (supported: {supported})")]
    Version { got: u32, supported: u32 },
}

/// Architecture: `n_inputs → hidden1 → hidden2 → 1`, with the hidden
/// widths tied to the problem dimensionality (1.5·D and D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub n_inputs: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub seed: u64,
}

impl NetSpec {
    /// Standard sizing for a problem of dimensionality `d`:
    /// `hidden1 = ceil(1.5·d)`, `hidden2 = d`.
    pub fn for_dimensionality(d: usize, seed: u64) -> Self {
        Self {
            n_inputs: d,
            hidden1: (3 * d).div_ceil(2),
            hidden2: d,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SurrogateError> {
        if self.n_inputs == 0 || self.hidden1 == 0 || self.hidden2 == 0 {
            return Err(SurrogateError::BadSpec);
        }
        Ok(())
    }

    fn layer_dims(&self) -> [(usize, usize); 3] {
        [
            (self.n_inputs, self.hidden1),
            (self.hidden1, self.hidden2),
            (self.hidden2, 1),
        ]
    }
}

/// One dense layer; weights row-major `[fan_out][fan_in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Layer {
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
    pub(crate) fan_in: usize,
    pub(crate) fan_out: usize,
}

impl Layer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.fan_out {
            let row = &self.weights[o * self.fan_in..(o + 1) * self.fan_in];
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum();
            out.push(z + self.biases[o]);
        }
    }
}

/// Per-dimension min–max input scaling to [0, 1]. Constant dimensions
/// map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl InputScaler {
    pub(crate) fn fit(rows: &[Vec<f64>]) -> Self {
        let dims = rows[0].len();
        let mut min = vec![f64::INFINITY; dims];
        let mut max = vec![f64::NEG_INFINITY; dims];
        for row in rows {
            for (d, &v) in row.iter().enumerate() {
                min[d] = min[d].min(v);
                max[d] = max[d].max(v);
            }
        }
        Self { min, max }
    }

    pub(crate) fn transform(&self, raw: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (d, &v) in raw.iter().enumerate() {
            let range = self.max[d] - self.min[d];
            out.push(if range > 0.0 { (v - self.min[d]) / range } else { 0.0 });
        }
    }
}

/// Z-score output scaling. A constant target keeps `std = 1` so the
/// transform stays invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputScaler {
    pub mean: f64,
    pub std: f64,
}

impl OutputScaler {
    pub(crate) fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self { mean, std }
    }

    pub(crate) fn transform(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub(crate) fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateNet {
    spec: NetSpec,
    pub(crate) layers: Vec<Layer>,
    pub(crate) input_scaler: Option<InputScaler>,
    pub(crate) output_scaler: Option<OutputScaler>,
    trained: bool,
}

/// Builds an untrained network with seeded uniform ±sqrt(6/fan_in)
/// weights and zero biases. The same spec always yields the same
/// initial weights.
pub fn build(spec: NetSpec) -> Result<SurrogateNet, SurrogateError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layers = spec
        .layer_dims()
        .iter()
        .map(|&(fan_in, fan_out)| {
            let bound = (6.0 / fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            Layer {
                weights,
                biases: vec![0.0; fan_out],
                fan_in,
                fan_out,
            }
        })
        .collect();
    Ok(SurrogateNet {
        spec,
        layers,
        input_scaler: None,
        output_scaler: None,
        trained: false,
    })
}

/// Total trainable parameter count `Σ (fan_in·fan_out + fan_out)`.
pub fn param_count(net: &SurrogateNet) -> usize {
    net.layers
        .iter()
        .map(|l| l.fan_in * l.fan_out + l.fan_out)
        .sum()
}

impl SurrogateNet {
    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub(crate) fn set_trained(&mut self, trained: bool) {
        self.trained = trained;
    }

    /// Re-draws the initial weights from the spec seed and clears biases,
    /// exactly as [`build`] would.
    pub(crate) fn reset_weights(&mut self) {
        *self = build(self.spec).expect("spec was valid at construction");
    }

    fn check_input(&self, len: usize) -> Result<(), SurrogateError> {
        if len != self.spec.n_inputs {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.spec.n_inputs,
                got: len,
            });
        }
        Ok(())
    }

    /// Raw forward pass in scaled space (no scalers applied). Returns the
    /// pre-activations of all three layers.
    pub(crate) fn forward_raw(&self, input: &[f64]) -> [Vec<f64>; 3] {
        let mut z1 = Vec::new();
        self.layers[0].forward(input, &mut z1);
        let a1: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
        let mut z2 = Vec::new();
        self.layers[1].forward(&a1, &mut z2);
        let a2: Vec<f64> = z2.iter().map(|&z| z.max(0.0)).collect();
        let mut z3 = Vec::new();
        self.layers[2].forward(&a2, &mut z3);
        [z1, z2, z3]
    }

    /// Scaled forward pass with the output inverse-transformed back to
    /// objective units. Requires a trained network; never mutates state.
    pub fn predict(&self, s: &Solution) -> Result<f64, SurrogateError> {
        if !self.trained {
            return Err(SurrogateError::Untrained);
        }
        self.check_input(s.len())?;
        let raw: Vec<f64> = s.durations().iter().map(|&d| d as f64).collect();
        let mut scaled = Vec::new();
        self.input_scaler
            .as_ref()
            .expect("trained network has scalers")
            .transform(&raw, &mut scaled);
        let out = self.forward_raw(&scaled)[2][0];
        Ok(self
            .output_scaler
            .as_ref()
            .expect("trained network has scalers")
            .inverse(out))
    }

    /// Post-ReLU hidden activations for a probe, through the input scaler.
    pub(crate) fn hidden_activations(
        &self,
        s: &Solution,
    ) -> Result<(Vec<f64>, Vec<f64>), SurrogateError> {
        if !self.trained {
            return Err(SurrogateError::Untrained);
        }
        self.check_input(s.len())?;
        let raw: Vec<f64> = s.durations().iter().map(|&d| d as f64).collect();
        let mut scaled = Vec::new();
        self.input_scaler
            .as_ref()
            .expect("trained network has scalers")
            .transform(&raw, &mut scaled);
        let [z1, z2, _] = self.forward_raw(&scaled);
        Ok((
            z1.into_iter().map(|z| z.max(0.0)).collect(),
            z2.into_iter().map(|z| z.max(0.0)).collect(),
        ))
    }

    /// All parameters flattened layer by layer, weights then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(param_count(self));
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), param_count(self), "parameter count mismatch");
        let mut offset = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            layer.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = layer.biases.len();
            layer.biases.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
    }

    /// Mean squared error over a batch, in scaled space.
    pub fn batch_loss(&self, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (x, &y) in inputs.iter().zip(targets) {
            let out = self.forward_raw(x)[2][0];
            acc += (out - y).powi(2);
        }
        acc / inputs.len() as f64
    }

    /// Analytic gradient of [`Self::batch_loss`] with respect to
    /// [`Self::flat_params`], same flattening order.
    pub fn batch_gradient(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Vec<f64> {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
            .collect();
        let batch = inputs.len() as f64;
        for (x, &y) in inputs.iter().zip(targets) {
            let [z1, z2, z3] = self.forward_raw(x);
            let a1: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
            let a2: Vec<f64> = z2.iter().map(|&z| z.max(0.0)).collect();
            let d_out = 2.0 * (z3[0] - y) / batch;

            // Output layer.
            for (i, &a) in a2.iter().enumerate() {
                grads[2].0[i] += d_out * a;
            }
            grads[2].1[0] += d_out;

            // Second hidden layer.
            let l3 = &self.layers[2];
            let mut d2: Vec<f64> = (0..l3.fan_in).map(|i| d_out * l3.weights[i]).collect();
            for (i, d) in d2.iter_mut().enumerate() {
                if z2[i] <= 0.0 {
                    *d = 0.0;
                }
            }
            let l2 = &self.layers[1];
            for (o, &d) in d2.iter().enumerate() {
                if d != 0.0 {
                    for (i, &a) in a1.iter().enumerate() {
                        grads[1].0[o * l2.fan_in + i] += d * a;
                    }
                }
                grads[1].1[o] += d;
            }

            // First hidden layer.
            let mut d1 = vec![0.0; l2.fan_in];
            for (o, &d) in d2.iter().enumerate() {
                if d != 0.0 {
                    for (i, item) in d1.iter_mut().enumerate() {
                        *item += d * l2.weights[o * l2.fan_in + i];
                    }
                }
            }
            for (i, d) in d1.iter_mut().enumerate() {
                if z1[i] <= 0.0 {
                    *d = 0.0;
                }
            }
            let l1 = &self.layers[0];
            for (o, &d) in d1.iter().enumerate() {
                if d != 0.0 {
                    for (i, &xv) in x.iter().enumerate() {
                        grads[0].0[o * l1.fan_in + i] += d * xv;
                    }
                }
                grads[0].1[o] += d;
            }
        }

        let mut flat = Vec::with_capacity(param_count(self));
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        flat
    }
}
