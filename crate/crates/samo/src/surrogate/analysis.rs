//! Internal-structure introspection: how sparse the hidden activations
//! are (exact zeros after ReLU, the driver of inference cost) and where
//! the learned weights sit.

use serde::{Deserialize, Serialize};

use super::{SurrogateError, SurrogateNet};
use crate::traffic::Solution;

pub const HISTOGRAM_BINS: usize = 64;

/// Weight histogram for one layer: `counts` over [`HISTOGRAM_BINS`]
/// uniform bins spanning `[min, max]` of the observed weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerHistogram {
    pub layer: usize,
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    /// Percentage of exactly-zero post-ReLU outputs in hidden layer 1,
    /// averaged over all probes and units.
    pub zero_ratio_hidden1: f64,
    /// Same for hidden layer 2.
    pub zero_ratio_hidden2: f64,
    pub weight_histograms: Vec<LayerHistogram>,
}

/// Measures activation sparsity of a trained network over `probes`.
pub fn sparsity(net: &SurrogateNet, probes: &[Solution]) -> Result<SparsityReport, SurrogateError> {
    if !net.is_trained() {
        return Err(SurrogateError::Untrained);
    }
    if probes.is_empty() {
        return Err(SurrogateError::NoProbes);
    }
    let mut zeros = [0usize; 2];
    let mut totals = [0usize; 2];
    for probe in probes {
        let (a1, a2) = net.hidden_activations(probe)?;
        zeros[0] += a1.iter().filter(|&&a| a == 0.0).count();
        totals[0] += a1.len();
        zeros[1] += a2.iter().filter(|&&a| a == 0.0).count();
        totals[1] += a2.len();
    }
    let weight_histograms = net
        .layers
        .iter()
        .enumerate()
        .map(|(layer, l)| histogram(layer, &l.weights))
        .collect();
    Ok(SparsityReport {
        zero_ratio_hidden1: 100.0 * zeros[0] as f64 / totals[0] as f64,
        zero_ratio_hidden2: 100.0 * zeros[1] as f64 / totals[1] as f64,
        weight_histograms,
    })
}

fn histogram(layer: usize, weights: &[f64]) -> LayerHistogram {
    let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0u32; HISTOGRAM_BINS];
    let width = (max - min) / HISTOGRAM_BINS as f64;
    for &w in weights {
        let bin = if width > 0.0 {
            (((w - min) / width) as usize).min(HISTOGRAM_BINS - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    LayerHistogram {
        layer,
        min,
        max,
        counts,
    }
}
