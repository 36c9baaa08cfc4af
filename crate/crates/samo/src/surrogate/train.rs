//! Mini-batch Adam training on mean squared error.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{InputScaler, OutputScaler, SurrogateError, SurrogateNet};
use crate::traffic::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1.0e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), SurrogateError> {
        if self.epochs == 0 || self.batch_size == 0 || self.learning_rate <= 0.0 {
            return Err(SurrogateError::BadSpec);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    /// Mean squared error over the final epoch, in scaled target space.
    pub final_loss: f64,
    pub epochs_run: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grads: &[f64], cfg: &TrainConfig) {
        self.step += 1;
        let bias1 = 1.0 - cfg.adam_beta1.powi(self.step as i32);
        let bias2 = 1.0 - cfg.adam_beta2.powi(self.step as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * g;
            *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    }
}

/// Fits the scalers from `dataset`, then runs `cfg.epochs` of shuffled
/// mini-batch Adam from the network's current weights. Deterministic
/// given `rng_seed`; the last short batch of each epoch is kept.
pub fn train(
    net: &mut SurrogateNet,
    dataset: &[(Solution, f64)],
    cfg: &TrainConfig,
    rng_seed: u64,
) -> Result<TrainReport, SurrogateError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(SurrogateError::EmptyDataset);
    }
    for (i, (s, y)) in dataset.iter().enumerate() {
        if s.len() != net.spec().n_inputs {
            return Err(SurrogateError::DimensionMismatch {
                expected: net.spec().n_inputs,
                got: s.len(),
            });
        }
        if !y.is_finite() {
            return Err(SurrogateError::NonFiniteTarget(i));
        }
    }

    let raw: Vec<Vec<f64>> = dataset
        .iter()
        .map(|(s, _)| s.durations().iter().map(|&d| d as f64).collect())
        .collect();
    let input_scaler = InputScaler::fit(&raw);
    let targets_raw: Vec<f64> = dataset.iter().map(|&(_, y)| y).collect();
    let output_scaler = OutputScaler::fit(&targets_raw);

    let mut inputs = Vec::with_capacity(raw.len());
    for row in &raw {
        let mut scaled = Vec::new();
        input_scaler.transform(row, &mut scaled);
        inputs.push(scaled);
    }
    let targets: Vec<f64> = targets_raw
        .iter()
        .map(|&y| output_scaler.transform(y))
        .collect();

    let n = inputs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut params = net.flat_params();
    let mut adam = Adam::new(params.len());
    let mut final_loss = f64::NAN;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let batch_x: Vec<Vec<f64>> = batch.iter().map(|&i| inputs[i].clone()).collect();
            let batch_y: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
            net.set_flat_params(&params);
            epoch_loss += net.batch_loss(&batch_x, &batch_y) * batch.len() as f64;
            let grads = net.batch_gradient(&batch_x, &batch_y);
            adam.update(&mut params, &grads, cfg);
        }
        final_loss = epoch_loss / n as f64;
    }
    net.set_flat_params(&params);
    net.input_scaler = Some(input_scaler);
    net.output_scaler = Some(output_scaler);
    net.set_trained(true);

    Ok(TrainReport {
        final_loss,
        epochs_run: cfg.epochs,
    })
}

/// Full retrain from scratch-initialized weights (re-drawn from the
/// network's spec seed) on the accumulated dataset.
pub fn retrain(
    net: &mut SurrogateNet,
    dataset: &[(Solution, f64)],
    cfg: &TrainConfig,
    rng_seed: u64,
) -> Result<TrainReport, SurrogateError> {
    net.reset_weights();
    train(net, dataset, cfg, rng_seed)
}

#[cfg(test)]
mod tests {
    use super::super::{build, NetSpec};
    use super::*;
    use rand::Rng;

    fn linear_dataset(n: usize, d: usize, seed: u64) -> Vec<(Solution, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let xs: Vec<i64> = (0..d).map(|_| rng.gen_range(5..=60)).collect();
                let y = xs.iter().sum::<i64>() as f64;
                (Solution::new(xs), y)
            })
            .collect()
    }

    #[test]
    fn constant_target_degenerate_regression() {
        let d = 4;
        let c = 123.0;
        let dataset: Vec<(Solution, f64)> = linear_dataset(256, d, 3)
            .into_iter()
            .map(|(s, _)| (s, c))
            .collect();
        let mut net = build(NetSpec::for_dimensionality(d, 7)).unwrap();
        let cfg = TrainConfig {
            epochs: 400,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        train(&mut net, &dataset, &cfg, 11).unwrap();
        for (s, _) in dataset.iter().take(20) {
            let pred = net.predict(s).unwrap();
            assert!(
                (pred - c).abs() / c < 0.01,
                "prediction {pred} not within 1% of {c}"
            );
        }
    }

    #[test]
    fn linear_target_heldout_mape() {
        let d = 4;
        let data = linear_dataset(1124, d, 5);
        let (train_set, test_set) = data.split_at(1024);
        let mut net = build(NetSpec::for_dimensionality(d, 1)).unwrap();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        train(&mut net, &train_set.to_vec(), &cfg, 2).unwrap();
        let actual: Vec<f64> = test_set.iter().map(|&(_, y)| y).collect();
        let predicted: Vec<f64> = test_set
            .iter()
            .map(|(s, _)| net.predict(s).unwrap())
            .collect();
        let mape = crate::stats::mape(&actual, &predicted).unwrap();
        assert!(mape < 5.0, "held-out MAPE {mape:.2}% >= 5%");
    }

    #[test]
    fn more_epochs_do_not_increase_final_loss() {
        let data = linear_dataset(256, 4, 9);
        let cfg1 = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let cfg100 = TrainConfig::default();
        let mut net1 = build(NetSpec::for_dimensionality(4, 21)).unwrap();
        let r1 = train(&mut net1, &data, &cfg1, 77).unwrap();
        let mut net100 = build(NetSpec::for_dimensionality(4, 21)).unwrap();
        let r100 = train(&mut net100, &data, &cfg100, 77).unwrap();
        assert!(r100.final_loss <= r1.final_loss);
        assert_eq!(r100.epochs_run, 100);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data = linear_dataset(200, 3, 1);
        let mut a = build(NetSpec::for_dimensionality(3, 4)).unwrap();
        let mut b = build(NetSpec::for_dimensionality(3, 4)).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        train(&mut a, &data, &cfg, 123).unwrap();
        train(&mut b, &data, &cfg, 123).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
    }

    #[test]
    fn retrain_equals_train_from_fresh_build() {
        let data = linear_dataset(150, 3, 2);
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let spec = NetSpec::for_dimensionality(3, 40);
        let mut fresh = build(spec).unwrap();
        train(&mut fresh, &data, &cfg, 9).unwrap();

        let mut recycled = build(spec).unwrap();
        // Scramble with a different run first; retrain must erase it.
        train(&mut recycled, &data[..50].to_vec(), &cfg, 1).unwrap();
        retrain(&mut recycled, &data, &cfg, 9).unwrap();
        assert_eq!(fresh.flat_params(), recycled.flat_params());
    }

    #[test]
    fn retrain_on_grown_dataset_changes_predictions() {
        let data = linear_dataset(160, 3, 6);
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let mut net = build(NetSpec::for_dimensionality(3, 8)).unwrap();
        train(&mut net, &data[..150].to_vec(), &cfg, 3).unwrap();
        let probe = Solution::new(vec![10, 20, 30]);
        let before = net.predict(&probe).unwrap();
        retrain(&mut net, &data, &cfg, 4).unwrap();
        assert!(net.is_trained());
        assert_ne!(before, net.predict(&probe).unwrap());
    }

    #[test]
    fn scaler_round_trip() {
        let scaler = OutputScaler::fit(&[3.0, 9.5, 4.25, 8.75]);
        for &y in &[3.0, 9.5, 123.456, -7.0] {
            let rt = scaler.inverse(scaler.transform(y));
            assert!((rt - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_datasets() {
        let mut net = build(NetSpec::for_dimensionality(3, 0)).unwrap();
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&mut net, &[], &cfg, 0),
            Err(SurrogateError::EmptyDataset)
        ));
        let wrong_dim = vec![(Solution::new(vec![1, 2]), 1.0)];
        assert!(matches!(
            train(&mut net, &wrong_dim, &cfg, 0),
            Err(SurrogateError::DimensionMismatch { .. })
        ));
        let non_finite = vec![(Solution::new(vec![1, 2, 3]), f64::NAN)];
        assert!(matches!(
            train(&mut net, &non_finite, &cfg, 0),
            Err(SurrogateError::NonFiniteTarget(0))
        ));
    }
}
