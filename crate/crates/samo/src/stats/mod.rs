//! Statistical toolkit for characterizing measured computational costs:
//! log-normal fits with goodness-of-fit, error metrics, nonparametric
//! group comparisons, regression, polynomial cost models, and break-even
//! arithmetic for the train-once/use-many trade-off.

mod rank;
mod regression;
pub mod special;

pub use rank::{kruskal_wallis, pairwise_posthoc, KruskalResult};
pub use regression::{fit_cost_model, CostModel, CostTarget};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bin count used for the empirical-vs-fitted density comparison.
pub const LOGNORMAL_BINS: usize = 50;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample at index {0} is not positive")]
    NonPositiveSample(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("observed densities are all zero")]
    AllZeroObserved,
    #[error("actual value at index {0} is zero")]
    ZeroActual(usize),
    #[error("x values are constant; line is undetermined")]
    ConstantX,
    #[error("need at least two groups, each nonempty")]
    BadGroups,
    #[error("break-even undefined: large configuration is not cheaper per use")]
    NoBreakEven,
    #[error("rank-deficient design matrix: column {0} is linearly dependent")]
    RankDeficient(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

/// Log-normal characterization of a positive-valued cost distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    /// Mean of ln(samples).
    pub mu: f64,
    /// Population standard deviation of ln(samples).
    pub sigma: f64,
    /// Mean on the original scale: `exp(mu + sigma²/2)`.
    pub mean: f64,
    /// Standard deviation on the original scale:
    /// `sqrt((exp(sigma²) - 1) · exp(2·mu + sigma²))`.
    pub sd: f64,
    /// Normalized mean squared error between the empirical density
    /// histogram and the fitted density at bin centers.
    pub nmse: f64,
    /// Number of histogram bins used for `nmse`.
    pub bins: usize,
}

/// Log-normal probability density.
pub fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 || sigma <= 0.0 {
        return 0.0;
    }
    let z = (x.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Fits a log-normal distribution by the maximum-likelihood estimators
/// (mean and 1/n standard deviation of the log samples) and scores the
/// fit with NMSE over [`LOGNORMAL_BINS`] equal-width bins.
pub fn fit_lognormal(samples: &[f64]) -> Result<LogNormalFit, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples {
            need: 2,
            got: samples.len(),
        });
    }
    for (i, &s) in samples.iter().enumerate() {
        if !s.is_finite() {
            return Err(StatsError::NonFinite(i));
        }
        if s <= 0.0 {
            return Err(StatsError::NonPositiveSample(i));
        }
    }
    let n = samples.len() as f64;
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Identical samples fit exactly; skip the arithmetic so sigma is a
    // true zero.
    let (mu, sigma) = if hi == lo {
        (lo.ln(), 0.0)
    } else {
        let logs: Vec<f64> = samples.iter().map(|s| s.ln()).collect();
        let mu = logs.iter().sum::<f64>() / n;
        let sigma = (logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n).sqrt();
        (mu, sigma)
    };
    let mean = (mu + sigma * sigma / 2.0).exp();
    let sd = (((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp()).sqrt();

    let nmse = if hi > lo {
        let width = (hi - lo) / LOGNORMAL_BINS as f64;
        let mut observed = vec![0.0; LOGNORMAL_BINS];
        for &s in samples {
            let bin = (((s - lo) / width) as usize).min(LOGNORMAL_BINS - 1);
            observed[bin] += 1.0;
        }
        for o in observed.iter_mut() {
            *o /= n * width;
        }
        let model: Vec<f64> = (0..LOGNORMAL_BINS)
            .map(|i| lognormal_pdf(lo + (i as f64 + 0.5) * width, mu, sigma))
            .collect();
        nmse(&observed, &model)?
    } else {
        // All samples identical: the degenerate fit is exact.
        0.0
    };

    Ok(LogNormalFit {
        mu,
        sigma,
        mean,
        sd,
        nmse,
        bins: LOGNORMAL_BINS,
    })
}

/// Normalized mean squared error `Σ(obs - model)² / Σ obs²`.
pub fn nmse(observed: &[f64], model: &[f64]) -> Result<f64, StatsError> {
    if observed.len() != model.len() {
        return Err(StatsError::LengthMismatch(observed.len(), model.len()));
    }
    let denom: f64 = observed.iter().map(|o| o * o).sum();
    if denom == 0.0 {
        return Err(StatsError::AllZeroObserved);
    }
    let num: f64 = observed
        .iter()
        .zip(model)
        .map(|(o, m)| (o - m).powi(2))
        .sum();
    Ok(num / denom)
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, StatsError> {
    if actual.len() != predicted.len() {
        return Err(StatsError::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    let mut acc = 0.0;
    for (i, (&y, &yhat)) in actual.iter().zip(predicted).enumerate() {
        if y == 0.0 {
            return Err(StatsError::ZeroActual(i));
        }
        acc += ((yhat - y) / y).abs();
    }
    Ok(acc / actual.len() as f64 * 100.0)
}

/// Ordinary least squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean squared residual (1/n normalization).
    pub rmse: f64,
    pub pearson_rho: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples {
            need: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(StatsError::ConstantX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rmse = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (slope * a + intercept)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let pearson_rho = if syy == 0.0 {
        0.0
    } else {
        sxy / (sxx.sqrt() * syy.sqrt())
    };
    Ok(LinearFit {
        slope,
        intercept,
        rmse,
        pearson_rho,
    })
}

/// Number of uses after which a configuration that is costlier to train
/// but cheaper per use becomes the lower-total-energy choice:
/// `N = (E_train_large - E_train_small) / (E_use_small - E_use_large)`.
pub fn break_even(
    e_train_small: f64,
    e_use_small: f64,
    e_train_large: f64,
    e_use_large: f64,
) -> Result<f64, StatsError> {
    let per_use_saving = e_use_small - e_use_large;
    if per_use_saving <= 0.0 {
        return Err(StatsError::NoBreakEven);
    }
    Ok((e_train_large - e_train_small) / per_use_saving)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_constant_samples() {
        let c = 42.5;
        let fit = fit_lognormal(&[c; 10]).unwrap();
        assert!((fit.mu - c.ln()).abs() < 1e-12);
        assert_eq!(fit.sigma, 0.0);
        assert!((fit.mean - c).abs() < 1e-9);
        assert_eq!(fit.nmse, 0.0);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        assert!(matches!(
            fit_lognormal(&[1.0, 0.0, 2.0]),
            Err(StatsError::NonPositiveSample(1))
        ));
    }

    #[test]
    fn mean_formula_from_parameters() {
        // mu = 5.37, sigma = 0.14 gives E = exp(5.3798) ≈ 217.0.
        let e = (5.37f64 + 0.14f64.powi(2) / 2.0).exp();
        assert!((e - 217.0).abs() < 0.05);
    }

    #[test]
    fn scale_equivariance() {
        let samples = [3.0, 7.5, 1.2, 9.9, 4.4, 2.0];
        let c = 12.5;
        let scaled: Vec<f64> = samples.iter().map(|s| s * c).collect();
        let a = fit_lognormal(&samples).unwrap();
        let b = fit_lognormal(&scaled).unwrap();
        assert!((b.mu - a.mu - c.ln()).abs() < 1e-12);
        assert!((b.sigma - a.sigma).abs() < 1e-12);
    }

    #[test]
    fn nmse_basics() {
        assert_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(nmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((nmse(&[1.0, 2.0], &[1.0, 0.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(
            nmse(&[0.0, 0.0], &[1.0, 2.0]),
            Err(StatsError::AllZeroObserved)
        ));
    }

    #[test]
    fn mape_basics() {
        assert_eq!(mape(&[100.0], &[100.0]).unwrap(), 0.0);
        assert!((mape(&[100.0], &[110.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!((mape(&[200.0, 100.0], &[150.0, 150.0]).unwrap() - 37.5).abs() < 1e-12);
        assert!(matches!(
            mape(&[0.0], &[1.0]),
            Err(StatsError::ZeroActual(0))
        ));
    }

    #[test]
    fn mape_scale_invariance() {
        let y = [120.0, 80.0, 95.0];
        let yhat = [110.0, 90.0, 99.0];
        let c = -3.5;
        let cy: Vec<f64> = y.iter().map(|v| v * c).collect();
        let cyhat: Vec<f64> = yhat.iter().map(|v| v * c).collect();
        let a = mape(&y, &yhat).unwrap();
        let b = mape(&cy, &cyhat).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
        assert!((fit.pearson_rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_negative_correlation() {
        let x = [1.0, 2.0, 3.0];
        let y = [-1.0, -2.0, -3.0];
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.pearson_rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_residual_orthogonality() {
        let x = [1.0, 2.5, 3.0, 4.7, 8.1, 9.0];
        let y = [2.2, 2.9, 4.1, 5.5, 9.8, 10.4];
        let fit = linear_fit(&x, &y).unwrap();
        let residuals: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| b - (fit.slope * a + fit.intercept))
            .collect();
        let sum_r: f64 = residuals.iter().sum();
        let sum_rx: f64 = residuals.iter().zip(&x).map(|(r, a)| r * a).sum();
        assert!(sum_r.abs() < 1e-9);
        assert!(sum_rx.abs() < 1e-9);
    }

    #[test]
    fn linear_fit_rejects_constant_x() {
        assert!(matches!(
            linear_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantX)
        ));
    }

    #[test]
    fn break_even_paper_constants() {
        let n = break_even(217.79, 3.46, 2574.66, 2.64).unwrap();
        assert!((n - 2874.0).abs() <= 1.0);
    }

    #[test]
    fn break_even_edge_cases() {
        assert_eq!(break_even(100.0, 5.0, 100.0, 3.0).unwrap(), 0.0);
        assert!(matches!(
            break_even(1.0, 2.0, 3.0, 2.0),
            Err(StatsError::NoBreakEven)
        ));
    }

    #[test]
    fn break_even_total_cost_curves_intersect() {
        let (ts, us, tl, ul) = (217.79, 3.46, 2574.66, 2.64);
        let n = break_even(ts, us, tl, ul).unwrap();
        let small_total = ts + n * us;
        let large_total = tl + n * ul;
        assert!((small_total - large_total).abs() < 1e-9 * small_total);
    }
}
