//! Polynomial cost models: OLS with per-term t-test p-values via
//! Householder QR, fitting computational cost as a function of network
//! parameter count (n_p) and training dataset size (n_t).

use serde::{Deserialize, Serialize};

use super::special::student_t_sf;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostTarget {
    Energy,
    Time,
    Memory,
}

/// Second-order cost model and its reduced form.
///
/// Full model: `y = a1·n_p² + a2·n_t² + a3·n_p·n_t + a4·n_p + a5·n_t + a6`.
/// Reduced model keeps only `n_t²`, `n_p·n_t`, `n_t`, and the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub target: CostTarget,
    /// a1..a6 for terms [n_p², n_t², n_p·n_t, n_p, n_t, 1].
    pub full_coefficients: [f64; 6],
    /// Two-sided t-test p-values for the full-model terms, same order.
    pub full_p_values: [f64; 6],
    /// a2', a3', a5', a6' for terms [n_t², n_p·n_t, n_t, 1].
    pub reduced_coefficients: [f64; 4],
}

struct Ols {
    beta: Vec<f64>,
    p_values: Vec<f64>,
}

/// Least squares with Householder QR. `rows` are the design-matrix rows.
fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<Ols, StatsError> {
    let n = rows.len();
    let p = rows[0].len();
    debug_assert!(rows.iter().all(|r| r.len() == p));
    if n <= p {
        return Err(StatsError::TooFewSamples { need: p + 1, got: n });
    }

    // Column-major working copy of the design matrix plus the rhs.
    let mut a = vec![0.0; n * p];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[j * n + i] = v;
        }
    }
    let mut qty = y.to_vec();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    for k in 0..p {
        let col = &a[k * n..(k + 1) * n];
        let norm = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 * scale {
            return Err(StatsError::RankDeficient(k));
        }
        let alpha = if col[k] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = col[k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            // Apply the reflector to the remaining columns and to y.
            for j in k..p {
                let dot: f64 = (k..n).map(|i| v[i - k] * a[j * n + i]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..n {
                    a[j * n + i] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..n).map(|i| v[i - k] * qty[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                qty[i] -= f * v[i - k];
            }
        }
        a[k * n + k] = alpha;
        if alpha.abs() < 1e-12 * scale {
            return Err(StatsError::RankDeficient(k));
        }
    }

    // Back-substitute R beta = (Q^T y)[..p].
    let r = |i: usize, j: usize| a[j * n + i];
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = qty[i];
        for j in i + 1..p {
            acc -= r(i, j) * beta[j];
        }
        beta[i] = acc / r(i, i);
    }

    // Residual sum of squares from the original rows.
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let fit: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            (yi - fit).powi(2)
        })
        .sum();
    let df = n - p;
    let sigma2 = rss / df as f64;

    // diag((X^T X)^-1) = row sums of squares of R^-1.
    let mut rinv = vec![0.0; p * p];
    for i in (0..p).rev() {
        rinv[i * p + i] = 1.0 / r(i, i);
        for j in i + 1..p {
            let mut acc = 0.0;
            for k in i + 1..=j {
                acc += r(i, k) * rinv[k * p + j];
            }
            rinv[i * p + j] = -acc / r(i, i);
        }
    }
    let p_values = (0..p)
        .map(|j| {
            let diag: f64 = (j..p).map(|k| rinv[j * p + k].powi(2)).sum();
            let se = (sigma2 * diag).sqrt();
            if se == 0.0 {
                // Perfect fit: zero coefficients are vacuous, others exact.
                if beta[j].abs() < 1e-9 {
                    1.0
                } else {
                    0.0
                }
            } else {
                2.0 * student_t_sf((beta[j] / se).abs(), df as f64)
            }
        })
        .collect();

    Ok(Ols { beta, p_values })
}

/// Fits the full second-order model over `(n_p, n_t, y)` triples, then
/// refits the reduced model on the historically significant terms.
pub fn fit_cost_model(
    points: &[(f64, f64, f64)],
    target: CostTarget,
) -> Result<CostModel, StatsError> {
    if points.len() < 7 {
        return Err(StatsError::TooFewSamples {
            need: 7,
            got: points.len(),
        });
    }
    let y: Vec<f64> = points.iter().map(|&(_, _, v)| v).collect();
    let full_rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&(np, nt, _)| vec![np * np, nt * nt, np * nt, np, nt, 1.0])
        .collect();
    let full = ols(&full_rows, &y)?;
    let reduced_rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&(np, nt, _)| vec![nt * nt, np * nt, nt, 1.0])
        .collect();
    let reduced = ols(&reduced_rows, &y)?;

    Ok(CostModel {
        target,
        full_coefficients: full.beta.try_into().unwrap(),
        full_p_values: full.p_values.try_into().unwrap(),
        reduced_coefficients: reduced.beta.try_into().unwrap(),
    })
}

impl CostModel {
    /// Reduced-model prediction.
    pub fn predict(&self, n_p: f64, n_t: f64) -> f64 {
        let [a2, a3, a5, a6] = self.reduced_coefficients;
        a2 * n_t * n_t + a3 * n_p * n_t + a5 * n_t + a6
    }
}
