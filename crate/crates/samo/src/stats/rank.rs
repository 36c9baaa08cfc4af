//! Rank-based nonparametric tests: Kruskal–Wallis across k groups and
//! one-sided pairwise Mann–Whitney U comparisons (normal approximation,
//! tie-corrected) for the post-hoc significance matrix.

use super::special::{chi2_sf, normal_cdf};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KruskalResult {
    /// Tie-corrected H statistic.
    pub h: f64,
    /// Degrees of freedom (groups − 1).
    pub df: u32,
    pub p_value: f64,
}

/// Assigns average ranks (1-based) to the pooled values and returns the
/// ranks in input order plus the tie-correction term `Σ(t³ - t)`.
fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let run = (j - i + 1) as f64;
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        tie_term += run.powi(3) - run;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Kruskal–Wallis H test across `groups`.
///
/// All-identical data is not an error: it yields H = 0 and p = 1.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalResult, StatsError> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::BadGroups);
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    for (i, v) in pooled.iter().enumerate() {
        if !v.is_finite() {
            return Err(StatsError::NonFinite(i));
        }
    }
    let n = pooled.len() as f64;
    let (ranks, tie_term) = average_ranks(&pooled);

    let mut h = 0.0;
    let mut offset = 0;
    for group in groups {
        let len = group.len();
        let rank_sum: f64 = ranks[offset..offset + len].iter().sum();
        h += rank_sum * rank_sum / len as f64;
        offset += len;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let correction = 1.0 - tie_term / (n.powi(3) - n);
    let df = (groups.len() - 1) as u32;
    if correction <= 0.0 {
        // Every pooled value is identical.
        return Ok(KruskalResult {
            h: 0.0,
            df,
            p_value: 1.0,
        });
    }
    h /= correction;
    // Guard against -0.0 / tiny negatives from cancellation.
    if h < 0.0 {
        h = 0.0;
    }
    Ok(KruskalResult {
        h,
        df,
        p_value: chi2_sf(h, df),
    })
}

/// One-sided Mann–Whitney p-value for "sample A is stochastically lower
/// than sample B", using the tie-corrected normal approximation with
/// continuity correction. Returns 1.0 when the variance degenerates
/// (all pooled values identical).
pub fn mann_whitney_less(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let (ranks, tie_term) = average_ranks(&pooled);
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let n = na + nb;
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    let mean = na * nb / 2.0;
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = (u_a - mean + 0.5) / variance.sqrt();
    normal_cdf(z)
}

/// Ordered-pairwise significance matrix: `matrix[i][j]` is true iff group
/// `i` is stochastically lower than group `j` at level `alpha`. The
/// diagonal is always false.
pub fn pairwise_posthoc(groups: &[Vec<f64>], alpha: f64) -> Result<Vec<Vec<bool>>, StatsError> {
    if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::BadGroups);
    }
    let k = groups.len();
    let mut matrix = vec![vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                matrix[i][j] = mann_whitney_less(&groups[i], &groups[j]) < alpha;
            }
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_ranked_oracle() {
        // Ranks 1..9, rank sums 6 / 15 / 24:
        // H = 12/(9·10) · (36/3 + 225/3 + 576/3) - 3·10 = 37.2 - 30 = 7.2.
        let groups = vec![
            vec![1.0, 2.0, 3.0],
            vec![10.0, 20.0, 30.0],
            vec![100.0, 200.0, 300.0],
        ];
        let r = kruskal_wallis(&groups).unwrap();
        assert!((r.h - 7.2).abs() < 1e-12);
        assert_eq!(r.df, 2);
        assert!((r.p_value - (-3.6f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn identical_groups_give_unit_p() {
        let groups = vec![vec![5.0; 4], vec![5.0; 4], vec![5.0; 4]];
        let r = kruskal_wallis(&groups).unwrap();
        assert_eq!(r.h, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn well_separated_groups_reference() {
        // Frozen from an independent implementation (SciPy kruskal).
        let a: Vec<f64> = (1..=30).map(f64::from).collect();
        let b: Vec<f64> = (100..=129).map(f64::from).collect();
        let r = kruskal_wallis(&[a, b].to_vec()).unwrap();
        assert!((r.h - 44.26229508196721).abs() < 1e-9);
        assert!(r.p_value < 0.01);
    }

    #[test]
    fn tie_corrected_reference() {
        let groups = vec![
            vec![1.0, 2.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0, 4.0],
            vec![4.0, 5.0, 5.0, 6.0],
        ];
        let r = kruskal_wallis(&groups).unwrap();
        assert!((r.h - 8.160326086956522).abs() < 1e-9);
        assert!((r.p_value - 0.016904709225411534).abs() < 1e-9);
    }

    #[test]
    fn monotone_transform_invariance() {
        let groups = vec![
            vec![0.3, 1.7, 2.2, 0.9],
            vec![3.0, 2.8, 4.4],
            vec![1.1, 5.0, 6.2, 7.7, 0.4],
        ];
        let transformed: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|v| f64::exp(v * 2.0)).collect())
            .collect();
        let a = kruskal_wallis(&groups).unwrap();
        let b = kruskal_wallis(&transformed).unwrap();
        assert!((a.h - b.h).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_group() {
        assert!(matches!(
            kruskal_wallis(&[vec![1.0, 2.0]].to_vec()),
            Err(StatsError::BadGroups)
        ));
    }

    #[test]
    fn mann_whitney_reference_points() {
        // Frozen from SciPy mannwhitneyu(alternative='less',
        // method='asymptotic').
        let a: Vec<f64> = (1..=30).map(f64::from).collect();
        let b: Vec<f64> = (100..=129).map(f64::from).collect();
        assert!((mann_whitney_less(&a, &b) - 1.5099296795810785e-11).abs() < 1e-17);
        assert!((mann_whitney_less(&b, &a) - 0.9999999999863444).abs() < 1e-12);
        let g4 = [1.0, 2.0, 2.0, 5.0];
        let g5 = [2.0, 2.0, 6.0, 7.0];
        assert!((mann_whitney_less(&g4, &g5) - 0.14085895791286496).abs() < 1e-12);
    }

    #[test]
    fn posthoc_separated_groups() {
        let a: Vec<f64> = (1..=30).map(f64::from).collect();
        let b: Vec<f64> = (100..=129).map(f64::from).collect();
        let m = pairwise_posthoc(&[a, b].to_vec(), 0.01).unwrap();
        assert!(m[0][1]);
        assert!(!m[1][0]);
        assert!(!m[0][0] && !m[1][1]);
    }

    #[test]
    fn posthoc_identical_groups_all_false() {
        let g = vec![vec![3.0; 10], vec![3.0; 10], vec![3.0; 10]];
        let m = pairwise_posthoc(&g, 0.01).unwrap();
        assert!(m.iter().flatten().all(|&cell| !cell));
    }

    #[test]
    fn posthoc_antisymmetry() {
        let groups = vec![
            vec![1.0, 4.0, 2.0, 8.0, 3.0],
            vec![2.0, 5.0, 9.0, 3.0, 7.0],
            vec![10.0, 12.0, 11.0, 9.5, 14.0],
        ];
        let m = pairwise_posthoc(&groups, 0.05).unwrap();
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert!(!(m[i][j] && m[j][i]), "both ({i},{j}) and ({j},{i}) set");
            }
        }
    }
}
