//! Post-hoc analysis over result CSVs: log-normal summaries, group
//! comparisons, MAPE tables, cost-model fits, and break-even arithmetic.

use std::path::Path;

use super::{read_column, read_columns, read_grouped_column, HarnessError};
use crate::stats::{
    break_even, fit_cost_model, fit_lognormal, kruskal_wallis, pairwise_posthoc, CostModel,
    CostTarget, KruskalResult, LogNormalFit,
};

/// Log-normal fit of one numeric column.
pub fn analyze_lognormal(input: &Path, column: &str) -> Result<LogNormalFit, HarnessError> {
    Ok(fit_lognormal(&read_column(input, column)?)?)
}

/// Kruskal–Wallis over a column grouped by another; returns the group
/// labels in test order.
pub fn analyze_kruskal(
    input: &Path,
    value_column: &str,
    group_column: &str,
) -> Result<(Vec<String>, KruskalResult), HarnessError> {
    let groups = read_grouped_column(input, value_column, group_column)?;
    let labels: Vec<String> = groups.iter().map(|(k, _)| k.clone()).collect();
    let samples: Vec<Vec<f64>> = groups.into_iter().map(|(_, v)| v).collect();
    Ok((labels, kruskal_wallis(&samples)?))
}

/// One-sided pairwise significance matrix over grouped samples.
pub fn analyze_posthoc(
    input: &Path,
    value_column: &str,
    group_column: &str,
    alpha: f64,
) -> Result<(Vec<String>, Vec<Vec<bool>>), HarnessError> {
    let groups = read_grouped_column(input, value_column, group_column)?;
    let labels: Vec<String> = groups.iter().map(|(k, _)| k.clone()).collect();
    let samples: Vec<Vec<f64>> = groups.into_iter().map(|(_, v)| v).collect();
    Ok((labels, pairwise_posthoc(&samples, alpha)?))
}

/// Median of each group of a column (lower median for even counts),
/// e.g. the MAPE-by-dataset-size table.
pub fn analyze_mape(
    input: &Path,
    value_column: &str,
    group_column: &str,
) -> Result<Vec<(String, f64)>, HarnessError> {
    let groups = read_grouped_column(input, value_column, group_column)?;
    Ok(groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = v[(v.len() - 1) / 2];
            (k, median)
        })
        .collect())
}

/// Break-even uses from explicit constants.
pub fn analyze_breakeven(
    e_train_small: f64,
    e_use_small: f64,
    e_train_large: f64,
    e_use_large: f64,
) -> Result<f64, HarnessError> {
    Ok(break_even(
        e_train_small,
        e_use_small,
        e_train_large,
        e_use_large,
    )?)
}

/// Break-even from measured train/use tables: means of `column` grouped
/// by `size`, comparing the `small` and `large` dataset sizes.
pub fn breakeven_from_csv(
    train_csv: &Path,
    use_csv: &Path,
    column: &str,
    small: usize,
    large: usize,
) -> Result<f64, HarnessError> {
    let mean_for = |path: &Path, size: usize| -> Result<f64, HarnessError> {
        let groups = read_grouped_column(path, column, "size")?;
        let key = size.to_string();
        let (_, values) = groups
            .into_iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| {
                HarnessError::BadSpec(format!("size {size} not present in {}", path.display()))
            })?;
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    };
    let e_train_small = mean_for(train_csv, small)?;
    let e_train_large = mean_for(train_csv, large)?;
    let e_use_small = mean_for(use_csv, small)?;
    let e_use_large = mean_for(use_csv, large)?;
    Ok(break_even(
        e_train_small,
        e_use_small,
        e_train_large,
        e_use_large,
    )?)
}

/// Polynomial cost model over `(n_p, n_t, y)` columns.
pub fn analyze_cost_model(
    input: &Path,
    y_column: &str,
    target: CostTarget,
) -> Result<CostModel, HarnessError> {
    let cols = read_columns(input, &["n_p", "n_t", y_column])?;
    let points: Vec<(f64, f64, f64)> = cols[0]
        .iter()
        .zip(&cols[1])
        .zip(&cols[2])
        .map(|((&np, &nt), &y)| (np, nt, y))
        .collect();
    Ok(fit_cost_model(&points, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write!(std::fs::File::create(&path).unwrap(), "{content}").unwrap();
        (dir, path)
    }

    #[test]
    fn breakeven_constants_match_reference() {
        let n = analyze_breakeven(217.79, 3.46, 2574.66, 2.64).unwrap();
        assert!((n - 2874.0).abs() <= 1.0);
    }

    #[test]
    fn kruskal_rejects_single_group() {
        let (_d, path) = write_csv("schema_version,size,v\n1,128,1.0\n1,128,2.0\n");
        assert!(analyze_kruskal(&path, "v", "size").is_err());
    }

    #[test]
    fn posthoc_matrix_is_square() {
        let mut content = String::from("schema_version,size,v\n");
        for size in [128, 256, 512] {
            for i in 0..6 {
                content.push_str(&format!("1,{size},{}\n", size as f64 + i as f64));
            }
        }
        let (_d, path) = write_csv(&content);
        let (labels, matrix) = analyze_posthoc(&path, "v", "size", 0.01).unwrap();
        assert_eq!(labels, vec!["128", "256", "512"]);
        assert_eq!(matrix.len(), 3);
        assert!(matrix.iter().all(|row| row.len() == 3));
    }

    #[test]
    fn mape_median_uses_lower_median() {
        let (_d, path) = write_csv(
            "schema_version,size,mape\n1,128,10\n1,128,30\n1,2048,5\n1,2048,9\n",
        );
        let rows = analyze_mape(&path, "mape", "size").unwrap();
        assert_eq!(rows, vec![("128".into(), 10.0), ("2048".into(), 5.0)]);
    }

    #[test]
    fn breakeven_from_measured_means() {
        let (_d, train) = write_csv(
            "schema_version,size,total_j\n1,128,200\n1,128,240\n1,8192,2500\n1,8192,2700\n",
        );
        let (_d2, use_) = write_csv(
            "schema_version,size,total_j\n1,128,3.4\n1,128,3.6\n1,8192,2.5\n1,8192,2.7\n",
        );
        // (2600 - 220) / (3.5 - 2.6) = 2644.4...
        let n = breakeven_from_csv(&train, &use_, "total_j", 128, 8192).unwrap();
        assert!((n - 2380.0 / 0.9).abs() < 1e-9);
    }
}
