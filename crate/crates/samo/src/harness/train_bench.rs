//! Surrogate train/use grid: for each dataset size, repeatedly sample a
//! training set from the archive (without replacement), train, profile
//! the training scope, then profile one Use scope per prediction on a
//! disjoint 100-solution test set. Emits per-repetition rows plus MAPE
//! and activation-sparsity tables.

use std::fs::{self, File};
use std::io::Write;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval_bench::load_archive;
use super::{EnergyOptions, HarnessError, SCHEMA_VERSION};
use crate::profile::{Component, Profiler};
use crate::stats::mape;
use crate::surrogate::{build, param_count, save_net, sparsity, train, NetSpec, TrainConfig};
use crate::traffic::Solution;

pub const DEFAULT_SIZE_GRID: [usize; 7] = [128, 256, 512, 1024, 2048, 4096, 8192];
pub const TEST_SET_SIZE: usize = 100;

#[derive(Debug, Clone)]
pub struct TrainBenchSpec {
    /// `archive.csv` produced by a prior eval bench.
    pub archive: PathBuf,
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub energy: EnergyOptions,
    pub train_cfg: TrainConfig,
    /// Write each trained network checkpoint next to the CSVs.
    pub save_nets: bool,
}

#[derive(Debug)]
pub struct TrainBenchOutput {
    pub train_csv: PathBuf,
    pub use_csv: PathBuf,
    pub mape_csv: PathBuf,
    pub sparsity_csv: PathBuf,
    /// (size, repetition, mape %) rows.
    pub mape_rows: Vec<(usize, usize, f64)>,
    /// (size, repetition, zero-ratio hidden1 %, hidden2 %) rows.
    pub sparsity_rows: Vec<(usize, usize, f64, f64)>,
}

fn mix_seed(base: u64, rep: usize) -> u64 {
    let mut x = base ^ (rep as u64).rotate_left(32);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn train_bench(spec: &TrainBenchSpec) -> Result<TrainBenchOutput, HarnessError> {
    if spec.repetitions == 0 || spec.sizes.is_empty() {
        return Err(HarnessError::BadSpec(
            "need at least one size and one repetition".into(),
        ));
    }
    let archive = load_archive(&spec.archive)?;
    let largest = *spec.sizes.iter().max().unwrap();
    if archive.len() < largest + TEST_SET_SIZE {
        let feasible: Vec<usize> = spec
            .sizes
            .iter()
            .copied()
            .filter(|s| s + TEST_SET_SIZE <= archive.len())
            .collect();
        return Err(HarnessError::BadSpec(format!(
            "archive has {} entries; size {largest} needs {} (feasible sizes: {feasible:?})",
            archive.len(),
            largest + TEST_SET_SIZE
        )));
    }
    let dims = archive[0].0.len();
    fs::create_dir_all(&spec.out_dir)?;

    let mut profiler = Profiler::new(spec.energy.meter()?);
    let source = profiler.source().label().to_string();

    let train_csv = spec.out_dir.join("train_rows.csv");
    let use_csv = spec.out_dir.join("use_rows.csv");
    let mape_csv = spec.out_dir.join("mape.csv");
    let sparsity_csv = spec.out_dir.join("sparsity.csv");
    let mut train_out = File::create(&train_csv)?;
    writeln!(
        train_out,
        "schema_version,size,rep,n_p,n_t,cpu_j,dram_j,total_j,wall_s,peak_alloc_b,final_loss,source"
    )?;
    let mut use_out = File::create(&use_csv)?;
    writeln!(
        use_out,
        "schema_version,size,rep,pred_index,cpu_j,dram_j,total_j,wall_s,peak_alloc_b,source"
    )?;
    let mut mape_out = File::create(&mape_csv)?;
    writeln!(mape_out, "schema_version,size,rep,mape")?;
    let mut sparsity_out = File::create(&sparsity_csv)?;
    writeln!(
        sparsity_out,
        "schema_version,size,rep,zero_ratio_hidden1,zero_ratio_hidden2"
    )?;

    let mut mape_rows = Vec::new();
    let mut sparsity_rows = Vec::new();
    for &size in &spec.sizes {
        for rep in 0..spec.repetitions {
            // Per-repetition seed shared across sizes: repetition r uses
            // the same initial weights and the same archive permutation
            // for every size, so size comparisons are paired.
            let seed = mix_seed(spec.seed, rep);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..archive.len()).collect();
            order.shuffle(&mut rng);
            let train_set: Vec<(Solution, f64)> = order[..size]
                .iter()
                .map(|&i| archive[i].clone())
                .collect();
            let test_set: Vec<(Solution, f64)> = order[size..size + TEST_SET_SIZE]
                .iter()
                .map(|&i| archive[i].clone())
                .collect();

            let mut net = build(NetSpec::for_dimensionality(dims, seed))?;
            let n_p = param_count(&net);
            let train_cfg = &spec.train_cfg;
            let (report, delta) = profiler.measure_delta(Component::Training, || {
                train(&mut net, &train_set, train_cfg, seed)
            })?;
            let report = report?;
            writeln!(
                train_out,
                "{SCHEMA_VERSION},{size},{rep},{n_p},{size},{},{},{},{},{},{},{source}",
                delta.energy.cpu_joules,
                dram(delta.energy.dram_joules),
                delta.energy.total_joules(),
                delta.wall_seconds,
                delta.peak_alloc_bytes,
                report.final_loss,
            )?;

            let mut predicted = Vec::with_capacity(test_set.len());
            for (index, (solution, _)) in test_set.iter().enumerate() {
                let (value, delta) =
                    profiler.measure_delta(Component::Use, || net.predict(solution))?;
                predicted.push(value?);
                writeln!(
                    use_out,
                    "{SCHEMA_VERSION},{size},{rep},{index},{},{},{},{},{},{source}",
                    delta.energy.cpu_joules,
                    dram(delta.energy.dram_joules),
                    delta.energy.total_joules(),
                    delta.wall_seconds,
                    delta.peak_alloc_bytes,
                )?;
            }
            let actual: Vec<f64> = test_set.iter().map(|&(_, f)| f).collect();
            let rep_mape = mape(&actual, &predicted)?;
            writeln!(mape_out, "{SCHEMA_VERSION},{size},{rep},{rep_mape}")?;
            mape_rows.push((size, rep, rep_mape));

            if spec.save_nets {
                save_net(&net, &spec.out_dir.join(format!("net_size{size}_rep{rep}.json")))?;
            }
            let probes: Vec<Solution> = test_set.iter().map(|(s, _)| s.clone()).collect();
            let report = sparsity(&net, &probes)?;
            writeln!(
                sparsity_out,
                "{SCHEMA_VERSION},{size},{rep},{},{}",
                report.zero_ratio_hidden1, report.zero_ratio_hidden2
            )?;
            sparsity_rows.push((
                size,
                rep,
                report.zero_ratio_hidden1,
                report.zero_ratio_hidden2,
            ));
        }
    }
    profiler.finish()?;

    Ok(TrainBenchOutput {
        train_csv,
        use_csv,
        mape_csv,
        sparsity_csv,
        mape_rows,
        sparsity_rows,
    })
}

fn dram(j: Option<f64>) -> String {
    match j {
        Some(j) => j.to_string(),
        None => "NA".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::eval_bench::{eval_bench, EvalBenchSpec};
    use super::*;
    use crate::traffic::{generate_instance, save_instance};

    fn archive_fixture(count: usize) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let instance_path = dir.path().join("instance.json");
        save_instance(&generate_instance(3, (2, 1), 5, 30), &instance_path).unwrap();
        let out = eval_bench(&EvalBenchSpec {
            instance: instance_path,
            count,
            seed: 5,
            out_dir: dir.path().join("bench"),
            energy: EnergyOptions::proxy_for_tests(),
        })
        .unwrap();
        (dir, out.archive_csv)
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn grid_accounting() {
        let (dir, archive) = archive_fixture(240);
        let out = train_bench(&TrainBenchSpec {
            archive,
            sizes: vec![128],
            repetitions: 2,
            seed: 9,
            out_dir: dir.path().join("tb"),
            energy: EnergyOptions::proxy_for_tests(),
            train_cfg: quick_cfg(),
            save_nets: false,
        })
        .unwrap();
        let train_rows = std::fs::read_to_string(&out.train_csv).unwrap();
        assert_eq!(train_rows.lines().count(), 1 + 2);
        let use_rows = std::fs::read_to_string(&out.use_csv).unwrap();
        assert_eq!(use_rows.lines().count(), 1 + 2 * TEST_SET_SIZE);
        assert_eq!(out.mape_rows.len(), 2);
        assert_eq!(out.sparsity_rows.len(), 2);
    }

    #[test]
    fn infeasible_size_lists_feasible_ones() {
        let (dir, archive) = archive_fixture(150);
        let err = train_bench(&TrainBenchSpec {
            archive,
            sizes: vec![32, 128],
            repetitions: 1,
            seed: 0,
            out_dir: dir.path().join("tb"),
            energy: EnergyOptions::proxy_for_tests(),
            train_cfg: quick_cfg(),
            save_nets: false,
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("feasible sizes"), "unexpected error: {msg}");
        assert!(msg.contains("32"));
    }
}
