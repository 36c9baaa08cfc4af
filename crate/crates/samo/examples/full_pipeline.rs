//! The whole experiment pipeline in one sitting: generate an instance,
//! characterize evaluation cost, grid the surrogate over dataset sizes,
//! run all three strategies, and analyze the emitted CSVs.
//!
//! Uses the proxy energy backend so it runs anywhere; on a machine with
//! readable RAPL counters drop `EnergyMode::ForceProxy`.

use samo::harness::{
    analyze_kruskal, analyze_lognormal, analyze_mape, eval_bench, run_experiment, train_bench,
    EnergyOptions, EvalBenchSpec, RunExperimentSpec, TrainBenchSpec,
};
use samo::optim::{AlgoParams, Algorithm, Strategy};
use samo::surrogate::TrainConfig;
use samo::traffic::{generate_instance, save_instance};

fn main() {
    let root = std::env::temp_dir().join("samo_pipeline");
    std::fs::create_dir_all(&root).unwrap();
    let energy = EnergyOptions {
        mode: samo::harness::EnergyMode::ForceProxy,
        ..EnergyOptions::default()
    };

    let instance_path = root.join("instance.json");
    save_instance(&generate_instance(7, (2, 2), 24, 120), &instance_path).unwrap();
    println!("[1/4] instance at {}", instance_path.display());

    let bench = eval_bench(&EvalBenchSpec {
        instance: instance_path.clone(),
        count: 700,
        seed: 1,
        out_dir: root.join("bench"),
        energy,
    })
    .unwrap();
    let fit = analyze_lognormal(&bench.evals_csv, "wall_s").unwrap();
    println!(
        "[2/4] evaluation cost: mean {:.2e} s, lognormal mu {:.2} sigma {:.2}",
        fit.mean, fit.mu, fit.sigma
    );

    let tb = train_bench(&TrainBenchSpec {
        archive: bench.archive_csv.clone(),
        sizes: vec![128, 512],
        repetitions: 3,
        seed: 2,
        out_dir: root.join("tb"),
        energy,
        train_cfg: TrainConfig::default(),
        save_nets: false,
    })
    .unwrap();
    for (size, median) in analyze_mape(&tb.mape_csv, "mape", "size").unwrap() {
        println!("[3/4] median MAPE at {size}: {median:.2}%");
    }
    let (labels, kw) = analyze_kruskal(&tb.use_csv, "total_j", "size").unwrap();
    println!(
        "[3/4] per-use energy differs across sizes {labels:?}: p = {:.2e}",
        kw.p_value
    );

    for strategy in [Strategy::None, Strategy::Pretrain, Strategy::Retrain] {
        let out = run_experiment(&RunExperimentSpec {
            instance: instance_path.clone(),
            algorithm: Algorithm::Pso,
            strategy,
            population_size: 50,
            max_fe: 1_500,
            n_t: 50,
            n_r: 5,
            seeds: vec![0, 1],
            out_dir: root.join(format!("run_{strategy:?}").to_lowercase()),
            energy,
            train_cfg: TrainConfig::default(),
            params: AlgoParams::default(),
            mape_audit: strategy == Strategy::Retrain,
        })
        .unwrap();
        let best = out
            .summaries
            .iter()
            .map(|s| s.final_best_f)
            .fold(f64::INFINITY, f64::min);
        println!(
            "[4/4] {strategy:?}: best F {best:.4}, {} true evals per run",
            out.summaries[0].true_evals
        );
    }
    println!("results under {}", root.display());
}
