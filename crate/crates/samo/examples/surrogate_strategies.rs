//! The three evaluation strategies side by side: true-only, pre-trained
//! surrogate, and periodically retrained surrogate, with their true/
//! predicted evaluation accounting.

use samo::optim::{run, AlgoParams, Algorithm, RunConfig, Strategy};
use samo::profile::Profiler;
use samo::surrogate::TrainConfig;
use samo::traffic::generate_instance;

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    println!("strategy  true evals  predictions  retrains  best F");
    for strategy in [Strategy::None, Strategy::Pretrain, Strategy::Retrain] {
        let cfg = RunConfig {
            population_size: 100,
            max_fe: 3_000,
            n_t: 100,
            n_r: 10,
            strategy,
            seed: 9,
            log_predictions: false,
        };
        let mut profiler = Profiler::proxy(50.0, 5.0);
        let trace = run(
            &instance,
            Algorithm::Pso,
            &cfg,
            &AlgoParams::default(),
            &TrainConfig::default(),
            &mut profiler,
        )
        .unwrap();
        println!(
            "{:<9} {:>10} {:>12} {:>9} {:>9.4}",
            format!("{strategy:?}").to_lowercase(),
            trace.true_eval_count,
            trace.prediction_count,
            trace.retrain_rounds,
            trace.final_best.1
        );
    }
    println!();
    println!("pretrain runs n_t true evaluations plus one closing check;");
    println!("retrain adds n_r re-evaluations per surrogate generation.");
}
