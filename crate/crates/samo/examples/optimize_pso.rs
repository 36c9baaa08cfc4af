//! Baseline PSO (every evaluation uses the true objective) on a
//! generated instance, with the best-F trace printed as it descends.

use samo::optim::{run, AlgoParams, Algorithm, RunConfig, Strategy};
use samo::profile::Profiler;
use samo::surrogate::TrainConfig;
use samo::traffic::generate_instance;

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    let cfg = RunConfig {
        population_size: 50,
        max_fe: 2_000,
        strategy: Strategy::None,
        seed: 42,
        ..RunConfig::default()
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

    println!("true evaluations: {}", trace.true_eval_count);
    let mut last = f64::INFINITY;
    for record in &trace.true_evals {
        if record.best_so_far < last {
            println!("  fe {:>5}: best F = {:.4}", record.fe_index, record.best_so_far);
            last = record.best_so_far;
        }
    }
    println!("final best plan: {:?}", trace.final_best.0.durations());

    let table = profiler.finish().unwrap();
    for component in &table.components {
        println!(
            "{:<15} {:>8.3} s wall, {} calls",
            component.component.label(),
            component.wall_seconds,
            component.call_count
        );
    }
}
