//! Baseline GA on the same instance as the PSO example: binary
//! tournaments, uniform crossover, integer polynomial mutation, and
//! elitist survivor selection.

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
        Algorithm::Ga,
        &cfg,
        &AlgoParams::default(),
        &TrainConfig::default(),
        &mut profiler,
    )
    .unwrap();

    let initial_best = trace.true_evals[..cfg.population_size]
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    println!("initial population best: {initial_best:.4}");
    println!("final best:              {:.4}", trace.final_best.1);
    println!(
        "improvement:             {:.1}%",
        (initial_best - trace.final_best.1) / initial_best * 100.0
    );
    for generation in trace.generations.iter().step_by(10) {
        println!(
            "  generation {:>3}: best of generation {:.4}",
            generation.generation, generation.best_value
        );
    }
}
