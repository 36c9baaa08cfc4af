//! Evaluate a single traffic-light plan: simulation counters, the
//! green/red duration ratio, and the combined scalar objective.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use samo::traffic::{generate_instance, objective_from_outcome, phase_ratio, simulate, Solution};

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let plan = Solution::random(&mut rng, &instance);
    println!("plan: {:?}", plan.durations());

    let outcome = simulate(&instance, &plan).unwrap();
    println!("arrived:            {}", outcome.arrived);
    println!("not arrived:        {}", outcome.not_arrived);
    println!("total travel time:  {} ticks", outcome.total_travel_time);
    println!("total waiting time: {} ticks", outcome.total_waiting_time);

    let p = phase_ratio(&instance, &plan).unwrap();
    let f = objective_from_outcome(&outcome, p, instance.simulation_time);
    println!("phase ratio P:      {p:.2}");
    println!("objective F:        {f:.4} (smaller is better)");
}
