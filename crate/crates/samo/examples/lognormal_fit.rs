//! Fit log-normal cost models to measured evaluation costs and print a
//! summary row per metric (mean, standard deviation, log-parameters,
//! and goodness of fit).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use samo::profile::{Component, Profiler};
use samo::stats::fit_lognormal;
use samo::traffic::{generate_instance, objective, Solution};

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut profiler = Profiler::proxy(50.0, 5.0);

    let mut wall = Vec::new();
    let mut joules = Vec::new();
    for _ in 0..1000 {
        let plan = Solution::random(&mut rng, &instance);
        let (_, delta) = profiler
            .measure_delta(Component::Evaluation, || objective(&instance, &plan))
            .unwrap();
        wall.push(delta.wall_seconds);
        joules.push(delta.energy.total_joules());
    }
    profiler.finish().unwrap();

    println!("metric       E          SD         mu       sigma    NMSE");
    for (name, samples) in [("wall_s", &wall), ("total_j", &joules)] {
        let fit = fit_lognormal(samples).unwrap();
        println!(
            "{name:<10} {:>10.6} {:>10.6} {:>8.3} {:>8.3} {:>9.3e}",
            fit.mean, fit.sd, fit.mu, fit.sigma, fit.nmse
        );
    }
    println!("\n(1000 evaluations of seeded random plans, proxy energy)");
}
