//! Activation sparsity of trained surrogates: networks trained on more
//! data push more ReLU units to exact zero, which is what makes their
//! predictions cheaper.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use samo::surrogate::{build, sparsity, train, NetSpec, TrainConfig};
use samo::traffic::{generate_instance, objective, Solution};

fn main() {
    let instance = generate_instance(7, (3, 3), 24, 120);
    let dims = instance.dimensionality();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dataset: Vec<(Solution, f64)> = (0..2148)
        .map(|_| {
            let plan = Solution::random(&mut rng, &instance);
            let f = objective(&instance, &plan).unwrap();
            (plan, f)
        })
        .collect();
    let probes: Vec<Solution> = dataset[2048..].iter().map(|(s, _)| s.clone()).collect();

    // The larger step size puts desk-scale training in the regime where
    // unhelpful units die instead of idling near their initialization.
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    println!("dataset  zero@hidden1  zero@hidden2");
    for size in [128usize, 512, 2048] {
        let mut net = build(NetSpec::for_dimensionality(dims, 11)).unwrap();
        train(&mut net, &dataset[..size], &cfg, 23).unwrap();
        let report = sparsity(&net, &probes).unwrap();
        println!(
            "{size:>7}  {:>11.1}%  {:>11.1}%",
            report.zero_ratio_hidden1, report.zero_ratio_hidden2
        );
    }

    let mut net = build(NetSpec::for_dimensionality(dims, 11)).unwrap();
    train(&mut net, &dataset[..2048], &cfg, 23).unwrap();
    let report = sparsity(&net, &probes).unwrap();
    let h = &report.weight_histograms[0];
    println!(
        "\nfirst-layer weights span [{:.3}, {:.3}] over {} bins",
        h.min,
        h.max,
        h.counts.len()
    );
}
