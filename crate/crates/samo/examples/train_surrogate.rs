//! Train the surrogate network on simulator-labelled plans, measure
//! held-out accuracy, and round-trip a checkpoint.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use samo::stats::mape;
use samo::surrogate::{build, load_net, param_count, save_net, train, NetSpec, TrainConfig};
use samo::traffic::{generate_instance, objective, Solution};

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    let dims = instance.dimensionality();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dataset: Vec<(Solution, f64)> = (0..1100)
        .map(|_| {
            let plan = Solution::random(&mut rng, &instance);
            let f = objective(&instance, &plan).unwrap();
            (plan, f)
        })
        .collect();
    let (train_set, test_set) = dataset.split_at(1000);

    let mut net = build(NetSpec::for_dimensionality(dims, 3)).unwrap();
    println!(
        "network {}→{}→{}→1, {} parameters",
        dims,
        net.spec().hidden1,
        net.spec().hidden2,
        param_count(&net)
    );
    let report = train(&mut net, train_set, &TrainConfig::default(), 17).unwrap();
    println!(
        "trained {} epochs, final epoch MSE (scaled) {:.5}",
        report.epochs_run, report.final_loss
    );

    let actual: Vec<f64> = test_set.iter().map(|&(_, f)| f).collect();
    let predicted: Vec<f64> = test_set
        .iter()
        .map(|(plan, _)| net.predict(plan).unwrap())
        .collect();
    println!(
        "held-out MAPE over {} plans: {:.2}%",
        test_set.len(),
        mape(&actual, &predicted).unwrap()
    );

    let path = std::env::temp_dir().join("samo_net.json");
    save_net(&net, &path).unwrap();
    let restored = load_net(&path).unwrap();
    let probe = &test_set[0].0;
    assert_eq!(
        net.predict(probe).unwrap().to_bits(),
        restored.predict(probe).unwrap().to_bits()
    );
    println!(
        "checkpoint round-trips bit-identically ({})",
        path.display()
    );
}
