//! Property tests for the cross-cutting invariants: operator bound
//! safety and integrality, file-format round trips, and the invariance
//! laws of the statistics toolkit.

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use samo::optim::{
    ga_step, polynomial_mutate_gene, pso_step, stochastic_round, GaParams, Individual, Particle,
    PsoParams,
};
use samo::stats::{fit_lognormal, kruskal_wallis, mape};
use samo::traffic::{
    generate_instance, load_instance, load_solution, save_instance, save_solution, Solution,
};

proptest! {
    #[test]
    fn stochastic_round_is_floor_or_ceil(
        values in prop::collection::vec(-50.0f64..50.0, 1..6),
        lambda in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rounded = stochastic_round(&values, lambda, &mut rng);
        for (&v, &r) in values.iter().zip(&rounded) {
            prop_assert!(r == v.floor() as i64 || r == v.ceil() as i64);
        }
    }

    #[test]
    fn polynomial_mutation_stays_in_bounds(
        x in 5i64..=60,
        u in 0.0f64..1.0,
        eta in 1.0f64..50.0,
    ) {
        let y = polynomial_mutate_gene(x, u, eta, (5, 60));
        prop_assert!((5..=60).contains(&y));
    }

    #[test]
    fn pso_step_keeps_positions_integral_and_bounded(
        seed in any::<u64>(),
        steps in 1usize..4,
    ) {
        let bounds = (5i64, 60);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = 4;
        let mut swarm: Vec<Particle> = (0..6)
            .map(|k| {
                let pos: Vec<i64> = (0..dims).map(|d| 5 + ((seed as i64).abs() + k + d) % 56).collect();
                Particle::new(Solution::new(pos))
            })
            .collect();
        let mut gbest = (swarm[0].position.clone(), f64::INFINITY);
        let objective = |s: &Solution| Ok(s.durations().iter().map(|&d| (d - 30).pow(2)).sum::<i64>() as f64);
        for _ in 0..steps {
            pso_step(
                &mut swarm,
                &mut gbest,
                objective,
                0.4,
                bounds,
                &PsoParams::default(),
                &mut rng,
            )
            .unwrap();
            for p in &swarm {
                for &d in p.position.durations() {
                    prop_assert!((5..=60).contains(&d));
                }
            }
        }
        // gbest is non-increasing by construction and within bounds.
        for &d in gbest.0.durations() {
            prop_assert!((5..=60).contains(&d));
        }
    }

    #[test]
    fn ga_step_keeps_genomes_bounded_and_never_worsens_best(
        seed in any::<u64>(),
    ) {
        let bounds = (5i64, 60);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let value = |s: &Solution| s.durations().iter().map(|&d| (d - 20).abs()).sum::<i64>() as f64;
        let mut population: Vec<Individual> = (0..8)
            .map(|k| {
                let genes: Vec<i64> = (0..3).map(|d| 5 + ((seed as i64).abs() / (k + d + 1)) % 56).collect();
                let genome = Solution::new(genes);
                let v = value(&genome);
                Individual { genome, value: v }
            })
            .collect();
        let best_before = population.iter().map(|i| i.value).fold(f64::INFINITY, f64::min);
        ga_step(
            &mut population,
            |s| Ok(value(s)),
            &GaParams::default(),
            bounds,
            &mut rng,
        )
        .unwrap();
        let best_after = population.iter().map(|i| i.value).fold(f64::INFINITY, f64::min);
        prop_assert!(best_after <= best_before);
        for ind in &population {
            for &d in ind.genome.durations() {
                prop_assert!((5..=60).contains(&d));
            }
        }
    }

    #[test]
    fn solution_file_round_trip(durations in prop::collection::vec(-1000i64..1000, 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.txt");
        let solution = Solution::new(durations);
        save_solution(&solution, &path).unwrap();
        prop_assert_eq!(load_solution(&path).unwrap(), solution);
    }

    #[test]
    fn instance_file_round_trip(
        seed in any::<u64>(),
        rows in 1usize..3,
        cols in 1usize..3,
        vehicles in 0usize..8,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        let instance = generate_instance(seed, (rows, cols), vehicles, 40);
        save_instance(&instance, &path).unwrap();
        prop_assert_eq!(load_instance(&path).unwrap(), instance);
    }

    #[test]
    fn lognormal_fit_scale_equivariance(
        samples in prop::collection::vec(0.1f64..1e4, 4..40),
        scale in 0.001f64..1000.0,
    ) {
        let base = fit_lognormal(&samples).unwrap();
        let scaled: Vec<f64> = samples.iter().map(|s| s * scale).collect();
        let shifted = fit_lognormal(&scaled).unwrap();
        prop_assert!((shifted.mu - base.mu - scale.ln()).abs() < 1e-9);
        prop_assert!((shifted.sigma - base.sigma).abs() < 1e-9);
    }

    #[test]
    fn kruskal_invariant_under_monotone_transform(
        a in prop::collection::vec(-50.0f64..50.0, 2..8),
        b in prop::collection::vec(-50.0f64..50.0, 2..8),
        c in prop::collection::vec(-50.0f64..50.0, 2..8),
        slope in 0.1f64..10.0,
        offset in -100.0f64..100.0,
    ) {
        let groups = vec![a, b, c];
        let transformed: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|v| slope * v + offset).collect())
            .collect();
        let base = kruskal_wallis(&groups).unwrap();
        let mapped = kruskal_wallis(&transformed).unwrap();
        prop_assert!((base.h - mapped.h).abs() < 1e-9);
    }

    #[test]
    fn mape_scale_invariance(
        pairs in prop::collection::vec((0.1f64..1e4, -1e4f64..1e4), 1..20),
        scale in prop::sample::select(vec![-7.5f64, -1.0, 0.25, 3.0, 400.0]),
    ) {
        let (actual, predicted): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let base = mape(&actual, &predicted).unwrap();
        let sa: Vec<f64> = actual.iter().map(|v| v * scale).collect();
        let sp: Vec<f64> = predicted.iter().map(|v| v * scale).collect();
        let scaled = mape(&sa, &sp).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1.0));
    }
}
