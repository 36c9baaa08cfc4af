//! Fit the second-order training-cost model over (parameter count,
//! dataset size) and compute the break-even point where a costlier-to-
//! train surrogate pays for its cheaper predictions.

use samo::stats::{break_even, fit_cost_model, CostTarget};

fn main() {
    // Synthetic training-energy measurements: quadratic in the dataset
    // size with an interaction term, independent of n_p².
    let nps = [63.0, 1891.0, 108_966.0];
    let nts = [128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0];
    let mut points = Vec::new();
    for &np in &nps {
        for &nt in &nts {
            let y = 3.2e-5 * nt * nt + 1.1e-6 * np * nt + 0.21 * nt + 180.0;
            points.push((np, nt, y));
        }
    }
    let model = fit_cost_model(&points, CostTarget::Energy).unwrap();

    println!("full model p-values:");
    for (term, p) in ["n_p^2", "n_t^2", "n_p*n_t", "n_p", "n_t", "1"]
        .iter()
        .zip(&model.full_p_values)
    {
        println!("  {term:<8} p = {p:.3e}");
    }
    let [a2, a3, a5, a6] = model.reduced_coefficients;
    println!("\nreduced model: y = {a2:.3e}·n_t² + {a3:.3e}·n_p·n_t + {a5:.3}·n_t + {a6:.1}");
    println!("prediction at (n_p=108966, n_t=8192): {:.1} J", model.predict(108_966.0, 8192.0));

    // Train-once / use-many trade-off on the published constants.
    let n = break_even(217.79, 3.46, 2574.66, 2.64).unwrap();
    println!("\nbreak-even: the large training set pays off after {n:.0} surrogate uses");
}
