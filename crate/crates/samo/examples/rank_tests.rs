//! Nonparametric group comparisons: Kruskal–Wallis across k groups, then
//! the one-sided pairwise Mann–Whitney significance matrix.

use samo::stats::{kruskal_wallis, pairwise_posthoc};

fn main() {
    // Synthetic per-use energy samples for three training-set sizes:
    // larger datasets produce cheaper predictions.
    let groups = vec![
        (3.46..3.70).step(0.008),
        (2.69..2.93).step(0.008),
        (2.64..2.88).step(0.008),
    ];
    let labels = ["128", "512", "8192"];

    let result = kruskal_wallis(&groups).unwrap();
    println!(
        "Kruskal-Wallis: H = {:.3}, df = {}, p = {:.3e}",
        result.h, result.df, result.p_value
    );

    let matrix = pairwise_posthoc(&groups, 0.01).unwrap();
    println!("\nis row stochastically lower than column? (alpha = 0.01)");
    print!("{:>6}", "");
    for label in labels {
        print!("{label:>7}");
    }
    println!();
    for (label, row) in labels.iter().zip(&matrix) {
        print!("{label:>6}");
        for &cell in row {
            print!("{:>7}", if cell { "yes" } else { "-" });
        }
        println!();
    }
}

trait Step {
    fn step(self, by: f64) -> Vec<f64>;
}

impl Step for std::ops::Range<f64> {
    fn step(self, by: f64) -> Vec<f64> {
        let mut values = Vec::new();
        let mut x = self.start;
        while x < self.end {
            values.push(x);
            x += by;
        }
        values
    }
}
