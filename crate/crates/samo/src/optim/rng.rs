//! Random-draw primitives with a pinned consumption protocol.
//!
//! Every stochastic choice in the search cores reduces to unit-interval
//! draws from [`draw_unit`], one `next_u64` each. That keeps generation
//! traces reproducible from a seed and lets tests drive the operators
//! with scripted draw sequences.

use rand::Rng;

/// One uniform draw from [0, 1) (53-bit resolution).
#[inline]
pub fn draw_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>()
}

/// Uniform index in `0..n` from a single unit draw.
#[inline]
pub fn draw_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    ((draw_unit(rng) * n as f64) as usize).min(n - 1)
}

/// Integer rounding that floors with probability `lambda` and ceils
/// otherwise, one unit draw per component. A component that is already
/// integral consumes its draw but cannot change.
pub fn stochastic_round<R: Rng + ?Sized>(values: &[f64], lambda: f64, rng: &mut R) -> Vec<i64> {
    values
        .iter()
        .map(|&v| {
            if draw_unit(rng) <= lambda {
                v.floor() as i64
            } else {
                v.ceil() as i64
            }
        })
        .collect()
}
