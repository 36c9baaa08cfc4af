//! GA core: binary tournament selection, uniform crossover, integer
//! polynomial mutation, and elitist survivor selection over P ∪ Q.
//!
//! Draw protocol per parent pair: `tournament_size` index draws per
//! parent, one crossover-gate draw, then (only when the gate passes) one
//! swap draw per gene; mutation draws one gate per gene and one shape
//! draw per mutated gene, first child then second.

use rand::Rng;

use super::rng::{draw_index, draw_unit};
use super::{GaParams, OptimError};
use crate::traffic::Solution;

#[derive(Debug, Clone)]
pub struct Individual {
    pub genome: Solution,
    pub value: f64,
}

/// Index of the best candidate; ties go to the earliest-drawn.
pub fn tournament_winner(values: &[f64], candidates: &[usize]) -> usize {
    let mut winner = candidates[0];
    for &c in &candidates[1..] {
        if values[c] < values[winner] {
            winner = c;
        }
    }
    winner
}

fn select_parent<R: Rng + ?Sized>(values: &[f64], size: usize, rng: &mut R) -> usize {
    let candidates: Vec<usize> = (0..size).map(|_| draw_index(rng, values.len())).collect();
    tournament_winner(values, &candidates)
}

/// Uniform crossover: applied with probability `crossover_rate`, swapping
/// each gene with probability 1/2. A skipped crossover clones the
/// parents and consumes no per-gene draws.
pub fn uniform_crossover<R: Rng + ?Sized>(
    parent1: &Solution,
    parent2: &Solution,
    crossover_rate: f64,
    rng: &mut R,
) -> (Solution, Solution) {
    let mut c1: Vec<i64> = parent1.durations().to_vec();
    let mut c2: Vec<i64> = parent2.durations().to_vec();
    if draw_unit(rng) < crossover_rate {
        for j in 0..c1.len() {
            if draw_unit(rng) < 0.5 {
                std::mem::swap(&mut c1[j], &mut c2[j]);
            }
        }
    }
    (Solution::new(c1), Solution::new(c2))
}

/// Polynomial mutation (distribution index `eta`) applied to the real
/// value of an integer gene, then rounded to nearest and clamped.
pub fn polynomial_mutate_gene(x: i64, u: f64, eta: f64, bounds: (i64, i64)) -> i64 {
    let (lo, hi) = (bounds.0 as f64, bounds.1 as f64);
    if hi <= lo {
        return x;
    }
    let y = x as f64;
    let range = hi - lo;
    let mut_pow = 1.0 / (eta + 1.0);
    let delta_q = if u <= 0.5 {
        let xy = 1.0 - (y - lo) / range;
        let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0);
        val.powf(mut_pow) - 1.0
    } else {
        let xy = 1.0 - (hi - y) / range;
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0);
        1.0 - val.powf(mut_pow)
    };
    let mutated = y + delta_q * range;
    (mutated.round() as i64).clamp(bounds.0, bounds.1)
}

fn mutate<R: Rng + ?Sized>(
    genome: &mut Vec<i64>,
    p_m: f64,
    eta: f64,
    bounds: (i64, i64),
    rng: &mut R,
) {
    for gene in genome.iter_mut() {
        if draw_unit(rng) < p_m {
            *gene = polynomial_mutate_gene(*gene, draw_unit(rng), eta, bounds);
        }
    }
}

/// Breeds `population.len()` offspring through tournament pairs,
/// crossover, and mutation, without evaluating them.
pub fn breed<R: Rng + ?Sized>(
    population: &[Individual],
    params: &GaParams,
    bounds: (i64, i64),
    rng: &mut R,
) -> Vec<Solution> {
    let n = population.len();
    let dim = population[0].genome.len();
    let values: Vec<f64> = population.iter().map(|i| i.value).collect();
    let p_m = params.effective_mutation_rate(dim);
    let mut offspring = Vec::with_capacity(n);
    while offspring.len() < n {
        let a = select_parent(&values, params.tournament_size, rng);
        let b = select_parent(&values, params.tournament_size, rng);
        let (c1, c2) = uniform_crossover(
            &population[a].genome,
            &population[b].genome,
            params.crossover_rate,
            rng,
        );
        let mut g1 = c1.durations().to_vec();
        mutate(&mut g1, p_m, params.distribution_index, bounds, rng);
        offspring.push(Solution::new(g1));
        if offspring.len() < n {
            let mut g2 = c2.durations().to_vec();
            mutate(&mut g2, p_m, params.distribution_index, bounds, rng);
            offspring.push(Solution::new(g2));
        }
    }
    offspring
}

/// Best `n` of parents ∪ offspring by value; the sort is stable with
/// parents listed first, so ties resolve by insertion order.
pub fn select_survivors(
    parents: Vec<Individual>,
    offspring: Vec<Individual>,
    n: usize,
) -> Vec<Individual> {
    let mut pool = parents;
    pool.extend(offspring);
    pool.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    pool.truncate(n);
    pool
}

/// One full GA generation: breed N offspring, evaluate them in breeding
/// order, keep the best N of parents and offspring.
pub fn ga_step<R, E>(
    population: &mut Vec<Individual>,
    mut evaluate: E,
    params: &GaParams,
    bounds: (i64, i64),
    rng: &mut R,
) -> Result<Vec<f64>, OptimError>
where
    R: Rng + ?Sized,
    E: FnMut(&Solution) -> Result<f64, OptimError>,
{
    let n = population.len();
    let genomes = breed(population, params, bounds, rng);
    let mut offspring = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for genome in genomes {
        let value = evaluate(&genome)?;
        values.push(value);
        offspring.push(Individual { genome, value });
    }
    *population = select_survivors(std::mem::take(population), offspring, n);
    Ok(values)
}
