//! PSO core: inertia-weighted velocity updates with stochastic rounding
//! to keep positions integral.
//!
//! Draw protocol per particle (particles in index order): for each
//! dimension the personal draw `u1` then the global draw `u2`, followed
//! by one rounding draw per dimension.

use rand::Rng;

use super::rng::{draw_unit, stochastic_round};
use super::{OptimError, PsoParams};
use crate::traffic::Solution;

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Solution,
    pub velocity: Vec<f64>,
    pub best_position: Solution,
    pub best_value: f64,
}

impl Particle {
    pub fn new(position: Solution) -> Self {
        let velocity = vec![0.0; position.len()];
        Self {
            best_position: position.clone(),
            best_value: f64::INFINITY,
            position,
            velocity,
        }
    }
}

/// Linearly decreasing inertia weight
/// `w = w_max - (w_max - w_min) · g / g_total`.
pub fn inertia(generation: u64, g_total: u64, params: &PsoParams) -> Result<f64, OptimError> {
    if g_total == 0 {
        return Err(OptimError::ZeroGenerations);
    }
    debug_assert!(generation <= g_total);
    Ok(params.w_max - (params.w_max - params.w_min) * generation as f64 / g_total as f64)
}

/// Velocity update with the uniform draws supplied explicitly:
/// `v' = w·v + phi1·u1·(pbest - x) + phi2·u2·(gbest - x)`.
pub fn velocity_update_with_draws(
    velocity: &[f64],
    position: &[i64],
    pbest: &[i64],
    gbest: &[i64],
    w: f64,
    params: &PsoParams,
    u1: &[f64],
    u2: &[f64],
) -> Vec<f64> {
    (0..velocity.len())
        .map(|j| {
            w * velocity[j]
                + params.phi1 * u1[j] * (pbest[j] - position[j]) as f64
                + params.phi2 * u2[j] * (gbest[j] - position[j]) as f64
        })
        .collect()
}

/// Velocity update drawing `u1`, `u2` per dimension from `rng`.
pub fn pso_velocity_update<R: Rng + ?Sized>(
    particle: &Particle,
    gbest: &Solution,
    w: f64,
    params: &PsoParams,
    rng: &mut R,
) -> Vec<f64> {
    let dims = particle.velocity.len();
    let mut u1 = Vec::with_capacity(dims);
    let mut u2 = Vec::with_capacity(dims);
    for _ in 0..dims {
        u1.push(draw_unit(rng));
        u2.push(draw_unit(rng));
    }
    velocity_update_with_draws(
        &particle.velocity,
        particle.position.durations(),
        particle.best_position.durations(),
        gbest.durations(),
        w,
        params,
        &u1,
        &u2,
    )
}

/// Moves every particle: velocity update, stochastic rounding, position
/// update, clamp to bounds. Velocities are stored rounded (integral
/// values in a real vector) and are not clamped.
pub fn move_swarm<R: Rng + ?Sized>(
    swarm: &mut [Particle],
    gbest: &Solution,
    w: f64,
    bounds: (i64, i64),
    params: &PsoParams,
    rng: &mut R,
) {
    let (lo, hi) = bounds;
    for particle in swarm.iter_mut() {
        let real_velocity = pso_velocity_update(particle, gbest, w, params, rng);
        let rounded = stochastic_round(&real_velocity, params.lambda, rng);
        let new_position: Vec<i64> = particle
            .position
            .durations()
            .iter()
            .zip(&rounded)
            .map(|(&x, &v)| (x + v).clamp(lo, hi))
            .collect();
        particle.velocity = rounded.iter().map(|&v| v as f64).collect();
        particle.position = Solution::new(new_position);
    }
}

/// Personal/global best bookkeeping; ties keep the incumbent.
pub fn update_bests(swarm: &mut [Particle], values: &[f64], gbest: &mut (Solution, f64)) {
    for (particle, &value) in swarm.iter_mut().zip(values) {
        if value < particle.best_value {
            particle.best_value = value;
            particle.best_position = particle.position.clone();
        }
        if value < gbest.1 {
            *gbest = (particle.position.clone(), value);
        }
    }
}

/// One full PSO generation: move, evaluate every particle in index
/// order, then update personal and global bests.
pub fn pso_step<R, E>(
    swarm: &mut [Particle],
    gbest: &mut (Solution, f64),
    mut evaluate: E,
    w: f64,
    bounds: (i64, i64),
    params: &PsoParams,
    rng: &mut R,
) -> Result<Vec<f64>, OptimError>
where
    R: Rng + ?Sized,
    E: FnMut(&Solution) -> Result<f64, OptimError>,
{
    let gbest_position = gbest.0.clone();
    move_swarm(swarm, &gbest_position, w, bounds, params, rng);
    let mut values = Vec::with_capacity(swarm.len());
    for particle in swarm.iter() {
        values.push(evaluate(&particle.position)?);
    }
    update_bests(swarm, &values, gbest);
    Ok(values)
}
