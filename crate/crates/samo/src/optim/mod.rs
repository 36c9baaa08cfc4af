//! Integer-encoded PSO and GA search cores with three evaluation
//! strategies for the expensive objective: every evaluation true
//! (`none`), a surrogate trained once and used exclusively thereafter
//! (`pretrain`), and a surrogate periodically refit on re-evaluated
//! elites (`retrain`).

mod ga;
mod pso;
mod rng;
mod run;

pub use ga::{ga_step, polynomial_mutate_gene, tournament_winner, uniform_crossover, Individual};
pub use pso::{
    inertia, move_swarm, pso_step, pso_velocity_update, velocity_update_with_draws, Particle,
};
pub use rng::{draw_index, draw_unit, stochastic_round};
pub use run::{
    run, AlgoParams, Archive, GenerationRecord, PredictionRecord, RunTrace, TrueEvalRecord,
    TRACE_SCHEMA_VERSION,
};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::ProfileError;
use crate::surrogate::SurrogateError;
use crate::traffic::TrafficError;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("invalid run configuration: {0}")]
    BadConfig(String),
    #[error("inertia schedule undefined: g_total is zero")]
    ZeroGenerations,
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("surrogate failure: {0}")]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("malformed run config file: {0}")]
    ConfigFile(String),
}

/// PSO coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub phi1: f64,
    pub phi2: f64,
    /// Stochastic-rounding floor probability.
    pub lambda: f64,
    pub w_max: f64,
    pub w_min: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            phi1: 2.05,
            phi2: 2.05,
            lambda: 0.5,
            w_max: 0.5,
            w_min: 0.1,
        }
    }
}

/// GA operator rates. A `mutation_rate` of `None` means the conventional
/// `1/D` for problem dimensionality D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub crossover_rate: f64,
    pub mutation_rate: Option<f64>,
    pub distribution_index: f64,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 1.0,
            mutation_rate: None,
            distribution_index: 20.0,
            tournament_size: 2,
        }
    }
}

impl GaParams {
    pub fn effective_mutation_rate(&self, dimensionality: usize) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / dimensionality.max(1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    None,
    Pretrain,
    Retrain,
}

impl Strategy {
    pub fn uses_surrogate(self) -> bool {
        !matches!(self, Strategy::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Ga,
}

/// Budget and strategy knobs shared by both algorithm families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Population (swarm) size N.
    pub population_size: usize,
    /// Evaluation budget; true and surrogate evaluations both count.
    pub max_fe: u64,
    /// Archive size that triggers surrogate training.
    pub n_t: usize,
    /// True re-evaluations per generation in retrain mode.
    pub n_r: usize,
    pub strategy: Strategy,
    pub seed: u64,
    /// Record every surrogate prediction (generation, solution, value)
    /// for post-hoc accuracy audits.
    pub log_predictions: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_fe: 30_000,
            n_t: 100,
            n_r: 10,
            strategy: Strategy::None,
            seed: 0,
            log_predictions: false,
        }
    }
}

impl RunConfig {
    /// Generations available under the budget, used by the inertia
    /// schedule.
    pub fn g_total(&self) -> u64 {
        self.max_fe / self.population_size as u64
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let fail = |msg: String| Err(OptimError::BadConfig(msg));
        if self.population_size < 2 {
            return fail("population_size must be at least 2".into());
        }
        if self.max_fe < self.population_size as u64 {
            return fail("max_fe smaller than one population".into());
        }
        if self.strategy.uses_surrogate() && self.n_t < self.population_size {
            return fail(format!(
                "n_t ({}) must be at least the population size ({})",
                self.n_t, self.population_size
            ));
        }
        if self.strategy == Strategy::Retrain
            && (self.n_r == 0 || self.n_r > self.population_size)
        {
            return fail(format!(
                "n_r ({}) must be in 1..=population_size ({})",
                self.n_r, self.population_size
            ));
        }
        Ok(())
    }
}

pub const RUN_CONFIG_FORMAT_VERSION: u32 = 1;

/// On-disk run configuration mirroring the conventional parameter names
/// (phi1, phi2, lambda, w_max, w_min, p_c, p_m, eta_m, N, max_fe, n_t,
/// n_r, strategy, seed). Omitted fields fall back to defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfigFile {
    pub format_version: u32,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub lambda: Option<f64>,
    pub w_max: Option<f64>,
    pub w_min: Option<f64>,
    pub p_c: Option<f64>,
    pub p_m: Option<f64>,
    pub eta_m: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub max_fe: Option<u64>,
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
    pub strategy: Option<Strategy>,
    pub seed: Option<u64>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, OptimError> {
        let text =
            fs::read_to_string(path).map_err(|e| OptimError::ConfigFile(format!("{e}")))?;
        let file: RunConfigFile =
            serde_json::from_str(&text).map_err(|e| OptimError::ConfigFile(format!("{e}")))?;
        if file.format_version != RUN_CONFIG_FORMAT_VERSION {
            return Err(OptimError::ConfigFile(format!(
                "unsupported format_version {} (supported: {RUN_CONFIG_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn resolve(&self) -> (RunConfig, PsoParams, GaParams) {
        let defaults = RunConfig::default();
        let cfg = RunConfig {
            population_size: self.n.unwrap_or(defaults.population_size),
            max_fe: self.max_fe.unwrap_or(defaults.max_fe),
            n_t: self.n_t.unwrap_or(defaults.n_t),
            n_r: self.n_r.unwrap_or(defaults.n_r),
            strategy: self.strategy.unwrap_or(defaults.strategy),
            seed: self.seed.unwrap_or(defaults.seed),
            log_predictions: false,
        };
        let pso_defaults = PsoParams::default();
        let pso = PsoParams {
            phi1: self.phi1.unwrap_or(pso_defaults.phi1),
            phi2: self.phi2.unwrap_or(pso_defaults.phi2),
            lambda: self.lambda.unwrap_or(pso_defaults.lambda),
            w_max: self.w_max.unwrap_or(pso_defaults.w_max),
            w_min: self.w_min.unwrap_or(pso_defaults.w_min),
        };
        let ga_defaults = GaParams::default();
        let ga = GaParams {
            crossover_rate: self.p_c.unwrap_or(ga_defaults.crossover_rate),
            mutation_rate: self.p_m,
            distribution_index: self.eta_m.unwrap_or(ga_defaults.distribution_index),
            tournament_size: ga_defaults.tournament_size,
        };
        (cfg, pso, ga)
    }
}
