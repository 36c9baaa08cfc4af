//! Experiment drivers: evaluation benchmarking, surrogate train/use
//! grids, full optimization runs, and post-hoc analysis, all emitting
//! versioned CSV results.

mod analyze;
mod csv_io;
mod eval_bench;
mod run_exp;
mod train_bench;

pub use analyze::{
    analyze_breakeven, analyze_cost_model, analyze_kruskal, analyze_lognormal, analyze_mape,
    analyze_posthoc, breakeven_from_csv,
};
pub use csv_io::{read_column, read_columns, read_grouped_column, CsvError, SCHEMA_VERSION};
pub use eval_bench::{eval_bench, load_archive, EvalBenchOutput, EvalBenchSpec};
pub use run_exp::{run_experiment, RunExperimentOutput, RunExperimentSpec, RunSummary};
pub use train_bench::{
    train_bench, TrainBenchOutput, TrainBenchSpec, DEFAULT_SIZE_GRID, TEST_SET_SIZE,
};

use thiserror::Error;

use crate::optim::OptimError;
use crate::profile::{EnergyMeter, ProfileError, RaplReader};
use crate::stats::StatsError;
use crate::surrogate::SurrogateError;
use crate::traffic::{FormatError, TrafficError};

/// How experiment drivers obtain their energy meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMode {
    /// RAPL when readable, proxy otherwise.
    Auto,
    /// Always the watts × wall-time proxy.
    ForceProxy,
    /// RAPL or fail (exit code 3 at the CLI).
    RequireRapl,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions {
    pub mode: EnergyMode,
    pub cpu_watts: f64,
    pub dram_watts: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            mode: EnergyMode::Auto,
            cpu_watts: 50.0,
            dram_watts: 5.0,
        }
    }
}

impl EnergyOptions {
    pub fn meter(&self) -> Result<EnergyMeter, HarnessError> {
        match self.mode {
            EnergyMode::Auto => Ok(EnergyMeter::auto(self.cpu_watts, self.dram_watts)),
            EnergyMode::ForceProxy => Ok(EnergyMeter::proxy(self.cpu_watts, self.dram_watts)),
            EnergyMode::RequireRapl => Ok(EnergyMeter::rapl(RaplReader::discover()?)),
        }
    }

    pub fn proxy_for_tests() -> Self {
        Self {
            mode: EnergyMode::ForceProxy,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid experiment spec: {0}")]
    BadSpec(String),
}
