//! Component-scoped measurement of energy, wall time, and allocation
//! high-water marks.
//!
//! Every joule, second, and byte of an optimization run is charged to one
//! of five components (Evaluation, Training, Use, Initialization,
//! Update). Scopes are disjoint by construction in the run drivers, so a
//! run's totals are exactly the sums of its components. Machine-wide RAPL
//! counters mean attribution assumes a quiet machine and a single-threaded
//! run; that is a measurement precondition, not something the profiler
//! can enforce.

pub mod alloc;
mod energy;

pub use alloc::TrackingAllocator;
pub use energy::{
    wrap_corrected_delta, EnergyMeter, EnergyReading, EnergySnapshot, EnergySource, RaplReader,
    FORCE_PROXY_ENV,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("scope for component {0} is already open")]
    NestedScope(&'static str),
    #[error("unclosed scope(s) at run end: {0}")]
    UnclosedScopes(String),
    #[error("RAPL backend unavailable: {0}")]
    RaplUnavailable(String),
    #[error("energy counter read failed: {0}")]
    CounterRead(#[from] std::io::Error),
    #[error("mixed measurement sources; refusing to aggregate")]
    MixedSources,
    #[error("nothing to report")]
    EmptyReport,
}

/// The five optimization components costs are attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Evaluation,
    Training,
    Use,
    Initialization,
    Update,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Evaluation,
        Component::Training,
        Component::Use,
        Component::Initialization,
        Component::Update,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Component::Evaluation => "Evaluation",
            Component::Training => "Training",
            Component::Use => "Use",
            Component::Initialization => "Initialization",
            Component::Update => "Update",
        }
    }

    fn index(self) -> usize {
        Component::ALL.iter().position(|&c| c == self).unwrap()
    }
}

/// Accumulated cost of one component within a run. Energy, wall time,
/// and call counts sum over scope entries; `peak_alloc_bytes` keeps the
/// largest single-scope excursion (peaks do not add).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentProfile {
    pub component: Component,
    pub energy: EnergyReading,
    pub wall_seconds: f64,
    pub peak_alloc_bytes: u64,
    pub call_count: u64,
}

impl ComponentProfile {
    fn zero(component: Component, source: EnergySource, with_dram: bool) -> Self {
        Self {
            component,
            energy: EnergyReading::zero(source, with_dram),
            wall_seconds: 0.0,
            peak_alloc_bytes: 0,
            call_count: 0,
        }
    }

    fn accumulate(&mut self, delta: &ComponentProfile) {
        self.energy.accumulate(&delta.energy);
        self.wall_seconds += delta.wall_seconds;
        // Peak deltas are per-scope maxima; the aggregate keeps the
        // largest scope excursion seen for this component.
        self.peak_alloc_bytes = self.peak_alloc_bytes.max(delta.peak_alloc_bytes);
        self.call_count += delta.call_count;
    }
}

/// Open-scope bookkeeping handle. Obtain via [`Profiler::open_scope`],
/// settle with [`Profiler::close_scope`]; `measure` does both.
pub struct ScopeGuard {
    component: Component,
    started: Instant,
    energy_before: EnergySnapshot,
    alloc_entry: usize,
    saved_peak: usize,
}

/// Single-run profiler. Single-threaded by contract: scopes must be
/// opened and closed from the thread driving the run.
pub struct Profiler {
    meter: EnergyMeter,
    table: [ComponentProfile; 5],
    open: [bool; 5],
}

impl Profiler {
    pub fn new(meter: EnergyMeter) -> Self {
        let source = meter.source();
        let with_dram = meter.has_dram();
        Self {
            table: Component::ALL.map(|c| ComponentProfile::zero(c, source, with_dram)),
            open: [false; 5],
            meter,
        }
    }

    /// Proxy-backed profiler, handy in tests and sandboxes.
    pub fn proxy(cpu_watts: f64, dram_watts: f64) -> Self {
        Self::new(EnergyMeter::proxy(cpu_watts, dram_watts))
    }

    pub fn source(&self) -> EnergySource {
        self.meter.source()
    }

    pub fn meter(&self) -> &EnergyMeter {
        &self.meter
    }

    pub fn open_scope(&mut self, component: Component) -> Result<ScopeGuard, ProfileError> {
        let idx = component.index();
        if self.open[idx] {
            return Err(ProfileError::NestedScope(component.label()));
        }
        self.open[idx] = true;
        let alloc_entry = alloc::current_bytes();
        let saved_peak = alloc::peak_bytes();
        alloc::reset_peak(alloc_entry);
        Ok(ScopeGuard {
            component,
            started: Instant::now(),
            energy_before: self.meter.snapshot()?,
            alloc_entry,
            saved_peak,
        })
    }

    pub fn close_scope(&mut self, guard: ScopeGuard) -> Result<ComponentProfile, ProfileError> {
        let energy_after = self.meter.snapshot()?;
        let wall_seconds = guard.started.elapsed().as_secs_f64();
        let scope_peak = alloc::peak_bytes();
        alloc::raise_peak(guard.saved_peak);

        let delta = ComponentProfile {
            component: guard.component,
            energy: self
                .meter
                .delta(&guard.energy_before, &energy_after, wall_seconds),
            wall_seconds,
            peak_alloc_bytes: scope_peak.saturating_sub(guard.alloc_entry) as u64,
            call_count: 1,
        };
        let idx = guard.component.index();
        self.open[idx] = false;
        self.table[idx].accumulate(&delta);
        Ok(delta)
    }

    /// Runs `body` inside a scope attributed to `component`.
    pub fn measure<R>(
        &mut self,
        component: Component,
        body: impl FnOnce() -> R,
    ) -> Result<R, ProfileError> {
        let guard = self.open_scope(component)?;
        let result = body();
        self.close_scope(guard)?;
        Ok(result)
    }

    /// Like [`Profiler::measure`] but also returns this scope's delta.
    pub fn measure_delta<R>(
        &mut self,
        component: Component,
        body: impl FnOnce() -> R,
    ) -> Result<(R, ComponentProfile), ProfileError> {
        let guard = self.open_scope(component)?;
        let result = body();
        let delta = self.close_scope(guard)?;
        Ok((result, delta))
    }

    pub fn table(&self) -> &[ComponentProfile; 5] {
        &self.table
    }

    /// Consumes the profiler; errors if any scope is still open.
    pub fn finish(self) -> Result<ProfileTable, ProfileError> {
        if self.open.iter().any(|&o| o) {
            let names: Vec<&str> = Component::ALL
                .iter()
                .filter(|c| self.open[c.index()])
                .map(|c| c.label())
                .collect();
            return Err(ProfileError::UnclosedScopes(names.join(", ")));
        }
        Ok(ProfileTable {
            components: self.table,
            source: self.meter.source(),
        })
    }
}

/// Completed-run profile: one row per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub components: [ComponentProfile; 5],
    pub source: EnergySource,
}

impl ProfileTable {
    pub fn component(&self, c: Component) -> &ComponentProfile {
        &self.components[c.index()]
    }

    /// Total row: the exact sum of the five component aggregates.
    pub fn total(&self) -> ComponentProfile {
        let mut total = ComponentProfile::zero(
            Component::Evaluation,
            self.source,
            self.components[0].energy.dram_joules.is_some(),
        );
        for c in &self.components {
            total.energy.accumulate(&c.energy);
            total.wall_seconds += c.wall_seconds;
            total.peak_alloc_bytes = total.peak_alloc_bytes.max(c.peak_alloc_bytes);
            total.call_count += c.call_count;
        }
        total
    }
}

/// Mean and (population) standard deviation over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

fn summarize(values: &[f64]) -> Summary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Summary {
        mean,
        std: var.sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    /// One summary per component, in [`Component::ALL`] order.
    pub components: [Summary; 5],
    /// Summary of the per-run totals.
    pub total: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub source: EnergySource,
    pub runs: usize,
    pub metrics: Vec<MetricReport>,
}

/// Aggregates repeated runs into per-component mean/std rows plus a
/// Total column. Rejects empty input and mixed measurement sources.
pub fn report(tables: &[ProfileTable]) -> Result<ProfileReport, ProfileError> {
    if tables.is_empty() {
        return Err(ProfileError::EmptyReport);
    }
    let source = tables[0].source;
    if tables.iter().any(|t| t.source != source) {
        return Err(ProfileError::MixedSources);
    }
    let with_dram = tables
        .iter()
        .all(|t| t.components[0].energy.dram_joules.is_some());

    type Extract = fn(&ComponentProfile) -> f64;
    let mut metrics: Vec<(&str, Extract)> = vec![
        ("cpu_j", |c| c.energy.cpu_joules),
        ("total_j", |c| c.energy.total_joules()),
        ("wall_s", |c| c.wall_seconds),
        ("peak_alloc_b", |c| c.peak_alloc_bytes as f64),
    ];
    if with_dram {
        metrics.insert(1, ("dram_j", |c| c.energy.dram_joules.unwrap_or(0.0)));
    }

    let reports = metrics
        .into_iter()
        .map(|(name, extract)| {
            let components = Component::ALL.map(|c| {
                let values: Vec<f64> = tables
                    .iter()
                    .map(|t| extract(t.component(c)))
                    .collect();
                summarize(&values)
            });
            let totals: Vec<f64> = tables.iter().map(|t| extract(&t.total())).collect();
            MetricReport {
                metric: name.to_string(),
                components,
                total: summarize(&totals),
            }
        })
        .collect();

    Ok(ProfileReport {
        source,
        runs: tables.len(),
        metrics: reports,
    })
}
