//! Full optimization-run experiments: algorithm × strategy × budget over
//! a seed list, one sequential run per seed, emitting component profile
//! tables, best-F traces (by evaluation index and by cumulative energy),
//! a per-run summary, and an optional post-hoc surrogate accuracy audit.

use std::fs::{self, File};
use std::io::Write;
use std::path::PathBuf;

use super::{EnergyOptions, HarnessError, SCHEMA_VERSION};
use crate::optim::{run, AlgoParams, Algorithm, RunConfig, RunTrace, Strategy};
use crate::profile::{Component, ProfileTable, Profiler};
use crate::stats::mape;
use crate::surrogate::TrainConfig;
use crate::traffic::{load_instance, objective, TrafficInstance};

#[derive(Debug, Clone)]
pub struct RunExperimentSpec {
    pub instance: PathBuf,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub population_size: usize,
    pub max_fe: u64,
    pub n_t: usize,
    pub n_r: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub energy: EnergyOptions,
    pub train_cfg: TrainConfig,
    pub params: AlgoParams,
    /// Log predictions during the run and re-evaluate them with the true
    /// objective afterwards (median-final-objective trial only).
    pub mape_audit: bool,
}

#[derive(Debug)]
pub struct RunSummary {
    pub seed: u64,
    pub true_evals: u64,
    pub predictions: u64,
    pub retrain_rounds: u64,
    pub reevaluations: u64,
    pub duplicate_skips: u64,
    pub final_best_f: f64,
}

#[derive(Debug)]
pub struct RunExperimentOutput {
    pub summary_csv: PathBuf,
    pub components_csv: PathBuf,
    pub audit_csv: Option<PathBuf>,
    pub summaries: Vec<RunSummary>,
    pub tables: Vec<ProfileTable>,
}

pub fn run_experiment(spec: &RunExperimentSpec) -> Result<RunExperimentOutput, HarnessError> {
    if spec.seeds.is_empty() {
        return Err(HarnessError::BadSpec("need at least one seed".into()));
    }
    let instance = load_instance(&spec.instance)?;
    fs::create_dir_all(&spec.out_dir)?;

    let summary_csv = spec.out_dir.join("runs.csv");
    let mut summary_out = File::create(&summary_csv)?;
    writeln!(
        summary_out,
        "schema_version,seed,algorithm,strategy,n,max_fe,n_t,n_r,true_evals,predictions,\
         retrain_rounds,reevaluations,duplicate_skips,final_best_F"
    )?;
    let components_csv = spec.out_dir.join("components.csv");
    let mut components_out = File::create(&components_csv)?;
    writeln!(
        components_out,
        "schema_version,seed,component,cpu_j,dram_j,total_j,wall_s,peak_alloc_b,call_count,source"
    )?;

    let mut summaries = Vec::new();
    let mut tables = Vec::new();
    let mut traces = Vec::new();
    for &seed in &spec.seeds {
        let cfg = RunConfig {
            population_size: spec.population_size,
            max_fe: spec.max_fe,
            n_t: spec.n_t,
            n_r: spec.n_r,
            strategy: spec.strategy,
            seed,
            log_predictions: spec.mape_audit,
        };
        let mut profiler = Profiler::new(spec.energy.meter()?);
        let trace = run(
            &instance,
            spec.algorithm,
            &cfg,
            &spec.params,
            &spec.train_cfg,
            &mut profiler,
        )?;
        let table = profiler.finish()?;

        write_trace_files(spec, seed, &trace)?;
        write_component_rows(&mut components_out, seed, &table, spec.strategy)?;
        writeln!(
            summary_out,
            "{SCHEMA_VERSION},{seed},{},{},{},{},{},{},{},{},{},{},{},{}",
            algo_label(spec.algorithm),
            strategy_label(spec.strategy),
            spec.population_size,
            spec.max_fe,
            spec.n_t,
            spec.n_r,
            trace.true_eval_count,
            trace.prediction_count,
            trace.retrain_rounds,
            trace.reeval_count,
            trace.duplicate_skips,
            trace.final_best.1,
        )?;
        summaries.push(RunSummary {
            seed,
            true_evals: trace.true_eval_count,
            predictions: trace.prediction_count,
            retrain_rounds: trace.retrain_rounds,
            reevaluations: trace.reeval_count,
            duplicate_skips: trace.duplicate_skips,
            final_best_f: trace.final_best.1,
        });
        tables.push(table);
        traces.push((seed, trace));
    }

    let audit_csv = if spec.mape_audit && spec.strategy.uses_surrogate() {
        Some(write_mape_audit(spec, &instance, &traces)?)
    } else {
        None
    };

    Ok(RunExperimentOutput {
        summary_csv,
        components_csv,
        audit_csv,
        summaries,
        tables,
    })
}

fn algo_label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Pso => "pso",
        Algorithm::Ga => "ga",
    }
}

fn strategy_label(s: Strategy) -> &'static str {
    match s {
        Strategy::None => "none",
        Strategy::Pretrain => "pretrain",
        Strategy::Retrain => "retrain",
    }
}

fn write_trace_files(
    spec: &RunExperimentSpec,
    seed: u64,
    trace: &RunTrace,
) -> Result<(), HarnessError> {
    let true_path = spec.out_dir.join(format!("trace_true_seed{seed}.csv"));
    trace.write_true_csv(File::create(true_path)?)?;
    let gen_path = spec.out_dir.join(format!("trace_gen_seed{seed}.csv"));
    trace.write_generation_csv(File::create(gen_path)?)?;
    let energy_path = spec.out_dir.join(format!("trace_energy_seed{seed}.csv"));
    trace.write_energy_csv(File::create(energy_path)?)?;
    Ok(())
}

/// Components with no calls in this strategy are reported as NA, the
/// convention for baselines that never train or use a surrogate.
fn write_component_rows(
    out: &mut File,
    seed: u64,
    table: &ProfileTable,
    strategy: Strategy,
) -> Result<(), HarnessError> {
    let mut write_row = |label: &str,
                         cpu: String,
                         dram: String,
                         total: String,
                         wall: String,
                         peak: String,
                         calls: String|
     -> std::io::Result<()> {
        writeln!(
            out,
            "{SCHEMA_VERSION},{seed},{label},{cpu},{dram},{total},{wall},{peak},{calls},{}",
            table.source.label()
        )
    };
    for profile in &table.components {
        let na = profile.call_count == 0
            && matches!(profile.component, Component::Training | Component::Use)
            && !strategy.uses_surrogate();
        if na {
            write_row(
                profile.component.label(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "0".into(),
            )?;
        } else {
            write_row(
                profile.component.label(),
                profile.energy.cpu_joules.to_string(),
                profile
                    .energy
                    .dram_joules
                    .map_or("NA".into(), |j| j.to_string()),
                profile.energy.total_joules().to_string(),
                profile.wall_seconds.to_string(),
                profile.peak_alloc_bytes.to_string(),
                profile.call_count.to_string(),
            )?;
        }
    }
    let total = table.total();
    write_row(
        "Total",
        total.energy.cpu_joules.to_string(),
        total
            .energy
            .dram_joules
            .map_or("NA".into(), |j| j.to_string()),
        total.energy.total_joules().to_string(),
        total.wall_seconds.to_string(),
        total.peak_alloc_bytes.to_string(),
        total.call_count.to_string(),
    )?;
    Ok(())
}

/// Lower median by final true objective (even counts take the smaller of
/// the two middle trials).
fn median_trial<'a>(traces: &'a [(u64, RunTrace)]) -> &'a (u64, RunTrace) {
    let mut order: Vec<usize> = (0..traces.len()).collect();
    order.sort_by(|&a, &b| {
        traces[a]
            .1
            .final_best
            .1
            .partial_cmp(&traces[b].1.final_best.1)
            .unwrap()
    });
    &traces[order[(traces.len() - 1) / 2]]
}

fn write_mape_audit(
    spec: &RunExperimentSpec,
    instance: &TrafficInstance,
    traces: &[(u64, RunTrace)],
) -> Result<PathBuf, HarnessError> {
    let (seed, trace) = median_trial(traces);
    let path = spec.out_dir.join(format!("mape_audit_seed{seed}.csv"));
    let mut out = File::create(&path)?;
    writeln!(out, "schema_version,generation,n_predictions,mape")?;
    let mut generation = None;
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    let flush = |gen: u64, actual: &mut Vec<f64>, predicted: &mut Vec<f64>, out: &mut File| {
        if actual.is_empty() {
            return Ok::<(), HarnessError>(());
        }
        let m = mape(actual, predicted)?;
        writeln!(out, "{SCHEMA_VERSION},{gen},{},{m}", actual.len())?;
        actual.clear();
        predicted.clear();
        Ok(())
    };
    for record in &trace.predictions {
        if generation != Some(record.generation) {
            if let Some(g) = generation {
                flush(g, &mut actual, &mut predicted, &mut out)?;
            }
            generation = Some(record.generation);
        }
        actual.push(objective(instance, &record.solution)?);
        predicted.push(record.predicted);
    }
    if let Some(g) = generation {
        flush(g, &mut actual, &mut predicted, &mut out)?;
    }
    Ok(path)
}
