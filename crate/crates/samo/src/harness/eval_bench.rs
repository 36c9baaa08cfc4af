//! Evaluation cost characterization: evaluate seeded random solutions
//! under the profiler, dump per-evaluation cost rows and the evaluated
//! archive, and fit a log-normal to each cost metric.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnergyOptions, HarnessError, SCHEMA_VERSION};
use crate::profile::{Component, ComponentProfile, Profiler};
use crate::stats::{fit_lognormal, LogNormalFit};
use crate::traffic::{load_instance, phase_ratio, simulate, Solution};

#[derive(Debug, Clone)]
pub struct EvalBenchSpec {
    pub instance: PathBuf,
    /// Number of random solutions to evaluate.
    pub count: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub energy: EnergyOptions,
}

#[derive(Debug)]
pub struct EvalBenchOutput {
    pub evals_csv: PathBuf,
    pub archive_csv: PathBuf,
    pub summary_csv: PathBuf,
    /// (metric, fit) for every metric whose samples were all positive.
    pub fits: Vec<(String, LogNormalFit)>,
}

pub fn eval_bench(spec: &EvalBenchSpec) -> Result<EvalBenchOutput, HarnessError> {
    if spec.count == 0 {
        return Err(HarnessError::BadSpec("count must be positive".into()));
    }
    let instance = load_instance(&spec.instance)?;
    let dims = instance.dimensionality();
    fs::create_dir_all(&spec.out_dir)?;

    let mut profiler = Profiler::new(spec.energy.meter()?);
    let source = profiler.source().label();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let evals_csv = spec.out_dir.join("evals.csv");
    let archive_csv = spec.out_dir.join("archive.csv");
    let mut evals = File::create(&evals_csv)?;
    writeln!(
        evals,
        "schema_version,eval_index,cpu_j,dram_j,total_j,wall_s,peak_alloc_b,source"
    )?;
    let mut archive = File::create(&archive_csv)?;
    write!(archive, "schema_version,eval_index,f_value")?;
    for d in 0..dims {
        write!(archive, ",d{d}")?;
    }
    writeln!(archive)?;

    let mut deltas: Vec<ComponentProfile> = Vec::with_capacity(spec.count);
    for index in 0..spec.count {
        let solution = Solution::random(&mut rng, &instance);
        let (result, delta) = profiler.measure_delta(Component::Evaluation, || {
            let outcome = simulate(&instance, &solution)?;
            let p = phase_ratio(&instance, &solution)?;
            Ok::<_, crate::traffic::TrafficError>(crate::traffic::objective_from_outcome(
                &outcome,
                p,
                instance.simulation_time,
            ))
        })?;
        let f_value = result?;
        writeln!(
            evals,
            "{SCHEMA_VERSION},{index},{},{},{},{},{},{source}",
            delta.energy.cpu_joules,
            dram_field(&delta),
            delta.energy.total_joules(),
            delta.wall_seconds,
            delta.peak_alloc_bytes,
        )?;
        write!(archive, "{SCHEMA_VERSION},{index},{f_value}")?;
        for d in solution.durations() {
            write!(archive, ",{d}")?;
        }
        writeln!(archive)?;
        deltas.push(delta);
    }
    profiler.finish()?;

    let metrics: [(&str, fn(&ComponentProfile) -> f64); 4] = [
        ("cpu_j", |d| d.energy.cpu_joules),
        ("total_j", |d| d.energy.total_joules()),
        ("wall_s", |d| d.wall_seconds),
        ("peak_alloc_b", |d| d.peak_alloc_bytes as f64),
    ];
    let mut fits = Vec::new();
    let summary_csv = spec.out_dir.join("summary.csv");
    let mut summary = File::create(&summary_csv)?;
    writeln!(summary, "schema_version,metric,E,SD,mu,sigma,nmse,source")?;
    for (name, extract) in metrics {
        let samples: Vec<f64> = deltas.iter().map(extract).collect();
        if samples.iter().any(|&s| s <= 0.0) {
            log::warn!("skipping log-normal fit for {name}: nonpositive samples");
            continue;
        }
        let fit = fit_lognormal(&samples)?;
        writeln!(
            summary,
            "{SCHEMA_VERSION},{name},{},{},{},{},{},{source}",
            fit.mean, fit.sd, fit.mu, fit.sigma, fit.nmse
        )?;
        fits.push((name.to_string(), fit));
    }
    // DRAM column, only when the backend reports it.
    if deltas
        .iter()
        .all(|d| d.energy.dram_joules.is_some_and(|j| j > 0.0))
    {
        let samples: Vec<f64> = deltas
            .iter()
            .map(|d| d.energy.dram_joules.unwrap())
            .collect();
        let fit = fit_lognormal(&samples)?;
        writeln!(
            summary,
            "{SCHEMA_VERSION},dram_j,{},{},{},{},{},{source}",
            fit.mean, fit.sd, fit.mu, fit.sigma, fit.nmse
        )?;
        fits.push(("dram_j".to_string(), fit));
    }

    Ok(EvalBenchOutput {
        evals_csv,
        archive_csv,
        summary_csv,
        fits,
    })
}

fn dram_field(delta: &ComponentProfile) -> String {
    match delta.energy.dram_joules {
        Some(j) => j.to_string(),
        None => "NA".to_string(),
    }
}

/// Reads an `archive.csv` back into `(Solution, F)` pairs.
pub fn load_archive(path: &Path) -> Result<Vec<(Solution, f64)>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(super::CsvError::from)?;
    let headers = reader
        .headers()
        .map_err(super::CsvError::from)?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let f_idx = headers
        .iter()
        .position(|h| h == "f_value")
        .ok_or_else(|| super::CsvError::MissingColumn {
            column: "f_value".into(),
            path: path.display().to_string(),
        })?;
    let d_indices: Vec<usize> = (0..)
        .map_while(|d| headers.iter().position(|h| *h == format!("d{d}")))
        .collect();
    if d_indices.is_empty() {
        return Err(HarnessError::BadSpec(format!(
            "{} has no d0.. solution columns",
            path.display()
        )));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(super::CsvError::from)?;
        let f: f64 = record
            .get(f_idx)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| HarnessError::BadSpec("bad f_value in archive".into()))?;
        let durations: Vec<i64> = d_indices
            .iter()
            .map(|&i| {
                record
                    .get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| HarnessError::BadSpec("bad duration in archive".into()))
            })
            .collect::<Result<_, _>>()?;
        entries.push((Solution::new(durations), f));
    }
    Ok(entries)
}
