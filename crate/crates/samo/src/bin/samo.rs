//! Command-line front-end over the experiment drivers.
//!
//! Exit codes: 0 success, 2 configuration error, 3 measurement backend
//! unavailable while proxy energy is disallowed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use samo::harness::{
    analyze_cost_model, analyze_kruskal, analyze_lognormal, analyze_mape, analyze_posthoc,
    breakeven_from_csv, eval_bench, run_experiment, train_bench, EnergyMode, EnergyOptions,
    EvalBenchSpec, HarnessError, RunExperimentSpec, TrainBenchSpec, DEFAULT_SIZE_GRID,
};
use samo::optim::{AlgoParams, Algorithm, OptimError, RunConfigFile, Strategy};
use samo::profile::ProfileError;
use samo::stats::{break_even, CostTarget};
use samo::surrogate::{load_net, sparsity, TrainConfig};
use samo::traffic::{generate_instance, load_instance, save_instance, Solution};

#[global_allocator]
static ALLOC: samo::TrackingAllocator = samo::TrackingAllocator;

#[derive(Parser)]
#[command(
    name = "samo",
    version,
    about = "Surrogate-assisted metaheuristics with component-scoped energy profiling"
)]
struct Cli {
    /// Master seed for commands that do not take a seed list.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for result files.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Force the watts × wall-time proxy energy backend.
    #[arg(long, global = true)]
    proxy_energy: bool,
    /// Fail (exit 3) instead of falling back to the proxy when RAPL is
    /// unavailable.
    #[arg(long, global = true, conflicts_with = "proxy_energy")]
    require_rapl: bool,
    /// Proxy CPU power assumption in watts.
    #[arg(long, global = true, default_value_t = 50.0)]
    cpu_watts: f64,
    /// Proxy DRAM power assumption in watts.
    #[arg(long, global = true, default_value_t = 5.0)]
    dram_watts: f64,
    /// File format version to emit/accept.
    #[arg(long, global = true, default_value_t = 1)]
    format_version: u32,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn energy(&self) -> EnergyOptions {
        EnergyOptions {
            mode: if self.proxy_energy {
                EnergyMode::ForceProxy
            } else if self.require_rapl {
                EnergyMode::RequireRapl
            } else {
                EnergyMode::Auto
            },
            cpu_watts: self.cpu_watts,
            dram_watts: self.dram_watts,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic grid instance file.
    GenInstance {
        /// Grid shape, e.g. 2x2.
        #[arg(long, default_value = "2x2")]
        grid: String,
        #[arg(long, default_value_t = 24)]
        vehicles: usize,
        /// Simulation horizon in ticks.
        #[arg(long, default_value_t = 120)]
        horizon: u32,
        /// Output file (defaults to <out-dir>/instance.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate seeded random solutions under the profiler and fit
    /// log-normal cost models.
    EvalBench {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 2000)]
        count: usize,
    },
    /// Train/use grid over dataset sizes sampled from an archive.
    TrainBench {
        /// archive.csv from a previous eval-bench.
        #[arg(long)]
        archive: PathBuf,
        /// Comma-separated dataset sizes (default: the standard grid).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Save each trained network checkpoint next to the CSVs.
        #[arg(long)]
        save_nets: bool,
    },
    /// Execute optimization runs (algorithm × strategy over seeds).
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = CliAlgo::Pso)]
        algo: CliAlgo,
        #[arg(long, value_enum, default_value_t = CliStrategy::None)]
        strategy: CliStrategy,
        #[arg(long, default_value_t = 100)]
        population: usize,
        #[arg(long, default_value_t = 30_000)]
        max_fe: u64,
        #[arg(long, default_value_t = 100)]
        n_t: usize,
        #[arg(long, default_value_t = 10)]
        n_r: usize,
        /// Comma-separated seeds, one sequential run per seed.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Optional JSON run-configuration file (overrides the flags).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Log predictions and emit the post-hoc accuracy audit.
        #[arg(long)]
        mape_audit: bool,
    },
    /// Activation sparsity of a trained network checkpoint.
    Sparsity {
        /// Network checkpoint (train-bench --save-nets output).
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 100)]
        probes: usize,
    },
    /// Statistical analysis over result CSVs.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliAlgo {
    Pso,
    Ga,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliStrategy {
    None,
    Pretrain,
    Retrain,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Fit a log-normal to one numeric column.
    Lognormal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
    },
    /// Kruskal–Wallis over a value column grouped by another column.
    Kruskal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        value: String,
        #[arg(long)]
        group: String,
    },
    /// One-sided pairwise significance matrix across groups.
    Posthoc {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        value: String,
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Per-group medians (e.g. MAPE by dataset size).
    Mape {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "mape")]
        value: String,
        #[arg(long, default_value = "size")]
        group: String,
    },
    /// Break-even uses: explicit constants or measured means.
    Breakeven {
        #[arg(long, requires_all = ["e_use_small", "e_train_large", "e_use_large"])]
        e_train_small: Option<f64>,
        #[arg(long)]
        e_use_small: Option<f64>,
        #[arg(long)]
        e_train_large: Option<f64>,
        #[arg(long)]
        e_use_large: Option<f64>,
        #[arg(long, requires = "use_csv", conflicts_with = "e_train_small")]
        train_csv: Option<PathBuf>,
        #[arg(long)]
        use_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 128)]
        small: usize,
        #[arg(long, default_value_t = 8192)]
        large: usize,
        #[arg(long, default_value = "total_j")]
        column: String,
    },
    /// Second-order cost model over (n_p, n_t, y) columns.
    CostModel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "total_j")]
        y: String,
        #[arg(long, value_enum, default_value_t = CliTarget::Energy)]
        target: CliTarget,
    },
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliTarget {
    Energy,
    Time,
    Memory,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.format_version != 1 {
        eprintln!("error: unsupported --format-version {}", cli.format_version);
        return ExitCode::from(2);
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

fn classify(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Profile(ProfileError::RaplUnavailable(_))
        | HarnessError::Optim(OptimError::Profile(ProfileError::RaplUnavailable(_))) => 3,
        HarnessError::BadSpec(_)
        | HarnessError::Format(_)
        | HarnessError::Csv(_)
        | HarnessError::Stats(_)
        | HarnessError::Optim(OptimError::BadConfig(_))
        | HarnessError::Optim(OptimError::ConfigFile(_)) => 2,
        _ => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::GenInstance {
            grid,
            vehicles,
            horizon,
            out,
        } => {
            let (rows, cols) = parse_grid(grid)?;
            let instance = generate_instance(cli.seed, (rows, cols), *vehicles, *horizon);
            let path = match out {
                Some(p) => p.clone(),
                None => {
                    std::fs::create_dir_all(&cli.out_dir)?;
                    cli.out_dir.join("instance.json")
                }
            };
            save_instance(&instance, &path)?;
            println!(
                "wrote {} ({} intersections, D={}, {} vehicles, horizon {})",
                path.display(),
                instance.intersections.len(),
                instance.dimensionality(),
                instance.vehicles.len(),
                instance.simulation_time
            );
            Ok(())
        }
        Command::EvalBench { instance, count } => {
            let out = eval_bench(&EvalBenchSpec {
                instance: instance.clone(),
                count: *count,
                seed: cli.seed,
                out_dir: cli.out_dir.clone(),
                energy: cli.energy(),
            })?;
            println!("evals:   {}", out.evals_csv.display());
            println!("archive: {}", out.archive_csv.display());
            println!("summary: {}", out.summary_csv.display());
            for (metric, fit) in &out.fits {
                println!(
                    "  {metric:>12}: E={:.4} SD={:.4} mu={:.4} sigma={:.4} NMSE={:.3e}",
                    fit.mean, fit.sd, fit.mu, fit.sigma, fit.nmse
                );
            }
            Ok(())
        }
        Command::TrainBench {
            archive,
            sizes,
            reps,
            epochs,
            save_nets,
        } => {
            let sizes = if sizes.is_empty() {
                DEFAULT_SIZE_GRID.to_vec()
            } else {
                sizes.clone()
            };
            let out = train_bench(&TrainBenchSpec {
                archive: archive.clone(),
                sizes,
                repetitions: *reps,
                seed: cli.seed,
                out_dir: cli.out_dir.clone(),
                energy: cli.energy(),
                train_cfg: TrainConfig {
                    epochs: *epochs,
                    ..TrainConfig::default()
                },
                save_nets: *save_nets,
            })?;
            println!("train rows: {}", out.train_csv.display());
            println!("use rows:   {}", out.use_csv.display());
            println!("mape:       {}", out.mape_csv.display());
            println!("sparsity:   {}", out.sparsity_csv.display());
            Ok(())
        }
        Command::Run {
            instance,
            algo,
            strategy,
            population,
            max_fe,
            n_t,
            n_r,
            seeds,
            epochs,
            config,
            mape_audit,
        } => {
            let mut spec = RunExperimentSpec {
                instance: instance.clone(),
                algorithm: match algo {
                    CliAlgo::Pso => Algorithm::Pso,
                    CliAlgo::Ga => Algorithm::Ga,
                },
                strategy: match strategy {
                    CliStrategy::None => Strategy::None,
                    CliStrategy::Pretrain => Strategy::Pretrain,
                    CliStrategy::Retrain => Strategy::Retrain,
                },
                population_size: *population,
                max_fe: *max_fe,
                n_t: *n_t,
                n_r: *n_r,
                seeds: seeds.clone(),
                out_dir: cli.out_dir.clone(),
                energy: cli.energy(),
                train_cfg: TrainConfig {
                    epochs: *epochs,
                    ..TrainConfig::default()
                },
                params: AlgoParams::default(),
                mape_audit: *mape_audit,
            };
            if let Some(path) = config {
                let file = RunConfigFile::load(path)?;
                let (cfg, pso, ga) = file.resolve();
                spec.population_size = cfg.population_size;
                spec.max_fe = cfg.max_fe;
                spec.n_t = cfg.n_t;
                spec.n_r = cfg.n_r;
                spec.strategy = cfg.strategy;
                spec.params = AlgoParams { pso, ga };
            }
            let out = run_experiment(&spec)?;
            println!("runs:       {}", out.summary_csv.display());
            println!("components: {}", out.components_csv.display());
            if let Some(audit) = &out.audit_csv {
                println!("mape audit: {}", audit.display());
            }
            for s in &out.summaries {
                println!(
                    "  seed {:>3}: best F = {:.6} ({} true evals, {} predictions)",
                    s.seed, s.final_best_f, s.true_evals, s.predictions
                );
            }
            Ok(())
        }
        Command::Sparsity {
            net,
            instance,
            probes,
        } => {
            let net = load_net(net)?;
            let instance = load_instance(instance)?;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cli.seed);
            let probe_set: Vec<Solution> = (0..*probes)
                .map(|_| Solution::random(&mut rng, &instance))
                .collect();
            let report = sparsity(&net, &probe_set)?;
            println!(
                "zero outputs, hidden layer 1: {:.2}%",
                report.zero_ratio_hidden1
            );
            println!(
                "zero outputs, hidden layer 2: {:.2}%",
                report.zero_ratio_hidden2
            );
            for hist in &report.weight_histograms {
                println!(
                    "layer {} weights in [{:.4}, {:.4}], {} bins",
                    hist.layer,
                    hist.min,
                    hist.max,
                    hist.counts.len()
                );
            }
            Ok(())
        }
        Command::Analyze(cmd) => analyze(cmd),
    }
}

fn analyze(cmd: &AnalyzeCommand) -> Result<(), HarnessError> {
    match cmd {
        AnalyzeCommand::Lognormal { input, column } => {
            let fit = analyze_lognormal(input, column)?;
            println!("metric,E,SD,mu,sigma,nmse");
            println!(
                "{column},{:.6},{:.6},{:.6},{:.6},{:.6e}",
                fit.mean, fit.sd, fit.mu, fit.sigma, fit.nmse
            );
            Ok(())
        }
        AnalyzeCommand::Kruskal {
            input,
            value,
            group,
        } => {
            let (labels, result) = analyze_kruskal(input, value, group)?;
            println!("groups: {}", labels.join(", "));
            println!(
                "H = {:.6}, df = {}, p = {:.6e}",
                result.h, result.df, result.p_value
            );
            Ok(())
        }
        AnalyzeCommand::Posthoc {
            input,
            value,
            group,
            alpha,
        } => {
            let (labels, matrix) = analyze_posthoc(input, value, group, *alpha)?;
            println!("lower\\higher,{}", labels.join(","));
            for (label, row) in labels.iter().zip(&matrix) {
                let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
                println!("{label},{}", cells.join(","));
            }
            Ok(())
        }
        AnalyzeCommand::Mape {
            input,
            value,
            group,
        } => {
            let rows = analyze_mape(input, value, group)?;
            println!("{group},median_{value}");
            for (label, median) in rows {
                println!("{label},{median:.4}");
            }
            Ok(())
        }
        AnalyzeCommand::Breakeven {
            e_train_small,
            e_use_small,
            e_train_large,
            e_use_large,
            train_csv,
            use_csv,
            small,
            large,
            column,
        } => {
            let n = match (e_train_small, train_csv) {
                (Some(ts), None) => break_even(
                    *ts,
                    e_use_small.unwrap(),
                    e_train_large.unwrap(),
                    e_use_large.unwrap(),
                )?,
                (None, Some(train)) => {
                    breakeven_from_csv(train, use_csv.as_ref().unwrap(), column, *small, *large)?
                }
                _ => {
                    return Err(HarnessError::BadSpec(
                        "give either the four --e-* constants or --train-csv/--use-csv".into(),
                    ))
                }
            };
            println!("break-even uses: {n:.2}");
            Ok(())
        }
        AnalyzeCommand::CostModel { input, y, target } => {
            let model = analyze_cost_model(
                input,
                y,
                match target {
                    CliTarget::Energy => CostTarget::Energy,
                    CliTarget::Time => CostTarget::Time,
                    CliTarget::Memory => CostTarget::Memory,
                },
            )?;
            println!("term,coefficient,p_value");
            let terms = ["n_p^2", "n_t^2", "n_p*n_t", "n_p", "n_t", "1"];
            for ((term, c), p) in terms
                .iter()
                .zip(&model.full_coefficients)
                .zip(&model.full_p_values)
            {
                println!("{term},{c:.6e},{p:.4e}");
            }
            println!(
                "reduced: y = {:.6e}*n_t^2 + {:.6e}*n_p*n_t + {:.6e}*n_t + {:.6e}",
                model.reduced_coefficients[0],
                model.reduced_coefficients[1],
                model.reduced_coefficients[2],
                model.reduced_coefficients[3]
            );
            Ok(())
        }
    }
}

fn parse_grid(grid: &str) -> Result<(usize, usize), HarnessError> {
    let bad = || HarnessError::BadSpec(format!("bad --grid {grid:?}, expected ROWSxCOLS"));
    let (rows, cols) = grid.split_once('x').ok_or_else(bad)?;
    let rows: usize = rows.parse().map_err(|_| bad())?;
    let cols: usize = cols.parse().map_err(|_| bad())?;
    if rows == 0 || cols == 0 {
        return Err(bad());
    }
    Ok((rows, cols))
}
