//! Strategy executor: drives PSO or GA against the true objective, a
//! pre-trained surrogate, or a periodically retrained surrogate, with
//! every scope of work profiled under its component label.
//!
//! Evaluation accounting: the FE budget counts true evaluations and
//! surrogate predictions alike. The closing true evaluation of the
//! best-predicted solution in the surrogate strategies is bookkeeping
//! outside the budget.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ga::{breed, select_survivors, Individual};
use super::pso::{inertia, move_swarm, update_bests, Particle};
use super::{Algorithm, GaParams, OptimError, PsoParams, RunConfig, Strategy};
use crate::profile::{Component, Profiler};
use crate::surrogate::{self, NetSpec, SurrogateNet, TrainConfig};
use crate::traffic::{objective, Solution, TrafficInstance};

/// Parameter bundle for both algorithm families.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlgoParams {
    pub pso: PsoParams,
    pub ga: GaParams,
}

/// Append-only store of truly evaluated solutions; doubles as the
/// surrogate training dataset.
#[derive(Debug, Default)]
pub struct Archive {
    entries: Vec<(Solution, f64)>,
    seen: HashSet<Vec<i64>>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, solution: Solution, value: f64) {
        self.seen.insert(solution.durations().to_vec());
        self.entries.push((solution, value));
    }

    pub fn contains(&self, solution: &Solution) -> bool {
        self.seen.contains(solution.durations())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Solution, f64)] {
        &self.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueEvalRecord {
    /// Global FE counter value after this evaluation (predictions count).
    pub fe_index: u64,
    pub value: f64,
    /// Running minimum over true evaluations; non-increasing.
    pub best_so_far: f64,
    /// Total joules across all components when this evaluation finished.
    pub cumulative_joules: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    /// Best value among this generation's evaluations, under whichever
    /// regime produced them.
    pub best_value: f64,
    pub surrogate_active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub generation: u64,
    pub solution: Solution,
    pub predicted: f64,
}

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct RunTrace {
    pub true_evals: Vec<TrueEvalRecord>,
    pub generations: Vec<GenerationRecord>,
    /// Populated only when `RunConfig::log_predictions` is set.
    pub predictions: Vec<PredictionRecord>,
    /// Truly evaluated solution with the lowest true objective.
    pub final_best: (Solution, f64),
    pub true_eval_count: u64,
    pub prediction_count: u64,
    /// Retrain rounds performed (G in the accounting identities).
    pub retrain_rounds: u64,
    /// True re-evaluations performed across all retrain rounds.
    pub reeval_count: u64,
    /// Re-evaluation candidates skipped as archive duplicates.
    pub duplicate_skips: u64,
    pub archive_size: usize,
}

impl RunTrace {
    /// CSV: `schema_version,fe_index,true_best_F`.
    pub fn write_true_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "schema_version,fe_index,true_best_F")?;
        for rec in &self.true_evals {
            writeln!(w, "{TRACE_SCHEMA_VERSION},{},{}", rec.fe_index, rec.best_so_far)?;
        }
        Ok(())
    }

    /// CSV: `schema_version,fe_index,cumulative_j,true_best_F`.
    pub fn write_energy_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "schema_version,fe_index,cumulative_j,true_best_F")?;
        for rec in &self.true_evals {
            writeln!(
                w,
                "{TRACE_SCHEMA_VERSION},{},{},{}",
                rec.fe_index, rec.cumulative_joules, rec.best_so_far
            )?;
        }
        Ok(())
    }

    /// CSV: `schema_version,generation,predicted_best,surrogate_active`.
    pub fn write_generation_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "schema_version,generation,predicted_best,surrogate_active")?;
        for rec in &self.generations {
            writeln!(
                w,
                "{TRACE_SCHEMA_VERSION},{},{},{}",
                rec.generation, rec.best_value, rec.surrogate_active
            )?;
        }
        Ok(())
    }
}

struct Ctx<'a> {
    instance: &'a TrafficInstance,
    cfg: &'a RunConfig,
    train_cfg: &'a TrainConfig,
    profiler: &'a mut Profiler,
    archive: Archive,
    net: Option<SurrogateNet>,
    surrogate_active: bool,
    fe: u64,
    generation: u64,
    true_eval_count: u64,
    prediction_count: u64,
    best_true: Option<(Solution, f64)>,
    true_evals: Vec<TrueEvalRecord>,
    generations: Vec<GenerationRecord>,
    predictions: Vec<PredictionRecord>,
    retrain_rounds: u64,
    reeval_count: u64,
    duplicate_skips: u64,
    train_rounds: u64,
}

impl Ctx<'_> {
    fn eval_true(&mut self, s: &Solution) -> Result<f64, OptimError> {
        let instance = self.instance;
        let value = self
            .profiler
            .measure(Component::Evaluation, || objective(instance, s))??;
        self.fe += 1;
        self.true_eval_count += 1;
        if self.cfg.strategy.uses_surrogate() {
            self.archive.push(s.clone(), value);
        }
        let best = match &self.best_true {
            Some((_, b)) if *b <= value => *b,
            _ => {
                self.best_true = Some((s.clone(), value));
                value
            }
        };
        let cumulative_joules = self
            .profiler
            .table()
            .iter()
            .map(|c| c.energy.total_joules())
            .sum();
        self.true_evals.push(TrueEvalRecord {
            fe_index: self.fe,
            value,
            best_so_far: best,
            cumulative_joules,
        });
        Ok(value)
    }

    fn eval_surrogate(&mut self, s: &Solution) -> Result<f64, OptimError> {
        let net = self.net.as_ref().expect("active surrogate is trained");
        let value = self.profiler.measure(Component::Use, || net.predict(s))??;
        self.fe += 1;
        self.prediction_count += 1;
        if self.cfg.log_predictions {
            self.predictions.push(PredictionRecord {
                generation: self.generation,
                solution: s.clone(),
                predicted: value,
            });
        }
        Ok(value)
    }

    /// Evaluation under the active regime.
    fn evaluate(&mut self, s: &Solution) -> Result<f64, OptimError> {
        if self.surrogate_active {
            self.eval_surrogate(s)
        } else {
            self.eval_true(s)
        }
    }

    fn next_train_seed(&mut self) -> u64 {
        self.train_rounds += 1;
        self.cfg
            .seed
            .wrapping_add(self.train_rounds.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Trains the surrogate once the archive reaches the trigger size.
    fn maybe_train(&mut self) -> Result<(), OptimError> {
        if !self.cfg.strategy.uses_surrogate()
            || self.surrogate_active
            || self.archive.len() < self.cfg.n_t
        {
            return Ok(());
        }
        let spec = NetSpec::for_dimensionality(self.instance.dimensionality(), self.cfg.seed);
        let mut net = surrogate::build(spec)?;
        let seed = self.next_train_seed();
        let entries = self.archive.entries();
        let train_cfg = self.train_cfg;
        self.profiler
            .measure(Component::Training, || {
                surrogate::train(&mut net, entries, train_cfg, seed)
            })??;
        self.net = Some(net);
        self.surrogate_active = true;
        Ok(())
    }

    /// Re-evaluates up to `n_r` of this generation's best-predicted
    /// solutions with the true objective (skipping archive duplicates,
    /// substituting the next-ranked candidate), then retrains on the
    /// grown archive. Returns the indices re-evaluated with their true
    /// values.
    fn reeval_and_retrain(
        &mut self,
        candidates: &[(usize, &Solution)],
        values: &[f64],
    ) -> Result<Vec<(usize, f64)>, OptimError> {
        let mut ranked: Vec<usize> = (0..candidates.len()).collect();
        ranked.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());

        let mut reevaluated = Vec::with_capacity(self.cfg.n_r);
        for &rank in &ranked {
            if reevaluated.len() == self.cfg.n_r {
                break;
            }
            let (index, solution) = candidates[rank];
            if self.archive.contains(solution) {
                self.duplicate_skips += 1;
                continue;
            }
            let true_value = self.eval_true(&solution.clone())?;
            self.reeval_count += 1;
            reevaluated.push((index, true_value));
        }

        let seed = self.next_train_seed();
        let net = self.net.as_mut().expect("retrain requires a trained net");
        let entries = self.archive.entries();
        let train_cfg = self.train_cfg;
        self.profiler
            .measure(Component::Training, || {
                surrogate::retrain(net, entries, train_cfg, seed)
            })??;
        self.retrain_rounds += 1;
        Ok(reevaluated)
    }

    fn finish(self, final_best: (Solution, f64)) -> RunTrace {
        RunTrace {
            true_evals: self.true_evals,
            generations: self.generations,
            predictions: self.predictions,
            final_best,
            true_eval_count: self.true_eval_count,
            prediction_count: self.prediction_count,
            retrain_rounds: self.retrain_rounds,
            reeval_count: self.reeval_count,
            duplicate_skips: self.duplicate_skips,
            archive_size: self.archive.len(),
        }
    }
}

/// Executes one optimization run. Identical
/// `(instance, algorithm, config, params)` inputs produce identical
/// traces; measurement columns are the only nondeterministic outputs.
pub fn run(
    instance: &TrafficInstance,
    algorithm: Algorithm,
    cfg: &RunConfig,
    params: &AlgoParams,
    train_cfg: &TrainConfig,
    profiler: &mut Profiler,
) -> Result<RunTrace, OptimError> {
    cfg.validate()?;
    instance.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ctx = Ctx {
        instance,
        cfg,
        train_cfg,
        profiler,
        archive: Archive::new(),
        net: None,
        surrogate_active: false,
        fe: 0,
        generation: 0,
        true_eval_count: 0,
        prediction_count: 0,
        best_true: None,
        true_evals: Vec::new(),
        generations: Vec::new(),
        predictions: Vec::new(),
        retrain_rounds: 0,
        reeval_count: 0,
        duplicate_skips: 0,
        train_rounds: 0,
    };
    match algorithm {
        Algorithm::Pso => run_pso(&mut ctx, &mut rng, &params.pso),
        Algorithm::Ga => run_ga(&mut ctx, &mut rng, &params.ga),
    }?;
    let final_best = ctx
        .best_true
        .clone()
        .expect("every run performs true evaluations");
    Ok(ctx.finish(final_best))
}

fn generation_cost(ctx: &Ctx) -> u64 {
    let base = ctx.cfg.population_size as u64;
    if ctx.cfg.strategy == Strategy::Retrain && ctx.surrogate_active {
        base + ctx.cfg.n_r as u64
    } else {
        base
    }
}

fn run_pso<R: Rng>(ctx: &mut Ctx, rng: &mut R, params: &PsoParams) -> Result<(), OptimError> {
    let instance = ctx.instance;
    let n = ctx.cfg.population_size;
    let bounds = instance.duration_bounds;
    let g_total = ctx.cfg.g_total();

    let mut swarm: Vec<Particle> = ctx.profiler.measure(Component::Initialization, || {
        (0..n)
            .map(|_| Particle::new(Solution::random(rng, instance)))
            .collect()
    })?;

    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let position = swarm[i].position.clone();
        values.push(ctx.eval_true(&position)?);
    }
    let mut gbest = (swarm[0].position.clone(), f64::INFINITY);
    update_bests(&mut swarm, &values, &mut gbest);
    record_generation(ctx, &values);
    ctx.maybe_train()?;

    loop {
        if ctx.fe + generation_cost(ctx) > ctx.cfg.max_fe {
            break;
        }
        ctx.generation += 1;
        let w = inertia(ctx.generation.min(g_total), g_total, params)?;
        let gbest_position = gbest.0.clone();
        ctx.profiler.measure(Component::Update, || {
            move_swarm(&mut swarm, &gbest_position, w, bounds, params, rng)
        })?;

        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let position = swarm[i].position.clone();
            values.push(ctx.evaluate(&position)?);
        }
        ctx.profiler.measure(Component::Update, || {
            update_bests(&mut swarm, &values, &mut gbest)
        })?;

        if ctx.cfg.strategy == Strategy::Retrain && ctx.surrogate_active {
            let candidates: Vec<(usize, &Solution)> = swarm
                .iter()
                .enumerate()
                .map(|(i, p)| (i, &p.position))
                .collect();
            let reevaluated = ctx.reeval_and_retrain(&candidates, &values)?;
            for (index, true_value) in reevaluated {
                let particle = &mut swarm[index];
                if true_value < particle.best_value {
                    particle.best_value = true_value;
                    particle.best_position = particle.position.clone();
                }
                if true_value < gbest.1 {
                    gbest = (particle.position.clone(), true_value);
                }
            }
        }

        record_generation(ctx, &values);
        ctx.maybe_train()?;
    }

    if ctx.surrogate_active {
        // Closing bookkeeping: one true evaluation of the best-predicted
        // solution.
        let best_predicted = gbest.0.clone();
        ctx.eval_true(&best_predicted)?;
    }
    Ok(())
}

fn run_ga<R: Rng>(ctx: &mut Ctx, rng: &mut R, params: &GaParams) -> Result<(), OptimError> {
    let instance = ctx.instance;
    let n = ctx.cfg.population_size;
    let bounds = instance.duration_bounds;

    let genomes: Vec<Solution> = ctx.profiler.measure(Component::Initialization, || {
        (0..n).map(|_| Solution::random(rng, instance)).collect()
    })?;
    let mut population = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for genome in genomes {
        let value = ctx.eval_true(&genome)?;
        values.push(value);
        population.push(Individual { genome, value });
    }
    record_generation(ctx, &values);
    ctx.maybe_train()?;

    loop {
        if ctx.fe + generation_cost(ctx) > ctx.cfg.max_fe {
            break;
        }
        ctx.generation += 1;
        let genomes = ctx
            .profiler
            .measure(Component::Update, || breed(&population, params, bounds, rng))?;

        let mut offspring = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for genome in genomes {
            let value = ctx.evaluate(&genome)?;
            values.push(value);
            offspring.push(Individual { genome, value });
        }

        if ctx.cfg.strategy == Strategy::Retrain && ctx.surrogate_active {
            let candidates: Vec<(usize, &Solution)> = offspring
                .iter()
                .enumerate()
                .map(|(i, o)| (i, &o.genome))
                .collect();
            // True values feed the archive and trace; selection keeps the
            // regime values so offspring compete on one scale.
            ctx.reeval_and_retrain(&candidates, &values)?;
        }

        population = ctx.profiler.measure(Component::Update, || {
            select_survivors(std::mem::take(&mut population), offspring, n)
        })?;
        record_generation(ctx, &values);
        ctx.maybe_train()?;
    }

    if ctx.surrogate_active {
        let best = population[0].genome.clone();
        ctx.eval_true(&best)?;
    }
    Ok(())
}

fn record_generation(ctx: &mut Ctx, values: &[f64]) {
    let best_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    ctx.generations.push(GenerationRecord {
        generation: ctx.generation,
        best_value,
        surrogate_active: ctx.surrogate_active,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::generate_instance;

    fn tiny_instance() -> TrafficInstance {
        generate_instance(5, (2, 1), 6, 60)
    }

    fn base_cfg(strategy: Strategy, max_fe: u64) -> RunConfig {
        RunConfig {
            population_size: 10,
            max_fe,
            n_t: 10,
            n_r: 2,
            strategy,
            seed: 42,
            log_predictions: false,
        }
    }

    fn fast_train() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        }
    }

    fn execute(cfg: &RunConfig, algorithm: Algorithm) -> RunTrace {
        let instance = tiny_instance();
        let mut profiler = Profiler::proxy(10.0, 1.0);
        run(
            &instance,
            algorithm,
            cfg,
            &AlgoParams::default(),
            &fast_train(),
            &mut profiler,
        )
        .unwrap()
    }

    #[test]
    fn baseline_accounting_exact() {
        for algorithm in [Algorithm::Pso, Algorithm::Ga] {
            let trace = execute(&base_cfg(Strategy::None, 50), algorithm);
            assert_eq!(trace.true_eval_count, 50);
            assert_eq!(trace.prediction_count, 0);
            assert_eq!(trace.archive_size, 0);
        }
    }

    #[test]
    fn pretrain_accounting_exact() {
        for algorithm in [Algorithm::Pso, Algorithm::Ga] {
            let trace = execute(&base_cfg(Strategy::Pretrain, 60), algorithm);
            // n_t initial true evaluations plus the closing one.
            assert_eq!(trace.true_eval_count, 11);
            assert_eq!(trace.prediction_count, 50);
            assert_eq!(trace.archive_size, 11);
        }
    }

    #[test]
    fn retrain_accounting_matches_identity() {
        for algorithm in [Algorithm::Pso, Algorithm::Ga] {
            let trace = execute(&base_cfg(Strategy::Retrain, 70), algorithm);
            // Each surrogate generation costs N + n_r FE: 10 init, then
            // 5 generations of 12.
            assert_eq!(trace.retrain_rounds, 5);
            assert_eq!(trace.true_eval_count, 10 + trace.reeval_count + 1);
            assert_eq!(trace.reeval_count, 2 * trace.retrain_rounds);
        }
    }

    #[test]
    fn best_trace_is_non_increasing() {
        for strategy in [Strategy::None, Strategy::Pretrain, Strategy::Retrain] {
            let trace = execute(&base_cfg(strategy, 80), Algorithm::Pso);
            for pair in trace.true_evals.windows(2) {
                assert!(pair[1].best_so_far <= pair[0].best_so_far);
            }
        }
    }

    #[test]
    fn runs_are_seed_deterministic() {
        // Deterministic columns must match exactly; cumulative_joules is
        // a measurement and may differ.
        let cfg = base_cfg(Strategy::Retrain, 90);
        let a = execute(&cfg, Algorithm::Ga);
        let b = execute(&cfg, Algorithm::Ga);
        let key = |t: &RunTrace| -> Vec<(u64, u64, u64)> {
            t.true_evals
                .iter()
                .map(|r| (r.fe_index, r.value.to_bits(), r.best_so_far.to_bits()))
                .collect()
        };
        assert_eq!(key(&a), key(&b));
        assert_eq!(a.generations, b.generations);
        assert_eq!(a.final_best.0, b.final_best.0);
        assert_eq!(a.final_best.1, b.final_best.1);
    }

    #[test]
    fn final_best_matches_minimum_true_eval() {
        let trace = execute(&base_cfg(Strategy::Retrain, 100), Algorithm::Pso);
        let min_true = trace
            .true_evals
            .iter()
            .map(|r| r.value)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(trace.final_best.1, min_true);
    }

    #[test]
    fn trace_csv_shapes() {
        let trace = execute(&base_cfg(Strategy::Pretrain, 60), Algorithm::Ga);
        let mut true_csv = Vec::new();
        trace.write_true_csv(&mut true_csv).unwrap();
        let text = String::from_utf8(true_csv).unwrap();
        assert!(text.starts_with("schema_version,fe_index,true_best_F\n"));
        assert_eq!(text.lines().count(), 1 + trace.true_evals.len());

        let mut gen_csv = Vec::new();
        trace.write_generation_csv(&mut gen_csv).unwrap();
        let text = String::from_utf8(gen_csv).unwrap();
        assert!(text.contains("surrogate_active"));
    }

    #[test]
    fn prediction_log_only_when_requested() {
        let mut cfg = base_cfg(Strategy::Pretrain, 60);
        let silent = execute(&cfg, Algorithm::Pso);
        assert!(silent.predictions.is_empty());
        cfg.log_predictions = true;
        let logged = execute(&cfg, Algorithm::Pso);
        assert_eq!(logged.predictions.len() as u64, logged.prediction_count);
        assert!(logged.predictions.iter().all(|p| p.generation >= 1));
    }

    #[test]
    fn archive_is_append_only_and_true_only() {
        let trace = execute(&base_cfg(Strategy::Retrain, 80), Algorithm::Pso);
        // Every archived point was truly evaluated.
        assert_eq!(trace.archive_size as u64, trace.true_eval_count);
    }
}
