//! Experiment orchestration: single runs with steady-state stopping, seeded
//! parameter sweeps on a bounded worker pool, aggregation and presets.
//!
//! Run `seed = seed_base + replicate`. The same seed feeds the graph
//! generator, the initial opinions and the dynamics (on separate streams),
//! so every configuration and phase in a sweep sees the same initial
//! networks and opinions for a given replicate.

mod output;
mod presets;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use output::{
    format_sig6, read_results_csv, write_aggregate_csv, write_checkpoints_csv, write_results_csv,
    RESULTS_HEADER,
};
pub use presets::{preset_experiment, Preset};

use crate::dynamics::{
    run_until, Checkpoint, DistributionKind, DynamicsConfig, OpinionState, Phase, RunTrace,
    TransmissionKind,
};
use crate::error::{Error, Result};
use crate::graph::{GeneratorSpec, Graph};
use crate::io::{ensure_dir, write_edge_list, write_opinions};
use crate::metrics::{MetricsReport, Outcome};
use crate::rng::{stream_rng, Stream};

/// When a run counts as having reached a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateRule {
    pub checkpoint_interval: u64,
    /// Number of trailing checkpoints inspected.
    pub window: usize,
    /// Largest allowed max - min of the bimodality coefficient in the window.
    pub tolerance: f64,
    pub min_iterations: u64,
    pub max_iterations: u64,
}

impl Default for SteadyStateRule {
    fn default() -> Self {
        SteadyStateRule {
            checkpoint_interval: 100_000,
            window: 10,
            tolerance: 0.02,
            min_iterations: 1_000_000,
            max_iterations: 10_000_000,
        }
    }
}

impl SteadyStateRule {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoint_interval == 0 || self.window == 0 {
            return Err(Error::param(
                "steady-state interval and window must be positive",
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param(format!(
                "steady-state tolerance {} must be > 0",
                self.tolerance
            )));
        }
        if self.min_iterations > self.max_iterations {
            return Err(Error::param(
                "steady-state min_iterations exceeds max_iterations",
            ));
        }
        Ok(())
    }
}

/// True once the series spans at least `min_iterations` and the last
/// `window` checkpoints vary by at most `tolerance`.
pub fn detect_steady_state(series: &[Checkpoint], rule: &SteadyStateRule) -> bool {
    let Some(last) = series.last() else {
        return false;
    };
    if series.len() < rule.window || last.iteration < rule.min_iterations {
        return false;
    }
    let tail = &series[series.len() - rule.window..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.bc), hi.max(c.bc))
        });
    // NaN checkpoints fail the comparison.
    tail.iter().all(|c| !c.bc.is_nan()) && hi - lo <= rule.tolerance
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub run_id: usize,
    pub generator: GeneratorSpec,
    /// `iterations` and `checkpoint_interval` are overridden by
    /// `steady_state` when present.
    pub dynamics: DynamicsConfig,
    pub steady_state: Option<SteadyStateRule>,
}

/// Result row of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub topology: String,
    pub n: usize,
    /// Mean degree of the initial network.
    pub avg_k: f64,
    pub transmission: TransmissionKind,
    pub distribution: DistributionKind,
    pub phi: f64,
    pub rewiring: bool,
    pub delta: f64,
    pub seed: u64,
    pub iterations: u64,
    /// Whether the final checkpoint series satisfies the steady-state rule
    /// (the run's own rule, or the default one for fixed-length runs).
    pub converged: bool,
    pub bc: f64,
    pub beta: f64,
    pub corr: f64,
    pub outcome: Option<Outcome>,
    pub checkpoints: Vec<Checkpoint>,
    /// Set when the run could not be performed (e.g. generator failure).
    pub error: Option<String>,
}

/// A finished run: its record plus the final network and opinions.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub initial_graph: Graph,
    pub trace: RunTrace,
}

/// Builds the initial network and opinions of `spec`.
pub fn initial_conditions(spec: &RunSpec) -> Result<(Graph, OpinionState)> {
    let seed = spec.dynamics.seed;
    let graph = spec.generator.generate(seed)?;
    let mut rng = stream_rng(seed, Stream::InitialState);
    let state = OpinionState::random(graph.node_count(), spec.dynamics.transmission, &mut rng);
    Ok((graph, state))
}

pub fn execute_run(spec: &RunSpec) -> Result<RunOutput> {
    let graph = spec.generator.generate(spec.dynamics.seed)?;
    execute_on_graph(spec, graph, &spec.generator.tag())
}

/// Like [`execute_run`] on a supplied network; `spec.generator` is ignored
/// and `topology` labels the record. Opinions still come from the run seed.
pub fn execute_on_graph(spec: &RunSpec, graph: Graph, topology: &str) -> Result<RunOutput> {
    let mut rng = stream_rng(spec.dynamics.seed, Stream::InitialState);
    let state = OpinionState::random(graph.node_count(), spec.dynamics.transmission, &mut rng);
    let mut config = spec.dynamics.clone();
    let rule = spec.steady_state;
    if let Some(rule) = &rule {
        rule.validate()?;
        config.iterations = rule.max_iterations;
        config.checkpoint_interval = rule.checkpoint_interval;
    }
    let initial_graph = graph.clone();
    let trace = match rule {
        Some(rule) => run_until(graph, state, config.clone(), |s| {
            detect_steady_state(s, &rule)
        })?,
        None => run_until(graph, state, config.clone(), |_| false)?,
    };
    let converged = detect_steady_state(&trace.checkpoints, &rule.unwrap_or_default());
    let metrics = MetricsReport::compute(&trace.graph, trace.state.opinions());
    let record = RunRecord {
        run_id: spec.run_id,
        topology: topology.to_string(),
        n: initial_graph.node_count(),
        avg_k: initial_graph.mean_degree(),
        transmission: config.transmission,
        distribution: config.distribution,
        phi: config.phi.radians(),
        rewiring: config.rewiring,
        delta: config.delta,
        seed: config.seed,
        iterations: trace.iterations,
        converged,
        bc: metrics.bc,
        beta: metrics.beta,
        corr: metrics.corr_b_bnn,
        outcome: metrics.outcome,
        checkpoints: trace.checkpoints.clone(),
        error: None,
    };
    Ok(RunOutput {
        record,
        initial_graph,
        trace,
    })
}

fn failed_record(spec: &RunSpec, err: &Error) -> RunRecord {
    let c = &spec.dynamics;
    RunRecord {
        run_id: spec.run_id,
        topology: spec.generator.tag(),
        n: 0,
        avg_k: f64::NAN,
        transmission: c.transmission,
        distribution: c.distribution,
        phi: c.phi.radians(),
        rewiring: c.rewiring,
        delta: c.delta,
        seed: c.seed,
        iterations: 0,
        converged: false,
        bc: f64::NAN,
        beta: f64::NAN,
        corr: f64::NAN,
        outcome: None,
        checkpoints: Vec::new(),
        error: Some(err.to_string()),
    }
}

/// A grid of runs: generators × transmissions × distributions × phases ×
/// replicates, all sharing the template's remaining settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    pub transmissions: Vec<TransmissionKind>,
    pub distributions: Vec<DistributionKind>,
    /// `transmission`, `distribution`, `phi` and `seed` are taken from the
    /// grid instead.
    pub template: DynamicsConfig,
    pub phi_values: Vec<f64>,
    pub replicates: usize,
    pub seed_base: u64,
    pub steady_state: Option<SteadyStateRule>,
}

impl SweepSpec {
    /// Sweep of one configuration over `phi_values`.
    pub fn single(
        generator: GeneratorSpec,
        template: DynamicsConfig,
        phi_values: Vec<f64>,
    ) -> Self {
        SweepSpec {
            name: "custom".to_string(),
            generators: vec![generator],
            transmissions: vec![template.transmission],
            distributions: vec![template.distribution],
            template,
            phi_values,
            replicates: 1,
            seed_base: 0,
            steady_state: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::param("sweep needs at least one replicate"));
        }
        if self.phi_values.is_empty() {
            return Err(Error::param("sweep needs at least one phase value"));
        }
        if self.generators.is_empty()
            || self.transmissions.is_empty()
            || self.distributions.is_empty()
        {
            return Err(Error::param("sweep grid has an empty axis"));
        }
        if let Some((i, phi)) = self
            .phi_values
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite())
        {
            return Err(Error::param(format!(
                "phase value #{i} ({phi}) is not finite"
            )));
        }
        if let Some(rule) = &self.steady_state {
            rule.validate()?;
        }
        self.template.validate()
    }

    /// Every run of the grid, ordered by (generator, transmission,
    /// distribution, phase, replicate); `run_id` is the position.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut runs = Vec::new();
        for generator in &self.generators {
            for &transmission in &self.transmissions {
                for &distribution in &self.distributions {
                    for &phi in &self.phi_values {
                        for replicate in 0..self.replicates {
                            runs.push(RunSpec {
                                run_id: runs.len(),
                                generator: generator.clone(),
                                dynamics: DynamicsConfig {
                                    transmission,
                                    distribution,
                                    phi: Phase::new(phi),
                                    seed: self.seed_base + replicate as u64,
                                    ..self.template.clone()
                                },
                                steady_state: self.steady_state,
                            });
                        }
                    }
                }
            }
        }
        runs
    }

    pub fn run_count(&self) -> usize {
        self.generators.len()
            * self.transmissions.len()
            * self.distributions.len()
            * self.phi_values.len()
            * self.replicates
    }
}

/// `count` evenly spaced values from `min` to `max`, both included.
pub fn phi_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub parallelism: usize,
    /// Write `run_<id>.edges` and `run_<id>.opinions` for every run here.
    pub keep_states: Option<PathBuf>,
}

/// Runs the whole grid on `parallelism` worker threads. Records come back
/// in `run_id` order whatever the scheduling; failed runs are recorded
/// with `error` set rather than aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<Vec<RunRecord>> {
    run_sweep_with(
        spec,
        &SweepOptions {
            parallelism,
            keep_states: None,
        },
    )
}

pub fn run_sweep_with(spec: &SweepSpec, options: &SweepOptions) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    if options.parallelism == 0 {
        return Err(Error::param("parallelism must be at least 1"));
    }
    let keep = match &options.keep_states {
        Some(dir) => Some(ensure_dir(dir)?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism)
        .build()
        .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?;
    let runs = spec.runs();
    pool.install(|| {
        runs.par_iter()
            .map(|run| match execute_run(run) {
                Ok(out) => {
                    if let Some(dir) = &keep {
                        save_state(dir, &out)?;
                    }
                    Ok(out.record)
                }
                Err(err @ (Error::Generation(_) | Error::Parameter(_))) => {
                    Ok(failed_record(run, &err))
                }
                Err(err) => Err(err),
            })
            .collect()
    })
}

fn save_state(dir: &Path, out: &RunOutput) -> Result<()> {
    let id = out.record.run_id;
    write_edge_list(&out.trace.graph, dir.join(format!("run_{id}.edges")))?;
    write_opinions(
        out.trace.state.opinions(),
        dir.join(format!("run_{id}.opinions")),
    )
}

/// Mean and sample standard deviation of BC and balance for one
/// configuration and phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub topology: String,
    pub transmission: TransmissionKind,
    pub distribution: DistributionKind,
    pub rewiring: bool,
    pub delta: f64,
    pub phi: f64,
    pub runs: usize,
    pub bc_mean: f64,
    pub bc_std: f64,
    pub beta_mean: f64,
    pub beta_std: f64,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    if finite.len() == 1 {
        return (mean, 0.0);
    }
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups records by configuration and phase, in order of first
/// appearance. Non-finite values (failed or degenerate runs) are left out
/// of the statistics.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    type Key = (String, TransmissionKind, DistributionKind, bool, u64, u64);
    let key = |r: &RunRecord| -> Key {
        (
            r.topology.clone(),
            r.transmission,
            r.distribution,
            r.rewiring,
            r.delta.to_bits(),
            r.phi.to_bits(),
        )
    };
    let mut groups: Vec<(Key, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let first = members[0];
            let bcs: Vec<f64> = members.iter().map(|r| r.bc).collect();
            let betas: Vec<f64> = members.iter().map(|r| r.beta).collect();
            let (bc_mean, bc_std) = mean_and_sample_std(&bcs);
            let (beta_mean, beta_std) = mean_and_sample_std(&betas);
            AggregateRow {
                topology: first.topology.clone(),
                transmission: first.transmission,
                distribution: first.distribution,
                rewiring: first.rewiring,
                delta: first.delta,
                phi: first.phi,
                runs: members.len(),
                bc_mean,
                bc_std,
                beta_mean,
                beta_std,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64], interval: u64) -> Vec<Checkpoint> {
        values
            .iter()
            .enumerate()
            .map(|(i, &bc)| Checkpoint {
                iteration: (i as u64 + 1) * interval,
                bc,
            })
            .collect()
    }

    #[test]
    fn constant_series_is_steady() {
        let rule = SteadyStateRule::default();
        assert!(detect_steady_state(&series(&[0.5; 12], 100_000), &rule));
        // not yet past the floor
        assert!(!detect_steady_state(&series(&[0.5; 9], 100_000), &rule));
        assert!(!detect_steady_state(&[], &rule));
    }

    #[test]
    fn oscillating_series_is_not_steady() {
        let values: Vec<f64> = (0..30)
            .map(|i| if i % 2 == 0 { 0.3 } else { 0.6 })
            .collect();
        assert!(!detect_steady_state(
            &series(&values, 100_000),
            &SteadyStateRule::default()
        ));
    }

    #[test]
    fn nan_checkpoints_are_never_steady() {
        let mut values = vec![0.5; 12];
        values[11] = f64::NAN;
        assert!(!detect_steady_state(
            &series(&values, 100_000),
            &SteadyStateRule::default()
        ));
    }

    #[test]
    fn aggregate_two_samples() {
        let base = RunRecord {
            run_id: 0,
            topology: "er".into(),
            n: 10,
            avg_k: 4.0,
            transmission: TransmissionKind::Uniform,
            distribution: DistributionKind::Smooth,
            phi: 1.0,
            rewiring: false,
            delta: 0.1,
            seed: 0,
            iterations: 10,
            converged: true,
            bc: 0.4,
            beta: 1.0,
            corr: 0.0,
            outcome: None,
            checkpoints: vec![],
            error: None,
        };
        let other = RunRecord {
            bc: 0.6,
            run_id: 1,
            ..base.clone()
        };
        let rows = aggregate(&[base.clone(), other]);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].bc_mean - 0.5).abs() < 1e-12);
        // sqrt(((0.1)^2 + (0.1)^2) / 1)
        assert!((rows[0].bc_std - 0.02f64.sqrt()).abs() < 1e-12);
        let single = aggregate(std::slice::from_ref(&base));
        assert_eq!(single[0].bc_std, 0.0);
        let dup = aggregate(&[base.clone(), base.clone()]);
        assert!((dup[0].bc_mean - 0.4).abs() < 1e-15);
    }

    #[test]
    fn phi_grid_is_inclusive() {
        let g = phi_grid(0.0, std::f64::consts::TAU, 33);
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[32], std::f64::consts::TAU);
        assert_eq!(phi_grid(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn sweep_validation() {
        let mut spec = SweepSpec::single(
            GeneratorSpec::er(50, 4.0),
            DynamicsConfig::default(),
            vec![0.0],
        );
        assert!(spec.validate().is_ok());
        spec.replicates = 0;
        assert!(spec.validate().is_err());
        spec.replicates = 1;
        spec.phi_values.clear();
        assert!(spec.validate().is_err());
        assert!(run_sweep(
            &SweepSpec::single(
                GeneratorSpec::er(50, 4.0),
                DynamicsConfig::default(),
                vec![0.0]
            ),
            0
        )
        .is_err());
    }

    #[test]
    fn seeds_stable_when_replicates_added() {
        let mut spec = SweepSpec::single(
            GeneratorSpec::er(50, 4.0),
            DynamicsConfig::default(),
            vec![0.0, 1.0],
        );
        spec.seed_base = 40;
        spec.replicates = 2;
        let a: Vec<u64> = spec.runs().iter().map(|r| r.dynamics.seed).collect();
        assert_eq!(a, vec![40, 41, 40, 41]);
        spec.replicates = 3;
        let b: Vec<u64> = spec.runs().iter().map(|r| r.dynamics.seed).collect();
        assert_eq!(b, vec![40, 41, 42, 40, 41, 42]);
    }

    #[test]
    fn generator_failure_is_recorded_not_fatal() {
        let mut spec = SweepSpec::single(
            GeneratorSpec::new(crate::graph::GeneratorKind::RandomRegular { n: 5, k: 3 }),
            DynamicsConfig {
                iterations: 10,
                ..DynamicsConfig::default()
            },
            vec![0.0],
        );
        spec.generators.push(GeneratorSpec::er(20, 4.0));
        let records = run_sweep(&spec, 2).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].error.is_some());
        assert!(records[1].error.is_none());
    }
}
