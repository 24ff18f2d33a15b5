use rand::Rng;

use super::functions::{
    apply_opinion_update, attraction_prob, distribution_prob, rewire_prob, transmission_prob,
};
use super::{DynamicsConfig, OpinionState, TransmissionKind};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::bimodality_coefficient;
use crate::rng::{stream_rng, SimRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewireEvent {
    pub mover: usize,
    pub dropped: usize,
    pub target: usize,
}

/// What happened during one iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepEvents {
    pub poster: usize,
    pub theta: f64,
    pub transmitted: bool,
    /// Neighbors that saw the post, ascending.
    pub receivers: Vec<usize>,
    /// `attracted[k]` belongs to `receivers[k]`.
    pub attracted: Vec<bool>,
    pub rewires: Vec<RewireEvent>,
}

impl StepEvents {
    fn clear(&mut self) {
        self.transmitted = false;
        self.receivers.clear();
        self.attracted.clear();
        self.rewires.clear();
    }
}

/// Bimodality coefficient of the opinions after `iteration` steps. `NaN`
/// when undefined (fewer than four nodes or all opinions equal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub bc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub checkpoints: Vec<Checkpoint>,
    pub iterations: u64,
    /// Whether the stop predicate ended the run before the budget.
    pub stopped_early: bool,
    pub graph: Graph,
    pub state: OpinionState,
}

/// A graph and opinion state evolving under one configuration.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: Graph,
    state: OpinionState,
    config: DynamicsConfig,
    rng: SimRng,
    iteration: u64,
}

impl Simulation {
    /// Simulation driven by the dynamics stream of `config.seed`.
    pub fn new(graph: Graph, state: OpinionState, config: DynamicsConfig) -> Result<Self> {
        let rng = stream_rng(config.seed, Stream::Dynamics);
        Self::with_rng(graph, state, config, rng)
    }

    pub fn with_rng(
        graph: Graph,
        state: OpinionState,
        config: DynamicsConfig,
        rng: SimRng,
    ) -> Result<Self> {
        config.validate()?;
        if graph.node_count() == 0 {
            return Err(Error::param("dynamics needs at least one node"));
        }
        if graph.node_count() != state.len() {
            return Err(Error::param(format!(
                "graph has {} nodes but state has {} opinions",
                graph.node_count(),
                state.len()
            )));
        }
        if config.transmission == TransmissionKind::Mixed && state.behaviors().is_none() {
            return Err(Error::param("mixed transmission needs per-node behaviors"));
        }
        Ok(Simulation {
            graph,
            state,
            config,
            rng,
            iteration: 0,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn state(&self) -> &OpinionState {
        &self.state
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn into_parts(self) -> (Graph, OpinionState) {
        (self.graph, self.state)
    }

    pub fn step(&mut self) -> StepEvents {
        let mut events = StepEvents::default();
        self.step_into(&mut events);
        events
    }

    /// One iteration, recording into a reusable buffer.
    ///
    /// Random numbers are drawn in a fixed order: poster, θ, transmission,
    /// one reception draw per neighbor (ascending id), one attraction draw
    /// per receiver (ascending), then for each repulsed receiver (ascending)
    /// a rewire draw followed by target draws if it rewires.
    pub fn step_into(&mut self, events: &mut StepEvents) {
        events.clear();
        self.iteration += 1;
        let Simulation {
            graph,
            state,
            config,
            rng,
            ..
        } = self;
        let n = graph.node_count();

        let poster = rng.gen_range(0..n);
        let theta: f64 = rng.gen_range(-1.0..=1.0);
        events.poster = poster;
        events.theta = theta;

        let b_i = state.opinions[poster];
        let behavior = match config.transmission.uniform_behavior() {
            Some(f) => f,
            None => state.behaviors.as_ref().expect("checked at construction")[poster],
        };
        events.transmitted = rng.gen::<f64>() < transmission_prob(behavior, (theta - b_i).abs());
        if !events.transmitted {
            return;
        }

        // Reception is decided for every neighbor before any opinion moves.
        for &j in graph.neighbors(poster) {
            let p = distribution_prob(
                config.distribution,
                (b_i - state.opinions[j]).abs(),
                config.phi,
            );
            if rng.gen::<f64>() < p {
                events.receivers.push(j);
            }
        }
        // Each receiver's update reads only its own opinion, so updating in
        // place is equivalent to updating from a snapshot.
        let opinions = state.opinions_mut();
        for &j in &events.receivers {
            let attracted = rng.gen::<f64>() < attraction_prob(theta, opinions[j]);
            events.attracted.push(attracted);
            opinions[j] = apply_opinion_update(opinions[j], theta, attracted, config.delta);
        }

        if !config.rewiring {
            return;
        }
        for (&j, &attracted) in events.receivers.iter().zip(&events.attracted) {
            if attracted {
                continue;
            }
            let p = rewire_prob((b_i - opinions[j]).abs());
            if rng.gen::<f64>() < p {
                if let Some(target) = sample_rewire_target(graph, j, rng) {
                    graph.rewire_edge(j, poster, target);
                    events.rewires.push(RewireEvent {
                        mover: j,
                        dropped: poster,
                        target,
                    });
                }
            }
        }
    }

    /// Runs the configured number of iterations, recording the bimodality
    /// coefficient every `checkpoint_interval` steps.
    pub fn run(&mut self) -> Vec<Checkpoint> {
        self.run_until(|_| false).0
    }

    /// Like [`Simulation::run`], but after each checkpoint `stop` sees the
    /// series so far and may end the run. Returns the series and whether
    /// `stop` fired.
    pub fn run_until<F>(&mut self, mut stop: F) -> (Vec<Checkpoint>, bool)
    where
        F: FnMut(&[Checkpoint]) -> bool,
    {
        let budget = self.config.iterations;
        let interval = self.config.checkpoint_interval;
        let mut checkpoints = Vec::new();
        let mut events = StepEvents::default();
        let mut done = 0;
        while done < budget {
            self.step_into(&mut events);
            done += 1;
            if done % interval == 0 {
                checkpoints.push(Checkpoint {
                    iteration: done,
                    bc: bimodality_coefficient(self.state.opinions()).unwrap_or(f64::NAN),
                });
                if stop(&checkpoints) {
                    return (checkpoints, true);
                }
            }
        }
        (checkpoints, false)
    }
}

/// Uniform draw among nodes that are neither `node` nor its neighbors, or
/// `None` if there are none.
fn sample_rewire_target(graph: &Graph, node: usize, rng: &mut SimRng) -> Option<usize> {
    let n = graph.node_count();
    let neighbors = graph.neighbors(node);
    let candidates = n - 1 - neighbors.len();
    if candidates == 0 {
        return None;
    }
    if 2 * (neighbors.len() + 1) <= n {
        // Sparse neighborhood: rejection needs at most two draws on average.
        loop {
            let t = rng.gen_range(0..n);
            if t != node && neighbors.binary_search(&t).is_err() {
                return Some(t);
            }
        }
    }
    let mut k = rng.gen_range(0..candidates);
    let mut excluded = neighbors
        .iter()
        .copied()
        .chain(std::iter::once(node))
        .collect::<Vec<_>>();
    excluded.sort_unstable();
    let mut excluded = excluded.into_iter().peekable();
    for t in 0..n {
        if excluded.peek() == Some(&t) {
            excluded.next();
            continue;
        }
        if k == 0 {
            return Some(t);
        }
        k -= 1;
    }
    unreachable!("candidate count out of sync with adjacency")
}

/// Runs `config.iterations` steps from the given graph and state.
pub fn run(graph: Graph, state: OpinionState, config: DynamicsConfig) -> Result<RunTrace> {
    run_until(graph, state, config, |_| false)
}

/// Runs until the budget is spent or `stop` fires at a checkpoint.
pub fn run_until<F>(
    graph: Graph,
    state: OpinionState,
    config: DynamicsConfig,
    stop: F,
) -> Result<RunTrace>
where
    F: FnMut(&[Checkpoint]) -> bool,
{
    let mut sim = Simulation::new(graph, state, config)?;
    let (checkpoints, stopped_early) = sim.run_until(stop);
    let iterations = sim.iteration();
    let (graph, state) = sim.into_parts();
    Ok(RunTrace {
        checkpoints,
        iterations,
        stopped_early,
        graph,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DistributionKind, Phase, TransmissionFn};
    use crate::graph::generate_er;
    use crate::rng::seeded;

    fn uni_config() -> DynamicsConfig {
        DynamicsConfig {
            transmission: TransmissionKind::Uniform,
            distribution: DistributionKind::Uniform,
            ..DynamicsConfig::default()
        }
    }

    #[test]
    fn isolated_poster_changes_nothing() {
        let g = Graph::empty(3);
        let state = OpinionState::new(vec![0.1, 0.2, 0.3]).unwrap();
        let mut sim = Simulation::new(g, state.clone(), uni_config()).unwrap();
        let ev = sim.step();
        assert!(ev.transmitted);
        assert!(ev.receivers.is_empty());
        assert_eq!(sim.state(), &state);
    }

    #[test]
    fn null_functions_deliver_to_every_neighbor() {
        let g = generate_er(200, 8.0, 1).unwrap();
        let state = OpinionState::random(200, TransmissionKind::Uniform, &mut seeded(2));
        let mut sim = Simulation::new(g, state, uni_config()).unwrap();
        for _ in 0..500 {
            let before = sim.graph().clone();
            let ev = sim.step();
            assert!(ev.transmitted);
            assert_eq!(ev.receivers, before.neighbors(ev.poster));
        }
    }

    #[test]
    fn receivers_and_rewires_respect_contract() {
        let g = generate_er(300, 6.0, 4).unwrap();
        let state = OpinionState::random(300, TransmissionKind::Uniform, &mut seeded(5));
        let config = DynamicsConfig {
            distribution: DistributionKind::Smooth,
            phi: Phase::new(1.47),
            rewiring: true,
            ..uni_config()
        };
        let mut sim = Simulation::new(g, state, config).unwrap();
        let mut rewired = 0;
        for _ in 0..20_000 {
            let before = sim.graph().clone();
            let ev = sim.step();
            assert!(ev.receivers.iter().all(|&j| before.has_edge(ev.poster, j)));
            for r in &ev.rewires {
                let k = ev.receivers.iter().position(|&j| j == r.mover).unwrap();
                assert!(!ev.attracted[k]);
                assert_eq!(r.dropped, ev.poster);
            }
            rewired += ev.rewires.len();
            assert_eq!(sim.graph().edge_count(), before.edge_count());
        }
        assert!(rewired > 0);
        sim.graph().validate().unwrap();
    }

    #[test]
    fn rewire_skipped_when_node_knows_everyone() {
        // complete graph on 4 nodes: no non-neighbor exists
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(sample_rewire_target(&g, 0, &mut seeded(0)), None);
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3)]);
        for seed in 0..20 {
            assert_eq!(sample_rewire_target(&g, 0, &mut seeded(seed)), Some(4));
        }
    }

    #[test]
    fn dense_neighborhood_target_is_uniform_over_strangers() {
        let g = Graph::from_edges(10, (1..7).map(|j| (0, j)));
        let mut counts = [0usize; 10];
        let mut rng = seeded(7);
        for _ in 0..9000 {
            counts[sample_rewire_target(&g, 0, &mut rng).unwrap()] += 1;
        }
        assert!(counts[..7].iter().all(|&c| c == 0));
        for &c in &counts[7..] {
            assert!((c as f64 - 3000.0).abs() < 200.0, "{counts:?}");
        }
    }

    #[test]
    fn zero_iterations_is_a_no_op() {
        let g = generate_er(50, 4.0, 0).unwrap();
        let state = OpinionState::random(50, TransmissionKind::Uniform, &mut seeded(1));
        let config = DynamicsConfig {
            iterations: 0,
            ..uni_config()
        };
        let trace = run(g.clone(), state.clone(), config).unwrap();
        assert!(trace.checkpoints.is_empty());
        assert_eq!(trace.state, state);
        assert_eq!(trace.graph, g);
    }

    #[test]
    fn mixed_requires_behaviors() {
        let state = OpinionState::new(vec![0.0; 4]).unwrap();
        let config = DynamicsConfig {
            transmission: TransmissionKind::Mixed,
            ..uni_config()
        };
        assert!(Simulation::new(Graph::empty(4), state.clone(), config.clone()).is_err());
        let state = state
            .with_behaviors(vec![TransmissionFn::Similar; 4])
            .unwrap();
        assert!(Simulation::new(Graph::empty(4), state, config).is_ok());
    }

    #[test]
    fn size_mismatch_rejected() {
        let state = OpinionState::new(vec![0.0; 3]).unwrap();
        assert!(Simulation::new(Graph::empty(4), state, uni_config()).is_err());
    }

    #[test]
    fn checkpoints_follow_interval() {
        let g = generate_er(100, 4.0, 0).unwrap();
        let state = OpinionState::random(100, TransmissionKind::Uniform, &mut seeded(1));
        let config = DynamicsConfig {
            iterations: 1050,
            checkpoint_interval: 100,
            ..uni_config()
        };
        let trace = run(g, state, config).unwrap();
        let its: Vec<u64> = trace.checkpoints.iter().map(|c| c.iteration).collect();
        assert_eq!(its, (1..=10).map(|k| k * 100).collect::<Vec<_>>());
        assert_eq!(trace.iterations, 1050);
    }
}
