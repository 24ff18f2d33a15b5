use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use echosim::dynamics::{DistributionKind, TransmissionKind};
use echosim::graph::{GeneratorKind, GeneratorSpec, LfrParams};
use echosim::harness::{Preset, SteadyStateRule};
use echosim::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "echosim",
    version,
    about = "Opinion dynamics with post transmission, algorithmic distribution and rewiring"
)]
pub struct Cli {
    /// Directory that receives manifest.txt and all tables.
    #[arg(
        long,
        global = true,
        env = "ECHOSIM_OUT",
        default_value = "echosim-out"
    )]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a network and write it as an edge list.
    Generate(GenerateArgs),
    /// Execute one simulation run.
    Run(RunArgs),
    /// Sweep the phase over a grid of configurations and replicates.
    Sweep(SweepArgs),
    /// Execute a named experiment suite.
    Preset(PresetArgs),
    /// Metrics and density map of a network with given opinions.
    Analyze(AnalyzeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Er,
    Sbm,
    Lattice2d,
    Rrg,
    Powerlaw,
    Lfr,
}

/// Parameters shared by all generators; each kind reads the ones it needs.
#[derive(Args, Debug, Clone)]
pub struct GenParams {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Mean degree (ER, SBM within blocks, LFR) or the exact degree (RRG).
    #[arg(long, default_value_t = 8.0)]
    pub avg_k: f64,
    /// Lattice side length.
    #[arg(long, default_value_t = 32)]
    pub side: usize,
    /// Number of SBM blocks or LFR communities.
    #[arg(long, default_value_t = 2)]
    pub blocks: usize,
    /// SBM within-block edge probability; defaults to avg_k / (block size - 1).
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long, default_value_t = 8e-5)]
    pub p_out: f64,
    /// Degree exponent of the power-law and LFR generators.
    #[arg(long, default_value_t = 2.2)]
    pub gamma: f64,
    #[arg(long, default_value_t = 4)]
    pub k_min: usize,
    #[arg(long, default_value_t = 40)]
    pub k_max: usize,
    /// LFR mixing parameter.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Keep only the largest connected component.
    #[arg(long)]
    pub lcc: bool,
}

impl GenParams {
    pub fn spec(&self, kind: Kind) -> Result<GeneratorSpec> {
        let kind = match kind {
            Kind::Er => GeneratorKind::ErdosRenyi {
                n: self.n,
                avg_degree: self.avg_k,
            },
            Kind::Sbm => {
                if self.blocks == 0 {
                    return Err(Error::Parameter("SBM needs at least one block".into()));
                }
                let size = self.n / self.blocks;
                let mut sizes = vec![size; self.blocks];
                sizes[0] += self.n - size * self.blocks;
                let p_in = self.p_in.unwrap_or(self.avg_k / (size.max(2) - 1) as f64);
                GeneratorKind::StochasticBlock {
                    sizes,
                    p_in,
                    p_out: self.p_out,
                }
            }
            Kind::Lattice2d => GeneratorKind::Lattice2d { side: self.side },
            Kind::Rrg => {
                if self.avg_k.fract() != 0.0 || self.avg_k < 0.0 {
                    return Err(Error::Parameter(format!(
                        "random regular graph needs an integer degree, got --avg-k {}",
                        self.avg_k
                    )));
                }
                GeneratorKind::RandomRegular {
                    n: self.n,
                    k: self.avg_k as usize,
                }
            }
            Kind::Powerlaw => GeneratorKind::PowerLawConfig {
                n: self.n,
                gamma: self.gamma,
                k_min: self.k_min,
                k_max: self.k_max,
            },
            Kind::Lfr => GeneratorKind::Lfr(LfrParams {
                n: self.n,
                mu: self.mu,
                degree_exponent: self.gamma,
                avg_degree: self.avg_k,
                k_max: self.k_max,
                communities: self.blocks,
            }),
        };
        let spec = GeneratorSpec::new(kind);
        Ok(if self.lcc {
            spec.with_largest_component()
        } else {
            spec
        })
    }
}

/// Dynamics settings common to `run` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct DynArgs {
    /// Opinion step of attraction and repulsion.
    #[arg(long, default_value_t = echosim::dynamics::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long)]
    pub rewiring: bool,
    /// Iteration budget; the cap when --steady-state is set.
    #[arg(long, default_value_t = 1_000_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 100_000)]
    pub checkpoint_interval: u64,
    /// Stop once the bimodality coefficient has settled.
    #[arg(long)]
    pub steady_state: bool,
}

impl DynArgs {
    pub fn rule(&self) -> Option<SteadyStateRule> {
        self.steady_state.then(|| {
            let default = SteadyStateRule::default();
            SteadyStateRule {
                checkpoint_interval: self.checkpoint_interval,
                min_iterations: default.min_iterations.min(self.iterations),
                max_iterations: self.iterations,
                ..default
            }
        })
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub params: GenParams,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge-list path; defaults to graph.edges in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Edge list to run on instead of generating a network.
    #[arg(long, conflicts_with = "kind")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "graph")]
    pub kind: Option<Kind>,
    #[command(flatten)]
    pub params: GenParams,
    #[arg(long, default_value = "uni")]
    pub transmission: TransmissionKind,
    #[arg(long, default_value = "d3")]
    pub distribution: DistributionKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[command(flatten)]
    pub dynamics: DynArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bins per axis of the density map.
    #[arg(long, default_value_t = echosim::metrics::DEFAULT_BINS)]
    pub bins: usize,
    /// Also write the initial network and the final network and opinions
    /// under states/.
    #[arg(long)]
    pub keep_states: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub params: GenParams,
    /// Comma-separated transmission functions.
    #[arg(long, value_delimiter = ',', default_value = "uni")]
    pub transmission: Vec<TransmissionKind>,
    /// Comma-separated distribution functions.
    #[arg(long, value_delimiter = ',', default_value = "d3")]
    pub distribution: Vec<DistributionKind>,
    #[arg(long, default_value_t = 33)]
    pub phi_count: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_min: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
    pub phi_max: f64,
    #[command(flatten)]
    pub dynamics: DynArgs,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Args, Debug)]
pub struct PresetArgs {
    /// One of: phi-sweep-rewiring, phi-sweep, null-distribution-rewiring,
    /// null-distribution, uniform-transmission, topology-comparison,
    /// sbm-bistable, transient.
    pub name: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Override the preset's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Args, Debug)]
pub struct ExecArgs {
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Archive every run's final network and opinions under states/.
    #[arg(long)]
    pub keep_states: bool,
}

impl ExecArgs {
    pub fn workers(&self) -> usize {
        self.parallelism
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Opinion file with one `id value` pair per line.
    #[arg(long)]
    pub opinions: PathBuf,
    /// Dataset name in the manifest; defaults to the edge file stem.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value_t = echosim::metrics::DEFAULT_BINS)]
    pub bins: usize,
}
