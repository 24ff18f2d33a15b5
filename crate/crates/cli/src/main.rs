//! `echosim` command-line entry point.
//!
//! Every subcommand writes `manifest.txt` with its fully resolved settings
//! into the output directory next to its tables, so a run can be repeated
//! from the manifest alone. Exit status is 0 on success, 1 when the work
//! itself fails and 2 for usage errors.

mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use echosim::dynamics::{DynamicsConfig, Phase};
use echosim::graph::{GeneratorKind, GeneratorSpec};
use echosim::harness::{
    aggregate, execute_on_graph, execute_run, format_sig6, phi_grid, preset_experiment,
    run_sweep_with, write_aggregate_csv, write_checkpoints_csv, write_results_csv, RunRecord,
    RunSpec, SteadyStateRule, SweepOptions, SweepSpec,
};
use echosim::io::{
    analyze_empirical, load_edge_list, write_density_map, write_edge_list, write_opinions,
    EmpiricalDataset,
};
use echosim::metrics::{density_map, scored_pairs, Outcome};
use echosim::{Error, Result};

use args::{
    AnalyzeArgs, Cli, Command, DynArgs, ExecArgs, GenerateArgs, PresetArgs, RunArgs, SweepArgs,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    create_dir(&cli.out)?;
    match &cli.command {
        Command::Generate(a) => generate(&cli.out, a),
        Command::Run(a) => run(&cli.out, a),
        Command::Sweep(a) => sweep(&cli.out, a),
        Command::Preset(a) => preset(&cli.out, a),
        Command::Analyze(a) => analyze(&cli.out, a),
    }
}

/// Ordered `key = value` lines.
struct Manifest(Vec<(String, String)>);

impl Manifest {
    fn new(command: &str) -> Self {
        let mut m = Manifest(Vec::new());
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn generator(&mut self, prefix: &str, spec: &GeneratorSpec) {
        let key = |k: &str| format!("{prefix}{k}");
        self.set(&key("kind"), spec.label());
        match &spec.kind {
            GeneratorKind::ErdosRenyi { n, avg_degree } => {
                self.set(&key("n"), n);
                self.set(&key("avg_k"), avg_degree);
            }
            GeneratorKind::StochasticBlock { sizes, p_in, p_out } => {
                let sizes: Vec<String> = sizes.iter().map(ToString::to_string).collect();
                self.set(&key("sizes"), sizes.join(","));
                self.set(&key("p_in"), p_in);
                self.set(&key("p_out"), p_out);
            }
            GeneratorKind::Lattice2d { side } => self.set(&key("side"), side),
            GeneratorKind::RandomRegular { n, k } => {
                self.set(&key("n"), n);
                self.set(&key("k"), k);
            }
            GeneratorKind::PowerLawConfig {
                n,
                gamma,
                k_min,
                k_max,
            } => {
                self.set(&key("n"), n);
                self.set(&key("gamma"), gamma);
                self.set(&key("k_min"), k_min);
                self.set(&key("k_max"), k_max);
            }
            GeneratorKind::Lfr(p) => {
                self.set(&key("n"), p.n);
                self.set(&key("mu"), p.mu);
                self.set(&key("gamma"), p.degree_exponent);
                self.set(&key("avg_k"), p.avg_degree);
                self.set(&key("k_max"), p.k_max);
                self.set(&key("communities"), p.communities);
            }
        }
        self.set(&key("largest_component"), spec.largest_component);
    }

    fn dynamics(&mut self, args: &DynArgs) {
        self.set("delta", args.delta);
        self.set("rewiring", args.rewiring);
        self.set("checkpoint_interval", args.checkpoint_interval);
        self.steady_state(args.rule(), args.iterations);
    }

    fn steady_state(&mut self, rule: Option<SteadyStateRule>, iterations: u64) {
        match rule {
            Some(r) => {
                self.set("steady_state", true);
                self.set("steady_window", r.window);
                self.set("steady_tolerance", r.tolerance);
                self.set("min_iterations", r.min_iterations);
                self.set("max_iterations", r.max_iterations);
            }
            None => {
                self.set("steady_state", false);
                self.set("iterations", iterations);
            }
        }
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.0 {
            text.push_str(&format!("{k} = {v}\n"));
        }
        write_file(&dir.join("manifest.txt"), text.as_bytes())
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_tables(dir: &Path, records: &[RunRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_results_csv(records, &mut buf)?;
    write_file(&dir.join("results.csv"), &buf)?;
    buf.clear();
    write_checkpoints_csv(records, &mut buf)?;
    write_file(&dir.join("checkpoints.csv"), &buf)
}

fn generate(out: &Path, args: &GenerateArgs) -> Result<()> {
    let spec = args.params.spec(args.kind)?;
    let graph = spec.generate(args.seed)?;
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| out.join("graph.edges"));
    write_edge_list(&graph, &path)?;

    let mut m = Manifest::new("generate");
    m.generator("", &spec);
    m.set("seed", args.seed);
    m.set("output", path.display());
    m.set("nodes", graph.node_count());
    m.set("edges", graph.edge_count());
    m.write(out)?;
    println!(
        "wrote {} ({} nodes, {} edges, seed {})",
        path.display(),
        graph.node_count(),
        graph.edge_count(),
        args.seed
    );
    Ok(())
}

fn run(out: &Path, args: &RunArgs) -> Result<()> {
    let mut m = Manifest::new("run");
    let generator = match args.kind {
        Some(kind) => args.params.spec(kind)?,
        // Placeholder; the loaded graph replaces it below.
        None => GeneratorSpec::er(0, 0.0),
    };
    let spec = RunSpec {
        run_id: 0,
        generator: generator.clone(),
        dynamics: DynamicsConfig {
            transmission: args.transmission,
            distribution: args.distribution,
            phi: Phase::new(args.phi),
            delta: args.dynamics.delta,
            rewiring: args.dynamics.rewiring,
            iterations: args.dynamics.iterations,
            checkpoint_interval: args.dynamics.checkpoint_interval,
            seed: args.seed,
        },
        steady_state: args.dynamics.rule(),
    };
    let output = match &args.graph {
        Some(path) => {
            m.set("graph", path.display());
            let loaded = load_edge_list(path)?;
            execute_on_graph(&spec, loaded.graph, "file")?
        }
        None => {
            m.generator("graph_", &generator);
            execute_run(&spec)?
        }
    };
    m.set("transmission", args.transmission);
    m.set("distribution", args.distribution);
    m.set("phi", args.phi);
    m.dynamics(&args.dynamics);
    m.set("seed", args.seed);
    m.set("bins", args.bins);

    let final_graph = &output.trace.graph;
    let opinions = output.trace.state.opinions();
    let (b, b_nn) = scored_pairs(final_graph, opinions);
    write_density_map(&density_map(&b, &b_nn, args.bins)?, out.join("density.txt"))?;
    write_tables(out, std::slice::from_ref(&output.record))?;
    if args.keep_states {
        let states = out.join("states");
        create_dir(&states)?;
        write_edge_list(&output.initial_graph, states.join("initial.edges"))?;
        write_edge_list(final_graph, states.join("final.edges"))?;
        write_opinions(opinions, states.join("final.opinions"))?;
    }
    m.write(out)?;

    let r = &output.record;
    println!("iterations {}", r.iterations);
    println!("converged {}", r.converged);
    println!("bc {}", format_sig6(r.bc));
    println!("beta {}", format_sig6(r.beta));
    println!("corr {}", format_sig6(r.corr));
    println!("outcome {}", outcome_label(r.outcome));
    Ok(())
}

fn outcome_label(outcome: Option<Outcome>) -> &'static str {
    outcome.map_or("undefined", |o| o.label())
}

fn execute_sweep(out: &Path, spec: &SweepSpec, exec: &ExecArgs, mut m: Manifest) -> Result<()> {
    let workers = exec.workers();
    let keep_states: Option<PathBuf> = exec.keep_states.then(|| out.join("states"));
    for (i, g) in spec.generators.iter().enumerate() {
        m.generator(&format!("graph{i}_"), g);
    }
    let join = |items: Vec<String>| items.join(",");
    m.set(
        "transmissions",
        join(spec.transmissions.iter().map(ToString::to_string).collect()),
    );
    m.set(
        "distributions",
        join(spec.distributions.iter().map(ToString::to_string).collect()),
    );
    m.set(
        "phi_values",
        join(spec.phi_values.iter().map(|p| format_sig6(*p)).collect()),
    );
    m.set("delta", spec.template.delta);
    m.set("rewiring", spec.template.rewiring);
    m.set("checkpoint_interval", spec.template.checkpoint_interval);
    m.steady_state(spec.steady_state, spec.template.iterations);
    m.set("replicates", spec.replicates);
    m.set("seed_base", spec.seed_base);
    m.set("runs", spec.run_count());
    m.set("parallelism", workers);

    let records = run_sweep_with(
        spec,
        &SweepOptions {
            parallelism: workers,
            keep_states,
        },
    )?;
    write_tables(out, &records)?;
    let rows = aggregate(&records);
    let mut buf = Vec::new();
    write_aggregate_csv(&rows, &mut buf)?;
    write_file(&out.join("aggregate.csv"), &buf)?;
    m.write(out)?;

    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} runs ({failed} failed) -> {}",
        records.len(),
        out.join("results.csv").display()
    );
    for r in &rows {
        println!(
            "{} {} {} phi {} bc {} ± {}",
            r.topology,
            r.transmission,
            r.distribution,
            format_sig6(r.phi),
            format_sig6(r.bc_mean),
            format_sig6(r.bc_std)
        );
    }
    Ok(())
}

fn sweep(out: &Path, args: &SweepArgs) -> Result<()> {
    let spec = SweepSpec {
        name: "sweep".to_string(),
        generators: vec![args.params.spec(args.kind)?],
        transmissions: args.transmission.clone(),
        distributions: args.distribution.clone(),
        template: DynamicsConfig {
            delta: args.dynamics.delta,
            rewiring: args.dynamics.rewiring,
            iterations: args.dynamics.iterations,
            checkpoint_interval: args.dynamics.checkpoint_interval,
            ..DynamicsConfig::default()
        },
        phi_values: phi_grid(args.phi_min, args.phi_max, args.phi_count),
        replicates: args.replicates,
        seed_base: args.seed_base,
        steady_state: args.dynamics.rule(),
    };
    execute_sweep(out, &spec, &args.exec, Manifest::new("sweep"))
}

fn preset(out: &Path, args: &PresetArgs) -> Result<()> {
    let mut spec = preset_experiment(args.name);
    spec.seed_base = args.seed_base;
    if let Some(replicates) = args.replicates {
        spec.replicates = replicates;
    }
    let mut m = Manifest::new("preset");
    m.set("preset", args.name);
    execute_sweep(out, &spec, &args.exec, m)
}

fn analyze(out: &Path, args: &AnalyzeArgs) -> Result<()> {
    let label = args.label.clone().unwrap_or_else(|| {
        args.edges.file_stem().map_or_else(
            || "dataset".to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    });
    let (dataset, edges) = EmpiricalDataset::load(&args.edges, &args.opinions, label.clone())?;
    let analysis = analyze_empirical(&dataset, args.bins)?;
    write_density_map(&analysis.density, out.join("density.txt"))?;

    let r = &analysis.report;
    let mut m = Manifest::new("analyze");
    m.set("label", &label);
    m.set("edges", args.edges.display());
    m.set("opinions", args.opinions.display());
    m.set("bins", args.bins);
    m.set("nodes", dataset.graph.node_count());
    m.set("unique_edges", dataset.graph.edge_count());
    m.set("raw_edges", edges.raw_edges);
    m.set("duplicate_edges", edges.duplicates);
    m.set("self_loops", edges.self_loops);
    m.write(out)?;

    println!("dataset {label}");
    println!("nodes {}", dataset.graph.node_count());
    println!("edges {}", dataset.graph.edge_count());
    println!("bc {}", format_sig6(r.bc));
    println!("beta {}", format_sig6(r.beta));
    println!("corr {}", format_sig6(r.corr_b_bnn));
    println!("outcome {}", outcome_label(r.outcome));
    Ok(())
}
