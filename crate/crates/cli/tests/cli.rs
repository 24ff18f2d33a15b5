use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use echosim::dynamics::{OpinionState, TransmissionKind};
use echosim::graph::{generate_er, GeneratorSpec, Graph};
use echosim::harness::read_results_csv;
use echosim::io::{load_edge_list, write_edge_list, write_opinions};
use echosim::metrics::{DensityMap, MetricsReport, Outcome, BC_CRITICAL};
use echosim::rng::{seeded, stream_rng, Stream};

/// Runs the binary with `--out <out>` followed by the whitespace-separated
/// words of `args`.
fn echosim(out: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_echosim"))
        .arg("--out")
        .arg(out)
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &str) -> String {
    let o = echosim(out, args);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(o.status.success(), "`{args}` failed: {stderr}");
    String::from_utf8(o.stdout).unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Value printed after `key` on its own stdout line.
fn stdout_field<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(' '))
        .unwrap_or_else(|| panic!("no '{key}' in {stdout}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_writes_edge_list_and_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), "generate --kind er --n 1000 --avg-k 8 --seed 7");
    let loaded = load_edge_list(dir.path().join("graph.edges")).unwrap();
    assert_eq!(loaded.graph, generate_er(1000, 8.0, 7).unwrap());
    let manifest = read(dir.path().join("manifest.txt"));
    assert!(manifest.starts_with("command = generate\n"));
    for line in ["kind = er", "n = 1000", "avg_k = 8", "seed = 7"] {
        assert!(
            manifest.lines().any(|l| l == line),
            "{line} missing:\n{manifest}"
        );
    }
}

#[test]
fn generate_lattice_defaults_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lattice.txt");
    ok(
        dir.path(),
        &format!(
            "generate --kind lattice2d --side 32 --output {}",
            path.display()
        ),
    );
    let g = load_edge_list(&path).unwrap().graph;
    assert_eq!(g.node_count(), 1024);
    assert!((0..1024).all(|v| g.degree(v) == 4));
    assert!(read(dir.path().join("manifest.txt")).contains("seed = 0\n"));
}

#[test]
fn usage_and_runtime_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = echosim(dir.path(), "generate --n 10");
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("--kind"));

    let bad_value = echosim(dir.path(), "run --kind er --transmission loud");
    assert_eq!(bad_value.status.code(), Some(2));
    assert!(stderr(&bad_value).contains("pol|sim|uni|all"));

    let invalid = echosim(dir.path(), "generate --kind er --avg-k=-3");
    assert_eq!(invalid.status.code(), Some(1));
    assert!(stderr(&invalid).starts_with("error: "));

    let absent = echosim(dir.path(), "run --graph /nonexistent/echosim.edges");
    assert_eq!(absent.status.code(), Some(1));
    assert!(stderr(&absent).contains("/nonexistent/echosim.edges"));
}

#[test]
fn unknown_preset_lists_the_available_ones() {
    let dir = tempfile::tempdir().unwrap();
    let o = echosim(dir.path(), "preset bogus");
    assert_eq!(o.status.code(), Some(2));
    let text = stderr(&o);
    for name in [
        "phi-sweep-rewiring",
        "sbm-bistable",
        "topology-comparison",
        "transient",
    ] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn zero_iteration_run_reports_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        "run --kind er --n 500 --avg-k 6 --transmission pol --iterations 0 --seed 3",
    );
    let graph = GeneratorSpec::er(500, 6.0).generate(3).unwrap();
    let mut rng = stream_rng(3, Stream::InitialState);
    let state = OpinionState::random(500, TransmissionKind::Polarized, &mut rng);
    let expected = MetricsReport::compute(&graph, state.opinions());

    let records = read_results_csv(read(dir.path().join("results.csv")).as_bytes()).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!(r.iterations, 0);
    assert!((r.bc - expected.bc).abs() < 1e-5 * expected.bc);
    assert!((r.beta - expected.beta).abs() < 1e-5 * expected.beta);
    assert_eq!(r.outcome, expected.outcome);
    assert_eq!(stdout_field(&stdout, "iterations"), "0");
    assert_eq!(
        read(dir.path().join("checkpoints.csv")),
        "run_id,iteration,bc\n"
    );

    let density = DensityMap::from_text(&read(dir.path().join("density.txt"))).unwrap();
    assert_eq!(density.total(), expected.sample_count as u64);
}

#[test]
fn repeated_run_writes_identical_files() {
    let args = "run --kind er --n 400 --avg-k 6 --transmission all --distribution d1 --phi 0.9 \
                --rewiring --iterations 60000 --checkpoint-interval 10000 --seed 5 --keep-states";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(ok(a.path(), args), ok(b.path(), args));
    for file in [
        "results.csv",
        "checkpoints.csv",
        "density.txt",
        "manifest.txt",
        "states/initial.edges",
        "states/final.edges",
        "states/final.opinions",
    ] {
        assert_eq!(
            read(a.path().join(file)),
            read(b.path().join(file)),
            "{file}"
        );
    }
    assert_eq!(read(a.path().join("checkpoints.csv")).lines().count(), 7);
}

#[test]
fn rewiring_run_on_a_graph_file_forms_an_echo_chamber() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    ok(
        dir.path(),
        &format!(
            "generate --kind er --n 1000 --avg-k 8 --seed 1 --output {}",
            graph.display()
        ),
    );
    let stdout = ok(
        dir.path(),
        &format!(
            "run --graph {} --transmission uni --distribution d2 --phi 1.47 --rewiring \
             --iterations 5000000 --seed 1",
            graph.display()
        ),
    );
    assert_eq!(stdout_field(&stdout, "outcome"), "echo_chamber");
    let bc: f64 = stdout_field(&stdout, "bc").parse().unwrap();
    assert!(bc > BC_CRITICAL, "{bc}");
    let manifest = read(dir.path().join("manifest.txt"));
    assert!(manifest.contains(&format!("graph = {}\n", graph.display())));
    assert!(manifest.contains("rewiring = true\n"));
}

#[test]
#[allow(clippy::approx_constant)]
fn sweep_output_is_independent_of_parallelism() {
    let args = |p: usize| {
        format!(
            "sweep --kind er --n 200 --avg-k 6 --transmission pol,sim --distribution d2 \
             --phi-count 33 --phi-min 0 --phi-max 6.2832 --iterations 5000 --checkpoint-interval 1000 \
             --replicates 2 --seed-base 11 --parallelism {p}"
        )
    };
    let (one, many) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(one.path(), &args(1));
    ok(many.path(), &args(8));
    for file in ["results.csv", "checkpoints.csv", "aggregate.csv"] {
        assert_eq!(
            read(one.path().join(file)),
            read(many.path().join(file)),
            "{file}"
        );
    }
    let records = read_results_csv(read(one.path().join("results.csv")).as_bytes()).unwrap();
    assert_eq!(records.len(), 2 * 33 * 2);
    assert_eq!(records[0].phi, 0.0);
    assert_eq!(records[65].phi, 6.2832);
    assert_eq!(
        read(one.path().join("aggregate.csv")).lines().count(),
        1 + 2 * 33
    );
    let manifest = read(one.path().join("manifest.txt"));
    assert!(manifest.contains("seed_base = 11\n") && manifest.contains("runs = 132\n"));
}

#[test]
fn preset_honours_seed_base_and_replicates() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        "preset sbm-bistable --seed-base 100 --replicates 2 --parallelism 2",
    );
    let records = read_results_csv(read(dir.path().join("results.csv")).as_bytes()).unwrap();
    let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![100, 101]);
    for r in &records {
        assert_eq!(r.topology, "sbm");
        assert_eq!(
            (r.transmission, r.rewiring),
            (TransmissionKind::Uniform, false)
        );
        assert!(r.error.is_none());
    }
    assert!(read(dir.path().join("manifest.txt")).contains("preset = sbm-bistable\n"));
}

/// Writes `net.edges` and `net.opinions` and returns their paths.
fn write_fixture(dir: &Path, graph: &Graph, opinions: &[f64]) -> (String, String) {
    let (edges, ops) = (dir.join("net.edges"), dir.join("net.opinions"));
    write_edge_list(graph, &edges).unwrap();
    write_opinions(opinions, &ops).unwrap();
    (edges.display().to_string(), ops.display().to_string())
}

#[test]
fn analyze_two_cliques_is_an_echo_chamber() {
    let dir = tempfile::tempdir().unwrap();
    let m = 20;
    let mut g = Graph::empty(2 * m);
    for offset in [0, m] {
        for a in 0..m {
            for b in a + 1..m {
                g.add_edge(offset + a, offset + b);
            }
        }
    }
    let opinions: Vec<f64> = (0..2 * m).map(|i| if i < m { -0.7 } else { 0.7 }).collect();
    let (edges, ops) = write_fixture(dir.path(), &g, &opinions);
    let stdout = ok(
        dir.path(),
        &format!("analyze --edges {edges} --opinions {ops} --bins 10"),
    );
    assert_eq!(
        stdout_field(&stdout, "outcome"),
        Outcome::EchoChamber.label()
    );
    assert_eq!(stdout_field(&stdout, "nodes"), "40");

    let density = DensityMap::from_text(&read(dir.path().join("density.txt"))).unwrap();
    assert_eq!(density.count(1, 1), 20);
    assert_eq!(density.count(8, 8), 20);
    assert_eq!(density.total(), 40);
    assert!(read(dir.path().join("manifest.txt")).contains("label = net\n"));
}

#[test]
fn analyze_uniform_opinions_gives_critical_bimodality() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_er(5000, 8.0, 21).unwrap();
    let state = OpinionState::random(5000, TransmissionKind::Uniform, &mut seeded(21));
    let (edges, ops) = write_fixture(dir.path(), &g, state.opinions());
    let stdout = ok(
        dir.path(),
        &format!("analyze --edges {edges} --opinions {ops}"),
    );
    let bc: f64 = stdout_field(&stdout, "bc").parse().unwrap();
    assert!((bc - BC_CRITICAL).abs() < 0.03, "{bc}");
}

#[test]
fn analyze_reports_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_er(10, 3.0, 2).unwrap();
    let (edges, ops) = write_fixture(dir.path(), &g, &[0.0; 10]);
    fs::write(&ops, "0 0.5\n1 zero\n").unwrap();
    let o = echosim(
        dir.path(),
        &format!("analyze --edges {edges} --opinions {ops}"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{ops}:2")), "{}", stderr(&o));
}

#[test]
fn output_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_echosim"))
        .env("ECHOSIM_OUT", &target)
        .args("generate --kind rrg --n 50 --avg-k 4 --seed 2".split(' '))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let g = load_edge_list(target.join("graph.edges")).unwrap().graph;
    assert!((0..50).all(|v| g.degree(v) == 4));
    assert!(target.join("manifest.txt").exists());
}
