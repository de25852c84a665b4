//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mesa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mesa"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().expect("no signal")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).expect("write file");
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Small 3D two-robot problem; inter-robot closures every 5 steps.
fn generate_problem(dir: &Path) -> PathBuf {
    let config = dir.join("gen.ini");
    write(
        &config,
        "[synthetic]\nrobots = 2\nposes_per_robot = 15\ndims = 3\nseed = 7\ninter_period = 5\n",
    );
    let problem = dir.join("prob.mrp");
    run_ok(mesa().args(["generate", "--config"]).arg(&config).arg("--out").arg(&problem));
    problem
}

#[test]
fn generate_is_deterministic_and_seed_flag_changes_output() {
    let dir = TempDir::new().unwrap();
    let a = generate_problem(dir.path());
    let bytes_a = read(&a);

    let b = dir.path().join("again.mrp");
    let config = dir.path().join("gen.ini");
    run_ok(mesa().args(["generate", "--config"]).arg(&config).arg("--out").arg(&b));
    assert_eq!(bytes_a, read(&b), "same config, same bytes");

    let c = dir.path().join("reseeded.mrp");
    run_ok(mesa()
        .args(["generate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&c)
        .args(["--seed", "8"]));
    assert_ne!(bytes_a, read(&c), "different seed, different dataset");
}

#[test]
fn geodesic_manifest_carries_the_default_hyperparameters() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());
    let out = dir.path().join("out");
    run_ok(mesa()
        .args(["run", "--problem"])
        .arg(&problem)
        .args(["--method", "geodesic", "--out-dir"])
        .arg(&out));

    let manifest = read(&out.join("geodesic.manifest.txt"));
    assert!(manifest.starts_with("# schema: manifest v1\n"), "{manifest}");
    assert!(manifest.contains("\nbeta0 = 200\n"), "{manifest}");
    assert!(manifest.contains("\nalpha = 1\n"), "{manifest}");
    assert!(manifest.contains("\nkind = geodesic\n"), "{manifest}");
    assert!(manifest.contains("\ndual_rule = theta-gap\n"), "{manifest}");
    // Budget defaults to 500 events per edge per robot: one edge, two robots.
    assert!(manifest.contains("\nevents = 1000\n"), "{manifest}");
}

#[test]
fn split_manifest_defaults_to_growing_penalty() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());
    let out = dir.path().join("out");
    run_ok(mesa()
        .args(["run", "--problem"])
        .arg(&problem)
        .args(["--method", "split", "--out-dir"])
        .arg(&out));

    let manifest = read(&out.join("split.manifest.txt"));
    assert!(manifest.contains("\nbeta0 = 200\n"), "{manifest}");
    assert!(manifest.contains("\nalpha = 1.2\n"), "{manifest}");
}

#[test]
fn range_problems_default_to_gentle_penalty_growth() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("gen.ini");
    write(
        &config,
        "[synthetic]\nrobots = 2\nposes_per_robot = 12\ndims = 2\nseed = 3\ninter_period = 4\nmeasurement = range\n",
    );
    let problem = dir.path().join("range.mrp");
    run_ok(mesa().args(["generate", "--config"]).arg(&config).arg("--out").arg(&problem));

    let out = dir.path().join("out");
    run_ok(mesa()
        .args(["run", "--problem"])
        .arg(&problem)
        .args(["--method", "geodesic", "--budget", "400", "--out-dir"])
        .arg(&out));

    let manifest = read(&out.join("geodesic.manifest.txt"));
    assert!(manifest.contains("\nbeta0 = 2\n"), "{manifest}");
    assert!(manifest.contains("\nalpha = 1.05\n"), "{manifest}");
    // Flags still beat the problem-derived default; the starved run may
    // exit 3 but the manifest records the effective configuration.
    let out2 = dir.path().join("out2");
    let code = exit_code(
        mesa()
            .args(["run", "--problem"])
            .arg(&problem)
            .args(["--method", "geodesic", "--budget", "40", "--beta0", "9", "--out-dir"])
            .arg(&out2),
    );
    assert!(code == 0 || code == 3, "unexpected exit {code}");
    assert!(read(&out2.join("geodesic.manifest.txt")).contains("\nbeta0 = 9\n"));
}

#[test]
fn identical_invocations_write_identical_csv_bytes() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(mesa()
            .args(["run", "--problem"])
            .arg(&problem)
            .args(["--method", "geodesic", "--out-dir"])
            .arg(out));
    }
    assert_eq!(read(&a.join("geodesic.trace.csv")), read(&b.join("geodesic.trace.csv")));
    assert_eq!(read(&a.join("geodesic.summary.csv")), read(&b.join("geodesic.summary.csv")));
    assert_eq!(read(&a.join("geodesic.manifest.txt")), read(&b.join("geodesic.manifest.txt")));
}

#[test]
fn exit_codes_separate_convergence_budget_and_failure() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());

    let code = exit_code(
        mesa()
            .args(["run", "--problem"])
            .arg(&problem)
            .args(["--method", "geodesic", "--out-dir"])
            .arg(dir.path().join("ok")),
    );
    assert_eq!(code, 0, "generous budget converges");

    let code = exit_code(
        mesa()
            .args(["run", "--problem"])
            .arg(&problem)
            .args(["--method", "geodesic", "--budget", "5", "--out-dir"])
            .arg(dir.path().join("starved")),
    );
    assert_eq!(code, 3, "five events cannot close the gap");

    // A partitioned pose graph has anchored MESA subproblems but leaves the
    // non-anchor parts singular for the independent baseline.
    let g2o = dir.path().join("chain.g2o");
    write(&g2o, CHAIN_G2O);
    let code = exit_code(
        mesa()
            .args(["bench", "--g2o"])
            .arg(&g2o)
            .args(["--parts", "2", "--method", "independent", "--out-dir"])
            .arg(dir.path().join("indep")),
    );
    assert_eq!(code, 4, "unanchored part is a solver failure");

    let code = exit_code(
        mesa()
            .args(["run", "--problem", "/nonexistent.mrp", "--method", "geodesic", "--out-dir"])
            .arg(dir.path().join("x")),
    );
    assert_eq!(code, 1, "missing input is a generic error");
}

const CHAIN_G2O: &str = "\
VERTEX_SE2 0 0.0 0.0 0.0
VERTEX_SE2 1 1.0 0.05 0.1
VERTEX_SE2 2 2.1 0.1 0.0
VERTEX_SE2 3 3.0 0.2 -0.1
VERTEX_SE2 4 4.05 0.1 0.0
VERTEX_SE2 5 5.0 0.0 0.05
EDGE_SE2 0 1 1.0 0.0 0.0 100 0 0 100 0 400
EDGE_SE2 1 2 1.0 0.0 0.0 100 0 0 100 0 400
EDGE_SE2 2 3 1.0 0.0 0.0 100 0 0 100 0 400
EDGE_SE2 3 4 1.0 0.0 0.0 100 0 0 100 0 400
EDGE_SE2 4 5 1.0 0.0 0.0 100 0 0 100 0 400
EDGE_SE2 0 5 5.0 0.0 0.0 100 0 0 100 0 400
";

#[test]
fn bench_partitions_g2o_and_all_methods_agree_on_the_optimum() {
    let dir = TempDir::new().unwrap();
    let g2o = dir.path().join("chain.g2o");
    write(&g2o, CHAIN_G2O);
    let out = dir.path().join("out");
    let saved = dir.path().join("chain2.mrp");

    run_ok(mesa()
        .args(["bench", "--g2o"])
        .arg(&g2o)
        .args(["--parts", "2", "--method", "centralized", "--save-problem"])
        .arg(&saved)
        .arg("--out-dir")
        .arg(&out));
    run_ok(mesa()
        .args(["bench", "--g2o"])
        .arg(&g2o)
        .args(["--parts", "2", "--kind", "geodesic", "--out-dir"])
        .arg(&out));

    assert!(saved.exists(), "partitioned problem saved for reuse");
    let central = read(&out.join("centralized.summary.csv"));
    let geodesic = read(&out.join("geodesic.summary.csv"));
    let last_field = |csv: &str| -> f64 {
        csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap()
    };
    let (rc, rg) = (last_field(&central), last_field(&geodesic));
    // The chain measurements are mutually consistent, so both land near zero.
    assert!(rc < 1e-9, "centralized residual {rc}");
    assert!(rg < 1e-6, "geodesic residual {rg}");
}

#[test]
fn compare_merges_traces_and_reads_manifests() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());
    let out = dir.path().join("out");
    for method in ["geodesic", "centralized"] {
        run_ok(mesa()
            .args(["run", "--problem"])
            .arg(&problem)
            .args(["--method", method, "--out-dir"])
            .arg(&out));
    }
    let merged = dir.path().join("all.csv");
    run_ok(mesa().args(["compare", "--dir"]).arg(&out).arg("--out").arg(&merged));

    let csv = read(&merged);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema: summary v1"));
    assert_eq!(
        lines.next(),
        Some("dataset,method,beta0,alpha,communications_at_convergence,r2_mean_final")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",centralized,NaN,NaN,0,"), "{}", rows[0]);
    assert!(rows[1].contains(",geodesic,200,1,"), "{}", rows[1]);

    // A trace without its manifest is an error, not a guess.
    std::fs::remove_file(out.join("geodesic.manifest.txt")).unwrap();
    let output = mesa()
        .args(["compare", "--dir"])
        .arg(&out)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("manifest"));
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let problem = generate_problem(dir.path());
    let config = dir.path().join("bad.ini");
    write(&config, "[mesa]\nbogus_key = 1\n");
    let output = mesa()
        .args(["run", "--problem"])
        .arg(&problem)
        .args(["--method", "geodesic", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bogus_key"), "{stderr}");
}
