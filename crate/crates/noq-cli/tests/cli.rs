//! End-to-end tests that drive the compiled `noq` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noq::cost::benchmark_poly8;
use noq::Codebook;
use tempfile::tempdir;

const BIN: &str = env!("CARGO_BIN_EXE_noq");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("the noq binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("the process should exit normally")
}

#[test]
fn codebook_platonic_p20_writes_a_loadable_file() {
    let dir = tempdir().unwrap();
    let out = run(&["codebook", "--p", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let path = dir.path().join("codebook_p20_platonic.json");
    let stdout = stdout_of(&out);
    assert!(stdout.contains("wrote"), "stdout: {stdout}");
    assert!(stdout.contains("balance norm"), "stdout: {stdout}");

    let cb: Codebook = Codebook::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cb.p(), 20);
    assert!(cb.balance_norm() < 1e-9);
}

#[test]
fn codebook_p2_is_the_antipodal_pair() {
    let dir = tempdir().unwrap();
    let out = run(&["codebook", "--p", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let text = fs::read_to_string(dir.path().join("codebook_p2_platonic.json")).unwrap();
    let cb: Codebook = Codebook::from_json(&text).unwrap();
    let v = cb.vectors();
    assert_eq!(v.len(), 2);
    assert!((v[0].z - 1.0).abs() < 1e-15 && v[0].x.abs() < 1e-15 && v[0].y.abs() < 1e-15);
    assert!((v[1].z + 1.0).abs() < 1e-15 && v[1].x.abs() < 1e-15 && v[1].y.abs() < 1e-15);
}

#[test]
fn codebook_p7_platonic_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let out = run(&["codebook", "--p", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = stderr_of(&out);
    assert!(
        stderr.contains("supported sizes: 2, 3, 4, 6, 8, 12, 20"),
        "stderr: {stderr}"
    );
}

#[test]
fn codebook_optimized_regenerates_bit_identically_from_a_seed() {
    let dir_a = tempdir().unwrap();
    let dir_b = tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "codebook",
            "--p",
            "7",
            "--mode",
            "optimized",
            "--seed",
            "42",
            "--restarts",
            "4",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }

    let name = "codebook_p7_optimized.json";
    let bytes_a = fs::read(dir_a.path().join(name)).unwrap();
    let bytes_b = fs::read(dir_b.path().join(name)).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give the same file");

    let cb: Codebook = Codebook::from_json(std::str::from_utf8(&bytes_a).unwrap()).unwrap();
    assert_eq!(cb.p(), 7);
}

#[test]
fn estimate_bits_mode_prints_the_pinned_row() {
    let out = run(&["estimate", "--bits", "127", "--p", "6"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(
        stdout_of(&out),
        "p,bits,qubits_standard,qubits_nonorthogonal\n6,127,127,50\n"
    );
}

#[test]
fn estimate_values_mode_prints_the_pinned_row() {
    let out = run(&["estimate", "--n-vars", "15", "--values", "20"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(
        stdout_of(&out),
        "p,bits,qubits_standard,qubits_nonorthogonal\n20,65,65,15\n"
    );
}

#[test]
fn estimate_sweep_covers_the_fixed_p_set_and_writes_a_csv() {
    let dir = tempdir().unwrap();
    let out = run(&[
        "estimate",
        "--sweep",
        "--bits-from",
        "10",
        "--bits-to",
        "30",
        "--bits-step",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1 + 5 * 3, "header plus five p values over three bit counts");
    assert_eq!(lines[0], "p,bits,qubits_standard,qubits_nonorthogonal");
    assert_eq!(lines[1], "2,10,10,10");
    for line in &lines[1..=3] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "2");
        assert_eq!(fields[1], fields[3], "p = 2 saves nothing over binary");
    }
    assert!(lines.contains(&"20,30,30,7"), "stdout: {stdout}");

    let csv = fs::read_to_string(dir.path().join("estimate.csv")).unwrap();
    assert_eq!(csv, stdout, "the file copy matches stdout exactly");
}

#[test]
fn estimate_rejects_mixed_or_incomplete_modes() {
    for args in [
        &["estimate", "--bits", "4", "--sweep"][..],
        &["estimate", "--bits", "4"][..],
        &["estimate", "--n-vars", "3"][..],
        &["estimate", "--sweep", "--p", "6"][..],
        &["estimate"][..],
    ] {
        let out = run(args);
        assert_eq!(exit_code(&out), 2, "args {args:?} should be a usage error");
    }
}

/// Two-variable separable square over values {0, 1}: the antipodal codebook
/// can represent the root exactly, so the optimizer reaches the target.
fn write_small_problem(dir: &Path) {
    fs::write(dir.join("inst.txt"), "1 q0^2\n1 q1^2\n").unwrap();
    fs::write(
        dir.join("run.conf"),
        "problem = inst.txt\n\
         values = 0, 1\n\
         codebook = platonic\n\
         layers = 1\n\
         learning_rate = 0.05\n\
         gradient_mode = parameter-shift\n\
         max_epochs = 500\n\
         target_cost = 1e-3\n\
         seeds = 1\n\
         out = run\n",
    )
    .unwrap();
}

#[test]
fn optimize_reaches_the_target_and_reports_the_root() {
    let dir = tempdir().unwrap();
    write_small_problem(dir.path());
    let config = dir.path().join("run.conf");
    let out = run(&["optimize", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let stdout = stdout_of(&out);
    assert!(stdout.contains("seed 1:"), "stdout: {stdout}");
    assert!(stdout.contains("target reached"), "stdout: {stdout}");

    let run_dir = dir.path().join("run");
    let trace = fs::read_to_string(run_dir.join("trace_seed1.csv")).unwrap();
    assert!(trace.starts_with("epoch,soft_cost,hard_cost,grad_norm,min_purity,max_purity,elapsed_ms\n"));
    assert!(trace.lines().count() > 1, "the trace should hold epochs");

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["target_reached"], serde_json::json!(true));
    assert_eq!(summary["n_vars"], serde_json::json!(2));
    assert_eq!(summary["p"], serde_json::json!(2));
    assert_eq!(summary["best"]["hard_cost"], serde_json::json!(0.0));
    assert_eq!(summary["best"]["labels"], serde_json::json!([0, 0]));
    assert_eq!(summary["best"]["values"], serde_json::json!([0.0, 0.0]));
    assert_eq!(summary["seeds"][0]["trace_file"], serde_json::json!("trace_seed1.csv"));
}

#[test]
fn optimize_exits_one_when_no_seed_reaches_the_target() {
    let dir = tempdir().unwrap();
    write_small_problem(dir.path());
    let text = fs::read_to_string(dir.path().join("run.conf"))
        .unwrap()
        .replace("max_epochs = 500", "max_epochs = 0");
    fs::write(dir.path().join("run.conf"), text).unwrap();

    let config = dir.path().join("run.conf");
    let out = run(&["optimize", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1, "stderr: {}", stderr_of(&out));

    let run_dir = dir.path().join("run");
    let trace = fs::read_to_string(run_dir.join("trace_seed1.csv")).unwrap();
    assert_eq!(
        trace, "epoch,soft_cost,hard_cost,grad_norm,min_purity,max_purity,elapsed_ms\n",
        "zero epochs leaves a header-only trace"
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["target_reached"], serde_json::json!(false));
}

/// Drops the wall-clock column so byte comparisons see only the math.
fn strip_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|line| &line[..line.rfind(',').expect("every row has an elapsed column")])
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn optimize_traces_are_reproducible_across_runs() {
    let dir = tempdir().unwrap();
    write_small_problem(dir.path());
    let config = dir.path().join("run.conf");

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "optimize",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }

    let trace_a = fs::read_to_string(out_a.join("trace_seed1.csv")).unwrap();
    let trace_b = fs::read_to_string(out_b.join("trace_seed1.csv")).unwrap();
    assert_eq!(strip_elapsed(&trace_a), strip_elapsed(&trace_b));
}

#[test]
fn config_errors_exit_two_with_a_line_diagnostic() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    fs::write(&config, "problem = bench-poly8\nlayers = 2\nbogus_key = 3\n").unwrap();

    let out = run(&["optimize", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = stderr_of(&out);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("bogus_key"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_exits_two() {
    let out = run(&["optimize", "--config", "/nonexistent/nowhere.conf"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn bundled_instance_file_matches_the_builtin_problem() {
    let text = include_str!("../instances/poly8.txt");
    let parsed = noq::PolynomialCost::parse(text).unwrap();
    let (builtin, _) = benchmark_poly8::<f64>();
    assert_eq!(parsed, builtin);
}
