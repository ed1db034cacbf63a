//! End-to-end checks of the binary: exit codes, file formats, and
//! reproducibility of the command surface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURE: &str = r#"{"space": {"n": 2, "part": [1, 2]}, "re": [[0.5, 0.5], [-0.5, 0.5]]}"#;
const INVALID: &str = r#"{"space": {"n": 2, "part": [1, 2]}, "re": [[0.5, 1.0], [-1.0, 0.5]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jdpp"))
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

#[test]
fn validate_exit_codes_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let invalid = write(dir.path(), "invalid.json", INVALID);
    let truncated = write(dir.path(), "truncated.json", "{\"space\": {");

    let ok = run(&["validate", &fixture]);
    assert_eq!(ok.status.code(), Some(0));
    let verdict = &stdout_json(&ok)["result"];
    assert_eq!(verdict["valid"], Value::Bool(true));
    assert!((verdict["margin"].as_f64().unwrap()).abs() < 1e-12);

    let bad = run(&["validate", &invalid]);
    assert_eq!(bad.status.code(), Some(2));
    let verdict = &stdout_json(&bad)["result"];
    let spectrum: Vec<f64> = verdict["hat_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((spectrum[0] + 0.5).abs() < 1e-12 && (spectrum[1] - 1.5).abs() < 1e-12);

    let broken = run(&["validate", &truncated]);
    assert_eq!(broken.status.code(), Some(1));
}

#[test]
fn det_multiplier_and_method_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let phi = write(dir.path(), "phi.json", "[-1.0, -1.0]");

    let out = run(&["det", &fixture, "--phi-file", &phi]);
    assert_eq!(out.status.code(), Some(0));
    let value = stdout_json(&out)["result"]["value"].as_f64().unwrap();
    assert!((value - 0.5).abs() < 1e-12);

    let zero_phi = write(dir.path(), "zero.json", "[0.0, 0.0]");
    let out = run(&["det", &fixture, "--phi-file", &zero_phi]);
    assert_eq!(stdout_json(&out)["result"]["value"].as_f64().unwrap(), 1.0);

    let series = run(&["det", &fixture, "--method", "series"]);
    let direct = run(&["det", &fixture, "--method", "direct"]);
    let block = run(&["det", &fixture, "--method", "block"]);
    let vs = stdout_json(&series)["result"]["value"].as_f64().unwrap();
    let vd = stdout_json(&direct)["result"]["value"].as_f64().unwrap();
    let vb = stdout_json(&block)["result"]["value"].as_f64().unwrap();
    assert!((vs - vd).abs() <= 1e-9 * vd.abs().max(1.0));
    assert!((vb - vd).abs() <= 1e-9 * vd.abs().max(1.0));
}

#[test]
fn distribution_jsonl_has_exactly_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let out = run(&["--format", "jsonl", "distribution", &fixture]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(lines.len(), 4);
    let masses: Vec<f64> = lines
        .iter()
        .map(|line| {
            serde_json::from_str::<Value>(line).unwrap()["p"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!((masses[0] - 0.5).abs() < 1e-12);
    assert!((masses[3] - 0.5).abs() < 1e-12);
    assert!(masses[1].abs() < 1e-12 && masses[2].abs() < 1e-12);
    // config echo goes to stderr so data files stay clean
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"config\""));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let args = [
        "--format", "jsonl", "--seed", "7", "sample", &fixture, "-n", "3",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    // thread count must not change the batch
    let threaded = run(&[
        "--format",
        "jsonl",
        "--seed",
        "7",
        "--threads",
        "3",
        "sample",
        &fixture,
        "-n",
        "3",
    ]);
    assert_eq!(first.stdout, threaded.stdout);
}

#[test]
fn from_g_produces_a_valid_kernel_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", r#"{"re": [[1.0]]}"#);
    let kernel_path = dir.path().join("kernel.json");
    let out = bin()
        .args(["from-g", &g, "--out", kernel_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let kernel: Value = serde_json::from_str(&fs::read_to_string(&kernel_path).unwrap()).unwrap();
    assert_eq!(kernel["re"][0][0].as_f64().unwrap(), 0.5);
    assert_eq!(kernel["re"][0][1].as_f64().unwrap(), -0.5);

    let validate = run(&["validate", kernel_path.to_str().unwrap()]);
    assert_eq!(validate.status.code(), Some(0));
}

#[test]
fn discretize_validate_det_round_trip() {
    // rank-one kernel c·e^{x+y} with c = −1/(e²−1): Det(1+M) → 1/2
    let dir = tempfile::tempdir().unwrap();
    let c = -1.0 / (std::f64::consts::E.powi(2) - 1.0);
    let spec = format!(
        r#"{{
            "part1": {{"a": 0.0, "b": 1.0}},
            "blocks": {{"k11": "{c} * exp(x + y)"}},
            "quadrature": "midpoint",
            "n": 256
        }}"#
    );
    let spec_path = write(dir.path(), "spec.json", &spec);
    let kernel_path = dir.path().join("kernel.json");
    let disc = bin()
        .args([
            "discretize",
            &spec_path,
            "--out",
            kernel_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(disc.status.code(), Some(0));

    // this test kernel is negative definite, so validate reports invalid
    // (exit 2) but still emits a full verdict
    let validate = run(&["validate", kernel_path.to_str().unwrap()]);
    assert_eq!(validate.status.code(), Some(2));
    assert_eq!(
        stdout_json(&validate)["result"]["j_hermitian"],
        Value::Bool(true)
    );

    let det = run(&["det", kernel_path.to_str().unwrap(), "--method", "direct"]);
    let value = stdout_json(&det)["result"]["value"].as_f64().unwrap();
    assert!((value - 0.5).abs() <= 1e-3, "Det = {value}");
}

#[test]
fn estimate_and_gof_reports() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let out = run(&[
        "--seed", "3", "estimate", &fixture, "--query", "0", "--query", "0,1", "-n", "4000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = stdout_json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row["exact"].as_f64().unwrap(), 0.5);
        assert_eq!(row["flagged"], Value::Bool(false));
    }

    let gof = run(&["--seed", "3", "gof", &fixture, "-n", "5000"]);
    assert_eq!(gof.status.code(), Some(0));
    let p = stdout_json(&gof)["result"]["p_value"].as_f64().unwrap();
    assert!(p > 1e-6);
}

#[test]
fn random_kernel_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let kernel_path = dir.path().join("random.json");
    let out = bin()
        .args([
            "--seed",
            "11",
            "random",
            "--n1",
            "3",
            "--n2",
            "2",
            "--out",
            kernel_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let validate = run(&["validate", kernel_path.to_str().unwrap()]);
    assert_eq!(validate.status.code(), Some(0));

    // same seed, same kernel
    let again_path = dir.path().join("again.json");
    bin()
        .args([
            "--seed",
            "11",
            "random",
            "--n1",
            "3",
            "--n2",
            "2",
            "--out",
            again_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        fs::read_to_string(&kernel_path).unwrap(),
        fs::read_to_string(&again_path).unwrap()
    );
}

#[test]
fn densities_refuse_norm_one_with_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let projection = write(
        dir.path(),
        "projection.json",
        r#"{"space": {"n": 2, "part": [1, 2]}, "re": [[1.0, 0.0], [0.0, 1.0]]}"#,
    );
    let out = run(&["densities", &projection]);
    assert_eq!(out.status.code(), Some(1));
    let message = String::from_utf8_lossy(&out.stderr);
    assert!(message.contains("thin"), "stderr: {message}");

    // void probability on the same window is exactly zero
    let void = run(&["void", &projection]);
    assert_eq!(void.status.code(), Some(0));
    assert_eq!(stdout_json(&void)["result"]["value"].as_f64().unwrap(), 0.0);

    // the suggested workaround: thin the kernel, then densities succeed
    let thinned_path = dir.path().join("thinned.json");
    let thin = bin()
        .args([
            "thin",
            &projection,
            "--eps",
            "0.9",
            "--out",
            thinned_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(thin.status.code(), Some(0));
    let densities = run(&["densities", thinned_path.to_str().unwrap()]);
    assert_eq!(densities.status.code(), Some(0));
}

#[test]
fn csv_output_has_config_comment_and_rounded_floats() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write(dir.path(), "fixture.json", FIXTURE);
    let out = run(&["--format", "csv", "distribution", &fixture]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "gamma,p");
    let first_row = lines.next().unwrap();
    assert!(first_row.ends_with("5.00000000000e-1"), "row: {first_row}");
}
