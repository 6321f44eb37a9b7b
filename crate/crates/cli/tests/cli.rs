//! End-to-end tests of the binary: flag handling, config merging, output
//! files, and the exit-code contract (0 ok, 1 verification failure,
//! 2 config error, 3 non-convergence).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gha-coherent"))
        .args(args)
        .current_dir(dir)
        // Keep child runs hermetic regardless of the test environment.
        .env_remove("GHA_COHERENT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn spectrum_square_well_prints_squares() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["spectrum", "--k", "inf", "--gamma", "4", "--n-max", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let energies: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().starts_with('n') && !l.starts_with("spacing"))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(energies, ["1", "4", "9", "16"]);
    assert!(text.contains("spacing class: tightening"), "{text}");
}

#[test]
fn spectrum_spacing_classes_follow_k() {
    let dir = tempfile::tempdir().unwrap();
    let loose = run_in(dir.path(), &["spectrum", "--k", "0.5", "--n-max", "5"]);
    assert!(stdout(&loose).contains("spacing class: loosening"));
    let uniform = run_in(dir.path(), &["spectrum", "--k", "2", "--gamma", "0", "--n-max", "5"]);
    let text = stdout(&uniform);
    assert!(text.contains("spacing class: uniform"), "{text}");
    // gamma = 0 harmonic ladder starts at zero.
    assert!(text.lines().any(|l| {
        let mut cols = l.split_whitespace();
        cols.next() == Some("0") && cols.next() == Some("0")
    }));
}

#[test]
fn spectrum_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["spectrum", "--k", "inf", "--n-max", "3", "-o", "spec.csv"],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,energy,gap"));
    assert_eq!(lines.next(), Some("0,1,3"));
    assert_eq!(lines.next(), Some("1,4,5"));
}

#[test]
fn coeffs_poisson_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["coeffs", "--k", "2", "--z", "1", "-o", "c.csv"],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut factorial = 1.0f64;
    let mut checked = 0;
    for (n, line) in csv.lines().skip(1).take(6).enumerate() {
        if n > 0 {
            factorial *= n as f64;
        }
        let prob: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let expected = (-1.0f64).exp() / factorial;
        assert!(
            (prob - expected).abs() < 1e-15,
            "n = {n}: {prob} vs {expected}"
        );
        checked += 1;
    }
    assert_eq!(checked, 6);
    // The distribution is normalized: the last cumulative entry is 1.
    let last = csv.lines().last().unwrap();
    let cumulative: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((cumulative - 1.0).abs() < 1e-12);
}

#[test]
fn coeffs_accepts_complex_labels_and_rejects_junk() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run_in(dir.path(), &["coeffs", "--k", "inf", "--z", "1+0.5i"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("z = 1+0.5i"));
    let bad = run_in(dir.path(), &["coeffs", "--k", "2", "--z", "one"]);
    assert_eq!(code(&bad), 2);
    let missing = run_in(dir.path(), &["coeffs", "--k", "2"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("--z"));
}

#[test]
fn qsweep_harmonic_q_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["qsweep", "--k", "2", "--z", "0.1:6:60"]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("qsweep_k2.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("abs_z,Q,mean_n,variance,n_max_used,tail_bound"));
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let q: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(q.abs() < 1e-10, "harmonic Q should vanish, got {q}");
        rows += 1;
    }
    assert_eq!(rows, 60);
}

#[test]
fn qsweep_multiple_k_write_one_series_each() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "qsweep", "--k", "5", "--k", "inf", "--z", "0.5:3:6", "-o", "fig2",
            "--emit-plot-script",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("fig2_k5.csv").exists());
    assert!(dir.path().join("fig2_kinf.csv").exists());
    let script = fs::read_to_string(dir.path().join("fig2.gnuplot")).unwrap();
    assert!(script.contains("fig2_k5.csv"), "{script}");
    assert!(script.contains("fig2_kinf.csv"));
    assert!(script.contains("plot"));
}

#[test]
fn qsweep_runs_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args = ["qsweep", "--k", "1.5", "--k", "inf", "--z", "0.2:4:15"];
    assert_eq!(code(&run_in(dir_a.path(), &args)), 0);
    assert_eq!(code(&run_in(dir_b.path(), &args)), 0);
    for name in ["qsweep_k1.5.csv", "qsweep_kinf.csv"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn qsweep_json_contains_versioned_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["qsweep", "--k", "2", "--z", "0.5:2:4", "--format", "json"],
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("qsweep_k2.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["samples"].as_array().unwrap().len(), 4);
    assert_eq!(value["spec"]["k"], 2.0);
}

#[test]
fn qsweep_nonconvergence_exits_3_and_names_the_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["qsweep", "--k", "0.5", "--z", "9:10:2", "--max-terms", "40"],
    );
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("|z| = 9"), "{err}");
    assert!(err.contains("max_terms") || err.contains("max-terms"), "{err}");
}

#[test]
fn config_file_drives_a_sweep_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "k = [5]\ngamma = 0\nz = \"0.5:2:4\"\noutput = \"cfg\"\nformat = \"json\"\n",
    )
    .unwrap();
    // Config alone: gamma 0, k 5, json output under the cfg prefix.
    let out = run_in(dir.path(), &["qsweep", "--config", "run.toml"]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cfg_k5.json")).unwrap()).unwrap();
    assert_eq!(value["spec"]["gamma"], 0.0);
    // A flag overrides the file.
    let out = run_in(dir.path(), &["qsweep", "--config", "run.toml", "--gamma", "4"]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cfg_k5.json")).unwrap()).unwrap();
    assert_eq!(value["spec"]["gamma"], 4.0);
}

#[test]
fn config_file_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "kamma = 4\n").unwrap();
    let unknown = run_in(dir.path(), &["spectrum", "--config", "bad.toml"]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("unknown key 'kamma'"));
    let missing = run_in(dir.path(), &["spectrum", "--config", "nope.toml"]);
    assert_eq!(code(&missing), 2);
    fs::write(dir.path().join("syntax.toml"), "k = [\n").unwrap();
    let syntax = run_in(dir.path(), &["spectrum", "--config", "syntax.toml"]);
    assert_eq!(code(&syntax), 2);
}

#[test]
fn bad_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["spectrum", "--k", "-1"])), 2);
    assert_eq!(code(&run_in(dir.path(), &["qsweep", "--z", "0:5:10"])), 2);
    assert_eq!(code(&run_in(dir.path(), &["qsweep", "--z", "1:5:1"])), 2);
    assert_eq!(code(&run_in(dir.path(), &["verify", "--tol", "0.5"])), 2);
    assert_eq!(code(&run_in(dir.path(), &["spectrum", "--no-such-flag"])), 2);
    // Physical mode without scales is a config error, not a crash.
    let phys = run_in(dir.path(), &["spectrum", "--k", "2", "--physical"]);
    assert_eq!(code(&phys), 2);
    assert!(stderr(&phys).contains("--v0"));
}

#[test]
fn physical_mode_reports_omega() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "spectrum", "--k", "2", "--gamma", "0", "--n-max", "4", "--physical", "--v0", "0.5",
            "--a", "1", "--mass", "1",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    // V0 = mω₀²a²/2 with m = a = 1, V0 = 0.5 gives ω₀ = 1.
    assert!(text.contains("physical units"), "{text}");
    let omega: f64 = text
        .lines()
        .next()
        .unwrap()
        .split("omega(k) = ")
        .nth(1)
        .unwrap()
        .trim_end_matches(')')
        .parse()
        .unwrap();
    assert!((omega - 1.0).abs() < 1e-12, "omega = {omega}");
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "-o", "report.json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verification: PASS"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 9);
}

#[test]
fn verify_unattainable_tol_exits_1_naming_first_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "--tol", "1e-30"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("verification failed: algebra: commutator residual"));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn verify_identity_harmonic_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify-identity", "-o", "moments.csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("flatness: PASS"), "{text}");
    assert!(text.contains("normalized: yes"), "{text}");
    let csv = fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,moment,target,ratio,quad_error"));
    assert_eq!(csv.lines().count(), 12, "header plus n = 0..=10");
}

#[test]
fn verify_identity_paper_weight_flags_the_factor_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify-identity", "--weight", "square-well-paper"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("normalized: no"), "{text}");
    assert!(text.contains("factor 2"), "{text}");
}

#[test]
fn threads_env_var_is_validated_and_respected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_gha-coherent"))
        .args(["qsweep", "--k", "2", "--z", "0.5:2:4"])
        .current_dir(dir.path())
        .env("GHA_COHERENT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_gha-coherent"))
        .args(["qsweep", "--k", "2", "--z", "0.5:2:4"])
        .current_dir(dir.path())
        .env("GHA_COHERENT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    // An explicit flag wins over the environment.
    let flagged = Command::new(env!("CARGO_BIN_EXE_gha-coherent"))
        .args(["qsweep", "--k", "2", "--z", "0.5:2:4", "--threads", "2"])
        .current_dir(dir.path())
        .env("GHA_COHERENT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(0));
}
