//! End-to-end tests of the `selftest-kit` binary: exit codes, output
//! schemas, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use selftest_core::highdim::{correlation_table, highdim_ideal_realization, AngleLists};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selftest-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn bound_reports_closed_form_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bound.csv");
    let cfg = write_config(
        dir.path(),
        "bound.json",
        &format!(
            r#"{{"command":"bound","alpha_grid":[0,1],"seeds":[1,2,3,4,5,6,7,8,9,10],
               "output_path":"{}"}}"#,
            out.display()
        ),
    );
    let res = run(&["--config", &cfg]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,quantum_bound,classical_bound,seesaw_value,seesaw_gap,pass,note"
    );
    let row0 = lines.next().unwrap();
    assert!(row0.starts_with("0.0,2.8284271247461903,2.0,"), "row: {row0}");
    let row1 = lines.next().unwrap();
    assert!(row1.starts_with("1.0,3.1622776601683795,3.0,"), "row: {row1}");
}

#[test]
fn stdout_is_the_default_sink() {
    let res = run(&["selftest", "--alpha", "0.8", "--seed", "3"]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("alpha,distance,fidelity,"), "stdout: {text}");
    assert!(text.contains("0.8,"));
}

#[test]
fn invalid_alpha_in_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"command":"bound","alpha_grid":[2.5]}"#,
    );
    let res = run(&["--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("alpha_grid out of [0,2)"), "stderr: {err}");
}

#[test]
fn odd_dimension_override_exits_2() {
    let res = run(&["highdim", "--d", "3"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("even"));
}

#[test]
fn conflicting_commands_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", r#"{"command":"bound"}"#);
    let res = run(&["selftest", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_command_exits_2() {
    let res = run(&["frobnicate"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn robustness_sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let cfg = write_config(
            dir.path(),
            &format!("{name}.json"),
            &format!(
                r#"{{"command":"robustness-sweep","alpha_grid":[0.5],
                   "epsilon_or_delta_grid":[0.001,0.01],"seeds":[1,2],
                   "output_path":"{}"}}"#,
                out.display()
            ),
        );
        let res = run(&["--config", &cfg]);
        assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
        let main = std::fs::read(&out).unwrap();
        let series = std::fs::read(dir.path().join(name.replace(".csv", ".series.csv"))).unwrap();
        outputs.push((main, series));
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be byte-identical");
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "alpha,delta,epsilon,distance,analytic_bound,pass,mode,seed,note"
    );
    // 3 modes × 2 deltas × 2 seeds.
    assert_eq!(text.lines().count(), 1 + 12);
    let series_text = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert_eq!(series_text.lines().next().unwrap(), "x,y,bound");
}

#[test]
fn json_output_carries_the_result_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sos.json");
    let res = run(&[
        "sos-verify",
        "--alpha",
        "0.5",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value["command"], "sos-verify");
    assert_eq!(value["all_pass"], true);
    assert_eq!(value["rows"][0][0], 0.5);
    // The errata ledger rides along with certificate verification.
    assert_eq!(value["errata"].as_array().unwrap().len(), 3);
    assert!(value["columns"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c == "gram_residual"));
}

#[test]
fn tables_export_validates_back_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let res = run(&["tables", "--d", "4", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap().lines().next().unwrap(),
        "d,x,y,a,b,p"
    );

    let cfg = write_config(
        dir.path(),
        "validate.json",
        &format!(
            r#"{{"command":"tables","input_path":"{}"}}"#,
            out.display()
        ),
    );
    let res = run(&["--config", &cfg]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("4,"), "stdout: {text}");
}

#[test]
fn broken_table_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let angles = AngleLists::defaults(4).unwrap();
    let mut table = correlation_table(&highdim_ideal_realization(4, &angles).unwrap()).unwrap();
    // Keep normalization but break the block pattern.
    table.probabilities[1] += 0.05;
    table.probabilities[0] -= 0.05;
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string(&table).unwrap()).unwrap();
    let cfg = write_config(
        dir.path(),
        "validate.json",
        &format!(r#"{{"command":"tables","input_path":"{}"}}"#, path.display()),
    );
    let res = run(&["--config", &cfg]);
    assert_eq!(res.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn highdim_defaults_pass() {
    let res = run(&["highdim", "--d", "4"]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("4,"), "row: {row}");
    assert!(row.contains(",true,"), "row: {row}");
}
