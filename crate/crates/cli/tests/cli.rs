use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_kane-noise");
const LAMBDA_PAPER: f64 = 2.7775841071171465e-17;
const TAU_OP: f64 = 1.4591413683288413e-5;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn config(noise: &str, initial: [f64; 3], sim: (f64, usize, usize, u64), dir: &Path, stride: usize) -> String {
    let (dt, n_steps, n_traj, seed) = sim;
    format!(
        r#"{{
  "device": {{"b_z": 2.0, "b_ac": 0.001, "v0": 1.0, "eta": 157079632.67948966, "a0": 1.9385e-26}},
  "noise": {noise},
  "initial": {{"x": {:?}, "y": {:?}, "z": {:?}}},
  "simulation": {{"dt": {dt:e}, "n_steps": {n_steps}, "n_traj": {n_traj}, "seed": {seed}}},
  "output": {{"dir": {:?}, "stride": {stride}}}
}}"#,
        initial[0],
        initial[1],
        initial[2],
        dir.to_str().unwrap()
    )
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_config(sub: &str, text: &str, dir: &Path, extra: &[&str]) -> (Output, Option<Value>) {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("input.json");
    std::fs::write(&path, text).unwrap();
    let mut args = vec![sub, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    let json = serde_json::from_slice(&out.stdout).ok();
    (out, json)
}

fn value(v: &Value, key: &str) -> f64 {
    v[key]["value"].as_f64().unwrap_or_else(|| panic!("{key} in {v}"))
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn small(sub: &str, dir: &Path) -> String {
    let initial = if sub == "rotation" { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    config(r#"{"lambda": 4.3e-14}"#, initial, (2e-8, 40, 300, 42), dir, 10)
}

#[test]
fn outputs_are_bit_identical_and_match_golden() {
    let tmp = tempfile::tempdir().unwrap();
    for (sub, stem) in [("register-decay", "register_decay"), ("rotation", "rotation")] {
        let mut csvs = Vec::new();
        let mut jsons = Vec::new();
        for run_id in ["a", "b"] {
            let dir = tmp.path().join(format!("{stem}_{run_id}"));
            let (out, _) = run_config(sub, &small(sub, &dir), &dir, &[]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            csvs.push(std::fs::read(dir.join(format!("{stem}.csv"))).unwrap());
            jsons.push(std::fs::read(dir.join(format!("{stem}.json"))).unwrap());
        }
        assert_eq!(csvs[0], csvs[1], "{sub} csv differs between runs");
        assert_eq!(jsons[0], jsons[1], "{sub} json differs between runs");
        let golden = golden_dir().join(format!("{stem}.csv"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&golden, &csvs[0]).unwrap();
        }
        let expected = std::fs::read(&golden).expect("golden file present");
        assert!(expected == csvs[0], "{sub} csv differs from {}", golden.display());
    }
}

#[test]
fn csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, _) = run_config("register-decay", &small("register-decay", tmp.path()), tmp.path(), &[]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("register_decay.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,Px_mc,Py_mc,Pz_mc,stderr_x,stderr_y,stderr_z,Px_analytic,Py_analytic,Pz_analytic,worst_case_fidelity"
    );
    // 41 samples at stride 10
    assert_eq!(lines.count(), 5);
    let (header, rows) = csv(&tmp.path().join("register_decay.csv"));
    assert!(rows.iter().all(|r| r.len() == header.len()));
    assert_eq!(rows.last().unwrap()[0], 40.0 * 2e-8);
}

#[test]
fn json_quantities_carry_units_and_sorted_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, json) = run_config("rotation", &small("rotation", tmp.path()), tmp.path(), &[]);
    assert!(out.status.success());
    let json = json.unwrap();
    let obj = json.as_object().unwrap();
    let keys: Vec<_> = obj.keys().cloned().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for (k, v) in obj {
        if v.is_object() {
            assert!(v["unit"].is_string(), "{k} lacks a unit");
        } else {
            assert!(!v.is_number(), "{k} is a bare number");
        }
    }
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.find("\"command\"").unwrap();
    assert!(first < text.find("\"dt\"").unwrap());
}

#[test]
fn malformed_configs_exit_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let good = small("register-decay", tmp.path());
    let cases = [
        (good.replace(r#", "a0": 1.9385e-26"#, ""), "a0"),
        (good.replace(r#""seed": 42"#, r#""seed": 42, "sed": 1"#), "sed"),
        (good.replace(r#""b_z": 2.0"#, r#""b_z": -2.0"#), "device.b_z"),
        (good.replace(r#""stride": 10"#, r#""stride": 0"#), "output.stride"),
        (good.replace(r#""n_traj": 300"#, r#""n_traj": "many""#), "line"),
        (good.replace(r#"{"lambda": 4.3e-14}"#, r#"{"lambda": 4.3e-14, "epsilon": 1e-60}"#), "noise"),
        (good.replace(r#""dt": 2e-8"#, r#""dt": 1e-3"#), "kappa*dt"),
        ("{ not json".to_owned(), "line 1"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let dir = tmp.path().join(format!("case{i}"));
        let (out, _) = run_config("register-decay", text, &dir, &[]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "case {i}: {err}");
        assert!(err.contains(needle), "case {i}: {err}");
    }
    let (out, _) = run_config("budget", &cases[2].0, &tmp.path().join("budget"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("device.b_z"));
    let missing = run(&["rotation", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn budget_headline_and_sqrt_delta_scaling() {
    let out = run(&["budget", "--delta", "1e-5", "--delta-range", "1e-6", "1e-4", "--points", "5", "--bias", "0.5,1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = &v["budget"];
    let bound = value(b, "pulse_area_ratio_max");
    assert!((bound / 1.4e-6 - 1.0).abs() < 0.05, "{bound}");
    assert!((value(b, "ratio_bound") / 2e-5 - 1.0).abs() < 0.01);
    assert_eq!(b["tau_dec_min"]["unit"], "s");

    let sweep = v["delta_sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 5);
    assert_eq!(value(&sweep[0], "delta"), 1e-6);
    assert_eq!(value(&sweep[4], "delta"), 1e-4);
    let scale = value(&sweep[4], "pulse_area_ratio_max") / value(&sweep[0], "pulse_area_ratio_max");
    assert!((scale - 10.0).abs() < 0.01, "{scale}");

    let bias = v["bias_sweep"].as_array().unwrap();
    assert_eq!(bias.len(), 3);
    assert_eq!(bias[1]["budget"], v["budget"]);
    // doubling the bias halves the tolerable pulse-area spread
    let r = value(&bias[0]["budget"], "pulse_area_ratio_max") / value(&bias[2]["budget"], "pulse_area_ratio_max");
    assert!((r - 4.0).abs() < 1e-9, "{r}");
}

#[test]
fn budget_rejects_bad_targets() {
    for args in [
        vec!["budget", "--delta", "0.7"],
        vec!["budget", "--delta", "0"],
        vec!["budget", "--delta-range", "1e-4", "1e-6"],
        vec!["budget", "--bias", "0"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budget_writes_report_when_asked() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["budget", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("budget.json")).unwrap()).unwrap();
    assert_eq!(saved, serde_json::from_slice::<Value>(&out.stdout).unwrap());
}

#[test]
fn register_decay_rate_recovery() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/register.json");
    let out = run(&[
        "register-decay",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value(&v, "n_traj"), 1e4);
    // 2 kappa t_final = 4
    let span = 2.0 * value(&v, "kappa") * value(&v, "t_final");
    assert!((span - 4.0).abs() < 0.01, "{span}");
    let ratio = value(&v, "rate_ratio");
    assert!((0.95..=1.05).contains(&ratio), "{ratio}");
    assert_eq!(value(&v, "max_abs_pz_drift"), 0.0);
}

#[test]
fn noiseless_register_has_null_rate_and_flat_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let text = config(r#"{"lambda": 0.0}"#, [0.6, 0.0, 0.8], (1e-6, 50, 20, 3), tmp.path(), 1);
    let (out, json) = run_config("register-decay", &text, tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json.unwrap();
    assert!(v["fitted_rate"]["value"].is_null());
    assert!(v["rate_ratio"]["value"].is_null());
    assert!(v["tau_dec"]["value"].is_null());
    assert_eq!(v["fitted_rate"]["unit"], "1/s");
    let (header, rows) = csv(&tmp.path().join("register_decay.csv"));
    for name in ["Px_analytic", "Py_analytic", "Pz_analytic", "worst_case_fidelity", "Px_mc"] {
        let c = column(&header, name);
        assert!(rows.iter().all(|r| r[c] == rows[0][c]), "{name}");
    }
}

#[test]
fn noiseless_rotation_equals_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let p = 1.0 / 3f64.sqrt();
    let text = config(r#"{"epsilon": 0.0}"#, [p, p, p], (TAU_OP / 500.0, 500, 4, 9), tmp.path(), 1);
    let (out, _) = run_config("rotation", &text, tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&tmp.path().join("rotation.csv"));
    for axis in ["x", "y", "z"] {
        let (mc, ex) = (column(&header, &format!("P{axis}_mc")), column(&header, &format!("P{axis}_exact")));
        let worst = rows.iter().map(|r| (r[mc] - r[ex]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{axis}: {worst}");
    }
    // a quarter turn about y: (x, y, z) -> (-z, y, x)
    let last = rows.last().unwrap();
    for (axis, e) in ["x", "y", "z"].iter().zip([-p, p, p]) {
        let c = column(&header, &format!("P{axis}_mc"));
        assert!((last[c] - e).abs() < 1e-10, "{axis}: {}", last[c]);
    }
}

#[test]
fn equatorial_input_fidelity_is_register_worst_case() {
    let tmp = tempfile::tempdir().unwrap();
    let text = config(r#"{"lambda": 4.3e-14}"#, [0.0, 1.0, 0.0], (TAU_OP / 200.0, 200, 16, 5), tmp.path(), 1);
    let (out, json) = run_config("rotation", &text, tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kappa = value(&json.unwrap(), "kappa");
    let (header, rows) = csv(&tmp.path().join("rotation.csv"));
    let (t, f) = (column(&header, "t"), column(&header, "rotation_fidelity"));
    for r in &rows {
        let worst = 0.5 * (1.0 + (-2.0 * kappa * r[t]).exp());
        assert!((r[f] - worst).abs() <= 1e-12);
    }
}

#[test]
fn hadamard_run_at_tolerable_noise_agrees_with_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let noise = format!(r#"{{"lambda": {LAMBDA_PAPER:e}}}"#);
    let text = config(&noise, [0.0, 0.0, 1.0], (TAU_OP / 1000.0, 1000, 10_000, 11), tmp.path(), 10);
    let (out, json) = run_config("rotation", &text, tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json.unwrap();
    assert!((value(&v, "tau_ratio") / 2e-5 - 1.0).abs() < 1e-3);
    assert!((value(&v, "t_final") / TAU_OP - 1.0).abs() < 1e-12);
    let worst = value(&v, "max_mc_minus_exact_stderr");
    assert!(worst < 4.0, "{worst}");
    assert!(value(&v, "max_abs_exact_minus_approx") < 1e-4);
}

#[test]
fn validate_passes_by_default() {
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_object().unwrap().len(), 3);
}

#[test]
fn validate_catches_injected_fault() {
    let out = run(&["validate", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["checks"]["register_mc_vs_analytic"]["pass"], false);
    assert_eq!(v["checks"]["rotation_exact_vs_oracle"]["pass"], false);
    assert_eq!(v["checks"]["budget_regression"]["pass"], true);
}

#[test]
fn validate_noiseless_config_passes_even_with_fault() {
    let tmp = tempfile::tempdir().unwrap();
    let text = config(r#"{"lambda": 0.0, "epsilon": 0.0}"#, [1.0, 0.0, 0.0], (1e-6, 10, 100, 1), tmp.path(), 1);
    for extra in [&[][..], &["--inject-fault"][..]] {
        let (out, json) = run_config("validate", &text, tmp.path(), extra);
        assert_eq!(out.status.code(), Some(0), "{extra:?}");
        assert_eq!(json.unwrap()["pass"], true);
    }
}

#[test]
fn effective_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let (out, json) = run_config(
        "rotation",
        &small("rotation", &first),
        &first,
        &["--seed", "77", "--traj", "50", "--dt", "1e-8"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json.unwrap();
    assert_eq!(value(&v, "seed"), 77.0);
    assert_eq!(value(&v, "n_traj"), 50.0);
    assert_eq!(value(&v, "dt"), 1e-8);

    // rerunning the saved config reproduces the outputs
    let saved = first.join("config.json");
    let second = tmp.path().join("second");
    let out = run(&[
        "rotation",
        "--config",
        saved.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(first.join("rotation.csv")).unwrap(),
        std::fs::read(second.join("rotation.csv")).unwrap()
    );
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&saved).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(second.join("config.json")).unwrap()).unwrap();
    assert_eq!(a["simulation"], b["simulation"]);
    assert_eq!(a["device"], b["device"]);
}

#[test]
fn rotation_needs_a_drive() {
    let tmp = tempfile::tempdir().unwrap();
    let text = small("rotation", tmp.path()).replace(r#""b_ac": 0.001"#, r#""b_ac": 0.0"#);
    let (out, _) = run_config("rotation", &text, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b_ac"));
}
