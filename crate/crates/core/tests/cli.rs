use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgespike")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn ground_state_outputs_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["ground-state", "--p", "3", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = std::fs::read_to_string(a.path().join("ground_state.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,du"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 0.0);
    let meta = read_json(&a.path().join("ground_state.json"));
    for key in ["p", "shoot_u0", "c_decay", "R_max", "res_tol", "c0", "c0_r_sin2", "config"] {
        assert!(meta.get(key).is_some(), "missing {key}");
    }
    assert_eq!(meta["config"]["p"], 3.0);
    for f in ["ground_state.csv", "ground_state.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn supercritical_exponent_is_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&["ground-state", "--p", "6", "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InvalidInput");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn unknown_keys_and_flags_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "p = 3\nbogus = 1\n");
    let out = run(&["c0", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["c0", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let cfg = write_config(d.path(), "p = 3\nn_rho = 12\n");
    assert_eq!(run(&["c0", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn c0_report() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&["c0", "--p", "3", "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&d.path().join("c0.json"));
    let c0 = v["c0"].as_f64().unwrap();
    let full = v["energy_full"].as_f64().unwrap();
    assert!((2.0 * std::f64::consts::PI * c0 - full).abs() < 1e-8 * full);
    // keys come out sorted
    let text = std::fs::read_to_string(d.path().join("c0.json")).unwrap();
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn cone_spectrum_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "p = 3\nalpha_list = 3.141592653589793, 1.5707963267948966\nn_theta = 400\n");
    let out = run(&["cone-spectrum", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&d.path().join("cone_spectrum.json"));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0]["alpha"].as_f64().unwrap() < reports[1]["alpha"].as_f64().unwrap());
    assert_eq!(reports[0]["morse_index"], 1);
    assert_eq!(reports[0]["kernel_dim"], 1);
    assert_eq!(reports[1]["kernel_dim"], 2);
    assert!(reports[1]["coercivity"].is_null());
    let csv = std::fs::read_to_string(d.path().join("cone_spectrum.csv")).unwrap();
    assert!(csv.starts_with("alpha,m,j,lambda_ang,sigma,n\n"));
    let alphas: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(alphas.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn sweep_writes_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "p = 3\nn_rho = 32\nn_t = 8\neps_list = 0.2, 0.1\nq = 2\n");
    let out = run(&["sweep", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("Q,eps,alpha_Q,energy_ansatz,energy_reduced,residual_norm,w_norm\n"));
    assert_eq!(csv.lines().count(), 3);
    let v = read_json(&d.path().join("sweep.json"));
    assert!(v["residual_slope"].as_f64().unwrap() > 0.5);
    assert_eq!(v["config"]["mode"], "residual");
}

#[test]
fn collapse_is_exit_three() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "p = 3\neps = 0.1\nq = 0\nn_rho = 24\nn_t = 6\nsearch = false\namplitude = 0.2\n",
    );
    let out = run(&["solve", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "CollapseToZero");
}

#[test]
fn solve_at_maximiser_writes_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "p = 3\neps = 0.1\nq = 0\nn_rho = 24\nn_t = 6\nsearch = false\nwrite_csv = true\n");
    let out = run(&["solve", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&d.path().join("solve.json"));
    assert_eq!(v["converged"], true);
    assert!(v["spike_center"].as_f64().unwrap().abs() < 0.2);
    let bin = std::fs::read(d.path().join("solution.bin")).unwrap();
    let header: Vec<f64> = bin[..64].chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (nr, nt, ns) = (header[0] as usize, header[1] as usize, header[2] as usize);
    assert_eq!((nr, nt), (24, 6));
    assert_eq!(bin.len(), 8 * (8 + nr * nt * ns));
    assert_eq!(header[5], 0.0);
    assert_eq!(header[7], 0.1);
    let csv = std::fs::read_to_string(d.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + nr * nt * ns);
    // first lattice value is the edge node at s_min, equal to the CSV's first row
    let first_bin = f64::from_le_bytes(bin[64..72].try_into().unwrap());
    let first_csv: f64 = csv.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(first_bin, first_csv);
}
