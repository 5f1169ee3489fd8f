use std::path::Path;
use std::process::{Command, Output};

use winograd_core::Tensor;

fn winograd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winograd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_tensor(dir: &Path, name: &str, t: &Tensor) -> String {
    let p = dir.join(name);
    t.write(&p).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_matrices_prints_legendre_fractions() {
    let o = winograd(&["gen-matrices", "--o", "4", "--k", "3", "--base", "legendre"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in ["P^T (6x6)", "-1/3", "-3/5", "3/35", "5/21", "-10/9", "P^-T (6x6)", "B_P^T"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn gen_matrices_json_float() {
    let o = winograd(&["gen-matrices", "--o", "2", "--format", "float", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["matrices"][0]["name"], "G");
    assert_eq!(v["matrices"][0]["rows"], 4);
    assert_eq!(v["matrices"][0]["data"][3], 0.5);
}

#[test]
fn bad_points_exit_two() {
    let o = winograd(&["gen-matrices", "--o", "2", "--points", "0,1,1,inf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
    let o = winograd(&["gen-matrices", "--o", "2", "--points", "0,1,inf"]);
    assert_eq!(o.status.code(), Some(2));
    let o = winograd(&["cond", "--o", "2", "--points", "0,x,1,inf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn conv_reports_error_against_direct() {
    let dir = tempfile::tempdir().unwrap();
    let x = Tensor::from_fn(vec![2, 10, 9], |i| ((i * 7919) % 23) as f64 / 11.0 - 1.0);
    let w = Tensor::from_fn(vec![3, 2, 3, 3], |i| ((i * 104729) % 17) as f64 / 8.0 - 1.0);
    let xp = write_tensor(dir.path(), "x.json", &x);
    let wp = write_tensor(dir.path(), "w.json", &w);
    let out = dir.path().join("y.json");
    let outs = out.to_string_lossy().into_owned();

    let o = winograd(&["--json", "--output", &outs, "conv", "--input", &xp, "--weights", &wp, "--mode", "legendre"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(s["rel_l2_err"].as_f64().unwrap() <= 1e-10);
    assert_eq!(Tensor::<f64>::read(&out).unwrap().shape(), &[3, 8, 7]);

    let o = winograd(&["--json", "conv", "--input", &xp, "--weights", &wp, "--precision", "8b"]);
    assert!(o.status.success());
    let y = Tensor::<f64>::from_json(&stdout(&o)).unwrap();
    assert_eq!(y.shape(), &[3, 8, 7]);
    let s: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert!(s["rel_l2_err"].as_f64().unwrap() > 0.0);

    let o = winograd(&["conv", "--input", &xp, "--weights", &wp, "--mode", "direct", "--precision", "8b+9b"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("rel_l2_err="));

    let o = winograd(&["conv", "--input", &xp, "--weights", &wp, "--precision", "eight"]);
    assert_eq!(o.status.code(), Some(2));
    let o = winograd(&["conv", "--input", "/nonexistent/x.json", "--weights", &wp]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn conv_on_zero_input() {
    let dir = tempfile::tempdir().unwrap();
    let xp = write_tensor(dir.path(), "x.json", &Tensor::zeros(vec![1, 6, 6]));
    let wp = write_tensor(dir.path(), "w.json", &Tensor::from_fn(vec![1, 1, 3, 3], |_| 1.0));
    let o = winograd(&["conv", "--input", &xp, "--weights", &wp, "--precision", "8b"]);
    assert!(o.status.success());
    let y = Tensor::<f64>::from_json(&stdout(&o)).unwrap();
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"trials": 24, "seed": 5, "channels": [2, 3], "spatial": [9, 10], "qconfigs": ["8b", "8b+9b"]}"#,
    )
    .unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let a = winograd(&["bench-error", &cfg]);
    let b = winograd(&["bench-error", &cfg, "--serial"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(winograd_core::harness::CSV_HEADER));
    assert_eq!(lines.count(), 3 * 2 * 2);

    let out = dir.path().join("report.csv");
    let outs = out.to_string_lossy().into_owned();
    let c = winograd(&["--output", &outs, "bench-error", &cfg]);
    assert!(c.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 12);

    let d = winograd(&["--seed", "6", "bench-error", &cfg]);
    assert_ne!(d.stdout, a.stdout);
}

#[test]
fn bench_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"trials": 0}"#,
        r#"{"bogus": 1}"#,
        r#"{"qconfigs": ["7"]}"#,
        r#"{"points": "0,0,1,2,3,inf"}"#,
        "not json",
    ] {
        let p = dir.path().join("c.json");
        std::fs::write(&p, body).unwrap();
        let o = winograd(&["bench-error", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
}

#[test]
fn cond_table() {
    let o = winograd(&["cond", "--o", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("base"));
    assert!(text.contains("canonical  B^T"));
    assert!(text.contains("legendre   A_P^T"));
    let o = winograd(&["--json", "cond", "--o", "6"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["two_norm"].as_f64().unwrap().is_finite()));
}
