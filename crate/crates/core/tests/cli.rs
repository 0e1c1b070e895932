//! End-to-end runs of the `weakspin` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn weakspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakspin")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows (non-comment, non-header) of a CSV file, split into cells.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn cell(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap_or_else(|_| panic!("cell {i} of {row:?}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn joint_angles_printed_in_degrees() {
    let o = weakspin(&["solve-angles", "--joint"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("63.434949") && s.contains("153.434949"), "{s}");
}

#[test]
fn singular_alpha_warns_but_reports_roots() {
    let o = weakspin(&["solve-angles", "--alpha", "180", "--out", "-"]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    assert!(csv.contains("# warning: closed-form phi is singular"), "{csv}");
    let numeric: Vec<_> = rows(&csv).into_iter().filter(|r| r[2] == "numeric").collect();
    assert!(!numeric.is_empty());
    for r in numeric {
        assert!(cell(&r, 3) < 1e-10);
    }
}

#[test]
fn sweep_rows_all_satisfy_condition_one() {
    let o = weakspin(&["solve-angles", "--sweep", "10:170:2", "--out", "-"]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    assert!(csv.lines().any(|l| l == "alpha_deg,phi_deg,source,residual_c1,residual_c2,gamma_deg,residual_cc"));
    let data = rows(&csv);
    assert!(data.len() >= 81);
    for r in &data {
        assert!(cell(r, 3) < 1e-8, "{r:?}");
    }
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(code(&weakspin(&["solve-angles", "--alpha", "ninety"])), 2);
    assert_eq!(code(&weakspin(&["solve-angles", "--sweep", "10:5"])), 2);
    assert_eq!(code(&weakspin(&["frobnicate"])), 2);
    assert_eq!(code(&weakspin(&["three-box", "--config", "/no/such/file.toml"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[angles]\nalpha = \"63\"\n");
    let o = weakspin(&["three-box", "--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unit suffix"));
    let unknown = write(dir.path(), "unknown.toml", "[meter]\nsigmaa = 1.0\n");
    assert_eq!(code(&weakspin(&["three-box", "--config", &unknown])), 2);
}

#[test]
fn orthogonal_postselection_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "orth.toml", "[angles]\nphi = \"0deg\"\n");
    let o = weakspin(&["three-box", "--config", &cfg]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("orthogonal"), "{}", stderr(&o));
    assert_eq!(code(&weakspin(&["meter-sim", "--config", &cfg])), 3);
}

#[test]
fn residual_above_tolerance_exits_1() {
    let o = weakspin(&["three-box", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn three_box_csv_is_deterministic_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = weakspin(&["three-box", "--config", "three_box_default", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let ca = fs::read(&a).unwrap();
    assert_eq!(ca, fs::read(&b).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("# weakspin "));
    assert!(text.contains("schema=three_box/1"));
    let prob = rows(&text).into_iter().find(|r| r[1] == "postselection_probability").unwrap();
    assert!((cell(&prob, 5) - 0.1).abs() < 1e-12);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"], "three_box_default");
    assert_eq!(manifest["outputs"][0], a.to_str().unwrap());
    assert!(text.contains(&format!("config_hash={}", manifest["config_hash"].as_str().unwrap())));
    assert!(!dir.path().join("a.csv.tmp").exists());
}

#[test]
fn config_file_and_bundled_name_hash_equally() {
    let dir = tempfile::tempdir().unwrap();
    let reformatted = write(
        dir.path(),
        "tb.toml",
        "# same scenario, different layout\n[scenario]\nkind = \"three-box\"\nname = \"three_box_default\"\n\n[states]\npost_m = 1\n",
    );
    let by_file = weakspin(&["three-box", "--config", &reformatted, "--out", "-"]);
    let bundled = weakspin(&["three-box", "--out", "-"]);
    let hash = |o: &Output| {
        stdout(o).lines().next().unwrap().split("config_hash=").nth(1).unwrap().to_string()
    };
    // The bundled file also carries [meter] settings, so only the scenario
    // rows have to agree.
    let body = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&by_file), body(&bundled));
    assert_eq!(hash(&by_file), hash(&weakspin(&["three-box", "--config", &reformatted, "--out", "-"])));
}

#[test]
fn gaussian_window_mismatch_shrinks_projector_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.toml",
        "[scenario]\nname = \"windowed\"\n[projector]\nmode = \"gaussian\"\ncenter = 0.5\ndelta = 2.0\n",
    );
    let o = weakspin(&["three-box", "--config", &cfg, "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pi_a = rows(&stdout(&o)).into_iter().find(|r| r[1] == "Pi_A").unwrap();
    let (value, overlap) = (cell(&pi_a, 5), cell(&pi_a, 7));
    assert!(overlap < 1.0 && overlap > 0.0);
    assert!(value.abs() < 1.0);
    assert!((value - overlap).abs() < 1e-12);
}

#[test]
fn cheshire_reports_gamma_and_epsilon_rows() {
    let o = weakspin(&["cheshire", "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.contains("gamma_deg=1.8434948822"), "{csv}");
    let data = rows(&csv);
    let get = |label: &str| data.iter().find(|r| r[1] == label).unwrap_or_else(|| panic!("{label}"));
    assert!(cell(get("J_gamma^A"), 5).abs() < 1e-12);
    let abar = cell(get("J_gamma^Abar"), 5);
    assert!((abar - cell(get("J_gamma(t0)"), 5)).abs() < 1e-12);
    assert!((abar - cell(get("J_gamma(t5)"), 5)).abs() < 1e-12);
    let eps: Vec<_> = data.iter().filter(|r| r[0] == "epsilon").collect();
    assert_eq!(eps.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(), ["C0", "C2", "C3", "C5"]);
}

#[test]
fn meter_sim_csv_and_grid_errors() {
    let o = weakspin(&["meter-sim", "--obs", "identity", "--out", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.contains("g,shift_over_g,target,abs_error,postselection_probability"));
    assert!(csv.contains("# fitted_order="));
    for r in rows(&csv).iter().filter(|r| r.len() == 5) {
        assert!(cell(r, 3) < weakspin::meter::ERROR_FLOOR, "{r:?}");
    }

    let o = weakspin(&["meter-sim", "--obs", "pi_a", "--g", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grid too small"));
    assert_eq!(code(&weakspin(&["meter-sim", "--g", "0.01,0.1"])), 2);
    assert_eq!(code(&weakspin(&["meter-sim", "--obs", "pi_q"])), 2);
}

#[test]
fn meter_sim_is_deterministic() {
    let a = weakspin(&["meter-sim", "--config", "cheshire_default", "--g", "0.1,0.01", "--out", "-"]);
    let b = weakspin(&["meter-sim", "--config", "cheshire_default", "--g", "0.1,0.01", "--out", "-"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("observable=j_gamma"));
}
