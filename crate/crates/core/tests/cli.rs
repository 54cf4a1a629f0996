use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Coarse grid and few starts keep these runs short.
const SMALL: &str = "grid.num_nodes = 63\nsolver.num_starts = 2\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    std::fs::write(dir.join("run.cfg"), config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_frac-nehari"))
        .current_dir(dir)
        .args(args)
        .args(["--config", "run.cfg", "--out", "out"])
        .output()
        .unwrap()
}

fn json(dir: &Path, file: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out").join(file)).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, file: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(dir.join("out").join(file))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn thresholds_report_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["thresholds"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json(dir.path(), "thresholds.json");
    let t = &j["thresholds"];
    assert!(f(&t["lambda_star"]) > 0.0);
    assert!(f(&t["a_lambda"]) > f(&t["a_zero"]));
    assert_eq!(f(&t["lambda"]), 0.5 * f(&t["lambda_star"]));
    assert!(j["version"].as_str().unwrap().starts_with("frac-nehari "));
    assert_eq!(j["config"]["num_nodes"], 63);
    assert_eq!(j["config"]["weights"]["b"]["kind"], "cosine");
}

#[test]
fn thresholds_at_full_fraction_zero_margin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &format!("{SMALL}lambda.fraction = 1.0\n"), &["thresholds"]);
    assert_eq!(out.status.code(), Some(0));
    let t = &json(dir.path(), "thresholds.json")["thresholds"];
    assert!(f(&t["e_lambda"]).abs() <= 1e-10 * f(&t["e_zero"]));
    assert_eq!(t["in_theorem_range"], false);
}

#[test]
fn invalid_q_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "params.q = 1.5\n", &["thresholds"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 < q < 1"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "params.z = 1\n", &["solve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_refuses_outside_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &format!("{SMALL}lambda.fraction = 2.0\n"), &["solve"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside theorem range (λ ≥ Λ)"));
}

#[test]
fn fiber_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["fiber"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json(dir.path(), "fiber.json");
    let case = &j["fiber"]["case"];
    assert_eq!(case["kind"], "two_roots");
    assert!(f(&j["fiber"]["triple"]["b_integral"]) > 0.0);

    let rows = csv_rows(dir.path(), "fiber_curve.csv");
    assert!(rows.len() >= 1000);
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    for root in [f(&case["t1"]), f(&case["t2"])] {
        let row = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == root).expect("root row");
        let psi: f64 = row[4].parse().unwrap();
        assert!(psi.abs() <= 1e-8, "ψ = {psi}");
    }
}

#[test]
fn fiber_direction_without_positive_part() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &format!("{SMALL}fiber.direction = constant -1\n"), &["fiber"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_positive_solutions_and_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["solve", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json(dir.path(), "gap.json");
    assert_eq!(j["gap"]["ordering_ok"], true);
    assert_eq!(j["config"]["solver"]["seed"], 7);
    assert!(f(&j["plus"]["energy"]) < 0.0);
    for file in ["solution_plus.csv", "solution_minus.csv"] {
        let rows = csv_rows(dir.path(), file);
        assert_eq!(rows.len(), 63);
        assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() > 0.0));
    }
}

#[test]
fn repeated_solve_is_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(d.path(), SMALL, &["solve"]).status.code(), Some(0));
    }
    let read = |d: &Path| std::fs::read(d.join("out/gap.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn sweep_rows_are_independent_and_ordered() {
    let all = tempfile::tempdir().unwrap();
    let one = tempfile::tempdir().unwrap();
    let out = run(all.path(), &format!("{SMALL}sweep.epsilons = 0.5, 0.25\n"), &["sweep-blowup"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(one.path(), &format!("{SMALL}sweep.epsilons = 0.25\n"), &["sweep-blowup"]);
    assert_eq!(out.status.code(), Some(0));

    let rows = csv_rows(all.path(), "sweep.csv");
    let single = csv_rows(one.path(), "sweep.csv");
    assert_eq!(rows[1], single[0]);
    assert!(rows.iter().all(|r| r[5] == "true"));
    let c_eps: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(c_eps[0] < c_eps[1], "C_ε must decrease as ε grows");
}

#[test]
fn sobolev_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["sobolev"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(dir.path(), "sobolev.json");
    let s = &j["sobolev"];
    assert!(f(&s["s_used"]) < f(&s["s_value"]));
    assert!(f(&s["s_value"]) <= f(&j["hat_quotient"]));
    assert_eq!(csv_rows(dir.path(), "sobolev_minimizer.csv").len(), 63);
}

#[test]
fn csv_weight_resolves_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("b.csv"), "x,b\n-1,-0.5\n0,1\n1,-0.5\n").unwrap();
    let out = run(dir.path(), &format!("{SMALL}weights.b = csv b.csv\n"), &["thresholds"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(dir.path(), "thresholds.json")["config"]["weights"]["b"]["kind"], "tabulated");
}

#[test]
fn shipped_config_is_the_reference() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.cfg");
    let shipped = frac_nehari::cli::RunConfig::from_file(&path).unwrap();
    let default = frac_nehari::cli::RunConfig::default();
    assert_eq!(
        frac_nehari::cli::to_json_string(&shipped, false).unwrap(),
        frac_nehari::cli::to_json_string(&default, false).unwrap()
    );
}
