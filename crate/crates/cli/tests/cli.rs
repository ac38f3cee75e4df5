use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robustq_cli::config::Config;
use tempfile::TempDir;

const PAPER: &str = r#"
alpha = 0.25
x = 7.66

[market]
r = 0.02
theta = 0.25
T = 1.0

[claim]
kind = "uniform"
y = 2.0

[utility]
c = [950.0, 950.0]
gamma = [0.010, 0.012]

[numerics]
mc_samples = 20000
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robustq"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect()).collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_artifacts_and_binds_budget() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["solve", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out.join("solution.csv"));
    assert_eq!(header, ["p", "Q", "H", "lambda_eta", "candidate", "active_flag"]);
    assert_eq!(rows.len(), 4001);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));

    let (header, profile) = read_csv(&out.join("profile.csv"));
    assert_eq!(header, ["rho", "payoff"]);
    assert!(profile.windows(2).all(|w| w[0][0] < w[1][0] && w[0][1] >= w[1][1]));

    let meta = json(&out.join("meta.json"));
    assert_eq!(meta["status"], "ok");
    assert!((meta["budget"].as_f64().unwrap() - 7.66).abs() < 1e-6);
    assert!(meta["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(meta["residuals"]["within_tolerance"], true);

    // The echoed config reparses to the effective config.
    let echoed: Config = serde_json::from_value(meta["config"].clone()).unwrap();
    let mut expected = Config::load(&cfg).unwrap();
    expected.output.directory = out.clone();
    assert_eq!(echoed, expected);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["solve", "--config", s(&cfg), "--out", s(dir), "--grid", "1001", "--seed", "7"]);
        assert!(o.status.success());
    }
    for file in ["solution.csv", "profile.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let (ma, mb) = (json(&a.join("meta.json")), json(&b.join("meta.json")));
    assert_eq!(ma["monte_carlo"], mb["monte_carlo"]);
}

#[test]
fn conflicting_budget_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "both.toml", &format!("lambda = 2.0\n{PAPER}"));
    let o = run(&["solve", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("both x and lambda"));

    let bad = write_config(tmp.path(), "bad.toml", &PAPER.replace("alpha = 0.25", "alpha = 2.0"));
    assert_eq!(run(&["solve", "--config", s(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--config", s(&tmp.path().join("missing.toml"))]).status.code(), Some(2));
}

#[test]
fn huge_multiplier_gives_zero_quantile() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "lam.toml", &PAPER.replace("x = 7.66", "lambda = 1e12"));
    let out = tmp.path().join("out");
    let o = run(&["solve", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("solution.csv"));
    assert!(rows.iter().all(|r| r[1] == 0.0));
    assert_eq!(json(&out.join("meta.json"))["budget"], 0.0);
}

#[test]
fn penalized_mode_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["solve", "--config", s(&cfg), "--out", s(&out), "--grid", "801", "--mode", "penalized"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&out.join("meta.json"));
    assert_eq!(meta["mode"], "penalized");
    assert_eq!(meta["config"]["numerics"]["mode"], "penalized");
    assert_eq!(meta["grid_points"], 801);
}

#[test]
fn endowment_sweep_orders_profiles() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--sweep", "x=4,7.66,12", "--grid", "2001"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let index = json(&out.join("index.json"));
    assert_eq!(index["parameter"], "x");
    let files: Vec<String> =
        index["entries"].as_array().unwrap().iter().map(|e| e["file"].as_str().unwrap().to_string()).collect();
    assert_eq!(files, ["sweep_x=4.0.csv", "sweep_x=7.66.csv", "sweep_x=12.0.csv"]);
    let profiles: Vec<Vec<Vec<f64>>> = files.iter().map(|f| read_csv(&out.join(f)).1).collect();
    for w in profiles.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a[1] <= b[1]));
    }
}

#[test]
fn alpha_sweep_with_constant_claim_is_flat() {
    let tmp = TempDir::new().unwrap();
    let text = PAPER.replace("kind = \"uniform\"\ny = 2.0", "kind = \"constant\"\nvalue = 1.0");
    let cfg = write_config(tmp.path(), "const.toml", &text);
    let out = tmp.path().join("out");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--sweep", "alpha=0,0.5,1", "--grid", "1001"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = fs::read(out.join("sweep_alpha=0.0.csv")).unwrap();
    for v in ["0.5", "1.0"] {
        assert_eq!(a, fs::read(out.join(format!("sweep_alpha={v}.csv"))).unwrap());
    }
}

#[test]
fn theta_sweep_writes_kernel_quantiles() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--sweep", "theta=0.15,0.25,0.4", "--grid", "1001"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let index = json(&out.join("index.json"));
    assert_eq!(index["kernel_quantiles"], "kernel_quantile.csv");
    let (header, rows) = read_csv(&out.join("kernel_quantile.csv"));
    assert_eq!(header, ["theta", "p", "quantile"]);
    assert_eq!(rows.len(), 3 * 999);
    for theta in ["0.15", "0.25", "0.4"] {
        assert!(out.join(format!("sweep_theta={theta}.csv")).exists());
    }
}

#[test]
fn failed_sweep_values_are_recorded() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--sweep", "alpha=0.5,3", "--grid", "1001"]);
    assert_eq!(o.status.code(), Some(3));
    let entries = json(&out.join("index.json"))["entries"].clone();
    assert_eq!(entries[0]["status"], "ok");
    assert_eq!(entries[1]["status"], "error");
    assert!(out.join("sweep_alpha=0.5.csv").exists());

    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--sweep", "nonsense=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_curve_is_decreasing() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "paper.toml", PAPER);
    let out = tmp.path().join("out");
    let o = run(&["budget-curve", "--config", s(&cfg), "--out", s(&out), "--grid", "2001"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("curve.csv"));
    assert_eq!(header, ["lambda", "x"]);
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] && w[0][1] > w[1][1]));

    // A single multiplier reproduces the solve budget.
    let lam_cfg = write_config(tmp.path(), "lam.toml", &PAPER.replace("x = 7.66", "lambda = 21.0"));
    let single = tmp.path().join("single");
    assert!(run(&["budget-curve", "--config", s(&cfg), "--out", s(&single), "--grid", "2001", "--lambdas", "21"])
        .status
        .success());
    let solved = tmp.path().join("solved");
    assert!(run(&["solve", "--config", s(&lam_cfg), "--out", s(&solved), "--grid", "2001"]).status.success());
    let (_, rows) = read_csv(&single.join("curve.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], json(&solved.join("meta.json"))["budget"].as_f64().unwrap());

    let by_x = tmp.path().join("by_x");
    assert!(run(&["budget-curve", "--config", s(&cfg), "--out", s(&by_x), "--grid", "2001", "--xs", "4,7.66,12"])
        .status
        .success());
    let (_, rows) = read_csv(&by_x.join("curve.csv"));
    assert_eq!(rows.len(), 3);
    assert!((rows[1][1] - 7.66).abs() < 1e-6);
    assert!(rows[0][1] > rows[2][1]);
}

#[test]
fn verify_passes_and_fails_as_configured() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["verify", "--sizes", "2,3,5", "--out", s(tmp.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&tmp.path().join("verify.json"));
    assert_eq!(report["passed"], true);
    let canonical = &report["checks"][0];
    assert_eq!(canonical["detail"]["max"], 1.0);
    assert_eq!(canonical["detail"]["min"], 0.5);

    let o = run(&["verify", "--sizes", "2", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["first_failure"].is_object());

    assert_eq!(run(&["verify", "--sizes", "9"]).status.code(), Some(2));
}

#[test]
fn kernel_quantile_command() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["kernel-quantile", "--out", s(tmp.path()), "--thetas", "0.1,0.4", "--points", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&tmp.path().join("kernel_quantile.csv"));
    assert_eq!(rows.len(), 18);
    // Median e^{−rT − θ²T/2}.
    let median = rows.iter().find(|r| r[0] == 0.4 && r[1] == 0.5).unwrap()[2];
    assert!((median - (-0.02f64 - 0.08).exp()).abs() < 1e-14);
}
