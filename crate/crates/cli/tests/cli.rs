use std::process::{Command, Output};

fn riskclaim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskclaim"))
        .args(args)
        .env_remove("RISKCLAIM_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

const AVAR: [&str; 4] = ["--measure", "avar:0.75", "--density", "uniform:0,2"];

#[test]
fn solve_avar_diversified() {
    let o = riskclaim(&[&["solve"][..], &AVAR, &["--v", "0.9"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let s = json(&o);
    assert!((s["params"]["beta"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((s["risk"].as_f64().unwrap() - 0.86667).abs() < 1e-5);
    assert_eq!(s["regime"], "diversified");
}

#[test]
fn solve_zero_budget() {
    let o = riskclaim(&[&["solve"][..], &AVAR, &["--v", "0"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let s = json(&o);
    assert_eq!(s["risk"].as_f64(), Some(0.0));
    assert_eq!(s["payoff"]["kind"], "constant");
}

#[test]
fn solve_two_level_diversifies() {
    let o = riskclaim(&["solve", "--measure", "rho_k:twolevel:0.6,0.5", "--density", "uniform:0,2", "--v", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["params"]["x_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_csv_uses_twelve_digits() {
    let o = riskclaim(&[&["solve"][..], &AVAR, &["--v", "0.9", "--format", "csv"]].concat());
    assert!(stdout(&o).contains("risk,0.866666666667\n"));
}

#[test]
fn avar_curve_flips_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = riskclaim(&[&["curve"][..], &AVAR, &["--grid", "0:1:11", "--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    let mut rows = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["v", "risk", "regime", "beta_or_xstar"]);
    for r in rows.records() {
        let r = r.unwrap();
        let v: f64 = r[0].parse().unwrap();
        let risk: f64 = r[1].parse().unwrap();
        let expected = if v <= 0.75 { (1.0 - (1.0 - v).sqrt()) / 0.75 } else { 1.0 - (1.0 - v) / 0.75 };
        assert!((risk - expected).abs() < 1e-11, "v = {v}");
        let regime = match v {
            v if v == 0.0 || v == 1.0 => "boundary",
            v if v <= 0.75 => "classical",
            _ => "diversified",
        };
        assert_eq!(&r[2], regime, "v = {v}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("curve.csv.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["strictly_increasing"], true);
    assert_eq!(summary["convex"], true);
    assert_eq!(summary["failed"], 0);
}

#[test]
fn two_point_curve_hits_endpoints() {
    let o = riskclaim(&[&["curve"][..], &AVAR, &["--grid", "0:1:2"]].concat());
    assert_eq!(stdout(&o), "v,risk,regime,beta_or_xstar\n0,0,boundary,\n1,1,boundary,\n");
}

#[test]
fn var_curve_skips_convexity() {
    let o = riskclaim(&["curve", "--measure", "var:0.25", "--density", "uniform:0,2", "--grid", "0:1:5"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["convex"], "skipped (non-convex measure)");
}

#[test]
fn verify_passes_and_fails() {
    let o = riskclaim(&[&["verify"][..], &AVAR, &["--v", "0.9", "--n", "2000"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["gap"].as_f64().unwrap() <= 2e-3);

    let o = riskclaim(&["verify", "--measure", "rho_k:linear:0:0,1:2", "--density", "uniform:0,2", "--v", "0.7", "--n", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["solver_risk"].as_f64().unwrap() - 0.7).abs() < 1e-9);

    let o = riskclaim(&[&["verify"][..], &AVAR, &["--v", "0.5", "--n", "2", "--tol", "1e-6"]].concat());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gap"));
}

#[test]
fn tolerance_from_environment() {
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_riskclaim"))
            .args([&["verify"][..], &AVAR, &["--v", "0.5", "--n", "2"]].concat())
            .env("RISKCLAIM_TOL", tol)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("0.1"), Some(0));
    assert_eq!(run("1e-6"), Some(3));
    assert_eq!(run("tight"), Some(1));
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["solve", "--measure", "avar:0.75", "--density", "uniform:0,2", "--v", "1.5"][..],
        &["solve", "--measure", "avar:2", "--density", "uniform:0,2", "--v", "0.5"],
        &["solve", "--measure", "avar:0.75", "--density", "uniform:0,3", "--v", "0.5"],
        &["solve", "--measure", "avar:0.75", "--v", "0.5"],
        &["verify", "--measure", "var:0.25", "--density", "uniform:0,2", "--v", "0.5"],
        &["verify", "--measure", "avar:0.75", "--density", "uniform:0,2", "--v", "0.5", "--n", "1"],
        &["curve", "--measure", "avar:0.75", "--density", "uniform:0,2", "--grid", "0:2:3"],
        &["solve", "--no-such-flag"],
    ] {
        assert_eq!(riskclaim(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("atoms.csv"), "value,prob\n0.5,0.5\n1.5,0.5\n").unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"measure": "avar:0.75", "density": "uniform:0,2", "v": 0.3}"#).unwrap();
    let o = riskclaim(&["solve", "--config", cfg.to_str().unwrap(), "--v", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["params"]["beta"].as_f64().unwrap() - 0.6).abs() < 1e-12);

    // Relative atom files resolve next to the config file.
    let cfg = dir.path().join("atoms.json");
    std::fs::write(&cfg, r#"{"density": "atoms:atoms.csv"}"#).unwrap();
    let o = riskclaim(&["inspect", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["continuous"], false);

    std::fs::write(&cfg, "{\"density\": \"uniform:0,2\",\n \"budget\": 0.5}").unwrap();
    let o = riskclaim(&["inspect", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn solver_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = dir.path().join("a.csv");
    std::fs::write(&atoms, "value,prob\n0.5,0.5\n1.5,0.5\n").unwrap();
    let density = format!("atoms:{}", atoms.display());
    let o = riskclaim(&["solve", "--measure", "avar:0.75", "--density", &density, "--v", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn atom_file_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = dir.path().join("bad.csv");
    std::fs::write(&atoms, "value,prob\n0.5,0.5\n1.5,x\n").unwrap();
    let o = riskclaim(&["inspect", "--density", &format!("atoms:{}", atoms.display())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("line 3, column 2"), "{err}");
}
