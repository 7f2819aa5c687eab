//! End-to-end runs of the `sympb` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sympb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympb"))
        .args(args)
        .env_remove("SYMPB_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sympb(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header and data rows of a provenance CSV.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (header, rows) = table(csv);
    let c = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[c].parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn capacity_of_identity_and_ball() {
    let dir = tempfile::tempdir().unwrap();
    let id = write(dir.path(), "id.csv", "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n");
    let out = ok(&["capacity", &id]);
    let (_, rows) = table(&out);
    let cap: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!((cap - PI).abs() <= 1e-12);

    let ball = write(dir.path(), "ball.json", "[[0.25,0],[0,0.25]]");
    let out = ok(&["capacity", &ball, "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let cap = rows.last().unwrap()["value"].as_f64().unwrap();
    assert!((cap - 4.0 * PI).abs() <= 1e-12);
}

#[test]
fn capacity_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let not_pd = write(dir.path(), "np.csv", "1,0\n0,-1\n");
    let out = sympb(&["capacity", &not_pd]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive definite"));

    let asym = write(dir.path(), "asym.csv", "1,0.5\n0,1\n");
    let out = sympb(&["capacity", &asym]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not symmetric"));

    let odd = write(dir.path(), "odd.csv", "1,0,0\n0,1,0\n0,0,1\n");
    assert_eq!(sympb(&["capacity", &odd]).status.code(), Some(2));
    assert_eq!(sympb(&["capacity", "/nonexistent/m.csv"]).status.code(), Some(2));
}

#[test]
fn widths_scan() {
    // E − E0 = ω2 gives J2max = 1
    let e = (-0.9875f64 + 1.8225).to_string();
    let out = ok(&[
        "widths",
        "--e-min",
        &e,
        "--e-max",
        &e,
        "--steps",
        "1",
        "--samples",
        "1000",
    ]);
    let (header, rows) = table(&out);
    assert_eq!(
        header,
        [
            "E",
            "J_max_2",
            "c_cand",
            "limiting_mode",
            "V",
            "phi",
            "std_error",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert!((column(&out, "J_max_2")[0] - 1.0).abs() <= 1e-12);

    let out = ok(&["widths", "--builtin", "emm3", "--steps", "12", "--samples", "2000"]);
    let c = column(&out, "c_cand");
    assert_eq!(c.len(), 12);
    assert!(c.windows(2).all(|w| w[1] >= w[0]));
    assert!(table(&out).0.contains(&"J_max_3".to_owned()));

    assert_eq!(sympb(&["widths", "--e-min", "-2"]).status.code(), Some(1));
}

#[test]
fn exp1_defaults_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.csv");
    let out = ok(&["exp1", "--curves", curves.to_str().unwrap()]);
    let min = column(&out, "min_area");
    let pi_r2 = column(&out, "pi_r2");
    assert_eq!(min.len(), 4);
    for (a, b) in min.iter().zip(&pi_r2) {
        assert!(a / b >= 1.0 - 1e-6);
    }
    let curves = fs::read_to_string(curves).unwrap();
    assert_eq!(table(&curves).0, ["r", "tau", "area"]);
    assert_eq!(table(&curves).1.len(), 4 * 600);

    let unmixed = ok(&["exp1", "--sigma", "0", "--radii", "0.1,0.2"]);
    for (a, b) in column(&unmixed, "min_area").iter().zip(column(&unmixed, "pi_r2")) {
        assert!((a - b).abs() <= 1e-6 * b);
    }

    assert_eq!(sympb(&["exp1", "--radii"]).status.code(), Some(2));
    assert_eq!(sympb(&["exp1", "--radii", "0.1,-1"]).status.code(), Some(2));
}

#[test]
fn exp2_scan() {
    let out = ok(&["exp2", "--xi", "0,0.5,1", "--delta-e", "0"]);
    let (header, rows) = table(&out);
    assert_eq!(
        header,
        ["kind", "xi", "fraction", "n_transmitted", "n_total", "t_max", "seed"]
    );
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], "A");
    assert_eq!(rows[0][1], "");
    assert!(rows.iter().all(|r| r[4] == "5000"));
    assert_eq!(column(&out, "fraction")[3], 0.0);
    assert_eq!(sympb(&["exp2", "--xi", "1.5"]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_for_equal_seeds() {
    let args = ["exp2", "--n", "800", "--xi", "0,0.9", "--t-max", "0.5", "--seed", "31"];
    let a = ok(&args);
    let b = ok(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(a, b);
    assert_eq!(a, ok(&seq));
    let other = ok(&["exp2", "--n", "800", "--xi", "0,0.9", "--t-max", "0.5", "--seed", "32"]);
    assert_ne!(a, other);

    let w = ["widths", "--builtin", "emm3", "--steps", "3", "--samples", "40000"];
    assert_eq!(ok(&w), ok(&[&w[..], &["--sequential"]].concat()));
}

#[test]
fn seed_env_config_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_sympb"));
        c.args(["sample", "--n", "2"]).args(extra).env_remove("SYMPB_SEED");
        if let Some(s) = env {
            c.env("SYMPB_SEED", s);
        }
        String::from_utf8(c.output().unwrap().stdout).unwrap()
    };
    let seed_of = |csv: &str| -> u64 {
        let cfg = csv.lines().nth(1).unwrap().trim_start_matches("# config: ");
        serde_json::from_str::<Value>(cfg).unwrap()["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&run(None, &[])), 2024);
    assert_eq!(seed_of(&run(Some("5"), &[])), 5);
    let cfg = write(dir.path(), "c.json", r#"{"seed": 6, "n": 3}"#);
    let out = run(Some("5"), &["--config", &cfg]);
    assert_eq!(seed_of(&out), 6);
    assert_eq!(table(&out).1.len(), 2, "flag --n overrides the file");
    assert_eq!(seed_of(&run(Some("5"), &["--config", &cfg, "--seed", "7"])), 7);
}

#[test]
fn every_csv_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    ok(&[
        "sample",
        "--kind",
        "b",
        "--xi",
        "0.5",
        "--n",
        "10",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# sympb sample"));
    let cfg: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["kind"], "B");
    assert_eq!(cfg["xi"], 0.5);
    assert_eq!(table(&text).1.len(), 10);
    for q in column(&text, "Q1") {
        assert!(q < 0.0);
    }
}

#[test]
fn integrate_stationary_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("sum.json");
    // far on the reactant side the Eckart force underflows to zero
    let out = ok(&[
        "integrate",
        "--state=-800,0,0,0,0,0",
        "--t-final",
        "1",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["t", "q1", "q2", "q3", "p1", "p2", "p3", "H"]);
    assert_eq!(rows.len(), 101);
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["energy_drift"].as_f64(), Some(0.0));

    let drift = |h: &str, stride: &str| {
        ok(&[
            "integrate",
            "--t-final",
            "10",
            "--h",
            h,
            "--monitor-stride",
            stride,
            "--summary",
            summary.to_str().unwrap(),
        ]);
        let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
        s["energy_drift"].as_f64().unwrap()
    };
    let r = drift("0.002", "5") / drift("0.001", "10");
    assert!((3.5..=4.5).contains(&r), "ratio {r}");

    assert_eq!(
        sympb(&["integrate", "--params", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    let p = write(
        dir.path(),
        "p.json",
        r#"{"m":1,"eps":0,"A":-0.5,"B":2,"a":1,"De":[1],"aM":[1]}"#,
    );
    let out = ok(&["integrate", "--params", &p, "--t-final", "0.01"]);
    assert_eq!(table(&out).0, ["t", "q1", "q2", "p1", "p2", "H"]);
    assert_eq!(sympb(&["integrate", "--state", "1,2,3"]).status.code(), Some(2));
}
