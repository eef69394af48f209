use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn opuc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opuc"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPUC_GRID_M")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn build_circular_jacobi() {
    let d = tempfile::tempdir().unwrap();
    let o = opuc(d.path(), &["build", "--family", "cj", "--a", "1", "--n", "8", "--route", "closed", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    let s = json(&d.path().join("s.json"));
    let k1 = s["kappa"][1].as_f64().unwrap();
    assert!((k1 - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    let phi1 = &s["phi"][1]["coeffs"];
    assert_eq!(phi1[1][0].as_f64().unwrap(), k1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("kappa_n"));
}

#[test]
fn build_lebesgue_and_bessel() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&opuc(d.path(), &["build", "--family", "lebesgue", "--n", "5", "--out", "l.json"])), 0);
    let phi5 = &json(&d.path().join("l.json"))["phi"][5]["coeffs"];
    for k in 0..6 {
        assert_eq!(phi5[k][0].as_f64().unwrap(), if k == 5 { 1.0 } else { 0.0 });
    }
    let o = opuc(d.path(), &["build", "--family", "mb", "--t", "1", "--n", "10", "--route", "moments", "--out", "m.json"]);
    assert_eq!(code(&o), 0);
    let s = json(&d.path().join("m.json"));
    let r1 = s["phi0"][1][0].as_f64().unwrap() / s["kappa"][1].as_f64().unwrap();
    assert!((r1 + 0.446_389_965_896_534_5).abs() < 1e-13);
}

#[test]
fn verify_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = opuc(
        d.path(),
        &["verify", "--suite", "functional-eq", "--family", "sz", "--a", "1", "--b", "0.5", "--n", "8", "--csv", "c.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&d.path().join("opuc-report.json"));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["anchor"], "ladder-functional-equation");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(std::fs::read_to_string(d.path().join("c.csv")).unwrap().starts_with("suite,anchor"));

    assert_eq!(code(&opuc(d.path(), &["verify", "--suite", "dpii", "--family", "mb", "--t", "1", "--n", "10"])), 0);

    let o = opuc(d.path(), &["verify", "--suite", "delta", "--family", "lebesgue"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("phi_n(0)"));
}

#[test]
fn verify_failures_and_bad_input() {
    let d = tempfile::tempdir().unwrap();
    let o = opuc(d.path(), &["verify", "--suite", "cd", "--family", "cj", "--a", "1", "--tol-factor", "1e-12"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&opuc(d.path(), &["verify", "--suite", "nope", "--family", "cj", "--a", "1"])), 1);
    assert_eq!(code(&opuc(d.path(), &["verify", "--suite", "ladder", "--family", "cj"])), 1);
    assert_eq!(code(&opuc(d.path(), &["verify", "--suite", "ladder", "--family", "cj", "--a", "-2"])), 1);
    let o = opuc(d.path(), &["verify", "--suite", "cd", "--family", "cj", "--a", "1", "--out", "/proc/nope/r.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn grid_override_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let run = |m: &str| {
        Command::new(env!("CARGO_BIN_EXE_opuc"))
            .args(["verify", "--suite", "routes", "--family", "mb", "--t", "1", "--n", "6"])
            .current_dir(d.path())
            .env("OPUC_GRID_M", m)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("256")), 0);
    assert_ne!(code(&run("8")), 0);
    assert_eq!(code(&run("many")), 1);
}

#[test]
fn report_all_configs() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("empty.toml"), "").unwrap();
    let o = opuc(d.path(), &["report-all", "--config", "empty.toml", "--out-dir", "e"]);
    assert_eq!(code(&o), 0);
    let r = json(&d.path().join("e/report.json"));
    assert_eq!(r["reports"].as_array().unwrap().len(), 0);

    std::fs::write(d.path().join("bad.toml"), "[[runs]]\nsuite = \"delta\"\nn = \"x\"\n").unwrap();
    let o = opuc(d.path(), &["report-all", "--config", "bad.toml"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    std::fs::write(d.path().join("bad.json"), "{\"runs\": [}").unwrap();
    let o = opuc(d.path(), &["report-all", "--config", "bad.json"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    assert_eq!(code(&opuc(d.path(), &["report-all", "--config", "missing.toml"])), 3);

    std::fs::write(
        d.path().join("mixed.json"),
        r#"{"runs":[{"suite":"delta","n":4,"weights":[{"family":"lebesgue"},{"family":"szego","a":1.0,"b":0.5}]}]}"#,
    )
    .unwrap();
    let o = opuc(d.path(), &["report-all", "--config", "mixed.json", "--out-dir", "m", "--gnuplot"]);
    assert_eq!(code(&o), 1);
    let r = json(&d.path().join("m/report.json"));
    assert_eq!(r["summary"]["reports"], 2);
    assert_eq!(r["summary"]["failed_reports"], 1);
    assert!(d.path().join("m/gnuplot/delta.dat").exists());
    assert!(d.path().join("m/summary.txt").exists());
    assert!(d.path().join("m/checks.csv").exists());
}

#[test]
fn printed_config_runs() {
    let d = tempfile::tempdir().unwrap();
    let o = opuc(d.path(), &["report-all", "--print-config"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("suite = \"q-disc-limit\""));
    let small: String = "[[runs]]\nsuite = \"cd\"\nn = 6\nseed = 2\n\n[[runs.weights]]\nfamily = \"rogers_szego\"\nq = 0.5\n".into();
    std::fs::write(d.path().join("c.toml"), small).unwrap();
    assert_eq!(code(&opuc(d.path(), &["report-all", "--config", "c.toml"])), 0);
}

#[test]
fn explain_and_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = opuc(d.path(), &["--explain", "all"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for s in ["recurrences", "christoffel-darboux", "discrete-painleve-ii", "q-disc-limit"] {
        assert!(text.contains(s), "{s}");
    }
    assert_eq!(code(&opuc(d.path(), &["--explain", "bogus"])), 1);

    let o = opuc(d.path(), &["zeros", "--family", "cj", "--a", "1", "--n", "1"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("re,im,abs,residual\n-5e-1,"), "{csv}");

    let o = opuc(d.path(), &["disc", "--family", "rs", "--q", "0.5", "--n", "4", "--out", "d.csv"]);
    assert_eq!(code(&o), 0);
    let rows = std::fs::read_to_string(d.path().join("d.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4 * 4);
}
