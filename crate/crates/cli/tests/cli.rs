use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jordan-orbits"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn reports(o: &Output) -> Vec<serde_json::Value> {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jordan-orbits-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn zero_runtimes(text: &str) -> String {
    let mut v: Vec<serde_json::Value> = serde_json::from_str(text).unwrap();
    for r in &mut v {
        r["runtime_seconds"] = 0.0.into();
    }
    serde_json::to_string(&v).unwrap()
}

#[test]
fn cases_text_and_json() {
    let o = run(&["cases"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("id"));
    assert!(text.contains("sp_c") && text.contains("Sp_n(C)"));
    let o = run(&["cases", "--format", "json"]);
    let v: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.len(), text.lines().count() - 1);
    assert!(v.iter().any(|c| c["case_id"] == "gl_r" && c["d"] == 1 && c["e"] == 0));
    let o = run(&["cases", "--n", "3", "--format", "json"]);
    let v: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.iter().all(|c| c["n"] == 3));
}

#[test]
fn verify_polar_open_orbit() {
    let o = run(&["verify-polar", "--case", "gl_r", "--n", "2", "--k", "2", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = reports(&o);
    assert_eq!(v.len(), 3);
    assert!(v.iter().all(|r| r["claim_id"] == "polar-open" && r["verdict"] == "pass"));
    assert!(v.iter().all(|r| !r["anchor"].as_str().unwrap().is_empty()));
}

#[test]
fn phi_scan_sp_c_boundary_is_divergent() {
    let o = run(&["phi-l2-scan", "--case", "sp_c", "--n", "2", "--t", "-2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = reports(&o);
    assert_eq!(v[0]["predicted"], "divergent");
    assert_eq!(v[0]["measured"], "divergent");
}

#[test]
fn rank1_fourier_with_literal() {
    let x = r#"{"field":"real","rows":[[1,0.5],[0,2]]}"#;
    let o = run(&["rank1-fourier", "--case", "gl_r", "--n", "2", "--x", x]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(reports(&o)[0]["parameters"]["points"], 2);
}

#[test]
fn cayley_and_certificates() {
    let o = run(&["cayley-check", "--s", "3", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = reports(&o);
    assert_eq!(v.len(), 2);
    assert!(v.iter().all(|r| r["claim_id"] == "cayley-identity"));
    let o = run(&["l2-certificate", "--case", "sp_c", "--n", "3", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["stability-check", "--case", "o_2n2n", "--n", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bessel_selftest_csv_rows() {
    let json = reports(&run(&["bessel-selftest"]));
    let o = run(&["bessel-selftest", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), json.len() + 1);
}

#[test]
fn equivariance_with_explicit_levi() {
    let levi = r#"[{"field":"real","rows":[[2,0],[0,1]]},{"field":"real","rows":[[1,0],[0,1]]}]"#;
    let o = run(&["verify-equivariance", "--case", "gl_r", "--n", "2", "--k", "1", "--levi", levi]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = &reports(&o)[0];
    assert_eq!(r["predicted"].as_f64().unwrap(), 0.5000000000000001);
    assert!((r["measured"].as_f64().unwrap() / 0.5 - 1.0).abs() < 1e-3);
}

#[test]
fn errors_exit_one() {
    assert_eq!(run(&["suite", "--case", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["l2-certificate", "--case", "sp_c", "--n", "3", "--k", "3"]).status.code(), Some(1));
    assert_eq!(run(&["suite", "--case", "o_pq:3,4"]).status.code(), Some(1));
    let o = run(&["rank1-fourier", "--case", "gl_r", "--x", r#"{"field":"real","rows":[[1]]}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 2x2"));
}

#[test]
fn metadata_only_suite_skips() {
    let o = run(&["suite", "--case", "e7_7", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = reports(&o);
    assert_eq!(v[0]["claim_id"], "registry");
    assert!(v[1..v.len() - 1].iter().all(|r| r["verdict"] == "skipped"));
}

#[test]
fn config_file_and_precedence() {
    let cfg = scratch("eq.toml");
    std::fs::write(
        &cfg,
        "[global]\nseed = 5\n\n[quadrature]\nmc_samples = 20000\n\n[verify-equivariance]\ncase = \"o_2n2n\"\nk = 2\nmode = \"monte_carlo\"\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let v = reports(&run(&["verify-equivariance", "--config", c]));
    assert_eq!(v[0]["case_id"], "o_2n2n");
    assert_eq!(v[0]["parameters"]["k"], 2);
    assert_eq!(v[0]["seed"], 5);
    let v = reports(&run(&["verify-equivariance", "--config", c, "--seed", "9", "--k", "1"]));
    assert_eq!(v[0]["seed"], 9);
    assert_eq!(v[0]["parameters"]["k"], 1);
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "[quadrature]\nnot_a_key = 1\n").unwrap();
    assert_eq!(run(&["bessel-selftest", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn suite_output_is_reproducible() {
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for p in [&a, &b] {
        let o = run(&["suite", "--case", "gl_r", "--n", "2", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(zero_runtimes(&ta), zero_runtimes(&tb));
    let v: Vec<serde_json::Value> = serde_json::from_str(&ta).unwrap();
    assert_eq!(v.last().unwrap()["claim_id"], "suite");
    assert_eq!(v.last().unwrap()["verdict"], "pass");
}
