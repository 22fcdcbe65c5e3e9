use std::process::{Command, Output};

fn nilequi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilequi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

/// `abs` rows of one probe as `(t, value)`.
fn moduli(csv: &str, probe: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let cols: Vec<&str> = line.splitn(4, ',').collect();
            (cols[1] == format!("{probe}:abs")).then(|| (cols[0].parse().unwrap(), cols[2].parse().unwrap()))
        })
        .collect()
}

#[test]
fn check_stock_verdicts() {
    let o = nilequi(&["check", "--config", "torus_parabola"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["verdict"]["kind"], "Equidistributed");

    let o = nilequi(&["check", "--config", "cantor_t1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["verdict"]["kind"], "WeaklyEquidistributed");

    let o = nilequi(&["check", "--config", "torus_line_rational"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["verdict"]["kind"], "Obstructed");
    assert_eq!(v["verdict"]["witness"]["character"], serde_json::json!([2, -3]));
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"algebra": {"dim": 1}, "measure": {"cantor": {}}}"#,
    )
    .unwrap();
    let o = nilequi(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dilation"));

    let o = nilequi(&["check", "--config", "no_such_fixture"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_guard_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let text = include_str!("../../../fixtures/torus_parabola.json")
        .replacen("\"height\": 3", "\"height\": 3, \"budget\": 1000", 1);
    std::fs::write(&path, text).unwrap();
    let o = nilequi(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_stock_tables() {
    let o = nilequi(&["simulate", "--config", "torus_parabola"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("param,stat,value,meta\n"));
    let rows = moduli(&csv, "chi[1;1]");
    assert_eq!(rows.len(), 3);
    assert!(rows.last().unwrap().1 <= 0.05);

    let csv = stdout(&nilequi(&["simulate", "--config", "cantor_t1"]));
    let rows = moduli(&csv, "chi[1]");
    assert_eq!(rows.len(), 6);
    for (_, v) in &rows {
        assert!((v - rows[0].1).abs() <= 1e-9);
    }

    let csv = stdout(&nilequi(&["simulate", "--config", "torus_line_rational"]));
    let rows = moduli(&csv, "chi[2;-3]");
    assert!(!rows.is_empty() && rows.iter().all(|(_, v)| *v >= 0.5));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = nilequi(&[
            "simulate",
            "--config",
            "heisenberg_parabola",
            "--seed",
            "5",
            "--format",
            "json",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn counterexamples() {
    let o = nilequi(&["counterexample", "cantor-measure", "--m", "3"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["passed"], true);

    let o = nilequi(&["counterexample", "cantor-curve", "--self-similarity"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["checks"][0]["value"], 0.0);

    let o = nilequi(&["counterexample", "product-cantor:2", "--check"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["verdict"]["kind"], "WeaklyEquidistributed");

    let o = nilequi(&["counterexample", "sierpinski"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cantor-measure"));
}

#[test]
fn bch_selftest_passes() {
    let o = nilequi(&["bch-selftest", "--pairs", "20", "--seed", "9"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["passed"], true);
}
