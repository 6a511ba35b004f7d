use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn matfin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matfin")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn all_metrics_pass(v: &Value) -> bool {
    v["metrics"].as_array().unwrap().iter().all(|m| m["pass"] == Value::Bool(true))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = matfin(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(matfin(&["distance", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(matfin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(matfin(&["construct", "--op", "w"]).status.code(), Some(2));
}

#[test]
fn distance_curve_matches_closed_form() {
    let out = matfin(&["distance", "--blocks", "12", "--k", "3", "--json-only"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let v = report(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "distance");
    let curve = v["data"]["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 12);
    for row in curve {
        let n = row["n"].as_u64().unwrap() as f64;
        let expected = if n > 3.0 { ((n - 3.0) / n).sqrt() } else { 0.0 };
        assert!((row["error"].as_f64().unwrap() - expected).abs() < 1e-12, "{row}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = matfin(&["distance", "--blocks", "5", "--k", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    // sqrt(4/5) = 0.894427190999916
    assert!(text.contains("8.9442719099991586e-1"), "{text}");
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let mut v = report(&matfin(&["algebra-check", "--trials", "50", "--k", "3", "--window", "40", "--seed", "9"]));
        v.as_object_mut().unwrap().remove("wall_time");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn algebra_check_passes() {
    let out = matfin(&["algebra-check", "--trials", "200", "--k", "4", "--window", "128"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert!(all_metrics_pass(&v));
    assert_eq!(v["pass"], true);
}

#[test]
fn norm_bound_passes() {
    let out = matfin(&["norm-bound", "--trials", "30", "--k", "3", "--window", "48"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(all_metrics_pass(&report(&out)));
}

#[test]
fn construct_writes_coordinate_files() {
    let dir = tempfile::tempdir().unwrap();
    for op in ["v", "u", "p", "m2p", "shift", "polar"] {
        let path = dir.path().join(format!("{op}.txt"));
        let p = path.to_str().unwrap();
        let out = matfin(&["construct", "--op", op, "--blocks", "5", "--out", p]);
        assert_eq!(out.status.code(), Some(0), "{op}: {}", String::from_utf8_lossy(&out.stderr));
        let v = report(&out);
        let text = std::fs::read_to_string(&path).unwrap();
        let header: Vec<usize> = text.lines().next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(header[0], v["data"]["window"].as_u64().unwrap() as usize, "{op}");
        assert_eq!(header[1], text.lines().count() - 1, "{op}");
    }
}

#[test]
fn ghost_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    let ps = p.to_str().unwrap();
    assert_eq!(matfin(&["construct", "--op", "p", "--blocks", "4", "--out", ps]).status.code(), Some(0));
    let rep = dir.path().join("ghost.json");
    let svg = dir.path().join("tail.svg");
    let out = matfin(&["ghost", "--in", ps, "--report", rep.to_str().unwrap(), "--plot", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    // blocks of sizes 1, 2, 3, 4: tail is 1/b(t)
    let tail: Vec<f64> = v["data"]["tail"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = [1.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.25, 0.25, 0.25, 0.25];
    assert_eq!(tail, expected);
    let first = std::fs::read(&svg).unwrap();
    assert!(first.starts_with(b"<svg"));
    matfin(&["ghost", "--in", ps, "--plot", svg.to_str().unwrap()]);
    assert_eq!(std::fs::read(&svg).unwrap(), first);
}

#[test]
fn plot_is_refused_for_commands_without_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    let out = matfin(&["embed", "--kind", "action", "--n", "10", "--plot", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["error"].as_str().unwrap().contains("no plot"));
}

#[test]
fn extraction_succeeds_on_planted_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let n = 20;
    let mut body = format!("{n} {n}\n");
    for i in 1..=n {
        body += &format!("{i} {i} {} 0\n", if i % 2 == 0 { 1.0 } else { 0.1 });
    }
    let f = write(dir.path(), "d.txt", &body);
    let out = matfin(&["ideal-extract", "--in", &f, "--delta", "0.5", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(&out);
    assert_eq!(v["data"]["case"], "diagonal");
    let indices: Vec<u64> = v["data"]["indices"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(!indices.is_empty());
    assert!(indices.iter().all(|i| i % 2 == 0), "{indices:?}");
    assert!(v["data"]["sigma_min"].as_f64().unwrap() > 0.25);
}

#[test]
fn extraction_reports_insufficient_data_on_ghosts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    let ps = p.to_str().unwrap();
    matfin(&["construct", "--op", "p", "--blocks", "10", "--out", ps]);
    let out = matfin(&["ideal-extract", "--in", ps, "--delta", "0.5", "--k", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v = report(&out);
    assert_eq!(v["pass"], false);
    assert!(v["error"].as_str().unwrap().contains("insufficient data"), "{}", v["error"]);
}

#[test]
fn missing_input_is_an_experiment_failure() {
    let out = matfin(&["ghost", "--in", "/nonexistent/file.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["error"].is_string());
}

#[test]
fn expander_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("exp.json");
    let out = matfin(&["expander", "--n-max", "6", "--degree", "4", "--s", "10", "--seed", "3", "--out", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    let d = &v["data"];
    for key in ["params", "per_block", "delta_hat", "filter_degree", "profile_bound", "max_err"] {
        assert!(!d[key].is_null(), "missing {key}");
    }
    let blocks = d["per_block"].as_array().unwrap();
    assert_eq!(blocks.len(), 6);
    for (n, b) in blocks.iter().enumerate() {
        assert_eq!(b["m"].as_u64().unwrap() as usize, 2 * (n + 1));
        assert!(b["lambda1"].as_f64().unwrap() > 0.0);
        assert!(b["err"].as_f64().unwrap() <= 0.1 + 1e-6);
    }
    assert_eq!(d["params"]["seed"], 3);
}

#[test]
fn embed_kinds() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["action", "adjacency", "band"] {
        let out = matfin(&["embed", "--kind", kind, "--n", "30"]);
        assert_eq!(out.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let edges = write(dir.path(), "e.txt", "1 2\n2 3\n3 1\n3 4\n");
    let v = report(&matfin(&["embed", "--kind", "adjacency", "--in", &edges]));
    assert_eq!(v["data"]["max_degree"], 3);
    assert_eq!(v["pass"], true);
    let table = write(dir.path(), "m.txt", "3\n0 1 2\n1 0 1\n2 1 0\n");
    let v = report(&matfin(&["embed", "--kind", "band", "--in", &table, "--radius", "1", "--radius2", "1"]));
    assert_eq!(v["data"]["ball_bound"], 3);
    assert_eq!(v["pass"], true);
    let bad = write(dir.path(), "bad.txt", "3\n0 1 5\n1 0 1\n5 1 0\n");
    assert_eq!(matfin(&["embed", "--kind", "band", "--in", &bad]).status.code(), Some(1));
}

#[test]
fn homotopy_on_random_operator() {
    let out = matfin(&["homotopy", "--window", "24", "--steps", "16", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(&out);
    let steps = v["data"]["steps"].as_array().unwrap();
    assert!(steps.len() > 1);
    assert!(steps.iter().all(|s| s["sigma_min"].as_f64().unwrap() > 1e-6 && s["jump"].as_f64().unwrap() <= 0.1));
    let stages: Vec<&str> = v["data"]["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages.first(), Some(&"select"));
    assert_eq!(stages.last(), Some(&"whitehead"));
}

#[test]
fn homotopy_pads_input_and_rejects_singular() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "3 4\n1 1 2 0\n2 2 -1 0\n3 3 1 0\n1 3 0.5 0\n");
    let out = matfin(&["homotopy", "--in", &g, "--window", "8", "--steps", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["params"]["window"], 8);
    let s = write(dir.path(), "s.txt", "4 1\n1 1 1 0\n");
    let out = matfin(&["homotopy", "--in", &s]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["error"].as_str().unwrap().contains("invertibility"));
}
