use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hitchin-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn theta_level_one_labelings() {
    let o = run(&["labelings", "--graph", "theta", "--level", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# hitchin-lab v0.1.0");
    assert_eq!(lines[1], "e0,e1,e2");
    assert_eq!(&lines[2..], ["0,0,0", "0,1,1", "1,0,1", "1,1,0"]);
}

#[test]
fn graph_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    std::fs::write(&graph, hitchin_lab::pants_graph::TrivalentGraph::dumbbell().to_json()).unwrap();
    let out = dir.path().join("n.csv");
    let o = run(&["norms", "--graph", graph.to_str().unwrap(), "--level", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("# hitchin-lab v0.1.0\ne0,e1,e2,norm\n"));
    assert!(text.lines().count() > 2);
}

#[test]
fn verlinde_table_agrees() {
    let o = run(&["verlinde", "--genus", "2", "--levels", "0..=8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let counts: Vec<&str> = text.lines().skip(2).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(counts, ["1", "4", "10", "20", "35", "56", "84", "120", "165"]);
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
}

#[test]
fn sampling_is_deterministic() {
    let a = run(&["charvar-sample", "--seed", "11", "--draws", "5000"]);
    let b = bin()
        .args(["charvar-sample", "--seed", "11", "--draws", "5000"])
        .env("HITCHIN_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["charvar-sample", "--seed", "12", "--draws", "5000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn kz_transport_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, "[[0.5, 0.5], [0.7, 0.5], [0.7, 0.3], [0.5, 0.5]]").unwrap();
    let o = run(&["kz-transport", "--path", path.to_str().unwrap(), "--steps", "400"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["header"], "# hitchin-lab v0.1.0");
    assert_eq!(v["dim"], 2);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 2);
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        &["labelings", "--graph", "no-such-graph", "--level", "1"][..],
        &["labelings", "--graph", "theta"][..],
        &["labelings", "--graph", "theta", "--level", "1", "--bogus"][..],
        &["theta-heat", "--level", "1", "--taus", "0:-1"][..],
        &["torus-fiber", "--x", "3", "--y", "0", "--z", "0", "--c0", "0"][..],
        &["accept", "--only", "42"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = bin().args(["charvar-sample", "--seed", "1", "--draws", "10"]).env("HITCHIN_LAB_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, "[[0.5, 0.5], [0.6, 0.5]]").unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["kz-transport", "--path", p, "--steps", "10"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["kz-transport", "--path", p, "--steps", "100", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn accept_passes() {
    let o = run(&["accept"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9, "{text}");
}
