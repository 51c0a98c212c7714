use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multicolor"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn color_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let col = dir.path().join("petersen.col");
    let trace = dir.path().join("petersen.jsonl");
    let g = data("petersen.mgraph");
    let o = run(&[
        "color",
        g.to_str().unwrap(),
        "-o",
        col.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    let t = multicolor::format::parse_trace(&text).unwrap();
    assert_eq!(t.header.input_n, 10);
    let o = run(&["verify", g.to_str().unwrap(), col.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"satisfied\": true"));
}

#[test]
fn certify_prints_json() {
    let o = run(&["color", data("fig2.mgraph").to_str().unwrap(), "--certify"]);
    assert_eq!(o.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["phi"], 6);
    assert_eq!(cert["bound_floor"], 7);
}

#[test]
fn improper_coloring_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let col = dir.path().join("bad.col");
    std::fs::write(&col, "c 0 0\nc 1 0\nc 2 1\n").unwrap();
    let g = dir.path().join("k3.mgraph");
    std::fs::write(&g, "p mgraph 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
    let o = run(&["verify", g.to_str().unwrap(), col.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.mgraph");
    std::fs::write(&g, "p mgraph 3 1\ne 1 4\n").unwrap();
    assert_eq!(run(&["color", g.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["color", "/nonexistent/graph"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "cube"]).status.code(), Some(2));
    let o = run(&["color", data("petersen.mgraph").to_str().unwrap(), "--terminal-order", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn state_violation_exits_3() {
    let g = data("matching_gap.mgraph");
    let o = run(&["stage2", g.to_str().unwrap(), "--origin-n", "21"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Matching Lemma"));
    // with fallback the coloring is still produced, but the audit flags the leaf
    let o = run(&["stage2", g.to_str().unwrap(), "--origin-n", "21", "--fallback"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("s colors"));
}

#[test]
fn gen_is_reproducible() {
    let a = run(&["gen", "random", "9", "3", "0.5", "--seed", "4"]);
    let b = run(&["gen", "random", "9", "3", "0.5", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let g = multicolor::format::parse_multigraph(&stdout(&a)).unwrap();
    assert_eq!(g.vertex_count(), 9);
    let fixed = std::fs::read_to_string(data("fig2.mgraph")).unwrap();
    assert_eq!(stdout(&run(&["gen", "fig2"])), fixed);
}

#[test]
fn oracle_and_invariants() {
    let p = data("petersen.mgraph");
    assert_eq!(stdout(&run(&["oracle", p.to_str().unwrap()])).trim(), "4");
    let inv = stdout(&run(&["invariants", p.to_str().unwrap()]));
    assert!(inv.contains("φ = 3"));
    assert!(inv.contains("bound = 5"));
}

#[test]
fn corpus_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("petersen.mgraph"), dir.path().join("p.mgraph")).unwrap();
    let list = dir.path().join("small.corpus");
    std::fs::write(&list, "fat-triangle 2\nfile p.mgraph\nrandom 7 3 0.5 seeds 0..4\n").unwrap();
    let csv = dir.path().join("out.csv");
    let o = run(&["corpus", list.to_str().unwrap(), "-o", csv.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,name,n,e,delta,gamma,phi,colors,oracle,bound,status");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.ends_with(",pass")));
}
