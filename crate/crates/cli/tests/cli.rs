use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hwy1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwy1"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const STAR: &str = "p graph 5 4\ne 0 1 3\ne 0 2 5\ne 0 3 7\ne 0 4 2\nt 1\nt 2\nt 4\n";
const SQUARE: &str = "p graph 4 4\ne 0 1 1\ne 1 2 1\ne 2 3 1\ne 3 0 1\n";

#[test]
fn verify_hd1_exit_codes() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star.graph", STAR);
    let sq = write(&dir, "sq.graph", SQUARE);
    let ok = hwy1(&["verify-hd1", s(&star), "--json"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["certified"], true);
    let no = hwy1(&["verify-hd1", s(&sq), "--json"]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(json(&no)["certified"], false);
}

#[test]
fn solvers_agree_with_oracles() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star.graph", STAR);
    let dp = json(&hwy1(&["solve-tsp", s(&star), "--json"]));
    let hk = json(&hwy1(&["oracle-tsp", s(&star), "--json"]));
    assert_eq!(dp["cost"], "34");
    assert_eq!(dp["cost"], hk["cost"]);
    let st = json(&hwy1(&["solve-steiner", s(&star), "--json"]));
    let dw = json(&hwy1(&["oracle-steiner", s(&star), "--json"]));
    assert_eq!(st["cost"], "10");
    assert_eq!(st["cost"], dw["cost"]);
    let sub = json(&hwy1(&["solve-steiner", s(&star), "--terminals", "1,3", "--json"]));
    assert_eq!(sub["cost"], "10");
}

#[test]
fn min_degree_handles_uncertified_graphs() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.graph", SQUARE);
    assert_eq!(hwy1(&["solve-tsp", s(&sq)]).status.code(), Some(1));
    let o = hwy1(&["solve-tsp", s(&sq), "--min-degree"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("cost 4\n"));
}

#[test]
fn fptas_writes_trace() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star.graph", STAR);
    let trace = dir.path().join("trace.json");
    let o = hwy1(&["fptas-tsp", s(&star), "--eps", "1/2", "--trace", s(&trace), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["cost"], "34");
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(rep["eps"], "1/2");
    let o = hwy1(&["fptas-steiner", s(&star), "--eps", "1/3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("cost 10\n"));
}

#[test]
fn threads_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star.graph", STAR);
    let a = hwy1(&["fptas-steiner", s(&star), "--json", "--threads", "1"]);
    let b = hwy1(&["fptas-steiner", s(&star), "--json", "--threads", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reductions_round_trip() {
    let dir = TempDir::new().unwrap();
    let sat = write(&dir, "sat.cnf", "c sat\np cnf 2 2\n1 2 0\n-1 0\n");
    let unsat = write(&dir, "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let o = hwy1(&["decide-stp", s(&sat), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["satisfiable"], true);
    assert_eq!(v["assignment"], serde_json::json!([false, true]));
    assert_eq!(hwy1(&["decide-stp", s(&unsat)]).status.code(), Some(1));
    assert_eq!(hwy1(&["decide-tsp", s(&unsat)]).status.code(), Some(1));
    let o = hwy1(&["decide-tsp", s(&sat)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("SAT"));

    let out = dir.path().join("g.graph");
    let o = hwy1(&["gen-stp", s(&sat), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert!(side.is_object());
    assert_eq!(hwy1(&["verify-hd1", s(&out)]).status.code(), Some(0));
}

#[test]
fn gen_tsp_rejects_frequent_variables() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.cnf", "p cnf 1 4\n1 0\n1 0\n1 0\n1 0\n");
    assert_eq!(hwy1(&["gen-tsp", s(&f)]).status.code(), Some(2));
}

#[test]
fn corpus_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let o = hwy1(&["gen-corpus", "--count", "4", "--max-vertices", "12", "--dir", s(d.path()), "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ma = std::fs::read_to_string(a.path().join("manifest.json")).unwrap();
    let mb = std::fs::read_to_string(b.path().join("manifest.json")).unwrap();
    assert_eq!(ma, mb);
    let m: Value = serde_json::from_str(&ma).unwrap();
    assert_eq!(m["instances"].as_array().unwrap().len(), 4);
}

#[test]
fn structure_commands() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star.graph", STAR);
    let o = hwy1(&["spc", s(&star), "--scale", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["hub_set"], serde_json::json!([0]));
    let o = hwy1(&["net", s(&star), "--radius", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "points 0 2 3\n");
    assert_eq!(hwy1(&["hierarchy", s(&star), "--json"]).status.code(), Some(0));
    let o = hwy1(&["treedecomp", s(&star), "--json"]);
    assert_eq!(json(&o)["valid"], true);
    let o = hwy1(&["oracle-hd", s(&star)]);
    assert_eq!(stdout(&o), "highway dimension 1\n");
}

#[test]
fn usage_and_parse_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.graph", "p graph 2 1\ne 0 5 1\n");
    assert_eq!(hwy1(&["solve-tsp", s(&bad)]).status.code(), Some(2));
    assert_eq!(hwy1(&["solve-tsp", "/nonexistent"]).status.code(), Some(2));
    assert_eq!(hwy1(&["no-such-command"]).status.code(), Some(2));
    let star = write(&dir, "star.graph", STAR);
    assert_eq!(hwy1(&["fptas-tsp", s(&star), "--eps", "0"]).status.code(), Some(2));
}

#[test]
fn single_literal_gadget_costs_133() {
    let dir = TempDir::new().unwrap();
    let phi = write(&dir, "phi.cnf", "p cnf 1 1\n1 0\n");
    let g = dir.path().join("g.graph");
    assert_eq!(hwy1(&["gen-stp", s(&phi), "--out", s(&g)]).status.code(), Some(0));
    let o = hwy1(&["oracle-steiner", s(&g), "--json"]);
    assert_eq!(json(&o)["cost"], "133");
}
