use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chargebid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chargebid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_reports_fig1a_thresholds() {
    let report = json(&chargebid(&["solve", "--arena", "fig1a", "--objective", "reach:d", "--player", "1"]));
    let t = &report["result"]["thresholds"];
    for (v, expected) in [("a", "0"), ("b", "0.25"), ("c", "0.5"), ("d", "0"), ("e", "1")] {
        assert_eq!(t[v], expected, "{v}");
    }
    assert!(report["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(report.get("timing_ms").is_none());
}

#[test]
fn player_two_vector_is_the_complement() {
    let report = json(&chargebid(&["solve", "--arena", "fig1a", "--player", "2"]));
    assert_eq!(report["result"]["thresholds"]["b"], "0.75");
}

#[test]
fn decide_accepts_at_most_one_half() {
    let out = chargebid(&["solve", "--arena", "fig1a", "--decide", "--vertex", "a"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "ACCEPT\n");
    let out = chargebid(&["solve", "--arena", "fig1a", "--decide", "--vertex", "e"]);
    assert_eq!(stdout(&out), "REJECT\n");
    let out = chargebid(&["solve", "--arena", "fig1a", "--decide", "--vertex", "c"]);
    assert_eq!(stdout(&out), "ACCEPT\n");
}

#[test]
fn table_matches_golden_csv() {
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/fig5_table.csv")).unwrap();
    let out = chargebid(&["table", "--arena", "fig1a", "--horizon", "6"]);
    assert_eq!(stdout(&out), golden);
    let out = chargebid(&["table", "--arena", "fig1a", "--horizon", "5"]);
    let five: Vec<&str> = golden.lines().take(7).collect();
    assert_eq!(stdout(&out), five.join("\n") + "\n");
}

#[test]
fn plotdata_lists_step_sizes() {
    let out = chargebid(&["table", "--arena", "fig3", "--format", "plotdata", "--mode", "approx"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# iteration sup_step"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (k, s) = l.split_once(' ').unwrap();
            (k.parse().unwrap(), s.parse().unwrap())
        })
        .collect();
    assert!(rows.len() >= 3);
    assert!(rows[0].1 > 0.5);
    assert!(rows.last().unwrap().1 < 1e-9);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["solve", "--arena", "fig3", "--mode", "approx"][..],
        &["simulate", "--arena", "fig1a", "--b1", "0.3", "--start", "b", "--trials", "5", "--seed", "7"][..],
        &["export", "--arena", "fig4"][..],
    ] {
        let a = chargebid(args);
        let b = chargebid(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn simulate_emits_one_record_per_trial() {
    let out = chargebid(&[
        "simulate", "--arena", "fig1a", "--b1", "0.2", "--start", "b", "--player", "2", "--adversary", "all-in",
        "--trials", "3", "--steps", "20",
    ]);
    let text = stdout(&out);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for l in lines {
        // Reachability is never lost on a finite prefix.
        assert_eq!(l["play"]["verdict"], "truncated");
        assert_eq!(l["play"]["final_vertex"], "e");
    }
}

#[test]
fn repair_finds_the_figure_six_allocation() {
    let report = json(&chargebid(&[
        "repair", "--arena", "fig6", "--vertex", "a", "--budget", "2", "--grid", "1", "--support", "2",
    ]));
    let r = &report["result"];
    assert_eq!(r["outcome"], "repaired");
    assert_eq!(r["delta"]["b"], "1");
    assert_eq!(r["delta"]["d"], "1");
    assert_eq!(r["achieved"], "0");
}

#[test]
fn reduce_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tb.json");
    std::fs::write(
        &input,
        r#"{"vertices":[
            {"id":"x","succ":["y","z"],"owner":1},
            {"id":"y","succ":["x","y"],"owner":2},
            {"id":"z","succ":["z"],"owner":2}],
           "objective":{"kind":"reach","set":["z"]}}"#,
    )
    .unwrap();
    let arena = dir.path().join("arena.json");
    let out = chargebid(&["reduce", "--input", input.to_str().unwrap(), "--out", arena.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&chargebid(&["solve", "--arena", arena.to_str().unwrap()]));
    let t = &report["result"]["thresholds"];
    assert_eq!(t["x"], "0");
    assert_eq!(t["y"], "1");
    assert_eq!(t["z"], "0");
}

#[test]
fn export_writes_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("fig1a.lp");
    let out = chargebid(&["export", "--arena", "fig1a", "--out", lp.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\ kind milp"));
    assert!(text.trim_end().ends_with("End"));

    let bilevel = dir.path().join("buchi.lp");
    let out = chargebid(&[
        "export", "--arena", "fig1a", "--objective", "buchi:d", "--out", bilevel.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let aux = std::fs::read_to_string(bilevel.with_extension("aux")).unwrap();
    assert!(aux.contains("@OBJSENSE"));

    let out = chargebid(&["export", "--arena", "fig3", "--format", "milp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonRichmanMILPUnsupported"));
}

#[test]
fn check_passes_on_computed_vectors() {
    for fixture in ["fig1a", "fig1c", "fig4"] {
        let out = chargebid(&["check", "--arena", fixture, "--trials", "10"]);
        assert_eq!(out.status.code(), Some(0), "{fixture}: {}", stdout(&out));
        assert_eq!(json(&out)["result"]["passed"], true);
    }
}

#[test]
fn check_flags_a_corrupted_vector() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, r#"{"a": "1", "b": "0.175", "t": "0"}"#).unwrap();
    let out = chargebid(&["check", "--arena", "fig1c", "--thresholds", file.to_str().unwrap(), "--trials", "20"]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["passed"], false);
}

#[test]
fn exit_codes() {
    let out = chargebid(&["solve", "--arena", "no-such-file.json"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"vertices": [{"id": "a", "succ": ["zz"]}], "objective": {"kind": "reach", "set": ["a"]}}"#).unwrap();
    let out = chargebid(&["solve", "--arena", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = chargebid(&["solve", "--arena", "fig3", "--mode", "approx", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let report = json(&chargebid(&["solve", "--arena", "fig1a", "--timing"]));
    assert!(report["timing_ms"].as_f64().is_some());
}
