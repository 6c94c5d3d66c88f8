//! End-to-end checks of the binary: schemas parse, seeds pin byte-identical
//! output, and error paths map to the documented exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_factorlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

/// Parse a CSV document: header columns plus all data cells as f64 where
/// possible. Panics on ragged rows.
fn parse_csv(text: &str, expected_header: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    let header = lines.next().expect("nonempty csv");
    assert_eq!(header, expected_header);
    let cols = expected_header.split(',').count();
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect();
    for row in &rows {
        assert_eq!(row.len(), cols, "ragged row: {row:?}");
    }
    rows
}

#[test]
fn graph_emits_valid_component_json() {
    let out = run(&["graph", "--n", "15", "--alphas", "2,7"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["N"], 15);
    assert_eq!(doc["alphas"], serde_json::json!([2, 7]));
    let comps = doc["components"].as_array().unwrap();
    assert_eq!(comps.len(), 3);
    for c in comps {
        assert!(c["class"].is_string());
        assert!(c["vertices"].is_array());
    }
}

#[test]
fn cycles_csv_schema_and_agreement() {
    let out = run(&["cycles", "--n", "55", "--alphas", "3"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "source,red,blue,black,total");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "formula");
    assert_eq!(rows[1][0], "traversal");
    assert_eq!(rows[0][1..], rows[1][1..]);
    assert_eq!(rows[0][4], "5");

    // multi-alpha: formula row suppressed
    let out = run(&["cycles", "--n", "15", "--alphas", "2,7"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "source,red,blue,black,total");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "traversal");
    assert_eq!(rows[0][4], "3");
}

#[test]
fn mark_prob_csv_schema() {
    let out = run(&[
        "mark-prob", "--n", "15", "--alphas", "2", "--k", "4", "--trials", "500", "--seed", "5",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "alpha,k,trials,successes,p_hat,std_err");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "2");
    assert_eq!(rows[0][2], "500");
    let p: f64 = rows[0][4].parse().unwrap();
    assert!((0.0..=1.0).contains(&p));

    // exact rows carry the subset count in the trials column and zero error
    let out = run(&["mark-prob", "--n", "15", "--alphas", "2", "--k", "2", "--exact"]);
    let rows = parse_csv(&stdout(&out), "alpha,k,trials,successes,p_hat,std_err");
    assert_eq!(rows[0][2], "91");
    assert_eq!(rows[0][3], "16");
    assert_eq!(rows[0][5], "0");

    // thirteen marks cannot leave a red or blue cycle untouched
    let out = run(&["mark-prob", "--n", "15", "--alphas", "2", "--k", "13", "--exact"]);
    let rows = parse_csv(&stdout(&out), "alpha,k,trials,successes,p_hat,std_err");
    assert_eq!(rows[0][4], "0");
}

#[test]
fn mark_prob_union_rows() {
    let out = run(&[
        "mark-prob", "--n", "15", "--alphas", "2,7", "--union", "--k", "1", "--exact",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "alpha,k,trials,successes,p_hat,std_err");
    assert_eq!(rows[0][0], "2+7");
    assert_eq!(rows[0][3], "8"); // 8 of 14 single marks succeed on the union graph
}

#[test]
fn walk_trace_covers_all_vertices_with_zeros_at_marks() {
    let out = run(&[
        "walk", "--n", "15", "--alphas", "2,7", "--marks", "2,11", "--cadence", "1000",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "t,vertex,probability");
    // snapshots at t=0 and the final step, 14 vertices each
    assert_eq!(rows.len() % 14, 0);
    let t0: Vec<_> = rows.iter().filter(|r| r[0] == "0").collect();
    assert_eq!(t0.len(), 14);
    for r in &t0 {
        let v: u64 = r[1].parse().unwrap();
        let p: f64 = r[2].parse().unwrap();
        if v == 2 || v == 11 {
            assert_eq!(p, 0.0, "marked vertex {v} must be carried as zero");
        } else {
            assert!((p - 1.0 / 12.0).abs() < 1e-12);
        }
    }
    let summary: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(summary["converged"], true);
    assert!(summary["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn aqc_trace_schema_and_summary() {
    let out = run(&[
        "aqc", "--n", "15", "--alphas", "2,7", "--marks", "2,11", "--time", "5", "--cadence",
        "500",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "s,vertex,abs_amplitude,probability");
    assert_eq!(rows.len() % 14, 0);
    for r in &rows {
        let v: u64 = r[1].parse().unwrap();
        let a: f64 = r[2].parse().unwrap();
        let p: f64 = r[3].parse().unwrap();
        assert!((a * a - p).abs() < 1e-12);
        if v == 2 || v == 11 {
            assert_eq!(a, 0.0);
        }
    }
    let summary: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert!(summary["final_cosine_vs_classical"].as_f64().unwrap() > 0.5);
    assert!(summary["norm_drift_max"].as_f64().unwrap() <= 1e-6);
    assert_eq!(summary["T"], 5.0);

    // a barely-evolved state stays near uniform: cosine against the
    // six-vertex limit is 1/sqrt(2)
    let out = run(&[
        "aqc", "--n", "15", "--alphas", "2,7", "--marks", "2,11", "--time", "0.01", "--cadence",
        "1000",
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    let cos = summary["final_cosine_vs_classical"].as_f64().unwrap();
    assert!((cos - 0.5f64.sqrt()).abs() < 0.01, "short-time cosine {cos}");
}

#[test]
fn compare_csv_schema() {
    let out = run(&[
        "compare", "--n", "15", "--alphas", "2,7", "--marks", "2,11", "--times", "1,10",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "T,steps,cosine");
    assert_eq!(rows.len(), 2);
    let c1: f64 = rows[0][2].parse().unwrap();
    let c10: f64 = rows[1][2].parse().unwrap();
    assert!(c10 > c1);
    assert!(c10 >= 0.999);
}

#[test]
fn spectrum_reports_gap_and_degeneracy() {
    let out = run(&["spectrum", "--n", "35", "--alphas", "2", "--marks", "1,5,17"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out), "index,eigenvalue");
    assert_eq!(rows.len(), 31);
    let summary: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert!(summary["gap"].as_f64().unwrap() < 1e-12);
    assert_eq!(summary["degenerate_minimal_dim"], 2);
    assert_eq!(summary["dimension"], 31);

    // no marks: full Laplacian, kernel dimension = component count
    let out = run(&["spectrum", "--n", "15", "--alphas", "2"]);
    let summary: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(summary["degenerate_minimal_dim"], 4);
}

#[test]
fn factor_command_reports_the_pair() {
    let out = run(&["factor", "--n", "15", "--alphas", "2,7", "--seed", "7"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["p"], 3);
    assert_eq!(doc["q"], 5);
    assert!(doc["attempts"].as_u64().unwrap() <= 20);
}

#[test]
fn json_format_emits_single_document() {
    let out = run(&[
        "walk", "--n", "15", "--alphas", "2", "--marks", "1,14", "--format", "json", "--cadence",
        "1000",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["summary"]["converged"].as_bool().unwrap());
    assert!(doc["snapshots"].as_array().unwrap().len() >= 2);

    let out = run(&[
        "mark-prob", "--n", "15", "--alphas", "2", "--k", "3", "--exact", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"][0]["k"], 3);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "mark-prob", "--n", "35", "--alphas", "2,3", "--k-min", "1", "--k-max", "20", "--trials",
        "400", "--seed", "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let args = ["factor", "--n", "35", "--alphas", "2", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn exit_codes_follow_the_contract() {
    // validation errors -> 2
    let out = run(&["graph", "--n", "15", "--alphas", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "invalid-alpha");

    let out = run(&["graph", "--n", "13", "--alphas", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["factor", "--n", "13"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["aqc", "--n", "15", "--alphas", "2", "--marks", "1,14", "--time", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "invalid-t");

    let out = run(&["walk", "--n", "15", "--alphas", "2", "--marks", "1,14", "--dt", "2.0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["walk", "--n", "15", "--alphas", "2", "--marks", "1,14", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2), "marks and k are mutually exclusive");

    let out = run(&["mark-prob", "--n", "703", "--alphas", "2", "--k", "300", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "use-monte-carlo");

    // numerical failure -> 3
    let out = run(&[
        "aqc", "--n", "15", "--alphas", "2,7", "--marks", "2,11", "--time", "50", "--steps", "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "step-too-coarse");

    // exhausted retry budget -> 4
    let out = run(&[
        "factor", "--n", "15", "--alphas", "2", "--k", "13", "--attempts", "2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "factor-not-found");
}

#[test]
fn output_flag_and_env_dir() {
    let dir = std::env::temp_dir().join(format!("factorlab-cli-test-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);

    let out = bin()
        .args(["cycles", "--n", "15", "--alphas", "2", "--output", "sub/cycles.csv"])
        .env("FACTORLAB_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(dir.join("sub/cycles.csv")).unwrap();
    assert!(written.starts_with("source,red,blue,black,total"));
    std::fs::remove_dir_all(&dir).unwrap();
}
