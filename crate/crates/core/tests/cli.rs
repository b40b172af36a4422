use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stubline::model::read_edge_csv;

fn stubline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stubline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn generate_constant_degree_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stubline(&["generate", "--dist", "const:2", "--model", "ct", "--n", "100", "--seed", "7", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let edges = read_edge_csv(std::fs::File::open(dir.path().join("edges.csv")).unwrap()).unwrap();
    assert!(edges.iter().all(|e| (0..100).contains(&e.u) && (0..100).contains(&e.v)));
    assert!(edges.windows(2).all(|w| (w[0].u, w[0].v) <= (w[1].u, w[1].v)));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["mean_t"]["mean"], 4.0);
    assert_eq!(report["mean_t"]["predicted"], 4.0);
    assert_eq!(report["replicates"], 1);
}

#[test]
fn infinite_second_moment_is_rejected_for_auto_truncation() {
    let o = stubline(&["generate", "--dist", "plaw:2.5", "--model", "cluster", "--d", "auto"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no valid truncation: F lacks finite second moment"), "{}", stderr(&o));
    // an explicit level is allowed
    let dir = tempfile::tempdir().unwrap();
    let o = stubline(&[
        "generate", "--dist", "plaw:2.5", "--model", "cluster", "--d", "6", "--n", "5000",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = stubline(&[
            "generate", "--dist", "geom:0.5", "--model", "cluster", "--d", "8", "--seed", "1", "--n", "50000",
            "--out", dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for file in ["edges.csv", "report.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn auto_truncation_is_announced() {
    let o = stubline(&["estimate", "--dist", "geom:0.5", "--model", "cluster", "--n", "20000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("d = 8 (mu_d = 0.0078125)"), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["d"], 8);
    assert_eq!(report["model"], "cluster");
    assert!(report["clusters"]["histogram"].is_array());
}

#[test]
fn estimate_bounded_support_mean() {
    let o = stubline(&[
        "estimate", "--dist", "cat:0.5,0.5", "--n", "200000", "--replicates", "4", "--seed", "3", "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mean = report["mean_t"]["mean"].as_f64().unwrap();
    assert!((mean - 4.0).abs() < 0.08, "mean_T {mean}");
    let level2 = &report["per_level"][1];
    assert_eq!(level2["j"], 2);
    assert_eq!(level2["predicted"], 6.0);
}

#[test]
fn estimate_probe_levels_gives_square_curve() {
    let o = stubline(&["estimate", "--dist", "geom:0.5", "--n", "300000", "--probe-levels", "6", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sums = report["truncated_sums"].as_array().unwrap();
    assert_eq!(sums.len(), 6);
    for rec in sums {
        let l = rec["l"].as_f64().unwrap();
        assert_eq!(rec["predicted"].as_f64().unwrap(), l * l);
        let mean = rec["mean"].as_f64().unwrap();
        assert!((mean - l * l).abs() / (l * l) < 0.08, "L={l} mean {mean}");
    }
}

#[test]
fn estimate_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.csv");
    let o = stubline(&[
        "estimate", "--dist", "const:3", "--n", "1000", "--format", "csv", "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("axis,value,model,dist,n,"));
    assert!(lines.next().unwrap().contains(",9.0,"));
}

#[test]
fn verify_default_corpus_passes() {
    let o = stubline(&["verify"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    for name in ["simplicity", "degree_conservation", "lemma", "lower_bound", "class_discipline", "gap_level2", "claimed_set_oracle"] {
        assert!(out.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{name} missing:\n{out}");
    }
    assert!(!out.contains("FAIL"));
}

#[test]
fn verify_detects_injected_duplicate_edges() {
    let o = stubline(&["verify", "--inject", "dup-edge"]);
    assert!(!o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.contains("simplicity")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
    let count: u64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(count >= 1);
}

#[test]
fn verify_claimed_oracle_only() {
    let o = stubline(&["verify", "--oracle-claimed", "--n", "200"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("PASS claimed_set_oracle"));
}

fn sweep_rows(args: &[&str]) -> Vec<csv::StringRecord> {
    let o = stubline(args);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = r.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "mean_t"));
    r.records().map(|x| x.unwrap()).collect()
}

fn column(rows: &[csv::StringRecord], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn sweep_d_shrinks_origin_cluster_size() {
    let rows = sweep_rows(&[
        "sweep", "--dist", "geom:0.5", "--model", "cluster", "--n", "100000", "--seed", "11",
        "--axis", "d", "--values", "4,6,8,10",
    ]);
    assert_eq!(rows.len(), 4);
    // columns: axis,value,model,dist,n,d,alpha,replicates,sample_size,mean_t,mean_t_se,
    //          mean_cluster_size,origin_cluster_size,claimed_fraction,boundary_uncertain,violations
    let origin = column(&rows, 12);
    assert!(origin.windows(2).all(|w| w[1] <= w[0]), "{origin:?}");
    assert!(rows.iter().all(|r| &r[15] == "0"));
}

#[test]
fn sweep_alpha_claims_more_at_half() {
    let rows = sweep_rows(&[
        "sweep", "--dist", "geom:0.5", "--model", "cluster", "--d", "6", "--n", "100000", "--axis", "alpha",
        "--values", "1,0.5",
    ]);
    let claimed = column(&rows, 13);
    assert!(claimed[1] > claimed[0], "{claimed:?}");
}

#[test]
fn sweep_n_and_dist_param() {
    let rows = sweep_rows(&[
        "sweep", "--dist", "geom:0.5", "--model", "cluster", "--d", "8", "--axis", "n", "--values", "10000,100000",
    ]);
    assert_eq!(column(&rows, 4), vec![10000.0, 100000.0]);
    let rows = sweep_rows(&["sweep", "--dist", "const:1", "--axis", "dist-param", "--values", "1,2,3"]);
    assert_eq!(column(&rows, 9), vec![1.0, 4.0, 9.0]);
}

#[test]
fn bad_inputs_are_reported() {
    let o = stubline(&["estimate", "--dist", "geom:abc"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("at column 6"), "{}", stderr(&o));
    let o = stubline(&["estimate", "--dist", "geom:0.5", "--model", "cluster", "--d", "3"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("even"), "{}", stderr(&o));
    let o = stubline(&["sweep", "--dist", "cat:0.5,0.5", "--axis", "dist-param", "--values", "0.3"]);
    assert!(!o.status.success());
}
