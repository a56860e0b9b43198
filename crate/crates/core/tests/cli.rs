//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use paretonet::graphgen::GraphSample;
use paretonet::harness::{StatTable, REPORT_SCHEMA};

fn paretonet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paretonet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_a_valid_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.edges");
    let o = paretonet(&[
        "generate",
        "--n",
        "300",
        "--alpha",
        "0.5",
        "--k-critical",
        "1",
        "--seed",
        "5",
        "--out",
        path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g =
        GraphSample::read_edge_list(std::io::BufReader::new(std::fs::File::open(&out).unwrap()))
            .unwrap();
    assert_eq!(g.n(), 300);
    g.validate().unwrap();
    assert!(dir.path().join("g.edges.run.json").exists());

    // Same flags, same bytes.
    let again = dir.path().join("h.edges");
    paretonet(&[
        "generate",
        "--n",
        "300",
        "--alpha",
        "0.5",
        "--k-critical",
        "1",
        "--seed",
        "5",
        "--out",
        path_arg(&again),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# degree run\nn = 200\nalpha = 0.5\nk-critical = 1\nreplicas = 3\nseed = 11\n",
    )
    .unwrap();
    let out = dir.path().join("deg.csv");
    let o = paretonet(&[
        "degree",
        "--config",
        path_arg(&cfg),
        "--replicas",
        "5",
        "--out",
        path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = StatTable::load(&out).unwrap();
    assert_eq!(t.rows.len(), 5);
    assert_eq!(t.column_f64("n").unwrap(), vec![200.0; 5]);
}

#[test]
fn table_subcommands_write_stdout() {
    for (cmd, column) in [
        ("motifs", "triangles"),
        ("coarse-grain", "coarse_edges"),
        ("joint", "degree_a"),
    ] {
        let o = paretonet(&[
            cmd,
            "--n",
            "100",
            "--alpha",
            "0.5",
            "--replicas",
            "4",
            "--seed",
            "1",
        ]);
        assert!(
            o.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.contains(column), "{cmd}");
    }
}

#[test]
fn dust_scan_writes_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dust.csv");
    let o = paretonet(&[
        "dust-scan",
        "--alpha",
        "0.5",
        "--k-grid",
        "0.05,3",
        "--n-grid",
        "100,200",
        "--replicas",
        "10",
        "--out",
        path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = StatTable::load(&out).unwrap();
    assert_eq!(t.rows.len(), 4);
    assert!(t.metadata.contains_key("k1") && t.metadata.contains_key("k2"));
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        vec!["degree", "--n", "100", "--alpha", "1.5"],
        vec!["degree", "--alpha", "0.5"],
        vec![
            "degree",
            "--n",
            "10",
            "--alpha",
            "0.5",
            "--joint-nodes",
            "3,3",
        ],
        vec![
            "degree",
            "--n",
            "10",
            "--alpha",
            "0.5",
            "--eps",
            "0.1",
            "--k-critical",
            "1",
        ],
        vec!["frobnicate"],
        vec!["verify", "--only", "13"],
    ] {
        let o = paretonet(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn verify_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = paretonet(&[
        "verify",
        "--level",
        "fast",
        "--only",
        "4,6",
        "--out",
        path_arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    assert!(validator.is_valid(&report));
    assert_eq!(report["level"], "fast");
    assert_eq!(report["criteria"].as_array().unwrap().len(), 2);

    let mut broken = report.clone();
    broken["criteria"][0]["passed"] = serde_json::json!("yes");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn failed_verification_exits_with_two() {
    // The asymptotic mean-degree check misses its window at alpha = 0.7 for n = 1e5.
    let o = paretonet(&["verify", "--only", "2"]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
}
