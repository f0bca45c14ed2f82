use std::path::Path;
use std::process::{Command, Output};

use citenv::fixtures;

fn citenv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citenv"))
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

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn env_prints_threshold_and_selection() {
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_angew_files(dir.path()).unwrap();
    let out = citenv(&[
        "env",
        "--total",
        "76904",
        "--self",
        "7512",
        "--links",
        p(&dir.path().join("links.csv")),
        "--seed",
        "ANGEW CHEM INT EDIT",
        "--out",
        p(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "threshold=693 selected=22\n");
    let env = std::fs::read_to_string(dir.path().join("environment.csv")).unwrap();
    assert_eq!(env.lines().count(), 23);
    assert!(env.starts_with("journal,count\nANGEW CHEM INT EDIT,7512\n"));
}

#[test]
fn pipeline_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures::write_angew_files(dir.path()).unwrap();
    let out = citenv(&["pipeline", "--config", p(&config)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 8, "{lines:?}");
    assert!(lines[0].starts_with("records="));
    assert!(lines[0].contains("doubles=7343 corrected=34152 overrepresentation=21.50"));
    assert_eq!(lines[1], "threshold=693 selected=22");
    assert_eq!(lines[2], "journals=22 total=421630 counts=corrected");
    let outdir = dir.path().join("out");
    for name in [
        "table2.csv",
        "environment.csv",
        "matrix.csv",
        "shares.csv",
        "table3.csv",
        "nodes.csv",
        "edges.csv",
        "positions.csv",
        "graph.svg",
        "graph.net",
    ] {
        assert!(outdir.join(name).is_file(), "{name} missing");
    }
    let table2 = std::fs::read_to_string(outdir.join("table2.csv")).unwrap();
    assert!(table2.ends_with("TOTAL,32416,100,9079,100,41495,100,34152,100\n"));
    let nodes = std::fs::read_to_string(outdir.join("nodes.csv")).unwrap();
    assert!(nodes.contains("J AM CHEM SOC,"));
    assert!(nodes.contains("multidisciplinary chemistry"));
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures::write_angew_files(dir.path()).unwrap();
    let config = p(&config);
    for stage in ["dedup", "env", "matrix"] {
        assert!(citenv(&[stage, "--config", config]).status.success());
    }
    let default = citenv(&["graph", "--config", config]);
    let strict = citenv(&["graph", "--config", config, "--cosine-cutoff", "0.95"]);
    let edges = |o: &Output| -> usize {
        stdout(o)
            .split_whitespace()
            .find_map(|t| t.strip_prefix("edges="))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(edges(&strict) < edges(&default));

    let raw = citenv(&["matrix", "--config", config, "--raw-counts"]);
    assert!(stdout(&raw).contains("counts=raw"), "{}", stdout(&raw));
    assert!(!stdout(&raw).contains("total=421630"));
}

#[test]
fn exit_codes() {
    let o = citenv(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));

    let o = citenv(&[]);
    assert_eq!(o.status.code(), Some(1));

    let o = citenv(&[
        "env",
        "--links",
        "/nonexistent/links.csv",
        "--seed",
        "X",
        "--total",
        "1",
        "--self",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("links.csv");
    std::fs::write(&bad, "citing,cited,count\nA,B,-3\n").unwrap();
    let o = citenv(&[
        "env",
        "--links",
        p(&bad),
        "--seed",
        "B",
        "--total",
        "1",
        "--self",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("negative"), "{}", stderr(&o));

    let o = citenv(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("citenv "));
}

#[test]
fn stage_without_predecessor_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = citenv(&["layout", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("missing stage: graph"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn pipeline_without_records_skips_dedup() {
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_angew_files(dir.path()).unwrap();
    let out = citenv(&[
        "pipeline",
        "--links",
        p(&dir.path().join("links.csv")),
        "--seed",
        "Angew. Chem. Int. Edit.",
        "--total",
        "76904",
        "--self",
        "7512",
        "--out",
        p(&dir.path().join("raw")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("counts=raw"));
    assert!(dir.path().join("raw/graph.svg").is_file());
    assert!(!dir.path().join("raw/table2.csv").exists());
}
