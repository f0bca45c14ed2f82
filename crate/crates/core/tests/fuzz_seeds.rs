//! Replays the checked-in fuzz corpora through the parsers on stable, with
//! the same assertions the fuzz targets make.

use std::path::PathBuf;

use citenv::{config, environment, export, ingest, layout, network};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let text = String::from_utf8(std::fs::read(&path).unwrap()).unwrap();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                text,
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn fixture_seeds_parse() {
    for (name, text) in seeds("link_table") {
        ingest::parse_link_table(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("records") {
        ingest::parse_reference_records(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("metadata") {
        ingest::parse_metadata(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("environment") {
        environment::parse_environment(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("positions") {
        layout::parse_positions(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("table2") {
        export::parse_table2(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("config") {
        let c = config::PipelineConfig::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        c.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("graph") {
        let (nodes, edges) = text.split_once('\0').unwrap();
        network::parse_graph(nodes, edges).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, text) in seeds("pajek") {
        let net = export::parse_pajek(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        export::graph_from_pajek(&net).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn matrix_seeds_round_trip() {
    for (name, text) in seeds("matrix") {
        let m = environment::parse_matrix(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(
            environment::parse_matrix(&environment::write_matrix(&m)).unwrap(),
            m
        );
    }
}

#[test]
fn journal_name_seeds_are_idempotent() {
    for (_, text) in seeds("journal_name") {
        if let Ok(id) = ingest::normalize_journal_name(&text) {
            assert_eq!(ingest::normalize_journal_name(id.as_str()), Ok(id.clone()));
        }
    }
}
