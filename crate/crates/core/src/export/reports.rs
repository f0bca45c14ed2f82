use std::collections::BTreeMap;

use super::ExportError;
use crate::dedup::{EditionCounts, ShareRow, ShareTable, TOTAL_LABEL};
use crate::environment::{write_shares, ImpactShare};
use crate::factor::{write_loadings, FactorAssignment, FactorSolution};
use crate::ingest::{csv_writer, finish, normalize_journal_name, JournalId};
use crate::layout::write_positions;
use crate::network::{write_edges, write_nodes, SimilarityGraph};

/// Every file `write_reports` produces, in output order.
pub const REPORT_FILES: [&str; 6] = [
    "table2.csv",
    "table3.csv",
    "shares.csv",
    "nodes.csv",
    "edges.csv",
    "positions.csv",
];

pub const TABLE2_HEADER: [&str; 9] = [
    "journal",
    "intl",
    "intl_pct",
    "german",
    "german_pct",
    "sum",
    "sum_pct",
    "corrected",
    "corrected_pct",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Write loadings as `0,940` instead of `0.940`.
    pub decimal_comma: bool,
}

/// Results of whichever stages have run.
#[derive(Debug, Clone, Default)]
pub struct PipelineOutputs {
    pub table2: Option<ShareTable>,
    pub factors: Option<(FactorSolution, Vec<FactorAssignment>)>,
    pub shares: Option<Vec<ImpactShare>>,
    pub graph: Option<SimilarityGraph>,
    pub positions: Option<Vec<[f64; 2]>>,
}

fn table2_row(r: &ShareRow) -> [String; 9] {
    [
        r.label.clone(),
        r.intl.to_string(),
        r.intl_pct.to_string(),
        r.german.to_string(),
        r.german_pct.to_string(),
        r.sum.to_string(),
        r.sum_pct.to_string(),
        r.corrected.to_string(),
        r.corrected_pct.to_string(),
    ]
}

/// Journal rows followed by the `TOTAL` row; just the header when there
/// are no journals.
pub fn write_table2(t: &ShareTable) -> String {
    let mut w = csv_writer(b',');
    w.write_record(TABLE2_HEADER).expect("in-memory write");
    if !t.rows.is_empty() {
        for r in t.rows.iter().chain(std::iter::once(&t.total)) {
            w.write_record(table2_row(r)).expect("in-memory write");
        }
    }
    finish(w)
}

/// Reads the journal rows of a `write_table2` file back into counts. The
/// percentage columns and the `TOTAL` row are checked for shape only.
pub fn parse_table2(text: &str) -> Result<Vec<EditionCounts>, ExportError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let pos_line = |p: Option<&csv::Position>| p.map(|p| p.line() as usize).unwrap_or(0);
    let headers = reader.headers().map_err(|e| ExportError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().ne(TABLE2_HEADER.iter().copied()) {
        return Err(ExportError::Parse {
            line: 1,
            message: format!("expected header `{}`", TABLE2_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut saw_total = false;
    for row in reader.records() {
        let row = row.map_err(|e| ExportError::Parse {
            line: pos_line(e.position()),
            message: e.to_string(),
        })?;
        let line = pos_line(row.position());
        if saw_total {
            return Err(ExportError::Parse {
                line,
                message: "rows after TOTAL".into(),
            });
        }
        let mut nums = [0u64; 8];
        for (k, n) in nums.iter_mut().enumerate() {
            *n = row[k + 1].parse().map_err(|_| ExportError::Parse {
                line,
                message: format!("`{}` is not a count", &row[k + 1]),
            })?;
        }
        let [intl, _, german, _, sum, _, corrected, _] = nums;
        if sum != intl + german || corrected > sum {
            return Err(ExportError::Parse {
                line,
                message: "inconsistent counts".into(),
            });
        }
        if &row[0] == TOTAL_LABEL {
            saw_total = true;
            continue;
        }
        let journal = normalize_journal_name(&row[0]).map_err(|e| ExportError::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(EditionCounts {
            journal,
            intl,
            german,
            sum_with_doubles: sum,
            corrected,
        });
    }
    if !saw_total && !out.is_empty() {
        return Err(ExportError::Parse {
            line: 0,
            message: "missing TOTAL row".into(),
        });
    }
    Ok(out)
}

/// Renders all report files; fails naming the first stage that is missing.
pub fn write_reports(
    out: &PipelineOutputs,
    opts: &ReportOptions,
) -> Result<BTreeMap<&'static str, String>, ExportError> {
    let table2 = out
        .table2
        .as_ref()
        .ok_or(ExportError::MissingStage("dedup"))?;
    let (sol, assignments) = out
        .factors
        .as_ref()
        .ok_or(ExportError::MissingStage("factor"))?;
    let shares = out
        .shares
        .as_ref()
        .ok_or(ExportError::MissingStage("matrix"))?;
    let graph = out
        .graph
        .as_ref()
        .ok_or(ExportError::MissingStage("graph"))?;
    let positions = out
        .positions
        .as_ref()
        .ok_or(ExportError::MissingStage("layout"))?;
    if positions.len() != graph.nodes.len() {
        return Err(ExportError::PositionsMismatch {
            nodes: graph.nodes.len(),
            positions: positions.len(),
        });
    }
    let journals: Vec<JournalId> = graph.nodes.iter().map(|n| n.journal.clone()).collect();
    let mut files = BTreeMap::new();
    files.insert("table2.csv", write_table2(table2));
    files.insert(
        "table3.csv",
        write_loadings(sol, assignments, opts.decimal_comma),
    );
    files.insert("shares.csv", write_shares(shares));
    files.insert("nodes.csv", write_nodes(graph));
    files.insert("edges.csv", write_edges(graph));
    files.insert("positions.csv", write_positions(&journals, positions));
    Ok(files)
}
