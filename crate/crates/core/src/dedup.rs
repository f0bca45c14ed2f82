//! Double-citation detection for dual-edition journals and the
//! edition-resolved citation counts built on top of it.
//!
//! A double-citation is a pair of consecutive references in one document,
//! one to each edition, sharing author and publication year. The
//! international-edition record of each pair survives correction.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::ingest::{normalize_author, normalize_journal_name, JournalId, RefRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DedupError {
    #[error("records out of order at document {doc_id}, position {seq}")]
    UnsortedInput { doc_id: String, seq: u32 },
    #[error("double-citation count {doubles} must be below the total {total}")]
    Domain { doubles: u64, total: u64 },
}

/// The two canonical titles of a dual-edition journal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditionNames {
    pub intl: JournalId,
    pub german: JournalId,
}

impl EditionNames {
    pub fn new(intl: JournalId, german: JournalId) -> Self {
        Self { intl, german }
    }

    pub fn edition_of(&self, cited_raw: &str) -> Option<Edition> {
        let id = normalize_journal_name(cited_raw).ok()?;
        if id == self.intl {
            Some(Edition::International)
        } else if id == self.german {
            Some(Edition::German)
        } else {
            None
        }
    }
}

impl Default for EditionNames {
    fn default() -> Self {
        Self {
            intl: JournalId::new("ANGEW CHEM INT EDIT").unwrap(),
            german: JournalId::new("ANGEW CHEM").unwrap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edition {
    International,
    German,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublePair {
    pub doc_id: String,
    pub seq_intl: u32,
    pub seq_german: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditionCounts {
    pub journal: JournalId,
    pub intl: u64,
    pub german: u64,
    pub sum_with_doubles: u64,
    pub corrected: u64,
}

impl EditionCounts {
    pub fn doubles(&self) -> u64 {
        self.sum_with_doubles - self.corrected
    }
}

/// Checks that each document's records are contiguous with strictly
/// increasing positions.
fn check_grouping(records: &[RefRecord]) -> Result<(), DedupError> {
    let mut finished: HashSet<&str> = HashSet::new();
    let mut prev: Option<&RefRecord> = None;
    for r in records {
        if let Some(p) = prev {
            if p.doc_id == r.doc_id {
                if r.seq <= p.seq {
                    return Err(DedupError::UnsortedInput {
                        doc_id: r.doc_id.clone(),
                        seq: r.seq,
                    });
                }
            } else {
                finished.insert(p.doc_id.as_str());
                if finished.contains(r.doc_id.as_str()) {
                    return Err(DedupError::UnsortedInput {
                        doc_id: r.doc_id.clone(),
                        seq: r.seq,
                    });
                }
            }
        }
        prev = Some(r);
    }
    Ok(())
}

/// True when `a` and `b` are adjacent references to opposite editions with
/// matching author and year.
pub fn is_double(a: &RefRecord, b: &RefRecord, names: &EditionNames) -> bool {
    if !(a.complete && b.complete) || a.doc_id != b.doc_id || a.seq.abs_diff(b.seq) != 1 {
        return false;
    }
    let (Some(ea), Some(eb)) = (
        names.edition_of(&a.cited_raw),
        names.edition_of(&b.cited_raw),
    ) else {
        return false;
    };
    if ea == eb || a.cited_year != b.cited_year {
        return false;
    }
    match (&a.cited_author, &b.cited_author) {
        (Some(x), Some(y)) => normalize_author(x) == normalize_author(y),
        _ => false,
    }
}

/// Left-to-right greedy scan; each record joins at most one pair.
pub fn detect_double_citations(
    records: &[RefRecord],
    names: &EditionNames,
) -> Result<Vec<DoublePair>, DedupError> {
    check_grouping(records)?;
    let mut pairs = Vec::new();
    let mut i = 0;
    while i + 1 < records.len() {
        let (a, b) = (&records[i], &records[i + 1]);
        if is_double(a, b, names) {
            let (seq_intl, seq_german) = match names.edition_of(&a.cited_raw) {
                Some(Edition::International) => (a.seq, b.seq),
                _ => (b.seq, a.seq),
            };
            pairs.push(DoublePair {
                doc_id: a.doc_id.clone(),
                seq_intl,
                seq_german,
            });
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(pairs)
}

/// Per citing journal (first-appearance order): citations to each edition,
/// their sum, and the sum minus one citation per double pair.
/// Incomplete records are not counted.
pub fn corrected_counts(
    records: &[RefRecord],
    pairs: &[DoublePair],
    names: &EditionNames,
) -> Vec<EditionCounts> {
    let mut order: Vec<JournalId> = Vec::new();
    let mut counts: HashMap<JournalId, EditionCounts> = HashMap::new();
    let mut doc_journal: HashMap<&str, &JournalId> = HashMap::new();
    for r in records.iter().filter(|r| r.complete) {
        doc_journal
            .entry(r.doc_id.as_str())
            .or_insert(&r.citing_journal);
        let entry = counts.entry(r.citing_journal.clone()).or_insert_with(|| {
            order.push(r.citing_journal.clone());
            EditionCounts {
                journal: r.citing_journal.clone(),
                intl: 0,
                german: 0,
                sum_with_doubles: 0,
                corrected: 0,
            }
        });
        match names.edition_of(&r.cited_raw) {
            Some(Edition::International) => entry.intl += 1,
            Some(Edition::German) => entry.german += 1,
            None => {}
        }
    }
    let mut doubles: HashMap<&JournalId, u64> = HashMap::new();
    for p in pairs {
        if let Some(j) = doc_journal.get(p.doc_id.as_str()) {
            *doubles.entry(j).or_default() += 1;
        }
    }
    order
        .iter()
        .map(|j| {
            let mut c = counts[j].clone();
            c.sum_with_doubles = c.intl + c.german;
            c.corrected = c.sum_with_doubles - doubles.get(j).copied().unwrap_or(0);
            c
        })
        .collect()
}

/// How far double-citations inflate the corrected count, in percent:
/// `doubles / (total_with_doubles - doubles) * 100`.
pub fn overrepresentation_pct(doubles: u64, total_with_doubles: u64) -> Result<f64, DedupError> {
    if doubles >= total_with_doubles {
        return Err(DedupError::Domain {
            doubles,
            total: total_with_doubles,
        });
    }
    Ok(doubles as f64 / (total_with_doubles - doubles) as f64 * 100.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareRow {
    pub label: String,
    pub intl: u64,
    pub intl_pct: u64,
    pub german: u64,
    pub german_pct: u64,
    pub sum: u64,
    pub sum_pct: u64,
    pub corrected: u64,
    pub corrected_pct: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareTable {
    pub rows: Vec<ShareRow>,
    pub total: ShareRow,
}

pub const TOTAL_LABEL: &str = "TOTAL";

fn rounded_pct(part: u64, whole: u64) -> u64 {
    if whole == 0 {
        0
    } else {
        (part as f64 / whole as f64 * 100.0).round() as u64
    }
}

/// Integer percentage of each journal within each column's own total.
pub fn share_table(counts: &[EditionCounts]) -> ShareTable {
    let intl: u64 = counts.iter().map(|c| c.intl).sum();
    let german: u64 = counts.iter().map(|c| c.german).sum();
    let sum: u64 = counts.iter().map(|c| c.sum_with_doubles).sum();
    let corrected: u64 = counts.iter().map(|c| c.corrected).sum();
    let rows = counts
        .iter()
        .map(|c| ShareRow {
            label: c.journal.to_string(),
            intl: c.intl,
            intl_pct: rounded_pct(c.intl, intl),
            german: c.german,
            german_pct: rounded_pct(c.german, german),
            sum: c.sum_with_doubles,
            sum_pct: rounded_pct(c.sum_with_doubles, sum),
            corrected: c.corrected,
            corrected_pct: rounded_pct(c.corrected, corrected),
        })
        .collect();
    let full = |v: u64| if v == 0 { 0 } else { 100 };
    ShareTable {
        rows,
        total: ShareRow {
            label: TOTAL_LABEL.to_string(),
            intl,
            intl_pct: full(intl),
            german,
            german_pct: full(german),
            sum,
            sum_pct: full(sum),
            corrected,
            corrected_pct: full(corrected),
        },
    }
}
