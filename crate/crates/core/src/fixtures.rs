//! Reference figures for the Angewandte Chemie 2004 citation environment and
//! deterministic synthetic data sets built around them.
//!
//! Everything the reference tables do not pin down (the off-seed matrix
//! columns, sub-threshold citers, individual reference records) is
//! synthetic.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::CitationMatrix;
use crate::ingest::{
    write_link_table, write_metadata, write_reference_records, CitationLink, JournalId,
    JournalMeta, RefRecord,
};

pub const ANGEW_INTL: &str = "ANGEW CHEM INT EDIT";
pub const ANGEW_GERMAN: &str = "ANGEW CHEM";
pub const ANGEW_TOTAL_CITES: u64 = 76_904;
pub const ANGEW_SELF_CITES: u64 = 7_512;
pub const ANGEW_CITING_JOURNALS: usize = 869;
pub const ANGEW_THRESHOLD: u64 = 693;
pub const ANGEW_INCOMPLETE_RECORDS: usize = 111;
/// German-edition citations adjacent to an international one by a different author.
pub const ANGEW_GERMAN_ADJACENT: u64 = 702;

pub const JACS: &str = "J AM CHEM SOC";
pub const JACS_TOTAL_CITES: u64 = 231_212;
pub const JACS_SELF_CITES: u64 = 34_567;
pub const JACS_CITING_JOURNALS: usize = 1_566;
pub const JACS_THRESHOLD: u64 = 1_966;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditionRow {
    pub journal: &'static str,
    pub intl: u64,
    pub german: u64,
    pub sum: u64,
    pub corrected: u64,
    /// Integer percent as listed.
    pub corrected_pct: u64,
}

impl EditionRow {
    pub fn doubles(&self) -> u64 {
        self.sum - self.corrected
    }
}

const fn t2(
    journal: &'static str,
    intl: u64,
    german: u64,
    sum: u64,
    corrected: u64,
    corrected_pct: u64,
) -> EditionRow {
    EditionRow {
        journal,
        intl,
        german,
        sum,
        corrected,
        corrected_pct,
    }
}

/// Citations from each journal's 2004 papers to either Angewandte edition.
pub const EDITION_COUNTS: [EditionRow; 22] = [
    t2("J AM CHEM SOC", 4757, 264, 5021, 4846, 14),
    t2("ANGEW CHEM INT EDIT", 3485, 3451, 6936, 3991, 12),
    t2("CHEM-EUR J", 2157, 2126, 4283, 2460, 7),
    t2("J ORG CHEM", 2315, 203, 2518, 2378, 7),
    t2("ORGANOMETALLICS", 1866, 276, 2142, 1942, 6),
    t2("ORG LETT", 1903, 113, 2016, 1938, 6),
    t2("TETRAHEDRON LETT", 1845, 96, 1941, 1874, 6),
    t2("INORG CHEM", 1801, 140, 1941, 1872, 6),
    t2("TETRAHEDRON", 1705, 269, 1974, 1776, 5),
    t2("CHEM COMMUN", 1681, 109, 1790, 1721, 5),
    t2("EUR J INORG CHEM", 1148, 371, 1519, 1195, 3),
    t2("DALTON T", 1047, 138, 1185, 1092, 3),
    t2("CHEM REV", 860, 94, 954, 902, 3),
    t2("EUR J ORG CHEM", 835, 329, 1164, 885, 3),
    t2("J PHYS CHEM B", 811, 66, 877, 868, 3),
    t2("SYNLETT", 814, 124, 938, 845, 2),
    t2("J ORGANOMET CHEM", 610, 143, 753, 680, 2),
    t2("ORG BIOMOL CHEM", 689, 42, 731, 692, 2),
    t2("TETRAHEDRON-ASYMMETR", 618, 67, 685, 641, 2),
    t2("SYNTHESIS-STUTTGART", 543, 118, 661, 569, 1),
    t2("Z ANORG ALLG CHEM", 452, 407, 859, 502, 1),
    t2("ADV SYNTH CATAL", 474, 133, 607, 483, 1),
];

/// (intl, german, sum, corrected) totals row.
pub const EDITION_TOTALS: (u64, u64, u64, u64) = (32_416, 9_079, 41_495, 34_152);
pub const EDITION_DOUBLES: u64 = 7_343;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JournalRow {
    pub journal: &'static str,
    pub publisher: &'static str,
    pub categories: &'static [&'static str],
    pub articles: u64,
}

const WILEY: &str = "Wiley - VCH Verlag, Germany";
const RSC: &str = "Royal Society of Chemistry, UK";
const ACS: &str = "American Chemical Society, USA";
const ELSEVIER: &str = "Elsevier, the Netherlands";
const THIEME: &str = "Georg Thieme Verlag, Germany";
const PERGAMON: &str = "Pergamon, UK";

const MULTI: &str = "multidisciplinary chemistry";
const ORG: &str = "organic chemistry";
const INORG: &str = "inorganic/nuclear chemistry";
const PHYS: &str = "physical chemistry";

const fn t1(
    journal: &'static str,
    publisher: &'static str,
    categories: &'static [&'static str],
    articles: u64,
) -> JournalRow {
    JournalRow {
        journal,
        publisher,
        categories,
        articles,
    }
}

/// Publisher, subject categories and 2004 article counts.
pub const JOURNALS: [JournalRow; 22] = [
    t1("ADV SYNTH CATAL", WILEY, &["applied chemistry", ORG], 223),
    t1("ANGEW CHEM INT EDIT", WILEY, &[MULTI], 1224),
    t1("CHEM COMMUN", RSC, &[MULTI], 1321),
    t1("CHEM REV", ACS, &[MULTI], 183),
    t1("CHEM-EUR J", WILEY, &[MULTI], 679),
    t1("DALTON T", RSC, &[INORG], 614),
    t1("EUR J INORG CHEM", WILEY, &[INORG], 577),
    t1("EUR J ORG CHEM", WILEY, &[ORG], 574),
    t1("INORG CHEM", ACS, &[INORG], 1146),
    t1("J AM CHEM SOC", ACS, &[MULTI], 3167),
    t1("J ORG CHEM", ACS, &[ORG], 1399),
    t1("J ORGANOMET CHEM", ELSEVIER, &[ORG, INORG], 565),
    t1("J PHYS CHEM B", ACS, &[PHYS], 2570),
    t1("ORG BIOMOL CHEM", RSC, &[ORG, PHYS, "biochemistry"], 519),
    t1("ORG LETT", ACS, &[ORG], 1252),
    t1("ORGANOMETALLICS", ACS, &[ORG, INORG], 875),
    t1("SYNLETT", THIEME, &[ORG, PHYS], 648),
    t1("SYNTHESIS-STUTTGART", THIEME, &[ORG, PHYS], 472),
    t1("TETRAHEDRON", PERGAMON, &[ORG], 1203),
    t1("TETRAHEDRON LETT", PERGAMON, &[ORG], 2133),
    t1("TETRAHEDRON-ASYMMETR", PERGAMON, &[ORG, INORG, PHYS], 555),
    t1("Z ANORG ALLG CHEM", WILEY, &[INORG], 426),
];

/// (journal, share_total %, share_excl_self %) from the environment map legend.
pub const ANGEW_SHARES: [(&str, f64, f64); 22] = [
    ("J AM CHEM SOC", 23.9, 19.0),
    ("J ORG CHEM", 10.4, 8.5),
    ("TETRAHEDRON LETT", 9.5, 7.9),
    ("ANGEW CHEM INT EDIT", 8.1, 6.3),
    ("CHEM COMMUN", 6.0, 5.6),
    ("INORG CHEM", 5.8, 4.1),
    ("TETRAHEDRON", 4.8, 4.1),
    ("ORGANOMETALLICS", 4.6, 3.0),
    ("CHEM REV", 4.3, 4.2),
    ("ORG LETT", 3.6, 3.1),
    ("J ORGANOMET CHEM", 3.0, 2.4),
    ("J PHYS CHEM B", 2.8, 1.0),
    ("DALTON T", 2.7, 2.2),
    ("CHEM-EUR J", 2.0, 1.8),
    ("SYNTHESIS-STUTTGART", 1.9, 1.7),
    ("SYNLETT", 1.9, 1.7),
    ("TETRAHEDRON-ASYMMETR", 1.7, 1.3),
    ("EUR J ORG CHEM", 1.0, 0.9),
    ("EUR J INORG CHEM", 0.8, 0.6),
    ("Z ANORG ALLG CHEM", 0.7, 0.4),
    ("ADV SYNTH CATAL", 0.3, 0.3),
    ("ORG BIOMOL CHEM", 0.2, 0.2),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadingRow {
    pub journal: &'static str,
    pub loadings: [f64; 4],
    /// Factors the journal is assigned to (1-based).
    pub assigned: &'static [usize],
}

const fn loading_row(
    journal: &'static str,
    loadings: [f64; 4],
    assigned: &'static [usize],
) -> LoadingRow {
    LoadingRow {
        journal,
        loadings,
        assigned,
    }
}

/// Rotated loadings of the four retained components.
pub const ANGEW_LOADINGS: [LoadingRow; 22] = [
    loading_row("TETRAHEDRON LETT", [0.940, 0.134, -0.194, -0.125], &[1]),
    loading_row("TETRAHEDRON", [0.933, 0.148, -0.206, -0.132], &[1]),
    loading_row("SYNTHESIS-STUTTGART", [0.929, 0.031, -0.202, -0.129], &[1]),
    loading_row("SYNLETT", [0.920, 0.061, -0.242, -0.135], &[1]),
    loading_row("J ORG CHEM", [0.895, 0.264, -0.203, -0.125], &[1]),
    loading_row("EUR J ORG CHEM", [0.830, 0.202, -0.266, -0.156], &[1]),
    loading_row("ORG LETT", [0.814, 0.365, -0.244, -0.119], &[1]),
    loading_row("TETRAHEDRON-ASYMMETR", [0.530, -0.123, -0.427, 0.028], &[1]),
    loading_row("J AM CHEM SOC", [0.081, 0.948, -0.062, -0.004], &[2]),
    loading_row("CHEM REV", [0.215, 0.946, -0.044, 0.075], &[2]),
    loading_row("ANGEW CHEM INT EDIT", [0.168, 0.915, 0.019, 0.080], &[2]),
    loading_row("CHEM-EUR J", [0.053, 0.882, 0.056, 0.094], &[2]),
    loading_row("CHEM COMMUN", [0.189, 0.867, 0.241, 0.225], &[2]),
    loading_row("ADV SYNTH CATAL", [0.346, 0.429, -0.565, 0.313], &[2]),
    loading_row("INORG CHEM", [-0.284, 0.327, 0.772, 0.211], &[3]),
    loading_row("DALTON T", [-0.346, 0.197, 0.714, 0.461], &[3, 4]),
    loading_row("EUR J INORG CHEM", [-0.345, 0.219, 0.664, 0.545], &[3, 4]),
    loading_row("Z ANORG ALLG CHEM", [-0.285, -0.168, 0.568, -0.005], &[3]),
    loading_row("J ORGANOMET CHEM", [-0.173, 0.170, 0.073, 0.882], &[4]),
    loading_row("ORGANOMETALLICS", [-0.210, 0.288, 0.031, 0.863], &[4]),
    loading_row("J PHYS CHEM B", [-0.481, 0.350, -0.248, -0.450], &[]),
    loading_row("ORG BIOMOL CHEM", [0.304, 0.142, -0.200, -0.319], &[]),
];

/// JACS environment legend (share_total %). The legend lists 20 journals;
/// the 21st citer above threshold is `JACS_UNLISTED`.
pub const JACS_SHARES: [(&str, f64); 20] = [
    ("J AM CHEM SOC", 21.7),
    ("J CHEM PHYS", 11.4),
    ("J ORG CHEM", 7.5),
    ("TETRAHEDRON LETT", 6.7),
    ("ANGEW CHEM INT EDIT", 6.4),
    ("CHEM COMMUN", 4.7),
    ("INORG CHEM", 4.4),
    ("MACROMOLECULES", 4.3),
    ("CHEM REV", 3.8),
    ("BIOCHEMISTRY", 3.7),
    ("ORGANOMETALLICS", 3.5),
    ("TETRAHEDRON", 3.4),
    ("LANGMUIR", 3.3),
    ("J PHYS CHEM A", 2.6),
    ("ORG LETT", 2.5),
    ("J ORGANOMET CHEM", 2.2),
    ("DALTON T", 1.9),
    ("CHEM-EUR J", 1.6),
    ("EUR J ORG CHEM", 0.7),
    ("ORG BIOMOL CHEM", 0.2),
];
pub const JACS_UNLISTED: &str = "J PHYS CHEM B";

fn id(s: &str) -> JournalId {
    JournalId::new(s).expect("fixture names are valid")
}

pub fn angew_seed() -> JournalId {
    id(ANGEW_INTL)
}

pub fn articles_2004(journal: &str) -> u64 {
    JOURNALS
        .iter()
        .find(|r| r.journal == journal)
        .map(|r| r.articles)
        .expect("journal in fixture")
}

pub fn angew_metadata() -> Vec<JournalMeta> {
    JOURNALS
        .iter()
        .map(|r| JournalMeta {
            id: id(r.journal),
            publisher: r.publisher.to_string(),
            categories: r.categories.iter().map(|c| c.to_string()).collect(),
            articles_2004: r.articles,
        })
        .collect()
}

/// Splits `total` in proportion to `weights` (Hamilton's method; ties to
/// the lower index).
pub fn largest_remainder(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let given: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order
        .iter()
        .cycle()
        .take(total.saturating_sub(given) as usize)
    {
        out[i] += 1;
    }
    out
}

/// Grand total of the synthetic 22 x 22 matrix: Angewandte's corrected
/// column (34,152) is 8.1% of it.
pub const ANGEW_MATRIX_TOTAL: u64 = 421_630;

// Rough discipline of each journal, used to shape the synthetic columns.
fn affinity_group(journal: &str) -> usize {
    ANGEW_LOADINGS
        .iter()
        .position(|r| r.journal == journal)
        .map(|i| {
            ANGEW_LOADINGS[i]
                .assigned
                .first()
                .copied()
                .unwrap_or(10 + i)
        })
        .expect("journal in loadings fixture")
}

/// 22 x 22 citing x cited matrix in `EDITION_COUNTS` order. The Angewandte
/// column is the corrected edition count; every other column sum and diagonal
/// follows `ANGEW_SHARES`, and off-diagonal cells are spread over citing
/// journals by article count, weighted six-fold within a discipline.
pub fn angew_matrix() -> CitationMatrix {
    let names: Vec<&str> = EDITION_COUNTS.iter().map(|r| r.journal).collect();
    let n = names.len();
    let seed = names.iter().position(|&j| j == ANGEW_INTL).unwrap();
    let legend = |j: &str| *ANGEW_SHARES.iter().find(|f| f.0 == j).unwrap();

    let others: Vec<usize> = (0..n).filter(|&j| j != seed).collect();
    let seed_col: u64 = EDITION_COUNTS.iter().map(|r| r.corrected).sum();
    let col_sums = largest_remainder(
        ANGEW_MATRIX_TOTAL - seed_col,
        &others
            .iter()
            .map(|&j| legend(names[j]).1)
            .collect::<Vec<_>>(),
    );

    let mut counts = DMatrix::<u64>::zeros(n, n);
    for (i, r) in EDITION_COUNTS.iter().enumerate() {
        counts[(i, seed)] = r.corrected;
    }
    for (&j, &col) in others.iter().zip(&col_sums) {
        let excl = (legend(names[j]).2 / 100.0 * ANGEW_MATRIX_TOTAL as f64).round() as u64;
        let diag = col.saturating_sub(excl);
        counts[(j, j)] = diag;
        let rows: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        let weights: Vec<f64> = rows
            .iter()
            .map(|&i| {
                let same = affinity_group(names[i]) == affinity_group(names[j]);
                articles_2004(names[i]) as f64 * if same { 6.0 } else { 1.0 }
            })
            .collect();
        for (&i, c) in rows.iter().zip(largest_remainder(col - diag, &weights)) {
            counts[(i, j)] = c;
        }
    }
    CitationMatrix::new(names.iter().map(|s| id(s)).collect(), counts)
}

/// Seed-column counts for `extra` sub-threshold citers: one at exactly
/// `threshold`, the rest at least 1 and below it, summing to `remaining`.
fn sub_threshold_counts(extra: usize, threshold: u64, remaining: u64) -> Vec<u64> {
    let rest = extra - 1;
    let spread = remaining - threshold - rest as u64;
    let weights: Vec<f64> = (0..rest).map(|i| (rest - i) as f64).collect();
    let mut out = vec![threshold];
    out.extend(
        largest_remainder(spread, &weights)
            .into_iter()
            .map(|c| c + 1),
    );
    debug_assert!(out[1..].iter().all(|&c| c < threshold));
    out
}

/// Raw seed-column count for an environment journal: its edition count with
/// doubles, inflated by a quarter (whole-database coverage); the seed's own
/// row is the seed's self-citation count.
pub fn angew_raw_seed_count(row: &EditionRow) -> u64 {
    if row.journal == ANGEW_INTL {
        ANGEW_SELF_CITES
    } else {
        (row.sum * 5).div_ceil(4)
    }
}

/// Link table with 869 journals citing Angewandte (22 above 693, the rest
/// synthetic and at most 693) plus the environment's inter-journal links.
pub fn angew_links() -> Vec<CitationLink> {
    let seed = angew_seed();
    let mut links: Vec<CitationLink> = EDITION_COUNTS
        .iter()
        .map(|r| CitationLink::new(id(r.journal), seed.clone(), angew_raw_seed_count(r)))
        .collect();
    let listed: u64 = links.iter().map(|l| l.count).sum();
    let extra = ANGEW_CITING_JOURNALS - EDITION_COUNTS.len();
    for (k, c) in sub_threshold_counts(extra, ANGEW_THRESHOLD, ANGEW_TOTAL_CITES - listed)
        .into_iter()
        .enumerate()
    {
        links.push(CitationLink::new(
            id(&format!("CITING J {:04}", k + 1)),
            seed.clone(),
            c,
        ));
    }
    let m = angew_matrix();
    for j in 0..m.len() {
        if m.journals[j] == seed {
            continue;
        }
        for i in 0..m.len() {
            let c = m.counts[(i, j)];
            if c > 0 {
                links.push(CitationLink::new(
                    m.journals[i].clone(),
                    m.journals[j].clone(),
                    c,
                ));
            }
        }
    }
    links
}

/// JACS seed column: 21 journals above 1,966 and 1,545 synthetic citers at or
/// below it, totalling 231,212.
pub fn jacs_links() -> Vec<CitationLink> {
    let seed = id(JACS);
    let mut links: Vec<CitationLink> = JACS_SHARES
        .iter()
        .map(|&(j, share)| {
            let c = if j == JACS {
                JACS_SELF_CITES
            } else {
                2_000 + (share * 700.0).round() as u64
            };
            CitationLink::new(id(j), seed.clone(), c)
        })
        .collect();
    links.push(CitationLink::new(id(JACS_UNLISTED), seed.clone(), 5_000));
    let listed: u64 = links.iter().map(|l| l.count).sum();
    let extra = JACS_CITING_JOURNALS - links.len();
    for (k, c) in sub_threshold_counts(extra, JACS_THRESHOLD, JACS_TOTAL_CITES - listed)
        .into_iter()
        .enumerate()
    {
        links.push(CitationLink::new(
            id(&format!("CITING J {:04}", k + 1)),
            seed.clone(),
            c,
        ));
    }
    links
}

const SURNAMES: [&str; 20] = [
    "MUELLER", "SMITH", "TANAKA", "WANG", "SCHMIDT", "MARTIN", "ROSSI", "GARCIA", "NOVAK",
    "JOHNSON", "FISCHER", "DUBOIS", "SATO", "LI", "KOWALSKI", "BROWN", "WEBER", "LOPEZ", "KIM",
    "JANSEN",
];

fn author(k: usize) -> String {
    let letter = |i: usize| char::from(b'A' + (i % 26) as u8);
    format!("{} {}{}", SURNAMES[k % 20], letter(k / 20), letter(k / 520))
}

const INTL_SPELLINGS: [&str; 2] = ["ANGEW CHEM INT EDIT", "Angew. Chem. Int. Edit."];
const GERMAN_SPELLINGS: [&str; 2] = ["ANGEW CHEM", "Angew. Chem."];
const FILLER_JOURNALS: [&str; 5] = [
    "NATURE",
    "SCIENCE",
    "J AM CHEM SOC",
    "CHEM REV",
    "J ORG CHEM",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    /// Same work cited once per edition, in either order.
    Double,
    /// German citation next to an international one by another author.
    GermanAdjacent,
    German,
    Intl,
    Incomplete,
}

/// Per-journal split of the 702 German-adjacent citations, proportional to
/// German-only citations.
pub fn german_adjacent_split() -> Vec<u64> {
    let german_only: Vec<f64> = EDITION_COUNTS
        .iter()
        .map(|r| (r.german - r.doubles()) as f64)
        .collect();
    largest_remainder(ANGEW_GERMAN_ADJACENT, &german_only)
}

/// Reference records of the environment's 2004 papers that cite either
/// edition. Counts per citing journal reproduce `EDITION_COUNTS` exactly: 7,343
/// double pairs, 702 German-adjacent mismatches, 111 incomplete records.
/// Every Angewandte unit is separated from the next by a citation to some
/// other journal.
pub fn angew_records() -> Vec<RefRecord> {
    let adjacent = german_adjacent_split();
    let mut records = Vec::new();
    let mut author_no = 0usize;
    for (ji, row) in EDITION_COUNTS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + ji as u64);
        let citing = id(row.journal);
        let d = row.doubles();
        let adj = adjacent[ji];
        let incomplete = ANGEW_INCOMPLETE_RECORDS / EDITION_COUNTS.len()
            + usize::from(ji < ANGEW_INCOMPLETE_RECORDS % EDITION_COUNTS.len());
        let mut units = Vec::new();
        units.extend(std::iter::repeat_n(Unit::Double, d as usize));
        units.extend(std::iter::repeat_n(Unit::GermanAdjacent, adj as usize));
        units.extend(std::iter::repeat_n(
            Unit::German,
            (row.german - d - adj) as usize,
        ));
        units.extend(std::iter::repeat_n(
            Unit::Intl,
            (row.intl - d - adj) as usize,
        ));
        units.extend(std::iter::repeat_n(Unit::Incomplete, incomplete));
        units.shuffle(&mut rng);

        let mut doc_no = 0;
        let mut rest = &units[..];
        while !rest.is_empty() {
            doc_no += 1;
            let take = rng.gen_range(1..=6).min(rest.len());
            let (doc_units, tail) = rest.split_at(take);
            rest = tail;
            let doc_id = format!("WOS{:02}{:05}", ji + 1, doc_no);
            let mut seq = 0u32;
            let mut push = |raw: &str, a: Option<String>, y: Option<i32>| {
                seq += 1;
                records.push(RefRecord::new(
                    citing.clone(),
                    doc_id.clone(),
                    seq,
                    raw,
                    a,
                    y,
                ));
            };
            for unit in doc_units {
                author_no += 1;
                let filler = FILLER_JOURNALS[author_no % FILLER_JOURNALS.len()];
                push(
                    filler,
                    Some(author(author_no + 7)),
                    Some(1990 + (author_no % 14) as i32),
                );
                let a = author(author_no);
                let year = 1980 + (author_no % 25) as i32;
                let intl = INTL_SPELLINGS[author_no % 2];
                let german = GERMAN_SPELLINGS[(author_no / 2) % 2];
                match unit {
                    Unit::Double => {
                        if rng.gen_bool(0.5) {
                            push(german, Some(a.clone()), Some(year));
                            push(intl, Some(a), Some(year));
                        } else {
                            push(intl, Some(a.clone()), Some(year));
                            push(german, Some(a), Some(year));
                        }
                    }
                    Unit::GermanAdjacent => {
                        push(german, Some(a), Some(year));
                        push(intl, Some(author(author_no + 1)), Some(year));
                    }
                    Unit::German => push(german, Some(a), Some(year)),
                    Unit::Intl => push(intl, Some(a), Some(year)),
                    Unit::Incomplete => {
                        let raw = if author_no.is_multiple_of(2) {
                            intl
                        } else {
                            german
                        };
                        if author_no.is_multiple_of(3) {
                            push(raw, Some(a), None);
                        } else {
                            push(raw, None, Some(year));
                        }
                    }
                }
            }
        }
    }
    records
}

/// Planted structure: 16 journals in four blocks of four. Journals cite
/// heavily inside their own block and sparsely elsewhere, except that the
/// last member of each block cites little at all. Without such rows the four
/// centred block patterns would sum to zero and span only three dimensions.
pub fn block_citation_matrix() -> CitationMatrix {
    let n = 16;
    let mut counts = DMatrix::<u64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            counts[(i, j)] = if i / 4 == j / 4 && i % 4 != 3 {
                80 + ((i * 7 + j * 3) % 11) as u64
            } else {
                ((i + j) % 3) as u64
            };
        }
    }
    let journals = (0..n)
        .map(|i| id(&format!("BLOCK{} J{}", i / 4 + 1, i % 4 + 1)))
        .collect();
    CitationMatrix::new(journals, counts)
}

/// Planted block (1-based) of each `block_citation_matrix` journal.
pub fn block_membership() -> Vec<usize> {
    (0..16).map(|i| i / 4 + 1).collect()
}

/// Journal -> `;`-joined categories, usable as graph group labels.
pub fn category_groups(metas: &[JournalMeta]) -> BTreeMap<JournalId, String> {
    metas
        .iter()
        .map(|m| {
            (
                m.id.clone(),
                m.categories.iter().cloned().collect::<Vec<_>>().join(";"),
            )
        })
        .collect()
}

/// Config for the Angewandte data set as written by `write_angew_files`.
pub const ANGEW_CONFIG: &str = "\
seed_journal = \"ANGEW CHEM INT EDIT\"
total_cites = 76904
self_cites = 7512
links = \"links.csv\"
records = \"records.tsv\"
metadata = \"metadata.csv\"
out_dir = \"out\"
";

/// Writes links.csv, records.tsv, metadata.csv and angew.toml into `dir`;
/// returns the config path.
pub fn write_angew_files(dir: &Path) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("links.csv"), write_link_table(&angew_links()))?;
    std::fs::write(
        dir.join("records.tsv"),
        write_reference_records(&angew_records()),
    )?;
    std::fs::write(dir.join("metadata.csv"), write_metadata(&angew_metadata()))?;
    let config = dir.join("angew.toml");
    std::fs::write(&config, ANGEW_CONFIG)?;
    Ok(config)
}
