//! Local citation environment of a seed journal: threshold selection,
//! the citing x cited count matrix and the share statistics read off it.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dedup::EditionCounts;
use crate::ingest::{csv_writer, finish, normalize_journal_name, CitationLink, JournalId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("self-citations {self_cites} exceed total citations {total_cites}")]
    Domain { total_cites: u64, self_cites: u64 },
    #[error("no link cites the seed journal {0}")]
    SeedNotCited(String),
    #[error("journal set must be non-empty and duplicate-free")]
    InvalidJournalSet,
    #[error("matrix holds no citations")]
    EmptyMatrix,
    #[error("journal {0} receives no citations")]
    ZeroColumn(String),
    #[error("journal {0} is not in the matrix")]
    UnknownJournal(String),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rank correlation needs two non-constant series of length >= 2")]
    DegenerateInput,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

/// Square citing x cited count matrix; rows cite, columns are cited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationMatrix {
    pub journals: Vec<JournalId>,
    pub counts: DMatrix<u64>,
}

impl CitationMatrix {
    pub fn new(journals: Vec<JournalId>, counts: DMatrix<u64>) -> Self {
        assert_eq!(counts.nrows(), journals.len());
        assert_eq!(counts.ncols(), journals.len());
        Self { journals, counts }
    }

    pub fn len(&self) -> usize {
        self.journals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.journals.is_empty()
    }

    pub fn index_of(&self, journal: &JournalId) -> Option<usize> {
        self.journals.iter().position(|j| j == journal)
    }

    pub fn column_sum(&self, j: usize) -> u64 {
        self.counts.column(j).iter().sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts as reals, with the diagonal zeroed unless `include_diagonal`.
    pub fn to_real(&self, include_diagonal: bool) -> DMatrix<f64> {
        let mut m = self.counts.map(|c| c as f64);
        if !include_diagonal {
            m.fill_diagonal(0.0);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactShare {
    pub journal: JournalId,
    /// Percent of all matrix citations received.
    pub share_total: f64,
    /// Same, with the journal's diagonal entry removed from the numerator.
    pub share_excl_self: f64,
}

/// `floor((total - self) / 100)`: the 1% rule.
pub fn citation_threshold(total_cites: u64, self_cites: u64) -> Result<u64, EnvError> {
    if self_cites > total_cites {
        return Err(EnvError::Domain {
            total_cites,
            self_cites,
        });
    }
    Ok((total_cites - self_cites) / 100)
}

/// Every journal citing `seed`, with its count, by descending count then name.
pub fn seed_citers(links: &[CitationLink], seed: &JournalId) -> Vec<(JournalId, u64)> {
    let mut totals: HashMap<&JournalId, u64> = HashMap::new();
    for l in links.iter().filter(|l| &l.cited == seed) {
        *totals.entry(&l.citing).or_default() += l.count;
    }
    let mut out: Vec<(JournalId, u64)> = totals.into_iter().map(|(j, c)| (j.clone(), c)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Journals citing `seed` strictly more than `threshold` times.
pub fn select_environment(
    links: &[CitationLink],
    seed: &JournalId,
    threshold: u64,
) -> Result<Vec<JournalId>, EnvError> {
    let citers = seed_citers(links, seed);
    if citers.is_empty() {
        return Err(EnvError::SeedNotCited(seed.to_string()));
    }
    Ok(citers
        .into_iter()
        .filter(|(_, c)| *c > threshold)
        .map(|(j, _)| j)
        .collect())
}

/// Replaces each (citing -> seed) count by the journal's double-citation
/// corrected count.
pub fn apply_corrected_counts(
    links: &[CitationLink],
    seed: &JournalId,
    corrected: &[EditionCounts],
) -> Vec<CitationLink> {
    let by_journal: HashMap<&JournalId, u64> = corrected
        .iter()
        .map(|c| (&c.journal, c.corrected))
        .collect();
    let mut done: HashSet<&JournalId> = HashSet::new();
    let mut out: Vec<CitationLink> = links
        .iter()
        .map(|l| {
            let mut l = l.clone();
            if &l.cited == seed {
                if let Some((&j, &c)) = by_journal.get_key_value(&l.citing) {
                    // a journal's corrected count lands on its first link only
                    l.count = if done.insert(j) { c } else { 0 };
                }
            }
            l
        })
        .collect();
    for c in corrected {
        if !done.contains(&c.journal) {
            out.push(CitationLink::new(
                c.journal.clone(),
                seed.clone(),
                c.corrected,
            ));
        }
    }
    out
}

pub fn build_matrix(
    links: &[CitationLink],
    journal_set: &[JournalId],
) -> Result<CitationMatrix, EnvError> {
    let index: HashMap<&JournalId, usize> = journal_set
        .iter()
        .enumerate()
        .map(|(i, j)| (j, i))
        .collect();
    if journal_set.is_empty() || index.len() != journal_set.len() {
        return Err(EnvError::InvalidJournalSet);
    }
    let n = journal_set.len();
    let mut counts = DMatrix::<u64>::zeros(n, n);
    for l in links {
        if let (Some(&i), Some(&j)) = (index.get(&l.citing), index.get(&l.cited)) {
            counts[(i, j)] += l.count;
        }
    }
    Ok(CitationMatrix::new(journal_set.to_vec(), counts))
}

pub fn impact_shares(m: &CitationMatrix) -> Result<Vec<ImpactShare>, EnvError> {
    let total = m.grand_total();
    if total == 0 {
        return Err(EnvError::EmptyMatrix);
    }
    let total = total as f64;
    Ok(m.journals
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let col = m.column_sum(j);
            let diag = m.counts[(j, j)];
            ImpactShare {
                journal: id.clone(),
                share_total: col as f64 / total * 100.0,
                share_excl_self: (col - diag) as f64 / total * 100.0,
            }
        })
        .collect())
}

/// Percent of the citations `journal` receives that come from itself.
pub fn within_journal_share(m: &CitationMatrix, journal: &JournalId) -> Result<f64, EnvError> {
    let j = m
        .index_of(journal)
        .ok_or_else(|| EnvError::UnknownJournal(journal.to_string()))?;
    let col = m.column_sum(j);
    if col == 0 {
        return Err(EnvError::ZeroColumn(journal.to_string()));
    }
    Ok(m.counts[(j, j)] as f64 / col as f64 * 100.0)
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    ranks
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of mid-ranks.
pub fn rank_correlation(x: &[f64], y: &[f64]) -> Result<f64, EnvError> {
    if x.len() != y.len() {
        return Err(EnvError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EnvError::DegenerateInput);
    }
    pearson(&midranks(x), &midranks(y)).ok_or(EnvError::DegenerateInput)
}

pub const MATRIX_CORNER: &str = "journal";

/// Matrix CSV: header `journal,<cited ids...>`, then one row per citing journal.
pub fn write_matrix(m: &CitationMatrix) -> String {
    let mut w = csv_writer(b',');
    let mut header = vec![MATRIX_CORNER.to_string()];
    header.extend(m.journals.iter().map(|j| j.to_string()));
    w.write_record(&header).expect("in-memory write");
    for (i, j) in m.journals.iter().enumerate() {
        let mut row = vec![j.to_string()];
        row.extend(m.counts.row(i).iter().map(|c| c.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn parse_matrix(text: &str) -> Result<CitationMatrix, EnvError> {
    let parse_err = |line: u64, message: String| EnvError::Parse { line, message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(parse_err(1, e.to_string())),
        None => return Err(parse_err(1, "missing header".into())),
    };
    if header.get(0) != Some(MATRIX_CORNER) {
        return Err(parse_err(
            1,
            format!("header must start with `{MATRIX_CORNER}`"),
        ));
    }
    let journals = header
        .iter()
        .skip(1)
        .map(|s| normalize_journal_name(s).map_err(|_| parse_err(1, "empty journal".into())))
        .collect::<Result<Vec<_>, _>>()?;
    let n = journals.len();
    if n == 0 || journals.iter().collect::<HashSet<_>>().len() != n {
        return Err(parse_err(
            1,
            "journal header must be non-empty and unique".into(),
        ));
    }
    let mut counts = DMatrix::<u64>::zeros(n, n);
    let mut seen = 0;
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if seen >= n {
            return Err(parse_err(line, "more rows than journals".into()));
        }
        let id =
            normalize_journal_name(&row[0]).map_err(|_| parse_err(line, "empty journal".into()))?;
        if id != journals[seen] {
            return Err(parse_err(
                line,
                format!("row `{id}` does not match column `{}`", journals[seen]),
            ));
        }
        for j in 0..n {
            counts[(seen, j)] = row[j + 1]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("invalid count `{}`", &row[j + 1])))?;
        }
        seen += 1;
    }
    if seen != n {
        return Err(parse_err(0, format!("expected {n} rows, found {seen}")));
    }
    Ok(CitationMatrix::new(journals, counts))
}

pub fn write_shares(shares: &[ImpactShare]) -> String {
    let mut w = csv_writer(b',');
    w.write_record(["journal", "share_total", "share_excl_self"])
        .expect("in-memory write");
    for s in shares {
        w.write_record([
            s.journal.to_string(),
            format!("{:.4}", s.share_total),
            format!("{:.4}", s.share_excl_self),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// `journal,count`: the selected journals and how often each cites the seed.
pub fn write_environment(selected: &[(JournalId, u64)]) -> String {
    let mut w = csv_writer(b',');
    w.write_record(["journal", "count"])
        .expect("in-memory write");
    for (j, c) in selected {
        w.write_record([j.to_string(), c.to_string()])
            .expect("in-memory write");
    }
    finish(w)
}

pub fn parse_environment(text: &str) -> Result<Vec<(JournalId, u64)>, EnvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header_ok = reader
        .headers()
        .map(|h| h.iter().eq(["journal", "count"]))
        .unwrap_or(false);
    if !header_ok {
        return Err(EnvError::Parse {
            line: 1,
            message: "expected header `journal,count`".into(),
        });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| EnvError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: &str| EnvError::Parse {
            line,
            message: message.to_string(),
        };
        let j = normalize_journal_name(&row[0]).map_err(|_| bad("empty journal"))?;
        let c = row[1].trim().parse().map_err(|_| bad("invalid count"))?;
        out.push((j, c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jid(s: &str) -> JournalId {
        JournalId::new(s).unwrap()
    }

    fn link(a: &str, b: &str, c: u64) -> CitationLink {
        CitationLink::new(jid(a), jid(b), c)
    }

    #[test]
    fn threshold_values() {
        assert_eq!(citation_threshold(76904, 7512).unwrap(), 693);
        assert_eq!(citation_threshold(100, 0).unwrap(), 1);
        assert_eq!(citation_threshold(7512, 7512).unwrap(), 0);
        assert!(matches!(
            citation_threshold(1, 2),
            Err(EnvError::Domain { .. })
        ));
    }

    #[test]
    fn selection_is_strict_and_ordered() {
        let links = [
            link("B", "S", 10),
            link("A", "S", 10),
            link("C", "S", 5),
            link("S", "S", 20),
            link("D", "X", 100),
        ];
        let sel = select_environment(&links, &jid("S"), 5).unwrap();
        assert_eq!(sel, vec![jid("S"), jid("A"), jid("B")]);
        assert!(select_environment(&links, &jid("S"), 20)
            .unwrap()
            .is_empty());
        assert_eq!(
            select_environment(&links, &jid("Q"), 0),
            Err(EnvError::SeedNotCited("Q".into()))
        );
    }

    #[test]
    fn matrix_places_counts() {
        let m = build_matrix(
            &[link("A", "B", 5), link("B", "A", 3), link("A", "A", 2)],
            &[jid("A"), jid("B")],
        )
        .unwrap();
        assert_eq!(m.counts, DMatrix::from_row_slice(2, 2, &[2, 5, 3, 0]));
        let empty = build_matrix(&[], &[jid("A"), jid("B")]).unwrap();
        assert_eq!(empty.grand_total(), 0);
        assert_eq!(
            build_matrix(&[], &[jid("A"), jid("A")]),
            Err(EnvError::InvalidJournalSet)
        );
    }

    #[test]
    fn corrected_counts_replace_seed_column() {
        let links = [link("A", "S", 50), link("A", "B", 4), link("B", "S", 9)];
        let corrected = [EditionCounts {
            journal: jid("A"),
            intl: 40,
            german: 20,
            sum_with_doubles: 60,
            corrected: 45,
        }];
        let out = apply_corrected_counts(&links, &jid("S"), &corrected);
        assert_eq!(
            out,
            vec![link("A", "S", 45), link("A", "B", 4), link("B", "S", 9)]
        );
        let added = apply_corrected_counts(&[link("A", "B", 1)], &jid("S"), &corrected);
        assert_eq!(added[1], link("A", "S", 45));
    }

    #[test]
    fn shares_of_identity() {
        let m = CitationMatrix::new(vec![jid("A"), jid("B")], DMatrix::identity(2, 2));
        let s = impact_shares(&m).unwrap();
        assert_eq!(s[0].share_total, 50.0);
        assert_eq!(s[0].share_excl_self, 0.0);
        assert_eq!(s[1].share_total, 50.0);
        let zero = CitationMatrix::new(vec![jid("A")], DMatrix::zeros(1, 1));
        assert_eq!(impact_shares(&zero), Err(EnvError::EmptyMatrix));
    }

    #[test]
    fn within_journal_share_cases() {
        let m = CitationMatrix::new(
            vec![jid("A"), jid("B"), jid("C")],
            DMatrix::from_row_slice(3, 3, &[3991, 0, 0, 30161, 4, 0, 0, 7, 0]),
        );
        let a = within_journal_share(&m, &jid("A")).unwrap();
        assert!((a - 11.686).abs() < 1e-3);
        assert_eq!(a.round(), 12.0);
        assert_eq!(
            within_journal_share(&m, &jid("B")).unwrap(),
            100.0 * 4.0 / 11.0
        );
        assert_eq!(
            within_journal_share(&m, &jid("C")),
            Err(EnvError::ZeroColumn("C".into()))
        );
        let diag_only = CitationMatrix::new(vec![jid("A")], DMatrix::from_element(1, 1, 5));
        assert_eq!(within_journal_share(&diag_only, &jid("A")).unwrap(), 100.0);
        let no_diag = CitationMatrix::new(
            vec![jid("A"), jid("B")],
            DMatrix::from_row_slice(2, 2, &[0, 1, 3, 0]),
        );
        assert_eq!(within_journal_share(&no_diag, &jid("A")).unwrap(), 0.0);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((rank_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((rank_correlation(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(
            rank_correlation(&x, &rev[..3]),
            Err(EnvError::LengthMismatch(5, 3))
        );
        assert_eq!(
            rank_correlation(&x, &[2.0; 5]),
            Err(EnvError::DegenerateInput)
        );
        assert_eq!(
            midranks(&[10.0, 20.0, 10.0, 30.0]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn spearman_with_ties_matches_hand_value() {
        // ranks x: 1.5 1.5 3 4, y: 1 2 3 4 -> rho = 4.5 / sqrt(4.5 * 5)
        let r = rank_correlation(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matrix_csv_round_trip_and_errors() {
        let m = CitationMatrix::new(
            vec![jid("A"), jid("B C")],
            DMatrix::from_row_slice(2, 2, &[1, 2, 3, 4]),
        );
        let text = write_matrix(&m);
        assert_eq!(text, "journal,A,B C\nA,1,2\nB C,3,4\n");
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert!(parse_matrix("journal,A,B\nB,1,2\nA,3,4\n").is_err());
        assert!(parse_matrix("journal,A,B\nA,1,2\n").is_err());
        assert!(parse_matrix("x,A\nA,1\n").is_err());
        assert!(parse_matrix("journal,A\nA,-1\n").is_err());
    }

    #[test]
    fn environment_csv_round_trip() {
        let sel = vec![(jid("A"), 700), (jid("B"), 694)];
        assert_eq!(parse_environment(&write_environment(&sel)).unwrap(), sel);
    }

    // Brute-force oracle: walk every link, keep those with both ends in the
    // set, sum.
    fn retained_total(links: &[CitationLink], set: &[JournalId]) -> u64 {
        let mut total = 0;
        for l in links {
            let mut citing_in = false;
            let mut cited_in = false;
            for j in set {
                citing_in |= *j == l.citing;
                cited_in |= *j == l.cited;
            }
            if citing_in && cited_in {
                total += l.count;
            }
        }
        total
    }

    const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "S"];

    proptest! {
        #[test]
        fn matrix_total_matches_retained_links(
            raw in prop::collection::vec((0usize..8, 0usize..8, 0u64..50), 0..40),
            n in 1usize..=6,
        ) {
            let links: Vec<CitationLink> = raw.iter().map(|&(a, b, c)| link(NAMES[a], NAMES[b], c)).collect();
            let set: Vec<JournalId> = NAMES[..n].iter().map(|s| jid(s)).collect();
            let m = build_matrix(&links, &set).unwrap();
            prop_assert_eq!(m.grand_total(), retained_total(&links, &set));
        }

        #[test]
        fn shares_sum_to_hundred(cells in prop::collection::vec(0u64..1000, 16)) {
            let m = CitationMatrix::new(
                NAMES[..4].iter().map(|s| jid(s)).collect(),
                DMatrix::from_row_slice(4, 4, &cells),
            );
            prop_assume!(m.grand_total() > 0);
            let shares = impact_shares(&m).unwrap();
            let sum: f64 = shares.iter().map(|s| s.share_total).sum();
            prop_assert!((sum - 100.0).abs() < 1e-9);
            for s in &shares {
                prop_assert!(0.0 <= s.share_excl_self && s.share_excl_self <= s.share_total && s.share_total <= 100.0);
            }
        }

        #[test]
        fn raising_threshold_never_adds(
            raw in prop::collection::vec((0usize..7, 1u64..100), 1..20),
            t in 0u64..100, dt in 0u64..50,
        ) {
            let links: Vec<CitationLink> = raw.iter().map(|&(a, c)| link(NAMES[a], "S", c)).collect();
            let low = select_environment(&links, &jid("S"), t).unwrap();
            let high = select_environment(&links, &jid("S"), t + dt).unwrap();
            prop_assert!(high.iter().all(|j| low.contains(j)));
        }

        #[test]
        fn spearman_ignores_monotone_transforms(
            pairs in prop::collection::vec((-50i32..50, -50i32..50), 2..30)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            if let Ok(rho) = rank_correlation(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
                let ty: Vec<f64> = y.iter().map(|v| v * v * v + 3.0 * v).collect();
                let rho2 = rank_correlation(&tx, &ty).unwrap();
                prop_assert!((rho - rho2).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&rho));
            }
        }
    }
}
