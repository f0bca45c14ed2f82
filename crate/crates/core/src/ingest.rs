//! Readers and writers for the three input tables (journal-journal links,
//! per-document reference records, journal metadata) and the journal-name
//! canonicalization shared by all of them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub const LINK_HEADER: [&str; 3] = ["citing", "cited", "count"];
pub const RECORD_HEADER: [&str; 6] = [
    "citing_journal",
    "doc_id",
    "seq",
    "cited_raw",
    "cited_author",
    "cited_year",
];
pub const METADATA_HEADER: [&str; 4] = ["journal", "publisher", "categories", "articles"];

/// Placeholder for a missing author or year in the reference-record table.
pub const MISSING: &str = "?";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("empty journal name")]
    EmptyName,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: negative citation count {value}")]
    NegativeCount { line: u64, value: String },
    #[error("line {line}: duplicate reference position ({doc_id}, {seq})")]
    DuplicateSeq { line: u64, doc_id: String, seq: u32 },
    #[error("line {line}: duplicate journal {journal}")]
    DuplicateJournal { line: u64, journal: String },
}

impl IngestError {
    fn parse(line: u64, message: impl Into<String>) -> Self {
        IngestError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Canonical uppercase abbreviated journal title, e.g. `ANGEW CHEM INT EDIT`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JournalId(String);

impl JournalId {
    /// Canonicalizes `raw`; see [`normalize_journal_name`].
    pub fn new(raw: &str) -> Result<Self, IngestError> {
        normalize_journal_name(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for JournalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for JournalId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Uppercases, turns ASCII punctuation into separators, keeps inner hyphens,
/// collapses whitespace and strips hyphens dangling at token ends.
/// Non-ASCII characters are dropped.
pub fn normalize_journal_name(raw: &str) -> Result<JournalId, IngestError> {
    let mut mapped = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c.is_ascii_alphanumeric() {
            mapped.push(c.to_ascii_uppercase());
        } else if c == '-' {
            mapped.push('-');
        } else if c.is_ascii() {
            mapped.push(' ');
        }
    }
    // a hyphen glues its neighbours even across separators: "Chem.-Eur." is CHEM-EUR
    let mut tokens: Vec<String> = Vec::new();
    let mut glue = false;
    for t in mapped.split_whitespace() {
        let core = t.trim_matches('-');
        if core.is_empty() {
            glue |= !tokens.is_empty();
            continue;
        }
        match tokens.last_mut() {
            Some(prev) if glue || t.starts_with('-') => {
                prev.push('-');
                prev.push_str(core);
            }
            _ => tokens.push(core.to_string()),
        }
        glue = t.ends_with('-');
    }
    if tokens.is_empty() {
        return Err(IngestError::EmptyName);
    }
    Ok(JournalId(tokens.join(" ")))
}

/// Collapses whitespace and uppercases; used for author comparison.
pub fn normalize_author(raw: &str) -> String {
    raw.split_whitespace()
        .map(|t| t.to_uppercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalMeta {
    pub id: JournalId,
    pub publisher: String,
    pub categories: BTreeSet<String>,
    pub articles_2004: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationLink {
    pub citing: JournalId,
    pub cited: JournalId,
    pub count: u64,
}

impl CitationLink {
    pub fn new(citing: JournalId, cited: JournalId, count: u64) -> Self {
        Self {
            citing,
            cited,
            count,
        }
    }
}

/// One cited reference inside one citing document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefRecord {
    pub citing_journal: JournalId,
    pub doc_id: String,
    /// 1-based position in the document's reference list.
    pub seq: u32,
    pub cited_raw: String,
    /// `None` when the source marks the author as missing.
    pub cited_author: Option<String>,
    pub cited_year: Option<i32>,
    pub complete: bool,
}

impl RefRecord {
    pub fn new(
        citing_journal: JournalId,
        doc_id: impl Into<String>,
        seq: u32,
        cited_raw: impl Into<String>,
        cited_author: Option<String>,
        cited_year: Option<i32>,
    ) -> Self {
        let complete = cited_author.is_some() && cited_year.is_some();
        Self {
            citing_journal,
            doc_id: doc_id.into(),
            seq,
            cited_raw: cited_raw.into(),
            cited_author,
            cited_year,
            complete,
        }
    }
}

fn csv_reader(stream: &str, delimiter: u8) -> csv::Reader<&[u8]> {
    let mut builder = csv::ReaderBuilder::new();
    builder
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::None);
    if delimiter == b'\t' {
        builder.quoting(false);
    }
    builder.from_reader(stream.as_bytes())
}

fn csv_error(err: csv::Error) -> IngestError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let message = match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => err.to_string(),
    };
    IngestError::parse(line, message)
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), IngestError> {
    let headers = reader.headers().map_err(csv_error)?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(IngestError::parse(1, "missing header"));
    }
    if headers.iter().ne(expected.iter().copied()) {
        return Err(IngestError::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(())
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn journal_field(field: &str, line: u64) -> Result<JournalId, IngestError> {
    normalize_journal_name(field).map_err(|_| IngestError::parse(line, "empty journal name"))
}

/// Parses the `citing,cited,count` link table. Rows repeating a
/// (citing, cited) pair are summed; output keeps first-appearance order.
pub fn parse_link_table(stream: &str) -> Result<Vec<CitationLink>, IngestError> {
    let mut reader = csv_reader(stream, b',');
    check_header(&mut reader, &LINK_HEADER)?;
    let mut links: Vec<CitationLink> = Vec::new();
    let mut index: HashMap<(JournalId, JournalId), usize> = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = line_of(&row);
        let citing = journal_field(&row[0], line)?;
        let cited = journal_field(&row[1], line)?;
        let raw = row[2].trim();
        let count: u64 = match raw.parse() {
            Ok(c) => c,
            Err(_) if raw.starts_with('-') && raw[1..].parse::<u64>().is_ok() => {
                return Err(IngestError::NegativeCount {
                    line,
                    value: raw.to_string(),
                })
            }
            Err(_) => return Err(IngestError::parse(line, format!("invalid count `{raw}`"))),
        };
        match index.get(&(citing.clone(), cited.clone())) {
            Some(&i) => {
                links[i].count = links[i]
                    .count
                    .checked_add(count)
                    .ok_or_else(|| IngestError::parse(line, "count overflow"))?;
            }
            None => {
                index.insert((citing.clone(), cited.clone()), links.len());
                links.push(CitationLink::new(citing, cited, count));
            }
        }
    }
    Ok(links)
}

/// Parses the tab-separated reference-record table. Records come back in file
/// order; a `?` author or year marks the record incomplete.
pub fn parse_reference_records(stream: &str) -> Result<Vec<RefRecord>, IngestError> {
    let mut reader = csv_reader(stream, b'\t');
    check_header(&mut reader, &RECORD_HEADER)?;
    let mut out = Vec::new();
    let mut seen: HashMap<(String, u32), ()> = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = line_of(&row);
        let citing = journal_field(&row[0], line)?;
        let doc_id = row[1].to_string();
        if doc_id.trim().is_empty() {
            return Err(IngestError::parse(line, "empty doc_id"));
        }
        let seq: u32 = row[2]
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(line, format!("invalid seq `{}`", &row[2])))?;
        if seq == 0 {
            return Err(IngestError::parse(line, "seq must be >= 1"));
        }
        let cited_raw = row[3].to_string();
        if cited_raw.trim().is_empty() {
            return Err(IngestError::parse(line, "empty cited journal"));
        }
        let cited_author = match &row[4] {
            MISSING => None,
            a => Some(a.to_string()),
        };
        let cited_year = match row[5].trim() {
            MISSING => None,
            y => Some(
                y.parse::<i32>()
                    .map_err(|_| IngestError::parse(line, format!("invalid year `{y}`")))?,
            ),
        };
        if seen.insert((doc_id.clone(), seq), ()).is_some() {
            return Err(IngestError::DuplicateSeq { line, doc_id, seq });
        }
        out.push(RefRecord::new(
            citing,
            doc_id,
            seq,
            cited_raw,
            cited_author,
            cited_year,
        ));
    }
    Ok(out)
}

/// Parses `journal,publisher,categories,articles`; categories are `;`-separated.
pub fn parse_metadata(stream: &str) -> Result<BTreeMap<JournalId, JournalMeta>, IngestError> {
    let mut reader = csv_reader(stream, b',');
    check_header(&mut reader, &METADATA_HEADER)?;
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = line_of(&row);
        let id = journal_field(&row[0], line)?;
        let categories: BTreeSet<String> = row[2]
            .split(';')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_string)
            .collect();
        if categories.is_empty() {
            return Err(IngestError::parse(line, "no categories"));
        }
        let raw = row[3].trim();
        let articles_2004: u64 = raw
            .parse()
            .map_err(|_| IngestError::parse(line, format!("invalid article count `{raw}`")))?;
        if out.contains_key(&id) {
            return Err(IngestError::DuplicateJournal {
                line,
                journal: id.into_string(),
            });
        }
        out.insert(
            id.clone(),
            JournalMeta {
                id,
                publisher: row[1].trim().to_string(),
                categories,
                articles_2004,
            },
        );
    }
    Ok(out)
}

pub(crate) fn csv_writer(delimiter: u8) -> csv::Writer<Vec<u8>> {
    let mut builder = csv::WriterBuilder::new();
    builder
        .delimiter(delimiter)
        .terminator(csv::Terminator::Any(b'\n'));
    if delimiter == b'\t' {
        builder.quote_style(csv::QuoteStyle::Never);
    }
    builder.from_writer(Vec::new())
}

pub(crate) fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer cannot fail");
    String::from_utf8(bytes).expect("writer only receives UTF-8")
}

pub fn write_link_table(links: &[CitationLink]) -> String {
    let mut w = csv_writer(b',');
    w.write_record(LINK_HEADER).expect("in-memory write");
    for l in links {
        w.write_record([l.citing.as_str(), l.cited.as_str(), &l.count.to_string()])
            .expect("in-memory write");
    }
    finish(w)
}

pub fn write_reference_records(records: &[RefRecord]) -> String {
    let mut w = csv_writer(b'\t');
    w.write_record(RECORD_HEADER).expect("in-memory write");
    for r in records {
        let year = r
            .cited_year
            .map(|y| y.to_string())
            .unwrap_or_else(|| MISSING.to_string());
        w.write_record([
            r.citing_journal.as_str(),
            r.doc_id.as_str(),
            &r.seq.to_string(),
            r.cited_raw.as_str(),
            r.cited_author.as_deref().unwrap_or(MISSING),
            &year,
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_metadata<'a>(metas: impl IntoIterator<Item = &'a JournalMeta>) -> String {
    let mut w = csv_writer(b',');
    w.write_record(METADATA_HEADER).expect("in-memory write");
    for m in metas {
        let cats = m.categories.iter().cloned().collect::<Vec<_>>().join(";");
        w.write_record([
            m.id.as_str(),
            m.publisher.as_str(),
            &cats,
            &m.articles_2004.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}
