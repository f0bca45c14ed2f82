use super::ExportError;
use crate::ingest::{normalize_journal_name, JournalId};
use crate::network::{Edge, GraphNode, SimilarityGraph};

/// Maps positions into the unit square: the bounding box is centred on
/// (0.5, 0.5) and its longer side scaled to 0.5.
pub fn normalized_coordinates(positions: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if positions.is_empty() {
        return Vec::new();
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in positions {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    positions
        .iter()
        .map(|p| {
            if extent > 0.0 {
                [
                    0.5 + (p[0] - centre[0]) * 0.5 / extent,
                    0.5 + (p[1] - centre[1]) * 0.5 / extent,
                ]
            } else {
                [0.5, 0.5]
            }
        })
        .collect()
}

/// Pajek `.net` text: `*Vertices n` with 1-based quoted labels and
/// unit-square coordinates, then `*Edges` as `i j w` with `i < j`.
pub fn write_pajek(g: &SimilarityGraph, positions: &[[f64; 2]]) -> Result<String, ExportError> {
    if positions.len() != g.nodes.len() {
        return Err(ExportError::PositionsMismatch {
            nodes: g.nodes.len(),
            positions: positions.len(),
        });
    }
    let mut out = format!("*Vertices {}\n", g.nodes.len());
    for (i, (node, p)) in g
        .nodes
        .iter()
        .zip(normalized_coordinates(positions))
        .enumerate()
    {
        out.push_str(&format!(
            "{} \"{}\" {:.4} {:.4}\n",
            i + 1,
            node.journal,
            p[0],
            p[1]
        ));
    }
    out.push_str("*Edges\n");
    for e in &g.edges {
        let (a, b) = (e.source.min(e.target), e.source.max(e.target));
        out.push_str(&format!("{} {} {:.4}\n", a + 1, b + 1, e.weight));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PajekNetwork {
    pub labels: Vec<String>,
    pub coordinates: Vec<Option<[f64; 2]>>,
    /// 0-based endpoints with `source < target`.
    pub edges: Vec<(usize, usize, f64)>,
}

enum Section {
    Preamble,
    Vertices,
    Edges,
}

fn err(line: usize, message: impl Into<String>) -> ExportError {
    ExportError::Parse {
        line,
        message: message.into(),
    }
}

fn finite(tok: &str, line: usize) -> Result<f64, ExportError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("invalid number `{tok}`")))
}

/// Reads the `*Vertices` / `*Edges` subset of the Pajek format. Vertex
/// lines may omit coordinates; edge lines may omit the weight (then 1).
/// Labels are quoted or a single bare token. `%` starts a comment line.
pub fn parse_pajek(text: &str) -> Result<PajekNetwork, ExportError> {
    let mut net = PajekNetwork::default();
    let mut section = Section::Preamble;
    let mut declared: Option<usize> = None;
    let mut seen: Vec<bool> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('*') {
            let mut parts = rest.split_whitespace();
            let keyword = parts.next().unwrap_or("").to_ascii_lowercase();
            match keyword.as_str() {
                "vertices" => {
                    if declared.is_some() {
                        return Err(err(line_no, "repeated *Vertices"));
                    }
                    let n: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line_no, "*Vertices needs a count"))?;
                    if n > 1_000_000 {
                        return Err(err(line_no, "vertex count too large"));
                    }
                    declared = Some(n);
                    net.labels = (1..=n).map(|i| i.to_string()).collect();
                    net.coordinates = vec![None; n];
                    seen = vec![false; n];
                    section = Section::Vertices;
                }
                "edges" => {
                    if declared.is_none() {
                        return Err(err(line_no, "*Edges before *Vertices"));
                    }
                    section = Section::Edges;
                }
                other => return Err(err(line_no, format!("unsupported section *{other}"))),
            }
            continue;
        }
        let n = declared.unwrap_or(0);
        match section {
            Section::Preamble => return Err(err(line_no, "data before *Vertices")),
            Section::Vertices => {
                let (index_tok, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                let i: usize = index_tok
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1 && i <= n)
                    .ok_or_else(|| {
                        err(line_no, format!("vertex index `{index_tok}` out of range"))
                    })?;
                if std::mem::replace(&mut seen[i - 1], true) {
                    return Err(err(line_no, format!("vertex {i} listed twice")));
                }
                let rest = rest.trim_start();
                let (label, tail) = if let Some(q) = rest.strip_prefix('"') {
                    let end = q
                        .find('"')
                        .ok_or_else(|| err(line_no, "unterminated label"))?;
                    (q[..end].to_string(), &q[end + 1..])
                } else {
                    let (l, t) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    (l.to_string(), t)
                };
                if label.is_empty() {
                    return Err(err(line_no, "empty label"));
                }
                net.labels[i - 1] = label;
                let nums: Vec<&str> = tail.split_whitespace().collect();
                match nums.len() {
                    0 => {}
                    2 | 3 => {
                        net.coordinates[i - 1] =
                            Some([finite(nums[0], line_no)?, finite(nums[1], line_no)?]);
                        if nums.len() == 3 {
                            finite(nums[2], line_no)?;
                        }
                    }
                    _ => return Err(err(line_no, "expected x y coordinates")),
                }
            }
            Section::Edges => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() < 2 || toks.len() > 3 {
                    return Err(err(line_no, "expected `i j [w]`"));
                }
                let endpoint = |t: &str| {
                    t.parse::<usize>()
                        .ok()
                        .filter(|&i| i >= 1 && i <= n)
                        .ok_or_else(|| err(line_no, format!("edge endpoint `{t}` out of range")))
                };
                let (a, b) = (endpoint(toks[0])? - 1, endpoint(toks[1])? - 1);
                if a == b {
                    return Err(err(line_no, "self-loop"));
                }
                let w = match toks.get(2) {
                    Some(t) => finite(t, line_no)?,
                    None => 1.0,
                };
                net.edges.push((a.min(b), a.max(b), w));
            }
        }
    }
    if declared.is_none() {
        return Err(err(0, "missing *Vertices"));
    }
    Ok(net)
}

/// Turns a parsed network back into a similarity graph (shares zeroed) and
/// its unit-square positions.
pub fn graph_from_pajek(
    net: &PajekNetwork,
) -> Result<(SimilarityGraph, Vec<[f64; 2]>), ExportError> {
    let mut nodes = Vec::with_capacity(net.labels.len());
    for (i, l) in net.labels.iter().enumerate() {
        let journal: JournalId = normalize_journal_name(l)
            .map_err(|_| err(i + 1, format!("label `{l}` is not a journal id")))?;
        nodes.push(GraphNode {
            journal,
            share_total: 0.0,
            share_excl_self: 0.0,
            group: None,
        });
    }
    let edges = net
        .edges
        .iter()
        .map(|&(source, target, weight)| Edge {
            source,
            target,
            weight,
        })
        .collect();
    let positions = net
        .coordinates
        .iter()
        .map(|c| c.unwrap_or([0.5, 0.5]))
        .collect();
    Ok((SimilarityGraph { nodes, edges }, positions))
}
