//! Cosine similarity between cited patterns and the thresholded,
//! undirected journal graph drawn from it.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::environment::{CitationMatrix, ImpactShare};
use crate::ingest::{csv_writer, finish, normalize_journal_name, JournalId};

pub const DEFAULT_COSINE_CUTOFF: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("cited pattern of {0} is all zero")]
    ZeroVector(String),
    #[error("cosine cutoff {0} outside [0, 1)")]
    InvalidCutoff(f64),
    #[error("{expected} nodes expected, {found} shares given")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub journal: JournalId,
    pub share_total: f64,
    pub share_excl_self: f64,
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Undirected and loop-free; every edge has `source < target`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimilarityGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
}

impl SimilarityGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.source].push(e.target);
            adj[e.target].push(e.source);
        }
        adj
    }

    pub fn index_of(&self, journal: &JournalId) -> Option<usize> {
        self.nodes.iter().position(|n| &n.journal == journal)
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut out = Vec::new();
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let mut comp = vec![start];
            label[start] = out.len();
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = out.len();
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Pairwise cosine of the matrix columns; unit diagonal.
pub fn cosine_matrix(
    m: &CitationMatrix,
    include_diagonal: bool,
) -> Result<DMatrix<f64>, NetworkError> {
    cosine_of_columns(&m.journals, &m.to_real(include_diagonal))
}

pub fn cosine_of_columns(
    journals: &[JournalId],
    data: &DMatrix<f64>,
) -> Result<DMatrix<f64>, NetworkError> {
    let n = data.ncols();
    let norms: Vec<f64> = data.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&x| x == 0.0) {
        return Err(NetworkError::ZeroVector(journals[j].to_string()));
    }
    let mut s = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (data.column(i).dot(&data.column(j)) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// Keeps edge (i, j) when `s[i][j] >= cutoff`. Node order follows `shares`.
pub fn build_graph(
    s: &DMatrix<f64>,
    shares: &[ImpactShare],
    cutoff: f64,
) -> Result<SimilarityGraph, NetworkError> {
    if !(0.0..1.0).contains(&cutoff) {
        return Err(NetworkError::InvalidCutoff(cutoff));
    }
    if s.nrows() != shares.len() || s.ncols() != shares.len() {
        return Err(NetworkError::ShapeMismatch {
            expected: s.nrows(),
            found: shares.len(),
        });
    }
    let nodes = shares
        .iter()
        .map(|sh| GraphNode {
            journal: sh.journal.clone(),
            share_total: sh.share_total,
            share_excl_self: sh.share_excl_self,
            group: None,
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..shares.len() {
        for j in (i + 1)..shares.len() {
            if s[(i, j)] >= cutoff {
                edges.push(Edge {
                    source: i,
                    target: j,
                    weight: s[(i, j)],
                });
            }
        }
    }
    Ok(SimilarityGraph { nodes, edges })
}

/// Attaches group labels (factor or category tags) to matching nodes.
pub fn set_groups(g: &mut SimilarityGraph, groups: &BTreeMap<JournalId, String>) {
    for n in &mut g.nodes {
        n.group = groups.get(&n.journal).cloned();
    }
}

pub fn write_nodes(g: &SimilarityGraph) -> String {
    let mut w = csv_writer(b',');
    w.write_record(["journal", "share_total", "share_excl_self", "group"])
        .expect("in-memory write");
    for n in &g.nodes {
        w.write_record([
            n.journal.to_string(),
            n.share_total.to_string(),
            n.share_excl_self.to_string(),
            n.group.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_edges(g: &SimilarityGraph) -> String {
    let mut w = csv_writer(b',');
    w.write_record(["source", "target", "cosine"])
        .expect("in-memory write");
    for e in &g.edges {
        w.write_record([
            g.nodes[e.source].journal.to_string(),
            g.nodes[e.target].journal.to_string(),
            e.weight.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

fn records<'a>(
    text: &'a str,
    header: &[&str],
) -> Result<csv::StringRecordsIntoIter<&'a [u8]>, NetworkError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let ok = reader
        .headers()
        .map(|h| h.iter().eq(header.iter().copied()))
        .unwrap_or(false);
    if !ok {
        return Err(NetworkError::Parse {
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    Ok(reader.into_records())
}

fn row_error(e: csv::Error) -> NetworkError {
    NetworkError::Parse {
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

fn real(field: &str, line: u64) -> Result<f64, NetworkError> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| NetworkError::Parse {
            line,
            message: format!("invalid number `{field}`"),
        })
}

/// Reads `nodes.csv` and `edges.csv` back into a graph.
pub fn parse_graph(nodes_csv: &str, edges_csv: &str) -> Result<SimilarityGraph, NetworkError> {
    let mut g = SimilarityGraph::default();
    let mut index: HashMap<JournalId, usize> = HashMap::new();
    for row in records(
        nodes_csv,
        &["journal", "share_total", "share_excl_self", "group"],
    )? {
        let row = row.map_err(row_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let journal = normalize_journal_name(&row[0]).map_err(|_| NetworkError::Parse {
            line,
            message: "empty journal".into(),
        })?;
        if index.insert(journal.clone(), g.nodes.len()).is_some() {
            return Err(NetworkError::Parse {
                line,
                message: format!("duplicate node {journal}"),
            });
        }
        g.nodes.push(GraphNode {
            journal,
            share_total: real(&row[1], line)?,
            share_excl_self: real(&row[2], line)?,
            group: Some(row[3].to_string()).filter(|s| !s.is_empty()),
        });
    }
    for row in records(edges_csv, &["source", "target", "cosine"])? {
        let row = row.map_err(row_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let lookup = |f: &str| {
            normalize_journal_name(f)
                .ok()
                .and_then(|j| index.get(&j).copied())
                .ok_or_else(|| NetworkError::Parse {
                    line,
                    message: format!("unknown node `{f}`"),
                })
        };
        let (a, b) = (lookup(&row[0])?, lookup(&row[1])?);
        if a == b {
            return Err(NetworkError::Parse {
                line,
                message: "self-loop".into(),
            });
        }
        let (source, target) = (a.min(b), a.max(b));
        if g.edges
            .iter()
            .any(|e| e.source == source && e.target == target)
        {
            return Err(NetworkError::Parse {
                line,
                message: "duplicate edge".into(),
            });
        }
        g.edges.push(Edge {
            source,
            target,
            weight: real(&row[2], line)?,
        });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn ids(n: usize) -> Vec<JournalId> {
        (0..n)
            .map(|i| JournalId::new(&format!("J{i}")).unwrap())
            .collect()
    }

    fn shares(n: usize) -> Vec<ImpactShare> {
        ids(n)
            .into_iter()
            .map(|journal| ImpactShare {
                journal,
                share_total: 100.0 / n as f64,
                share_excl_self: 50.0 / n as f64,
            })
            .collect()
    }

    #[test]
    fn cosine_cases() {
        let data = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 2.0, 1.0, 3.0, 2.0, 4.0, 0.0, 2.0, 3.0, 6.0, 0.0, 1.0],
        );
        let s = cosine_of_columns(&ids(4), &data).unwrap();
        assert!((s[(0, 1)] - 1.0).abs() < 1e-12);
        // (1,2,3) vs (3,2,1) = 10/14
        assert!((s[(0, 3)] - 10.0 / 14.0).abs() < 1e-12);
        let ortho = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(cosine_of_columns(&ids(2), &ortho).unwrap()[(0, 1)], 0.0);
        let zero = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            cosine_of_columns(&ids(2), &zero),
            Err(NetworkError::ZeroVector("J1".into()))
        );
    }

    #[test]
    fn complete_triangle() {
        let s = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.9 });
        let g = build_graph(&s, &shares(3), 0.2).unwrap();
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn cutoff_boundary() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.19, 0.2, 0.19, 1.0, 0.5, 0.2, 0.5, 1.0]);
        let g = build_graph(&s, &shares(3), 0.2).unwrap();
        let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(pairs, vec![(0, 2), (1, 2)]);
        assert_eq!(
            build_graph(&s, &shares(3), 1.0),
            Err(NetworkError::InvalidCutoff(1.0))
        );
    }

    #[test]
    fn isolated_nodes_stay() {
        let s = DMatrix::identity(3, 3);
        let g = build_graph(&s, &shares(3), 0.2).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert!(g.edges.is_empty());
        assert_eq!(g.components().len(), 3);
    }

    fn two_clusters() -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                1.0
            } else if i / 3 == j / 3 {
                0.8
            } else {
                0.05
            }
        })
    }

    // Oracle: repeated relaxation of labels to the minimum over neighbours.
    fn brute_components(n: usize, edges: &[(usize, usize)]) -> usize {
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for &(a, b) in edges {
                let m = label[a].min(label[b]);
                if label[a] != m || label[b] != m {
                    label[a] = m;
                    label[b] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut distinct = label.clone();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.len()
    }

    #[test]
    fn two_cluster_matrix_splits() {
        let g = build_graph(&two_clusters(), &shares(6), 0.2).unwrap();
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(brute_components(6, &edges), 2);
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn csv_round_trip() {
        let mut g = build_graph(&two_clusters(), &shares(6), 0.2).unwrap();
        set_groups(
            &mut g,
            &BTreeMap::from([(ids(6)[0].clone(), "organic".to_string())]),
        );
        let back = parse_graph(&write_nodes(&g), &write_edges(&g)).unwrap();
        assert_eq!(back, g);
        assert!(parse_graph(
            "journal,share_total,share_excl_self,group\nA,1,1,\n",
            "source,target,cosine\nA,B,0.5\n"
        )
        .is_err());
        assert!(parse_graph(
            "journal,share_total,share_excl_self,group\nA,1,1,\n",
            "source,target,cosine\nA,A,0.5\n"
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn graph_is_undirected_and_pruning_monotone(seed in any::<u64>(), n in 2usize..12, c1 in 0.0f64..0.99, dc in 0.0f64..0.5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data = DMatrix::from_fn(n + 2, n, |_, _| rng.gen_range(0.0..10.0f64).floor() * if rng.gen_bool(0.7) { 1.0 } else { 0.0 } + 0.5);
            let s = cosine_of_columns(&ids(n), &data).unwrap();
            prop_assert!((&s - s.transpose()).amax() == 0.0);
            let low = build_graph(&s, &shares(n), c1).unwrap();
            let high = build_graph(&s, &shares(n), (c1 + dc).min(0.999)).unwrap();
            for e in &low.edges {
                prop_assert!(e.source < e.target);
                prop_assert!(e.weight >= c1 && e.weight <= 1.0);
            }
            for e in &high.edges {
                prop_assert!(low.edges.iter().any(|f| f.source == e.source && f.target == e.target));
            }
        }

        #[test]
        fn planted_blocks_are_components(blocks in 1usize..5, size in 1usize..5, cut in 0.15f64..0.75) {
            let n = blocks * size;
            let s = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if i / size == j / size { 0.8 } else { 0.1 });
            let g = build_graph(&s, &shares(n), cut).unwrap();
            prop_assert_eq!(g.components().len(), blocks);
        }
    }
}
