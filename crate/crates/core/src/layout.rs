//! Kamada-Kawai spring layout.
//!
//! Every node pair (i, j) is joined by a spring of rest length `L0 * d_ij`
//! and stiffness `K / d_ij^2`, where `d_ij` is the graph distance. The
//! energy
//!
//! ```text
//! E = sum_{i<j} (K / d_ij^2) * (|p_i - p_j| - L0 * d_ij)^2 / 2
//! ```
//!
//! is minimized one node at a time: the node with the largest gradient norm
//! takes a 2x2 Newton step, halved until the energy does not increase.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::ingest::{csv_writer, finish, normalize_journal_name, JournalId};
use crate::network::SimilarityGraph;

const MAX_HALVINGS: usize = 20;
/// Minimum edge length in the cosine-weighted distance mode.
const MIN_WEIGHTED_LENGTH: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("invalid layout parameter: {0}")]
    InvalidParams(&'static str),
    #[error(
        "distance matrix must be square, symmetric, zero on the diagonal and positive elsewhere"
    )]
    InvalidDistances,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// Display length of one unit of graph distance.
    pub length: f64,
    /// Spring constant scale.
    pub strength: f64,
    /// Stop once every node's gradient norm is below this.
    pub eps: f64,
    /// Cap on node moves.
    pub max_outer: usize,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            length: 1.0,
            strength: 1.0,
            eps: 1e-4,
            max_outer: 20_000,
            seed: 1,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(LayoutError::InvalidParams("length must be positive"));
        }
        if !(self.strength > 0.0 && self.strength.is_finite()) {
            return Err(LayoutError::InvalidParams("strength must be positive"));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(LayoutError::InvalidParams("eps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub positions: Vec<[f64; 2]>,
    pub final_energy: f64,
    pub converged: bool,
    /// Node moves performed.
    pub iterations: usize,
    /// Energy after the initial placement and after each accepted move.
    pub energy_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    #[default]
    Hops,
    /// Shortest paths with edge length `1 - cosine` (floored). Experimental.
    CosineWeighted,
}

/// All-pairs hop distances by BFS. Pairs in different components get one
/// more than the largest finite distance.
pub fn graph_distances(g: &SimilarityGraph) -> DMatrix<f64> {
    let n = g.len();
    let adj = g.adjacency();
    let mut d = DMatrix::<f64>::from_element(n, n, f64::INFINITY);
    for s in 0..n {
        d[(s, s)] = 0.0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if d[(s, v)].is_infinite() {
                    d[(s, v)] = d[(s, u)] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    fill_disconnected(&mut d);
    d
}

/// Dijkstra over `max(1 - cosine, 0.05)` edge lengths.
pub fn weighted_distances(g: &SimilarityGraph) -> DMatrix<f64> {
    let n = g.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &g.edges {
        let w = (1.0 - e.weight).max(MIN_WEIGHTED_LENGTH);
        adj[e.source].push((e.target, w));
        adj[e.target].push((e.source, w));
    }
    let mut d = DMatrix::<f64>::from_element(n, n, f64::INFINITY);
    for s in 0..n {
        let mut heap = BinaryHeap::from([Reverse((OrdF64(0.0), s))]);
        d[(s, s)] = 0.0;
        while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
            if du > d[(s, u)] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = du + w;
                if nd < d[(s, v)] {
                    d[(s, v)] = nd;
                    heap.push(Reverse((OrdF64(nd), v)));
                }
            }
        }
    }
    fill_disconnected(&mut d);
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn fill_disconnected(d: &mut DMatrix<f64>) {
    let max_finite = d
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max);
    let far = if max_finite > 0.0 {
        max_finite + 1.0
    } else {
        1.0
    };
    for x in d.iter_mut() {
        if x.is_infinite() {
            *x = far;
        }
    }
}

pub fn distances(g: &SimilarityGraph, mode: DistanceMode) -> DMatrix<f64> {
    match mode {
        DistanceMode::Hops => graph_distances(g),
        DistanceMode::CosineWeighted => weighted_distances(g),
    }
}

fn check_distances(d: &DMatrix<f64>) -> Result<(), LayoutError> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(LayoutError::InvalidDistances);
    }
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(LayoutError::InvalidDistances);
        }
        for j in (i + 1)..n {
            let x = d[(i, j)];
            if !(x > 0.0 && x.is_finite()) || (x - d[(j, i)]).abs() > 1e-12 {
                return Err(LayoutError::InvalidDistances);
            }
        }
    }
    Ok(())
}

/// Spring energy of `positions` for distances `d`.
pub fn layout_energy(positions: &[[f64; 2]], d: &DMatrix<f64>, p: &LayoutParams) -> f64 {
    let n = positions.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d[(i, j)];
            let k = p.strength / (dij * dij);
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let gap = (dx * dx + dy * dy).sqrt() - p.length * dij;
            e += 0.5 * k * gap * gap;
        }
    }
    e
}

/// Energy terms involving node `m` only.
fn node_energy(
    m: usize,
    at: [f64; 2],
    pos: &[[f64; 2]],
    d: &DMatrix<f64>,
    p: &LayoutParams,
) -> f64 {
    let mut e = 0.0;
    for (i, q) in pos.iter().enumerate() {
        if i == m {
            continue;
        }
        let dij = d[(m, i)];
        let k = p.strength / (dij * dij);
        let dx = at[0] - q[0];
        let dy = at[1] - q[1];
        let gap = (dx * dx + dy * dy).sqrt() - p.length * dij;
        e += 0.5 * k * gap * gap;
    }
    e
}

struct Derivatives {
    gx: f64,
    gy: f64,
    hxx: f64,
    hxy: f64,
    hyy: f64,
}

fn derivatives(m: usize, pos: &[[f64; 2]], d: &DMatrix<f64>, p: &LayoutParams) -> Derivatives {
    let mut out = Derivatives {
        gx: 0.0,
        gy: 0.0,
        hxx: 0.0,
        hxy: 0.0,
        hyy: 0.0,
    };
    for (i, q) in pos.iter().enumerate() {
        if i == m {
            continue;
        }
        let dij = d[(m, i)];
        let k = p.strength / (dij * dij);
        let l = p.length * dij;
        let dx = pos[m][0] - q[0];
        let dy = pos[m][1] - q[1];
        let r2 = dx * dx + dy * dy;
        let r = r2.sqrt();
        if r < 1e-12 {
            // coincident: the spring only pushes; curvature is k in every direction
            out.hxx += k;
            out.hyy += k;
            continue;
        }
        let r3 = r2 * r;
        out.gx += k * (dx - l * dx / r);
        out.gy += k * (dy - l * dy / r);
        out.hxx += k * (1.0 - l * dy * dy / r3);
        out.hxy += k * l * dx * dy / r3;
        out.hyy += k * (1.0 - l * dx * dx / r3);
    }
    out
}

fn gradient_norm(m: usize, pos: &[[f64; 2]], d: &DMatrix<f64>, p: &LayoutParams) -> f64 {
    let g = derivatives(m, pos, d, p);
    g.gx.hypot(g.gy)
}

/// Circle of radius `L0 * max(d) / 2`, jittered by seeded noise.
pub fn initial_positions(d: &DMatrix<f64>, p: &LayoutParams) -> Vec<[f64; 2]> {
    let n = d.nrows();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed);
    let max_d = d.iter().copied().fold(0.0, f64::max).max(1.0);
    let radius = p.length * max_d / 2.0;
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n.max(1) as f64;
            let jitter = 0.1 * p.length;
            [
                radius * a.cos() + rng.gen_range(-jitter..=jitter),
                radius * a.sin() + rng.gen_range(-jitter..=jitter),
            ]
        })
        .collect()
}

pub fn kamada_kawai(d: &DMatrix<f64>, p: &LayoutParams) -> Result<LayoutResult, LayoutError> {
    kamada_kawai_from(d, p, initial_positions(d, p))
}

/// Coincident nodes have a zero gradient, so nudge them apart first.
fn separate_coincident(pos: &mut [[f64; 2]], p: &LayoutParams) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed);
    let nudge = 1e-3 * p.length;
    for i in 1..pos.len() {
        while pos[..i]
            .iter()
            .any(|q| (q[0] - pos[i][0]).hypot(q[1] - pos[i][1]) < 1e-9)
        {
            pos[i][0] += rng.gen_range(-nudge..=nudge);
            pos[i][1] += rng.gen_range(-nudge..=nudge);
        }
    }
}

/// Runs the optimization from given starting positions.
pub fn kamada_kawai_from(
    d: &DMatrix<f64>,
    p: &LayoutParams,
    mut pos: Vec<[f64; 2]>,
) -> Result<LayoutResult, LayoutError> {
    p.validate()?;
    check_distances(d)?;
    let n = d.nrows();
    if pos.len() != n {
        return Err(LayoutError::InvalidParams(
            "initial positions do not match distances",
        ));
    }
    separate_coincident(&mut pos, p);
    let mut energy = layout_energy(&pos, d, p);
    let mut trace = vec![energy];
    let mut grads: Vec<f64> = (0..n).map(|m| gradient_norm(m, &pos, d, p)).collect();
    // nodes whose last move attempt failed; retried after any other node moves
    let mut stuck = vec![false; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < p.max_outer {
        let max_grad = grads.iter().copied().fold(0.0, f64::max);
        if max_grad < p.eps {
            converged = true;
            break;
        }
        let Some(m) = (0..n)
            .filter(|&i| !stuck[i])
            .max_by(|&a, &b| grads[a].total_cmp(&grads[b]).then(b.cmp(&a)))
            .filter(|&i| grads[i] >= p.eps)
        else {
            break;
        };
        iterations += 1;

        let der = derivatives(m, &pos, d, p);
        let before = node_energy(m, pos[m], &pos, d, p);
        let det = der.hxx * der.hyy - der.hxy * der.hxy;
        let newton = if det.abs() > 1e-12 {
            let dx = (-der.gx * der.hyy + der.gy * der.hxy) / det;
            let dy = (der.gx * der.hxy - der.gy * der.hxx) / det;
            // only a descent direction is useful
            (dx * der.gx + dy * der.gy < 0.0).then_some([dx, dy])
        } else {
            None
        };
        let curvature = der.hxx.abs().max(der.hyy.abs()).max(1e-12);
        let gradient_step = [-der.gx / curvature, -der.gy / curvature];

        let mut moved = false;
        for step in newton.into_iter().chain(std::iter::once(gradient_step)) {
            let mut scale = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let cand = [pos[m][0] + scale * step[0], pos[m][1] + scale * step[1]];
                let after = node_energy(m, cand, &pos, d, p);
                if after < before {
                    pos[m] = cand;
                    moved = true;
                    break;
                }
                scale *= 0.5;
            }
            if moved {
                break;
            }
        }
        if moved {
            // recompute from scratch so the trace carries no drift
            energy = layout_energy(&pos, d, p);
            trace.push(energy);
            stuck.iter_mut().for_each(|s| *s = false);
            for (i, g) in grads.iter_mut().enumerate() {
                *g = gradient_norm(i, &pos, d, p);
            }
        } else {
            stuck[m] = true;
        }
    }
    if !converged && grads.iter().all(|&g| g < p.eps) {
        converged = true;
    }
    Ok(LayoutResult {
        final_energy: layout_energy(&pos, d, p),
        positions: pos,
        converged,
        iterations,
        energy_trace: trace,
    })
}

/// Gradient norm of every node at `positions`.
pub fn gradient_norms(positions: &[[f64; 2]], d: &DMatrix<f64>, p: &LayoutParams) -> Vec<f64> {
    (0..positions.len())
        .map(|m| gradient_norm(m, positions, d, p))
        .collect()
}

pub fn write_positions(journals: &[JournalId], positions: &[[f64; 2]]) -> String {
    let mut w = csv_writer(b',');
    w.write_record(["journal", "x", "y"])
        .expect("in-memory write");
    for (j, p) in journals.iter().zip(positions) {
        w.write_record([j.to_string(), p[0].to_string(), p[1].to_string()])
            .expect("in-memory write");
    }
    finish(w)
}

pub fn parse_positions(text: &str) -> Result<Vec<(JournalId, [f64; 2])>, LayoutError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let ok = reader
        .headers()
        .map(|h| h.iter().eq(["journal", "x", "y"]))
        .unwrap_or(false);
    if !ok {
        return Err(LayoutError::Parse {
            line: 1,
            message: "expected header `journal,x,y`".into(),
        });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| LayoutError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |m: String| LayoutError::Parse { line, message: m };
        let j = normalize_journal_name(&row[0]).map_err(|_| bad("empty journal".into()))?;
        let coord = |f: &str| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("invalid coordinate `{f}`")))
        };
        out.push((j, [coord(&row[1])?, coord(&row[2])?]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, GraphNode};
    use proptest::prelude::*;
    use rand::Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
        SimilarityGraph {
            nodes: (0..n)
                .map(|i| GraphNode {
                    journal: JournalId::new(&format!("N{i}")).unwrap(),
                    share_total: 1.0,
                    share_excl_self: 1.0,
                    group: None,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|&(a, b)| Edge {
                    source: a,
                    target: b,
                    weight: 0.5,
                })
                .collect(),
        }
    }

    #[test]
    fn distances_triangle_and_path() {
        let tri = graph_distances(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(
            tri,
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0])
        );
        let path = graph_distances(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(path[(0, 2)], 2.0);
    }

    #[test]
    fn disconnected_pairs_get_max_plus_one() {
        let d = graph_distances(&graph(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]));
        assert_eq!(d[(0, 2)], 2.0);
        assert_eq!(d[(0, 3)], 3.0);
        assert_eq!(d[(2, 5)], 3.0);
        let isolated = graph_distances(&graph(3, &[]));
        assert_eq!(isolated[(0, 1)], 1.0);
    }

    #[test]
    fn weighted_distances_follow_cosines() {
        let mut g = graph(3, &[(0, 1), (1, 2)]);
        g.edges[0].weight = 0.9;
        g.edges[1].weight = 0.3;
        let d = weighted_distances(&g);
        assert!((d[(0, 1)] - 0.1).abs() < 1e-12);
        assert!((d[(0, 2)] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn energy_cases() {
        let p = LayoutParams::default();
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(
            layout_energy(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], &d, &p),
            0.0
        );
        assert!(layout_energy(&[[0.0, 0.0]; 3], &d, &p) > 0.0);
    }

    #[test]
    fn energy_matches_direct_summation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]);
        let d = graph_distances(&g);
        let p = LayoutParams {
            length: 1.7,
            strength: 0.6,
            ..Default::default()
        };
        let pos: Vec<[f64; 2]> = (0..5)
            .map(|_| [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
            .collect();
        let mut oracle = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    let dist =
                        ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                    oracle += 0.25 * (0.6 / d[(i, j)].powi(2)) * (dist - 1.7 * d[(i, j)]).powi(2);
                }
            }
        }
        assert!((layout_energy(&pos, &d, &p) - oracle).abs() < 1e-12);
    }

    #[test]
    fn two_nodes_settle_at_rest_length() {
        let p = LayoutParams {
            length: 2.5,
            eps: 1e-9,
            ..Default::default()
        };
        let d = graph_distances(&graph(2, &[(0, 1)]));
        let res = kamada_kawai(&d, &p).unwrap();
        let [a, b] = [res.positions[0], res.positions[1]];
        let sep = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        assert!((sep - 2.5).abs() < 1e-6);
        assert!(res.converged);
    }

    #[test]
    fn rejects_bad_input() {
        let p = LayoutParams {
            length: 0.0,
            ..Default::default()
        };
        let d = graph_distances(&graph(2, &[(0, 1)]));
        assert!(matches!(
            kamada_kawai(&d, &p),
            Err(LayoutError::InvalidParams(_))
        ));
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert_eq!(
            kamada_kawai(&bad, &LayoutParams::default()),
            Err(LayoutError::InvalidDistances)
        );
    }

    #[test]
    fn trivial_sizes() {
        let p = LayoutParams::default();
        let empty = kamada_kawai(&DMatrix::zeros(0, 0), &p).unwrap();
        assert!(empty.positions.is_empty() && empty.converged);
        let one = kamada_kawai(&DMatrix::zeros(1, 1), &p).unwrap();
        assert_eq!(one.positions.len(), 1);
        assert_eq!(one.final_energy, 0.0);
    }

    #[test]
    fn coincident_start_still_descends() {
        let d = graph_distances(&graph(3, &[(0, 1), (1, 2)]));
        let p = LayoutParams::default();
        let res = kamada_kawai_from(&d, &p, vec![[0.0, 0.0]; 3]).unwrap();
        assert!(res.final_energy < layout_energy(&[[0.0, 0.0]; 3], &d, &p));
    }

    #[test]
    fn positions_csv_round_trip() {
        let ids: Vec<JournalId> = ["A", "B"]
            .iter()
            .map(|s| JournalId::new(s).unwrap())
            .collect();
        let pos = vec![[0.1 + 0.2, -1e-300], [1.0 / 3.0, 2.0]];
        let back = parse_positions(&write_positions(&ids, &pos)).unwrap();
        assert_eq!(back, ids.into_iter().zip(pos).collect::<Vec<_>>());
        assert!(parse_positions("journal,x,y\nA,nan,1\n").is_err());
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..9).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect();
            (
                Just(n),
                prop::sample::subsequence(pairs.clone(), 0..=pairs.len()),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn energy_never_increases_and_converged_means_flat((n, edges) in random_graph(), seed in 0u64..1000) {
            let d = graph_distances(&graph(n, &edges));
            let p = LayoutParams { seed, ..Default::default() };
            let res = kamada_kawai(&d, &p).unwrap();
            for w in res.energy_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            if res.converged {
                prop_assert!(gradient_norms(&res.positions, &d, &p).iter().all(|&g| g < p.eps));
            }
            prop_assert!(res.positions.iter().all(|q| q[0].is_finite() && q[1].is_finite()));
            let again = kamada_kawai(&d, &p).unwrap();
            prop_assert_eq!(again, res);
        }

        #[test]
        fn energy_is_rigid_motion_invariant((n, edges) in random_graph(), theta in 0.0f64..6.3, tx in -50.0f64..50.0, ty in -50.0f64..50.0) {
            let d = graph_distances(&graph(n, &edges));
            let p = LayoutParams::default();
            let pos = initial_positions(&d, &p);
            let (s, c) = theta.sin_cos();
            let moved: Vec<[f64; 2]> = pos.iter().map(|q| [c * q[0] - s * q[1] + tx, s * q[0] + c * q[1] + ty]).collect();
            prop_assert!((layout_energy(&pos, &d, &p) - layout_energy(&moved, &d, &p)).abs() < 1e-9);
        }
    }
}
