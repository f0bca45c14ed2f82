//! Principal-component decomposition of cited patterns: correlation of the
//! matrix columns, Kaiser retention, varimax rotation (optionally with
//! Kaiser row normalization) and loading-cutoff assignment.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::environment::{pearson, CitationMatrix, ImpactShare};
use crate::ingest::{csv_writer, finish, JournalId};
use crate::linalg::{eigen_symmetric, orient_columns, LinalgError};

pub const DEFAULT_LOADING_CUTOFF: f64 = 0.4;
pub const KAISER_EIGENVALUE: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("need at least two journals, got {0}")]
    TooSmall(usize),
    #[error("cited pattern of {0} has zero variance")]
    ZeroVariance(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no eigenvalue exceeds 1")]
    NoComponentsRetained,
    #[error("loading cutoff {0} outside (0, 1)")]
    InvalidCutoff(f64),
}

/// Pearson correlations between cited-pattern columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub journals: Vec<JournalId>,
    pub r: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSolution {
    pub journals: Vec<JournalId>,
    /// Journal x factor.
    pub loadings: DMatrix<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Per-factor fraction of total variance (sum of squared loadings / n).
    pub explained_variance: Vec<f64>,
    /// Orthogonal k x k matrix taking unrotated to current loadings.
    pub rotation: DMatrix<f64>,
    pub converged: bool,
    /// Varimax criterion before the first sweep and after each sweep.
    pub criterion_trace: Vec<f64>,
}

impl FactorSolution {
    pub fn factors(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn total_explained(&self) -> f64 {
        self.explained_variance.iter().sum()
    }

    pub fn communalities(&self) -> Vec<f64> {
        communalities(&self.loadings)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorAssignment {
    pub journal: JournalId,
    /// 1-based factor indices.
    pub factors: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarimaxOptions {
    pub kaiser_normalize: bool,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        Self {
            kaiser_normalize: true,
            max_sweeps: 100,
            tol: 1e-10,
        }
    }
}

pub fn correlation_matrix(
    m: &CitationMatrix,
    include_diagonal: bool,
) -> Result<CorrelationMatrix, FactorError> {
    correlation_of_columns(&m.journals, &m.to_real(include_diagonal))
}

pub fn correlation_of_columns(
    journals: &[JournalId],
    data: &DMatrix<f64>,
) -> Result<CorrelationMatrix, FactorError> {
    let n = data.ncols();
    if n < 2 {
        return Err(FactorError::TooSmall(n));
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| data.column(j).iter().copied().collect())
        .collect();
    let mut r = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = pearson(&cols[i], &cols[j]).ok_or_else(|| {
                let bad = if pearson(&cols[i], &cols[i]).is_none() {
                    i
                } else {
                    j
                };
                FactorError::ZeroVariance(journals[bad].to_string())
            })?;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix {
        journals: journals.to_vec(),
        r,
    })
}

/// Unrotated principal components with eigenvalue > 1. Loading column j is
/// eigenvector j scaled by sqrt(eigenvalue j).
pub fn principal_components(r: &CorrelationMatrix) -> Result<FactorSolution, FactorError> {
    let n = r.r.nrows();
    let eig = eigen_symmetric(&r.r)?;
    let k = eig
        .values
        .iter()
        .take_while(|&&l| l > KAISER_EIGENVALUE)
        .count();
    if k == 0 {
        return Err(FactorError::NoComponentsRetained);
    }
    let mut loadings = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        let scale = eig.values[j].sqrt();
        loadings.set_column(j, &(eig.vectors.column(j) * scale));
    }
    let eigenvalues: Vec<f64> = eig.values[..k].to_vec();
    Ok(FactorSolution {
        journals: r.journals.clone(),
        loadings,
        explained_variance: eigenvalues.iter().map(|l| l / n as f64).collect(),
        eigenvalues,
        rotation: DMatrix::identity(k, k),
        converged: true,
        criterion_trace: Vec::new(),
    })
}

pub fn communalities(loadings: &DMatrix<f64>) -> Vec<f64> {
    loadings.row_iter().map(|r| r.norm_squared()).collect()
}

/// Sum over factors of the variance of squared loadings.
pub fn varimax_criterion(loadings: &DMatrix<f64>) -> f64 {
    let n = loadings.nrows() as f64;
    if n == 0.0 {
        return 0.0;
    }
    loadings
        .column_iter()
        .map(|c| {
            let sq: Vec<f64> = c.iter().map(|x| x * x).collect();
            let mean = sq.iter().sum::<f64>() / n;
            sq.iter().map(|s| s * s).sum::<f64>() / n - mean * mean
        })
        .sum()
}

/// Angle of the planar rotation of columns `p`, `q` that maximizes the
/// criterion in that plane.
fn pair_angle(x: &DMatrix<f64>, p: usize, q: usize) -> f64 {
    let n = x.nrows() as f64;
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..x.nrows() {
        let (xp, xq) = (x[(i, p)], x[(i, q)]);
        let u = xp * xp - xq * xq;
        let v = 2.0 * xp * xq;
        a += u;
        b += v;
        c += u * u - v * v;
        d += 2.0 * u * v;
    }
    let num = d - 2.0 * a * b / n;
    let den = c - (a * a - b * b) / n;
    0.25 * num.atan2(den)
}

fn rotate_pair(m: &mut DMatrix<f64>, p: usize, q: usize, cos: f64, sin: f64) {
    for i in 0..m.nrows() {
        let (mp, mq) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = cos * mp + sin * mq;
        m[(i, q)] = -sin * mp + cos * mq;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarimaxResult {
    pub loadings: DMatrix<f64>,
    pub rotation: DMatrix<f64>,
    pub converged: bool,
    pub criterion_trace: Vec<f64>,
}

/// Varimax by cyclic pairwise planar rotations. Stops when one sweep gains
/// less than `tol`; `converged` is false when `max_sweeps` ran out first.
/// Columns are finally oriented so their largest-magnitude loading is positive.
pub fn varimax_loadings(l: &DMatrix<f64>, opts: &VarimaxOptions) -> VarimaxResult {
    let k = l.ncols();
    if k < 2 {
        return VarimaxResult {
            loadings: l.clone(),
            rotation: DMatrix::identity(k, k),
            converged: true,
            criterion_trace: vec![varimax_criterion(l)],
        };
    }
    let h: Vec<f64> = communalities(l).into_iter().map(f64::sqrt).collect();
    let mut x = l.clone();
    if opts.kaiser_normalize {
        for (i, &hi) in h.iter().enumerate() {
            if hi > 0.0 {
                x.row_mut(i).unscale_mut(hi);
            }
        }
    }
    let mut rotation = DMatrix::<f64>::identity(k, k);
    let mut trace = vec![varimax_criterion(&x)];
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        for p in 0..k {
            for q in (p + 1)..k {
                let phi = pair_angle(&x, p, q);
                if phi == 0.0 {
                    continue;
                }
                let (sin, cos) = phi.sin_cos();
                rotate_pair(&mut x, p, q, cos, sin);
                rotate_pair(&mut rotation, p, q, cos, sin);
            }
        }
        let v = varimax_criterion(&x);
        let gain = v - trace[trace.len() - 1];
        trace.push(v);
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    let mut loadings = l * &rotation;
    let signs = orient_columns(&mut loadings);
    for (j, s) in signs.iter().enumerate() {
        if *s < 0.0 {
            rotation.column_mut(j).neg_mut();
        }
    }
    VarimaxResult {
        loadings,
        rotation,
        converged,
        criterion_trace: trace,
    }
}

/// Rotates a principal-component solution; the returned rotation composes
/// with any rotation already applied.
pub fn varimax(sol: &FactorSolution, opts: &VarimaxOptions) -> FactorSolution {
    let res = varimax_loadings(&sol.loadings, opts);
    let n = sol.loadings.nrows().max(1) as f64;
    FactorSolution {
        journals: sol.journals.clone(),
        explained_variance: res
            .loadings
            .column_iter()
            .map(|c| c.norm_squared() / n)
            .collect(),
        loadings: res.loadings,
        eigenvalues: sol.eigenvalues.clone(),
        rotation: &sol.rotation * res.rotation,
        converged: res.converged,
        criterion_trace: res.criterion_trace,
    }
}

/// Factors on which each journal loads strictly above `cutoff`; negative
/// loadings never count.
pub fn assign_factors(
    journals: &[JournalId],
    loadings: &DMatrix<f64>,
    cutoff: f64,
) -> Result<Vec<FactorAssignment>, FactorError> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(FactorError::InvalidCutoff(cutoff));
    }
    Ok(journals
        .iter()
        .enumerate()
        .map(|(i, j)| FactorAssignment {
            journal: j.clone(),
            factors: (0..loadings.ncols())
                .filter(|&f| loadings[(i, f)] > cutoff)
                .map(|f| f + 1)
                .collect(),
        })
        .collect())
}

/// Sums share_total per group label; journals without a label are skipped.
pub fn group_shares(
    shares: &[ImpactShare],
    groups: &BTreeMap<JournalId, String>,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for s in shares {
        if let Some(g) = groups.get(&s.journal) {
            *out.entry(g.clone()).or_insert(0.0) += s.share_total;
        }
    }
    out
}

fn fmt_loading(x: f64, decimal_comma: bool) -> String {
    // avoid printing "-0.000"
    let x = if x.abs() < 0.0005 { 0.0 } else { x };
    let s = format!("{x:.3}");
    if decimal_comma {
        s.replace('.', ",")
    } else {
        s
    }
}

/// `journal,f1,...,fk,assigned_factors`; assignments are `;`-joined.
pub fn write_loadings(
    sol: &FactorSolution,
    assignments: &[FactorAssignment],
    decimal_comma: bool,
) -> String {
    let mut w = csv_writer(b',');
    let mut header = vec!["journal".to_string()];
    header.extend((1..=sol.factors()).map(|f| format!("f{f}")));
    header.push("assigned_factors".into());
    w.write_record(&header).expect("in-memory write");
    for (i, j) in sol.journals.iter().enumerate() {
        let mut row = vec![j.to_string()];
        row.extend(
            sol.loadings
                .row(i)
                .iter()
                .map(|&x| fmt_loading(x, decimal_comma)),
        );
        let assigned = assignments
            .iter()
            .find(|a| &a.journal == j)
            .map(|a| {
                a.factors
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        row.push(assigned);
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}
