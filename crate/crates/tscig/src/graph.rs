//! Edge extraction from block precision matrices and edge-set scoring.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matrix::BlockSymMatrix;

/// Default block-norm threshold when reading edges from the W iterate,
/// which carries exact zeros.
pub const W_EDGE_TOL: f64 = 1e-6;

/// Undirected edge set over nodes `1..=p` (stored zero-based, no self-loops).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(p: usize, pairs: I) -> Result<Self> {
        let mut set = Self::new(p);
        for (i, j) in pairs {
            set.insert(i, j)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Dimension(format!("self-loop on node {i}")));
        }
        if i >= self.p || j >= self.p {
            return Err(Error::Dimension(format!(
                "edge ({i},{j}) out of range for p={}",
                self.p
            )));
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Sorted iteration over zero-based pairs `(i, j)`, `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn intersection_size(&self, other: &EdgeSet) -> usize {
        self.edges.intersection(&other.edges).count()
    }

    /// Fraction of connected node pairs.
    pub fn density(&self) -> f64 {
        let pairs = self.p * (self.p - 1) / 2;
        self.edges.len() as f64 / pairs as f64
    }

    /// Relabels nodes: node `i` of the output is node `perm[i]` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p {
            return Err(Error::Dimension("permutation length mismatch".into()));
        }
        let mut inv = vec![0usize; self.p];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        Self::from_pairs(self.p, self.edges.iter().map(|&(i, j)| (inv[i], inv[j])))
    }
}

/// Scores plus the experiment-cell metadata a harness row carries.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricsRecord {
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub replicate: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub runtime_ms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MetricsRecord {
    fn from_scores(precision: f64, recall: f64, f1: f64) -> Self {
        Self {
            method: String::new(),
            n: 0,
            d: 0,
            lambda: 0.0,
            alpha: 0.0,
            replicate: 0,
            precision,
            recall,
            f1,
            runtime_ms: 0.0,
            converged: false,
            iterations: 0,
        }
    }
}

/// Reads the edge set off a block precision matrix: edge `{i,j}` iff
/// `‖Ω^(ij)‖_F > tol`, blocks `i < j` only.
pub fn infer_edges(omega: &BlockSymMatrix, tol: f64) -> EdgeSet {
    let p = omega.num_blocks();
    let mut set = EdgeSet::new(p);
    for i in 0..p {
        for j in (i + 1)..p {
            if omega.block_norm(i, j) > tol {
                set.edges.insert((i, j));
            }
        }
    }
    set
}

/// Edge readout from the Ω̂ iterate, which has no exact zeros: threshold at
/// `1e-3` of the largest off-diagonal block norm.
pub fn infer_edges_from_estimate(omega: &BlockSymMatrix) -> EdgeSet {
    infer_edges(omega, 1e-3 * omega.max_offdiag_block_norm())
}

/// Precision / recall / F1 of `est` against `truth`.
///
/// Conventions: an empty estimate scores precision 1 iff the truth is also
/// empty; both empty scores F1 = 1; precision + recall = 0 scores F1 = 0.
pub fn score(est: &EdgeSet, truth: &EdgeSet) -> Result<MetricsRecord> {
    if est.num_nodes() != truth.num_nodes() {
        return Err(Error::Dimension(format!(
            "edge sets over different node counts: {} vs {}",
            est.num_nodes(),
            truth.num_nodes()
        )));
    }
    let overlap = est.intersection_size(truth) as f64;
    let precision = if est.is_empty() {
        if truth.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        overlap / est.len() as f64
    };
    let recall = if truth.is_empty() {
        if est.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        overlap / truth.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricsRecord::from_scores(precision, recall, f1))
}
