//! Symmetric matrices with block indexing.
//!
//! An `(m*p) x (m*p)` symmetric matrix is viewed as a `p x p` grid of
//! `m x m` blocks. Block `(i, j)` of `A` is `A[(i*m + r, j*m + s)]` for
//! `r, s = 0..m` (zero-based; node-major, lag-minor layout).

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

/// Symmetric real matrix of size `(m*p) x (m*p)` with `m x m` block structure.
///
/// Symmetry is exact: construction mirrors the upper triangle into the lower
/// triangle, so `data[(k, l)]` and `data[(l, k)]` are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSymMatrix {
    data: DMatrix<f64>,
    p: usize,
    m: usize,
}

impl BlockSymMatrix {
    /// Wraps a matrix that is expected to be symmetric already.
    ///
    /// Fails if the maximum asymmetry exceeds `sym_tol`; then mirrors the
    /// upper triangle down so symmetry holds bitwise.
    pub fn from_matrix(mut data: DMatrix<f64>, p: usize, m: usize, sym_tol: f64) -> Result<Self> {
        let n = p * m;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} matrix for p={p}, m={m}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let mut max_asym = 0.0f64;
        for k in 0..n {
            for l in (k + 1)..n {
                max_asym = max_asym.max((data[(k, l)] - data[(l, k)]).abs());
            }
        }
        if max_asym > sym_tol {
            return Err(Error::NotSymmetric { max_asym });
        }
        mirror_upper(&mut data);
        Ok(Self { data, p, m })
    }

    /// Builds from a matrix by averaging `A` and `A^T` first.
    pub fn symmetrized(mut data: DMatrix<f64>, p: usize, m: usize) -> Result<Self> {
        let n = p * m;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} matrix for p={p}, m={m}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        for k in 0..n {
            for l in (k + 1)..n {
                let v = 0.5 * (data[(k, l)] + data[(l, k)]);
                data[(k, l)] = v;
            }
        }
        mirror_upper(&mut data);
        Ok(Self { data, p, m })
    }

    pub fn identity(p: usize, m: usize) -> Self {
        Self {
            data: DMatrix::identity(p * m, p * m),
            p,
            m,
        }
    }

    pub fn zeros(p: usize, m: usize) -> Self {
        Self {
            data: DMatrix::zeros(p * m, p * m),
            p,
            m,
        }
    }

    /// Number of node blocks per side.
    pub fn num_blocks(&self) -> usize {
        self.p
    }

    /// Side length of each block.
    pub fn block_size(&self) -> usize {
        self.m
    }

    /// Full matrix dimension `m * p`.
    pub fn dim(&self) -> usize {
        self.p * self.m
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// View of block `(i, j)`, zero-based node indices.
    pub fn block(&self, i: usize, j: usize) -> DMatrixView<'_, f64> {
        debug_assert!(i < self.p && j < self.p);
        self.data.view((i * self.m, j * self.m), (self.m, self.m))
    }

    /// Frobenius norm of block `(i, j)`.
    pub fn block_norm(&self, i: usize, j: usize) -> f64 {
        self.block(i, j).norm()
    }

    /// Maximum Frobenius norm over off-diagonal blocks `(i, j)`, `i < j`.
    pub fn max_offdiag_block_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                best = best.max(self.block_norm(i, j));
            }
        }
        best
    }

    /// Applies the same symmetric permutation of node blocks to rows and
    /// columns: node `i` of the output is node `perm[i]` of the input.
    pub fn permute_blocks(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p {
            return Err(Error::Dimension(format!(
                "permutation length {} != p {}",
                perm.len(),
                self.p
            )));
        }
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                out.view_mut((i * self.m, j * self.m), (self.m, self.m))
                    .copy_from(&self.block(pi, pj));
            }
        }
        Ok(Self {
            data: out,
            p: self.p,
            m: self.m,
        })
    }
}

fn mirror_upper(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for k in 0..n {
        for l in (k + 1)..n {
            a[(l, k)] = a[(k, l)];
        }
    }
}
