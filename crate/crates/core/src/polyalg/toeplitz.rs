use crate::gf::{Elem, Field};

use super::matrix::{rank_fq, EchelonBasis, Matrix};
use super::PolyAlgError;

/// The block upper-triangular Toeplitz matrix
///
/// ```text
/// M_t = | F_0 F_1 ... F_t     |
///       |  0  F_0 ... F_{t-1} |
///       |  :       .   :      |
///       |  0   0  ... F_0     |
/// ```
///
/// kept as an incrementally reduced column basis so that extending from
/// `M_{t-1}` to `M_t` only eliminates the new block column.
#[derive(Debug, Clone)]
pub struct ToeplitzExpansion {
    block_rows: usize,
    block_cols: usize,
    blocks: Vec<Matrix>,
    basis: EchelonBasis,
    ranks: Vec<usize>,
}

impl ToeplitzExpansion {
    pub fn new(block_rows: usize, block_cols: usize) -> Self {
        ToeplitzExpansion {
            block_rows,
            block_cols,
            blocks: Vec::new(),
            basis: EchelonBasis::new(),
            ranks: Vec::new(),
        }
    }

    /// Current time index, `None` before the first block.
    pub fn t(&self) -> Option<usize> {
        self.blocks.len().checked_sub(1)
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    /// `rank(M_t)`, zero before the first block.
    pub fn rank(&self) -> usize {
        self.ranks.last().copied().unwrap_or(0)
    }

    /// `rank(M_{t-1})` with `rank(M_{-1}) = 0`.
    pub fn previous_rank(&self) -> usize {
        match self.ranks.len() {
            0 | 1 => 0,
            n => self.ranks[n - 2],
        }
    }

    /// `rank(M_t) - rank(M_{t-1})`.
    pub fn increment(&self) -> usize {
        self.rank() - self.previous_rank()
    }

    /// Appends `F_{t+1}` and returns the new rank.
    pub fn push(&mut self, field: &Field, block: Matrix) -> Result<usize, PolyAlgError> {
        if block.rows() != self.block_rows || block.cols() != self.block_cols {
            return Err(PolyAlgError::DimensionMismatch {
                expected: (self.block_rows, self.block_cols),
                found: (block.rows(), block.cols()),
            });
        }
        self.blocks.push(block);
        let t = self.blocks.len() - 1;
        let mut rank = self.rank();
        for c in 0..self.block_cols {
            // Column c of block column t: F_t, F_{t-1}, ..., F_0 stacked.
            let mut v = Vec::with_capacity((t + 1) * self.block_rows);
            for i in 0..=t {
                v.extend(self.blocks[t - i].column(c));
            }
            if self.basis.insert(field, v) {
                rank += 1;
            }
        }
        self.ranks.push(rank);
        Ok(rank)
    }

    /// The explicit matrix `M_t`.
    pub fn dense(&self) -> Matrix {
        let Some(t) = self.t() else {
            return Matrix::zeros(0, 0);
        };
        let (m, c) = (self.block_rows, self.block_cols);
        Matrix::from_fn((t + 1) * m, (t + 1) * c, |r, col| {
            let (bi, ri) = (r / m, r % m);
            let (bj, cj) = (col / c, col % c);
            if bj >= bi {
                self.blocks[bj - bi].get(ri, cj)
            } else {
                Elem::ZERO
            }
        })
    }
}

/// Builds `M_t` from `F_0..=F_t`.
pub fn build_toeplitz(field: &Field, blocks: &[Matrix]) -> Result<ToeplitzExpansion, PolyAlgError> {
    let first = blocks.first().ok_or(PolyAlgError::Empty)?;
    let mut exp = ToeplitzExpansion::new(first.rows(), first.cols());
    for b in blocks {
        exp.push(field, b.clone())?;
    }
    Ok(exp)
}

/// Rank test for decodability at time `t` given `F_0..=F_t`:
/// `rank(F_0 ... F_t) = m` and `rank(M_t) - rank(M_{t-1}) = m`.
pub fn decodable(field: &Field, blocks: &[Matrix], m: usize) -> bool {
    if blocks.is_empty() {
        return false;
    }
    if rank_fq(field, &Matrix::hconcat(blocks)) != m {
        return false;
    }
    match build_toeplitz(field, blocks) {
        Ok(exp) => exp.increment() == m,
        Err(_) => false,
    }
}

/// Per-sink incremental form of [`decodable`]: feed one coefficient matrix
/// per time step.
#[derive(Debug, Clone)]
pub struct DecodabilityTracker {
    rate: usize,
    concat: EchelonBasis,
    toeplitz: ToeplitzExpansion,
}

impl DecodabilityTracker {
    pub fn new(rate: usize, in_degree: usize) -> Self {
        DecodabilityTracker {
            rate,
            concat: EchelonBasis::new(),
            toeplitz: ToeplitzExpansion::new(rate, in_degree),
        }
    }

    /// Appends `F_t` and reports whether the sink can decode at `t`.
    pub fn push(&mut self, field: &Field, block: Matrix) -> Result<bool, PolyAlgError> {
        for c in 0..block.cols() {
            self.concat.insert(field, block.column(c));
        }
        self.toeplitz.push(field, block)?;
        Ok(self.condition_one() && self.condition_two())
    }

    pub fn condition_one(&self) -> bool {
        self.concat.rank() == self.rate
    }

    pub fn condition_two(&self) -> bool {
        self.toeplitz.t().is_some() && self.toeplitz.increment() == self.rate
    }

    pub fn toeplitz(&self) -> &ToeplitzExpansion {
        &self.toeplitz
    }
}
