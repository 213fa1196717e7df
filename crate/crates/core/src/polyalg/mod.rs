//! Polynomials and polynomial matrices over `F_q`: truncated convolution,
//! rank over `F_q`, the block-Toeplitz decodability test, an exact
//! determinant, and the sequential decoder.

mod decode;
mod matrix;
mod poly;
mod polymatrix;
mod toeplitz;

pub use decode::{encode, select_columns, sequential_decode, Decoded};
pub use matrix::{rank_fq, EchelonBasis, Matrix};
pub use poly::{poly_mul_trunc, series_inverse, Poly};
pub use polymatrix::{det_oracle, PolyMatrix};
pub use toeplitz::{build_toeplitz, decodable, DecodabilityTracker, ToeplitzExpansion};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyAlgError {
    #[error("block has shape {found:?}, expected {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("no coefficient matrices supplied")]
    Empty,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("determinant is zero")]
    Singular,
    #[error("decoding delay {delay} exceeds horizon {horizon}")]
    HorizonTooShort { delay: usize, horizon: usize },
    #[error("received stream has {found} symbols, {needed} needed")]
    StreamTooShort { needed: usize, found: usize },
    #[error("received stream is not in the code generated by the kernel matrix")]
    Inconsistent,
    #[error("{cols} incoming channels cannot carry rate {rate}")]
    TooFewColumns { rate: usize, cols: usize },
    #[error("no column subset has a nonzero determinant")]
    NoFullRankSubset,
}
