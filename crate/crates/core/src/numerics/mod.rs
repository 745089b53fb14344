//! Matrix kernels, randomized truncated SVD/PCA and descriptive statistics.

mod matrix;
mod stats;
mod svd;

pub use matrix::{CsrBuilder, CsrMatrix, DenseMatrix};
pub use stats::{entropy_bits, stats_block, StatsBlock};
pub use svd::{
    pca_explained, truncated_svd, truncated_svd_op, Centered, LinearOperator, PcaResult, SvdResult, OVERSAMPLING,
    POWER_ITERATIONS,
};

#[cfg(test)]
mod tests;
