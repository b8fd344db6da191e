//! The Gaussian limit triplet: covariance kernels, grid assembly, and
//! samplers.
//!
//! The diffusively scaled walk triplet converges to a correlated Gaussian
//! triplet `(B, B̂, B̌)`.  This module pins that limit down concretely:
//! closed-form covariance kernels on component/time pairs, covariance
//! matrices on finite grids, and three ways of drawing from the law (exact
//! coloring, Euler discretization of the integral representation, and the
//! Brownian time change of the reinforced component).

mod kernel;
mod sampler;

pub use kernel::{
    covariance_matrix, driver_correlation, kernel_json, limit_covariance, sym3_eigenvalues,
    LimitCovarianceModel, TimeGrid,
};
pub use sampler::{
    cholesky_lower, reinforced_bm_time_change, sample_limit_triplet, write_limit_csv,
    GaussianEnsemble, Method, LIMIT_CSV_HEADER,
};
