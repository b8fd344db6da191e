//! Martingale transforms, pathwise brackets, and scaled path regimes.
//!
//! The reinforced and counterbalanced walks are not martingales, but their
//! coefficient multiples `M̂ = âŜ` and `M̌ = ǎŠ` are.  This module turns
//! recorded paths into those martingales, evaluates their pathwise brackets
//! (exact conditional quadratic variations, not realized squares), embeds
//! paths into continuous time under the diffusive, martingale, and critical
//! scalings, and measures the jump sizes that must vanish for the Gaussian
//! limits in [`crate::limits`] to hold.

mod bracket;
mod martingale;
mod scaled;

pub use bracket::{
    bracket_counterbalanced, bracket_mixed, bracket_reinforced, bracket_walk_cross, brackets,
    write_brackets_csv, BracketKind, BracketSeries, BRACKET_CSV_HEADER,
};
pub use martingale::{martingale_transform, MartingaleSeries};
pub use scaled::{dense_unit_grid, jump_sup, scaled_paths, Regime, ScaledPath};

pub(crate) use bracket::{diagonal_increment, mixed_increment};
pub(crate) use scaled::scaled_epoch_float;

/// Epoch `⌊nt⌋`, with values of `n·t` within `1e-9` of an integer snapped to
/// it so that grid points constructed as `i/n` land on epoch `i` exactly.
///
/// This is the epoch [`scaled_paths`] reads for grid point `t`; use it to
/// decide which epochs a restricted recording must keep.
pub fn scaled_epoch(n: usize, t: f64) -> usize {
    scaled::scaled_epoch_float(n as f64 * t)
}
