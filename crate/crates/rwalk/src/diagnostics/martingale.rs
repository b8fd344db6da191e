//! The martingale transforms of the reinforced and counterbalanced walks.

use crate::error::{Error, Result};
use crate::walks::{CoefficientTable, CoupledPath};

/// The normalized pair `M̂_k = â_k Ŝ_k`, `M̌_k = ǎ_k Š_k` along one path,
/// with `M̂_0 = M̌_0 = 0` by convention.
///
/// Since `â_1 = ǎ_1 = 1`, the first values equal the first step:
/// `M̂_1 = M̌_1 = X_1`.
#[derive(Clone, Debug)]
pub struct MartingaleSeries {
    /// `M̂_0..M̂_n`.
    pub m_hat: Vec<f64>,
    /// `M̌_0..M̌_n`.
    pub m_check: Vec<f64>,
}

/// Check that `coeffs` can normalize `path`: same `p`, enough indices.
pub(crate) fn check_compatible(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
) -> Result<()> {
    if path.p != coeffs.p() {
        return Err(Error::invalid(format!(
            "coefficient table built for p={}, path simulated with p={}",
            coeffs.p(),
            path.p
        )));
    }
    if coeffs.n_max() < path.n {
        return Err(Error::invalid(format!(
            "coefficient table covers n_max={}, path has n={}",
            coeffs.n_max(),
            path.n
        )));
    }
    if !path.is_full() {
        return Err(Error::invalid(
            "martingale and bracket series require a fully recorded path",
        ));
    }
    Ok(())
}

/// Multiply the recorded walks by their normalizing coefficients.
///
/// Requires a fully recorded path, a table built for the same `p` covering
/// `n`, and `p < 1` (the counterbalanced side has no coefficients at
/// `p = 1`).
pub fn martingale_transform(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
) -> Result<MartingaleSeries> {
    check_compatible(path, coeffs)?;
    let a_hat = coeffs.a_hat_slice();
    let a_check = coeffs.a_check_slice()?;
    let mut m_hat = Vec::with_capacity(path.n + 1);
    let mut m_check = Vec::with_capacity(path.n + 1);
    m_hat.push(0.0);
    m_check.push(0.0);
    for k in 1..=path.n {
        m_hat.push(a_hat[k - 1] * path.s_hat[k]);
        m_check.push(a_check[k - 1] * path.s_check[k]);
    }
    Ok(MartingaleSeries { m_hat, m_check })
}
