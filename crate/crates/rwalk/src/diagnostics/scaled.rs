//! Continuous-time embeddings of a finite path under the limit scalings.

use crate::error::{Error, Result};
use crate::walks::{CoefficientTable, CoupledPath, Series};
use crate::Component;

use super::scaled_epoch;

/// How a path is normalized when embedded into continuous time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// All three walks as `W_⌊nt⌋ / (σ√n)`; the classical scaling.
    Diffusive,
    /// `N̂_t = n^{p−1/2} (â_⌊nt⌋/Γ(1+p)) Ŝ_⌊nt⌋ / σ`, the scaled reinforced
    /// martingale (degenerate for `p > 1/2`, log-degenerate at `p = 1/2`).
    MartingaleReinforced,
    /// `Ň_t = n^{−p−1/2} (ǎ_⌊nt⌋/Γ(1−p)) Š_⌊nt⌋ / σ`.
    MartingaleCounterbalanced,
    /// `Ŝ_⌊nᵗ⌋ / (σ √(log n) n^{t/2})` with the *exponent* as time; only
    /// defined at `p = 1/2`.
    Critical,
}

/// One path rescaled onto a time grid.
///
/// `values[c][i]` is the value of `components[c]` at `grid[i]`.  Grid points
/// that map to epoch 0 hold exact zeros.
#[derive(Clone, Debug)]
pub struct ScaledPath {
    /// Scaling regime the values were produced under.
    pub regime: Regime,
    /// Number of simulated steps (the scaling index).
    pub n: usize,
    /// Time grid (exponent grid for [`Regime::Critical`]).
    pub grid: Vec<f64>,
    /// Components present, in canonical order.
    pub components: Vec<Component>,
    /// One value row per component.
    pub values: Vec<Vec<f64>>,
}

impl ScaledPath {
    /// Values of `component`, when present.
    pub fn component(&self, component: Component) -> Option<&[f64]> {
        let pos = self.components.iter().position(|c| *c == component)?;
        Some(&self.values[pos])
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("time grid must be nonempty"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("time grid entries must be finite and nonnegative"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Embed one path into continuous time under `regime`.
///
/// The path must record every epoch the grid needs (full recordings always
/// do), the coefficient table must match `p` and cover the path, and the
/// step law must have positive variance.  The grid is strictly increasing
/// with entries in `[0, 1]`; under [`Regime::Critical`] the grid holds
/// exponents, `p` must equal 1/2 exactly, and `n ≥ 2`.
pub fn scaled_paths(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
    grid: &[f64],
    regime: Regime,
) -> Result<ScaledPath> {
    check_grid(grid)?;
    if path.p != coeffs.p() {
        return Err(Error::invalid(format!(
            "coefficient table built for p={}, path simulated with p={}",
            coeffs.p(),
            path.p
        )));
    }
    if path.sigma2 <= 0.0 {
        return Err(Error::invalid(
            "scaling requires a step law with positive variance",
        ));
    }
    let sigma = path.sigma2.sqrt();
    let nf = path.n as f64;

    // Value of `series` at epoch m, resolved through the recording.
    let fetch = |series: Series, m: usize| -> Result<f64> {
        if m == 0 {
            return Ok(0.0);
        }
        path.value(series, m).ok_or_else(|| {
            Error::invalid(format!("epoch {m} is not recorded on this path"))
        })
    };
    let epoch_of = |t: f64| -> Result<usize> {
        let m = scaled_epoch(path.n, t);
        if m > path.n {
            return Err(Error::invalid(format!(
                "grid point {t} needs epoch {m} beyond the path length {}",
                path.n
            )));
        }
        Ok(m)
    };

    let (components, values): (Vec<Component>, Vec<Vec<f64>>) = match regime {
        Regime::Diffusive => {
            let scale = nf.powf(-0.5) / sigma;
            let mut rows = vec![Vec::with_capacity(grid.len()); 3];
            for t in grid {
                let m = epoch_of(*t)?;
                rows[0].push(fetch(Series::S, m)? * scale);
                rows[1].push(fetch(Series::SHat, m)? * scale);
                rows[2].push(fetch(Series::SCheck, m)? * scale);
            }
            (Component::ALL.to_vec(), rows)
        }
        Regime::MartingaleReinforced => {
            if coeffs.n_max() < path.n {
                return Err(Error::invalid("coefficient table does not cover the path"));
            }
            let scale = nf.powf(coeffs.p() - 0.5)
                / (sigma * coeffs.a_hat_power_constant());
            let mut row = Vec::with_capacity(grid.len());
            for t in grid {
                let m = epoch_of(*t)?;
                let v = if m == 0 {
                    0.0
                } else {
                    scale * coeffs.a_hat(m) * fetch(Series::SHat, m)?
                };
                row.push(v);
            }
            (vec![Component::Reinforced], vec![row])
        }
        Regime::MartingaleCounterbalanced => {
            if coeffs.n_max() < path.n {
                return Err(Error::invalid("coefficient table does not cover the path"));
            }
            let scale = nf.powf(-coeffs.p() - 0.5)
                / (sigma * coeffs.a_check_power_constant()?);
            let mut row = Vec::with_capacity(grid.len());
            for t in grid {
                let m = epoch_of(*t)?;
                let v = if m == 0 {
                    0.0
                } else {
                    scale * coeffs.a_check(m)? * fetch(Series::SCheck, m)?
                };
                row.push(v);
            }
            (vec![Component::Counterbalanced], vec![row])
        }
        Regime::Critical => {
            if path.p != 0.5 {
                return Err(Error::invalid(
                    "the critical scaling is only defined at p = 1/2",
                ));
            }
            if path.n < 2 {
                return Err(Error::invalid("the critical scaling needs n >= 2"));
            }
            if grid.last().copied().unwrap_or(0.0) > 1.0 {
                return Err(Error::invalid(
                    "critical exponent grid entries must lie in [0, 1]",
                ));
            }
            let root_log = nf.ln().sqrt();
            let mut row = Vec::with_capacity(grid.len());
            for t in grid {
                // Exponential time: epoch ⌊n^t⌋ (never 0 since n^t ≥ 1).
                let m = scaled_epoch_float(nf.powf(*t));
                let denom = sigma * root_log * nf.powf(t / 2.0);
                row.push(fetch(Series::SHat, m)? / denom);
            }
            (vec![Component::Reinforced], vec![row])
        }
    };

    Ok(ScaledPath {
        regime,
        n: path.n,
        grid: grid.to_vec(),
        components,
        values,
    })
}

/// Floor with a snap window for products that should be integers.
pub(crate) fn scaled_epoch_float(prod: f64) -> usize {
    let nearest = prod.round();
    if (prod - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        prod.floor() as usize
    }
}

/// The largest jump between consecutive grid values of a scaled martingale.
///
/// Only the martingale regimes carry the jump diagnostics (their limits are
/// continuous, so the sup jump must vanish as `n` grows; under the
/// reinforced scaling it decays like `n^{p−1/2}`).
pub fn jump_sup(scaled: &ScaledPath) -> Result<f64> {
    if !matches!(
        scaled.regime,
        Regime::MartingaleReinforced | Regime::MartingaleCounterbalanced
    ) {
        return Err(Error::invalid(
            "jump diagnostics apply to the martingale scaling regimes",
        ));
    }
    let row = &scaled.values[0];
    let mut sup = 0.0f64;
    for w in row.windows(2) {
        sup = sup.max((w[1] - w[0]).abs());
    }
    Ok(sup)
}

/// The grid `{0, 1/n, ..., 1}`; with the integer snap, grid point `i/n`
/// maps to epoch `i` exactly, so jumps are measured at every step.
pub fn dense_unit_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::{build_coefficients, simulate_coupled, ReinforcementParams, StepLaw};

    fn sim(p: f64, n: usize, seed: u64) -> CoupledPath {
        simulate_coupled(&ReinforcementParams::new(p, StepLaw::Rademacher, n, seed)).unwrap()
    }

    // At p = 0 the reinforced martingale scaling must coincide with the
    // diffusive scaling of the plain walk, bit for bit.
    #[test]
    fn zero_p_martingale_scaling_is_diffusive() {
        let path = sim(0.0, 500, 21);
        let coeffs = build_coefficients(0.0, 500).unwrap();
        let grid = [0.1, 0.25, 0.5, 0.75, 1.0];
        let diff = scaled_paths(&path, &coeffs, &grid, Regime::Diffusive).unwrap();
        let mart =
            scaled_paths(&path, &coeffs, &grid, Regime::MartingaleReinforced).unwrap();
        assert_eq!(
            diff.component(Component::Reinforced).unwrap(),
            mart.component(Component::Reinforced).unwrap()
        );
    }

    #[test]
    fn grid_points_snap_to_integer_epochs() {
        let path = sim(0.3, 3, 2);
        let coeffs = build_coefficients(0.3, 3).unwrap();
        // 3 * (1/3) is 0.999... in floating point; it must still hit epoch 1.
        let sp = scaled_paths(
            &path,
            &coeffs,
            &[1.0 / 3.0, 2.0 / 3.0, 1.0],
            Regime::Diffusive,
        )
        .unwrap();
        let s = sp.component(Component::Plain).unwrap();
        let scale = 3f64.powf(-0.5);
        for (i, v) in s.iter().enumerate() {
            assert_eq!(*v, path.s[i + 1] * scale, "grid point {i}");
        }
    }

    #[test]
    fn zero_epoch_values_are_exact_zeros() {
        let path = sim(0.4, 100, 3);
        let coeffs = build_coefficients(0.4, 100).unwrap();
        let sp = scaled_paths(
            &path,
            &coeffs,
            &[0.0, 0.005, 0.5],
            Regime::MartingaleReinforced,
        )
        .unwrap();
        let row = sp.component(Component::Reinforced).unwrap();
        assert_eq!(row[0], 0.0); // t = 0
        assert_eq!(row[1], 0.0); // ⌊100·0.005⌋ = 0
        assert_ne!(row[2], 0.0);
    }

    #[test]
    fn grids_are_validated() {
        let path = sim(0.4, 100, 3);
        let coeffs = build_coefficients(0.4, 100).unwrap();
        for bad in [
            vec![],
            vec![0.5, 0.5],
            vec![0.5, 0.2],
            vec![-0.1, 0.5],
            vec![0.5, f64::NAN],
            vec![0.5, 1.2],
        ] {
            assert!(
                scaled_paths(&path, &coeffs, &bad, Regime::Diffusive).is_err(),
                "grid {bad:?}"
            );
        }
    }

    #[test]
    fn critical_regime_demands_the_critical_p() {
        let coeffs = build_coefficients(0.4, 100).unwrap();
        let path = sim(0.4, 100, 3);
        assert!(scaled_paths(&path, &coeffs, &[0.5, 1.0], Regime::Critical).is_err());

        let coeffs = build_coefficients(0.5, 100).unwrap();
        let path = sim(0.5, 100, 3);
        let sp = scaled_paths(&path, &coeffs, &[0.5, 1.0], Regime::Critical).unwrap();
        // Exponent 1 reads the endpoint: Ŝ_n / (σ √(log n) √n).
        let row = sp.component(Component::Reinforced).unwrap();
        let expect = path.s_hat[100] / ((100f64).ln().sqrt() * 10.0);
        assert!((row[1] - expect).abs() < 1e-15);
        // Exponent 1/2 reads epoch ⌊√n⌋ = 10.
        let expect = path.s_hat[10] / ((100f64).ln().sqrt() * 100f64.powf(0.25));
        assert!((row[0] - expect).abs() < 1e-15);
    }

    // Unperturbed unit steps: every scaled jump is exactly n^{-1/2}.
    #[test]
    fn dense_jump_sup_is_one_step_for_the_plain_walk() {
        let n = 256;
        let path = sim(0.0, n, 9);
        let coeffs = build_coefficients(0.0, n).unwrap();
        let sp = scaled_paths(
            &path,
            &coeffs,
            &dense_unit_grid(n),
            Regime::MartingaleReinforced,
        )
        .unwrap();
        let j = jump_sup(&sp).unwrap();
        assert!((j - (n as f64).powf(-0.5)).abs() < 1e-18, "jump {j}");
    }

    #[test]
    fn jump_sup_rejects_non_martingale_regimes() {
        let path = sim(0.3, 50, 1);
        let coeffs = build_coefficients(0.3, 50).unwrap();
        let sp = scaled_paths(&path, &coeffs, &[0.5, 1.0], Regime::Diffusive).unwrap();
        assert!(jump_sup(&sp).is_err());
    }

    // Sparse recordings work as long as they cover the grid epochs.
    #[test]
    fn sparse_recordings_cover_sparse_grids() {
        let full = simulate_coupled(&ReinforcementParams::new(
            0.3,
            StepLaw::Rademacher,
            1000,
            5,
        ))
        .unwrap();
        let sparse = simulate_coupled(
            &ReinforcementParams::new(0.3, StepLaw::Rademacher, 1000, 5)
                .with_indices(vec![250, 500, 1000]),
        )
        .unwrap();
        let coeffs = build_coefficients(0.3, 1000).unwrap();
        let grid = [0.25, 0.5, 1.0];
        let a = scaled_paths(&full, &coeffs, &grid, Regime::MartingaleReinforced).unwrap();
        let b = scaled_paths(&sparse, &coeffs, &grid, Regime::MartingaleReinforced).unwrap();
        assert_eq!(a.values, b.values);

        let missing = scaled_paths(&sparse, &coeffs, &[0.1], Regime::MartingaleReinforced);
        assert!(missing.is_err());
    }
}
