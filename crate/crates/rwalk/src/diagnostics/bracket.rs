//! Pathwise brackets (conditional quadratic variations) of the martingales.
//!
//! Each bracket increment is an exact conditional second moment of the next
//! martingale increment given the past, evaluated along the realized path.
//! With `q = k − 1` and the step-law variance `σ²`:
//!
//! ```text
//! Δ⟨M̂⟩_1 = σ²
//! Δ⟨M̂⟩_k = â_k² ((1−p)σ² − p²(Ŝ_q/q)² + p V̂_q/q)
//! Δ⟨M̌⟩_k = ǎ_k² ((1−p)σ² − p²(Š_q/q)² + p V̂_q/q)
//! ```
//!
//! (the counterbalanced walk has the same squared steps, so its squared-step
//! sum is `V̂` as well).  The mixed bracket splits each increment into four
//! products of the compensator decompositions of `ΔM̂` and `ΔM̌`:
//!
//! ```text
//! Δ⟨M̂,M̌⟩_k = Ŝ_q dâ_k · Š_q dǎ_k                (a)
//!            + Ŝ_q dâ_k · (−p Š_q/q) ǎ_k          (b)
//!            + Š_q dǎ_k · (p Ŝ_q/q) â_k           (c)
//!            + â_k ǎ_k ((1−p)σ² − p Ǧ_q/q)            (d)
//! ```
//!
//! with `dâ_k = â_k − â_{k−1}`, `dǎ_k = ǎ_k − ǎ_{k−1}`, and first increment
//! `σ²` (at k = 1 every term with `S_0 = 0` vanishes and
//! `E[X̂_1 X̌_1] = E[X_1²] = σ²`).

use std::io::Write;

use crate::error::{Error, Result};
use crate::walks::{CoefficientTable, CoupledPath};
use crate::Component;

use super::martingale::check_compatible;
use super::scaled_epoch;

/// The three bracket series of one path, with the scaling data needed to
/// evaluate their prelimit normalizations.
#[derive(Clone, Debug)]
pub struct BracketSeries {
    /// `⟨M̂⟩_0..⟨M̂⟩_n`; starts at 0, `σ²` after one step, nondecreasing.
    pub qv_hat: Vec<f64>,
    /// `⟨M̌⟩_0..⟨M̌⟩_n`; same shape.
    pub qv_check: Vec<f64>,
    /// `⟨M̂,M̌⟩_0..⟨M̂,M̌⟩_n`; signed, increments Cauchy-Schwarz bounded.
    pub qv_mixed: Vec<f64>,
    n: usize,
    p: f64,
    sigma2: f64,
    c_plus: f64,
    c_minus: f64,
}

/// Which bracket of the scaled pair to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    /// `⟨N̂⟩`, limit `t^{1−2p}/(1−2p)` for `p < 1/2`.
    Reinforced,
    /// `⟨Ň⟩`, limit `t^{1+2p}/(1+2p)`.
    Counterbalanced,
    /// `⟨N̂,Ň⟩`, limit `t(1−p)/(1+p)`.
    Mixed,
}

fn check_centred(path: &CoupledPath) -> Result<()> {
    if path.mean.abs() > 1e-12 {
        return Err(Error::invalid(
            "bracket formulas assume a centred step law",
        ));
    }
    Ok(())
}

fn v_hat_series(path: &CoupledPath) -> Result<&[f64]> {
    path.v_hat.as_deref().ok_or(Error::AuxiliaryRequired)
}

fn g_check_series(path: &CoupledPath) -> Result<&[f64]> {
    path.g_check.as_deref().ok_or(Error::AuxiliaryRequired)
}

/// Per-step conditional variance factor shared by the two diagonal brackets.
#[inline]
pub(crate) fn diagonal_increment(p: f64, sigma2: f64, walk_prev: f64, v_prev: f64, q: f64) -> f64 {
    (1.0 - p) * sigma2 - (p * walk_prev / q).powi(2) + p * v_prev / q
}

/// Mixed-bracket increment at step `k ≥ 2` from the previous-epoch state;
/// `ah`/`ac` are `â_k`/`ǎ_k` and `dah`/`dac` their backward differences.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn mixed_increment(
    p: f64,
    sigma2: f64,
    ah: f64,
    ac: f64,
    dah: f64,
    dac: f64,
    sh: f64,
    sc: f64,
    g: f64,
    q: f64,
) -> f64 {
    sh * dah * sc * dac
        + sh * dah * (-p * sc / q) * ac
        + sc * dac * (p * sh / q) * ah
        + ah * ac * ((1.0 - p) * sigma2 - p * g / q)
}

/// `⟨M̂⟩_0..⟨M̂⟩_n` of one fully recorded path with auxiliaries.
///
/// Valid for every `p` in `[0, 1]`; the law must be centred.
pub fn bracket_reinforced(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
) -> Result<Vec<f64>> {
    check_compatible(path, coeffs)?;
    check_centred(path)?;
    let v = v_hat_series(path)?;
    let a = coeffs.a_hat_slice();
    let mut out = Vec::with_capacity(path.n + 1);
    out.push(0.0);
    if path.n >= 1 {
        out.push(path.sigma2);
    }
    for k in 2..=path.n {
        let q = (k - 1) as f64;
        let inc = a[k - 1].powi(2)
            * diagonal_increment(path.p, path.sigma2, path.s_hat[k - 1], v[k - 1], q);
        out.push(out[k - 1] + inc);
    }
    Ok(out)
}

/// `⟨M̌⟩_0..⟨M̌⟩_n`; refuses at `p = 1` where `ǎ` is undefined.
pub fn bracket_counterbalanced(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
) -> Result<Vec<f64>> {
    check_compatible(path, coeffs)?;
    check_centred(path)?;
    let v = v_hat_series(path)?;
    let a = coeffs.a_check_slice()?;
    let mut out = Vec::with_capacity(path.n + 1);
    out.push(0.0);
    if path.n >= 1 {
        out.push(path.sigma2);
    }
    for k in 2..=path.n {
        let q = (k - 1) as f64;
        let inc = a[k - 1].powi(2)
            * diagonal_increment(path.p, path.sigma2, path.s_check[k - 1], v[k - 1], q);
        out.push(out[k - 1] + inc);
    }
    Ok(out)
}

/// `⟨M̂,M̌⟩_0..⟨M̂,M̌⟩_n`; needs both coefficient sides and the `Ǧ` series.
pub fn bracket_mixed(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
) -> Result<Vec<f64>> {
    check_compatible(path, coeffs)?;
    check_centred(path)?;
    let g = g_check_series(path)?;
    let ah = coeffs.a_hat_slice();
    let ac = coeffs.a_check_slice()?;
    let p = path.p;
    let mut out = Vec::with_capacity(path.n + 1);
    out.push(0.0);
    if path.n >= 1 {
        out.push(path.sigma2);
    }
    for k in 2..=path.n {
        let q = (k - 1) as f64;
        let inc = mixed_increment(
            p,
            path.sigma2,
            ah[k - 1],
            ac[k - 1],
            ah[k - 1] - ah[k - 2],
            ac[k - 1] - ac[k - 2],
            path.s_hat[k - 1],
            path.s_check[k - 1],
            g[k - 1],
            q,
        );
        out.push(out[k - 1] + inc);
    }
    Ok(out)
}

/// All three bracket series of one path.
pub fn brackets(path: &CoupledPath, coeffs: &CoefficientTable) -> Result<BracketSeries> {
    let qv_hat = bracket_reinforced(path, coeffs)?;
    let qv_check = bracket_counterbalanced(path, coeffs)?;
    let qv_mixed = bracket_mixed(path, coeffs)?;
    Ok(BracketSeries {
        qv_hat,
        qv_check,
        qv_mixed,
        n: path.n,
        p: path.p,
        sigma2: path.sigma2,
        c_plus: coeffs.a_hat_power_constant(),
        c_minus: coeffs.a_check_power_constant()?,
    })
}

impl BracketSeries {
    /// Bracket of the scaled martingale pair at time `t ∈ [0, 1]`.
    ///
    /// The scaled martingales divide out `σ`, the power constants, and the
    /// rate `n^{1/2−p}` (resp. `n^{1/2+p}`), so the bracket values are
    ///
    /// ```text
    /// ⟨N̂⟩_t   = n^{2p−1}   ⟨M̂⟩_⌊nt⌋   / (σ² Γ(1+p)²)
    /// ⟨Ň⟩_t   = n^{−1−2p} ⟨M̌⟩_⌊nt⌋   / (σ² Γ(1−p)²)
    /// ⟨N̂,Ň⟩_t = n^{−1}    ⟨M̂,M̌⟩_⌊nt⌋ / (σ² Γ(1+p)Γ(1−p))
    /// ```
    ///
    /// with limits `t^{1−2p}/(1−2p)` (for `p < 1/2`), `t^{1+2p}/(1+2p)`,
    /// and `t(1−p)/(1+p)`.  A time with `⌊nt⌋ = 0` evaluates to 0.
    pub fn scaled(&self, kind: BracketKind, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::invalid("bracket time must be finite and nonnegative"));
        }
        let m = scaled_epoch(self.n, t);
        if m > self.n {
            return Err(Error::invalid(format!(
                "bracket time {t} needs epoch {m} beyond the path length {}",
                self.n
            )));
        }
        if m == 0 {
            return Ok(0.0);
        }
        let nf = self.n as f64;
        Ok(match kind {
            BracketKind::Reinforced => {
                nf.powf(2.0 * self.p - 1.0) * self.qv_hat[m]
                    / (self.sigma2 * self.c_plus * self.c_plus)
            }
            BracketKind::Counterbalanced => {
                nf.powf(-1.0 - 2.0 * self.p) * self.qv_check[m]
                    / (self.sigma2 * self.c_minus * self.c_minus)
            }
            BracketKind::Mixed => {
                self.qv_mixed[m] / (nf * self.sigma2 * self.c_plus * self.c_minus)
            }
        })
    }
}

/// Fixed CSV header of a bracket dump.
pub const BRACKET_CSV_HEADER: &str = "path_id,k,qv_hat,qv_check,qv_mixed";

/// Write one path's bracket series as CSV, one row per epoch.
pub fn write_brackets_csv<W: Write>(
    out: &mut W,
    path_id: u64,
    series: &BracketSeries,
) -> Result<()> {
    use crate::walks::fmt_f64;
    writeln!(out, "{BRACKET_CSV_HEADER}")?;
    for k in 0..=series.n {
        writeln!(
            out,
            "{},{},{},{},{}",
            path_id,
            k,
            fmt_f64(series.qv_hat[k]),
            fmt_f64(series.qv_check[k]),
            fmt_f64(series.qv_mixed[k]),
        )?;
    }
    Ok(())
}

/// Deterministic bracket between a scaled perturbed walk and the scaled
/// plain walk at time `t`.
///
/// The conditional covariance of the next increments is
/// `E(ΔM̂_k X_k | F_{k−1}) = â_k (1−p) σ²` for `k ≥ 2` and exactly `σ²` at
/// `k = 1` (same with `ǎ_k` on the counterbalanced side), so the bracket is
/// a number, not a random series:
///
/// ```text
/// reinforced:      n^{p−1}   σ² (1 + (1−p) Σ_{k=2}^{⌊nt⌋} â_k) / Γ(1+p) → σ² t^{1−p}
/// counterbalanced: n^{−1−p} σ² (1 + (1−p) Σ_{k=2}^{⌊nt⌋} ǎ_k) / Γ(1−p) → σ² (1−p) t^{1+p}/(1+p)
/// ```
///
/// At `p = 1` the counterbalanced side is identically null (the limit
/// vanishes and the normalizing constant diverges), returned as exact 0.
pub fn bracket_walk_cross(
    n: usize,
    t: f64,
    coeffs: &CoefficientTable,
    sigma2: f64,
    side: Component,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("walk-cross bracket needs n >= 1"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("bracket time must be finite and nonnegative"));
    }
    if !sigma2.is_finite() || sigma2 < 0.0 {
        return Err(Error::invalid("sigma2 must be finite and nonnegative"));
    }
    let p = coeffs.p();
    let m = scaled_epoch(n, t);
    if m > coeffs.n_max() {
        return Err(Error::invalid(format!(
            "bracket time {t} needs epoch {m} beyond the coefficient table ({})",
            coeffs.n_max()
        )));
    }
    let nf = n as f64;
    match side {
        Component::Plain => Err(Error::invalid(
            "walk-cross bracket pairs the plain walk with a perturbed component",
        )),
        Component::Reinforced => {
            if m == 0 {
                return Ok(0.0);
            }
            let sum: f64 = coeffs.a_hat_slice()[1..m].iter().sum();
            Ok(nf.powf(p - 1.0) * sigma2 * (1.0 + (1.0 - p) * sum)
                / coeffs.a_hat_power_constant())
        }
        Component::Counterbalanced => {
            if p == 1.0 {
                return Ok(0.0);
            }
            if m == 0 {
                return Ok(0.0);
            }
            let sum: f64 = coeffs.a_check_slice()?[1..m].iter().sum();
            Ok(nf.powf(-1.0 - p) * sigma2 * (1.0 + (1.0 - p) * sum)
                / coeffs.a_check_power_constant()?)
        }
    }
}
