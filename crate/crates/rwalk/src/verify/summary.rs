//! Single-pass ensemble moments with exactly associative merging.

use crate::diagnostics::ScaledPath;
use crate::error::{Error, Result};
use crate::limits::GaussianEnsemble;
use crate::verify::exact::ExactSum;
use crate::Component;

/// Streaming moment accumulator for vectors of a fixed dimension.
///
/// Keeps exact raw power sums up to total degree four (the fourth-moment
/// sums feed the covariance standard errors), so [`VectorSummary::merge`]
/// is exactly associative: any split of the rows produces bit-identical
/// statistics, which is what makes multi-threaded ensemble reduction
/// deterministic.
#[derive(Clone, Debug)]
pub struct VectorSummary {
    d: usize,
    n: u64,
    s1: Vec<ExactSum>,
    /// `Σ xᵢxⱼ`, packed upper triangle `i ≤ j`.
    s2: Vec<ExactSum>,
    /// `Σ xᵢ²xⱼ`, full `d×d`.
    t21: Vec<ExactSum>,
    /// `Σ xᵢ²xⱼ²`, packed upper triangle.
    t22: Vec<ExactSum>,
    min: Vec<f64>,
    max: Vec<f64>,
}

#[inline]
fn upper(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    i * (2 * d - i + 1) / 2 + (j - i)
}

impl VectorSummary {
    /// Empty summary for `d`-dimensional rows.
    pub fn new(d: usize) -> Self {
        let pairs = d * (d + 1) / 2;
        VectorSummary {
            d,
            n: 0,
            s1: vec![ExactSum::new(); d],
            s2: vec![ExactSum::new(); pairs],
            t21: vec![ExactSum::new(); d * d],
            t22: vec![ExactSum::new(); pairs],
            min: vec![f64::INFINITY; d],
            max: vec![f64::NEG_INFINITY; d],
        }
    }

    /// Row dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of rows seen.
    pub fn count(&self) -> u64 {
        self.n
    }

    /// Fold in one row.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.d, "row dimension mismatch");
        self.n += 1;
        for (i, &x) in row.iter().enumerate() {
            self.s1[i].add(x);
            self.min[i] = self.min[i].min(x);
            self.max[i] = self.max[i].max(x);
            for (j, &y) in row.iter().enumerate() {
                self.t21[i * self.d + j].add(x * x * y);
                if j >= i {
                    let at = upper(self.d, i, j);
                    self.s2[at].add(x * y);
                    self.t22[at].add(x * x * y * y);
                }
            }
        }
    }

    /// Fold another summary in; exactly equivalent to having pushed its
    /// rows, in any order.
    pub fn merge(&mut self, other: &VectorSummary) {
        assert_eq!(self.d, other.d, "summary dimension mismatch");
        self.n += other.n;
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            a.merge(b);
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            a.merge(b);
        }
        for (a, b) in self.t21.iter_mut().zip(&other.t21) {
            a.merge(b);
        }
        for (a, b) in self.t22.iter_mut().zip(&other.t22) {
            a.merge(b);
        }
        for (a, b) in self.min.iter_mut().zip(&other.min) {
            *a = a.min(*b);
        }
        for (a, b) in self.max.iter_mut().zip(&other.max) {
            *a = a.max(*b);
        }
    }

    /// Mean of coordinate `i`.
    pub fn mean(&self, i: usize) -> f64 {
        self.s1[i].value() / self.n as f64
    }

    /// Smallest value of coordinate `i` seen.
    pub fn min(&self, i: usize) -> f64 {
        self.min[i]
    }

    /// Largest value of coordinate `i` seen.
    pub fn max(&self, i: usize) -> f64 {
        self.max[i]
    }

    /// Sample covariance of coordinates `i` and `j` (n−1 denominator).
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        let (i, j) = (i.min(j), i.max(j));
        let sxy = self.s2[upper(self.d, i, j)].value();
        (sxy - self.s1[i].value() * self.s1[j].value() / n) / (n - 1.0)
    }

    /// Central moment `m₂₂ = Σ(x−x̄)²(y−ȳ)²/n`, expanded over the exact raw
    /// sums.
    fn m22(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        let (i, j) = (i.min(j), i.max(j));
        let a = self.mean(i);
        let b = self.mean(j);
        let at = upper(self.d, i, j);
        let t22 = self.t22[at].value();
        let t21 = self.t21[i * self.d + j].value(); // Σ x²y
        let t12 = self.t21[j * self.d + i].value(); // Σ x y²
        let s2xx = self.s2[upper(self.d, i, i)].value();
        let s2yy = self.s2[upper(self.d, j, j)].value();
        let s2xy = self.s2[at].value();
        let s1x = self.s1[i].value();
        let s1y = self.s1[j].value();
        (t22 - 2.0 * b * t21 + b * b * s2xx - 2.0 * a * t12 + 4.0 * a * b * s2xy
            - 2.0 * a * b * b * s1x
            + a * a * s2yy
            - 2.0 * a * a * b * s1y
            + n * a * a * b * b)
            / n
    }

    /// Asymptotic standard error of the sample covariance of `i` and `j`:
    /// `√(max(0, m₂₂ − m₁₁²)/n)`.
    pub fn covariance_se(&self, i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        let m11 = self.covariance(i, j) * (n - 1.0) / n;
        ((self.m22(i, j) - m11 * m11).max(0.0) / n).sqrt()
    }

    /// Standard error of the mean of coordinate `i`.
    pub fn mean_se(&self, i: usize) -> f64 {
        (self.covariance(i, i).max(0.0) / self.n as f64).sqrt()
    }
}

/// Moments of an ensemble on a common component/time layout.
///
/// Variables are ordered component-major, time-ascending within each
/// component block, matching
/// [`covariance_matrix`](crate::limits::covariance_matrix) and
/// [`GaussianEnsemble`] rows.
#[derive(Clone, Debug)]
pub struct EnsembleSummary {
    /// Number of paths summarized.
    pub n_paths: usize,
    /// Evaluation times.
    pub grid: Vec<f64>,
    /// Component blocks, in order.
    pub components: Vec<Component>,
    /// Mean per variable.
    pub mean: Vec<f64>,
    /// Sample covariance matrix (n−1 denominator); symmetric.
    pub covariance: Vec<Vec<f64>>,
    /// Standard error of each covariance entry, from fourth moments.
    pub covariance_se: Vec<Vec<f64>>,
    /// Smallest value per variable.
    pub min: Vec<f64>,
    /// Largest value per variable.
    pub max: Vec<f64>,
}

fn finalize(
    acc: &VectorSummary,
    grid: Vec<f64>,
    components: Vec<Component>,
) -> EnsembleSummary {
    let d = acc.dim();
    let mut covariance = vec![vec![0.0; d]; d];
    let mut covariance_se = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let c = acc.covariance(i, j);
            let se = acc.covariance_se(i, j);
            covariance[i][j] = c;
            covariance[j][i] = c;
            covariance_se[i][j] = se;
            covariance_se[j][i] = se;
        }
    }
    EnsembleSummary {
        n_paths: acc.count() as usize,
        grid,
        components,
        mean: (0..d).map(|i| acc.mean(i)).collect(),
        covariance,
        covariance_se,
        min: (0..d).map(|i| acc.min(i)).collect(),
        max: (0..d).map(|i| acc.max(i)).collect(),
    }
}

/// Summarize a sampled limit ensemble.
///
/// Needs at least two paths for the n−1 covariance.
pub fn empirical_moments(ensemble: &GaussianEnsemble) -> Result<EnsembleSummary> {
    if ensemble.samples.len() < 2 {
        return Err(Error::invalid("need at least two paths to summarize"));
    }
    let d = ensemble.components.len() * ensemble.grid.len();
    let mut acc = VectorSummary::new(d);
    for row in &ensemble.samples {
        if row.len() != d {
            return Err(Error::invalid("ensemble row has the wrong dimension"));
        }
        acc.push(row);
    }
    Ok(finalize(
        &acc,
        ensemble.grid.clone(),
        ensemble.components.clone(),
    ))
}

/// Summarize rescaled walk paths; all paths must share the regime, `n`,
/// grid, and component layout.
pub fn empirical_moments_scaled(paths: &[ScaledPath]) -> Result<EnsembleSummary> {
    if paths.len() < 2 {
        return Err(Error::invalid("need at least two paths to summarize"));
    }
    let first = &paths[0];
    let d = first.components.len() * first.grid.len();
    let mut acc = VectorSummary::new(d);
    let mut row = vec![0.0; d];
    for path in paths {
        if path.regime != first.regime
            || path.n != first.n
            || path.grid != first.grid
            || path.components != first.components
        {
            return Err(Error::invalid(
                "scaled paths disagree on regime, n, grid, or components",
            ));
        }
        for (c, values) in path.values.iter().enumerate() {
            row[c * first.grid.len()..(c + 1) * first.grid.len()].copy_from_slice(values);
        }
        acc.push(&row);
    }
    Ok(finalize(
        &acc,
        first.grid.clone(),
        first.components.clone(),
    ))
}
