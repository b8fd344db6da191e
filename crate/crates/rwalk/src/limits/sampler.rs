//! Exact and approximate samplers for the Gaussian limit triplet.

use rayon::prelude::*;
use std::io::Write as IoWrite;

use crate::error::{Error, Result};
use crate::limits::kernel::{
    covariance_matrix, driver_correlation, LimitCovarianceModel, TimeGrid,
};
use crate::rng::{normal_at, stream_key, Stream};
use crate::walks::fmt_f64;
use crate::Component;

/// How a finite-dimensional draw of the limit triplet is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact: factor the grid covariance and color i.i.d. normals.
    Cholesky,
    /// Left-point Euler discretization of the stochastic integrals with
    /// `steps` uniform substeps per unit time.
    Euler {
        /// Substeps per unit time.
        steps: usize,
    },
    /// Exact for the reinforced component alone, via its Brownian
    /// time-change representation.
    TimeChange,
}

impl Method {
    /// Stable label used in file dumps.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Cholesky => "cholesky",
            Method::Euler { .. } => "euler",
            Method::TimeChange => "time-change",
        }
    }
}

/// A finite-dimensional ensemble of limit-triplet draws on a common grid.
///
/// Each sample row is component-major, time-ascending inside each component
/// block, matching the ordering of
/// [`covariance_matrix`](crate::limits::covariance_matrix).
#[derive(Clone, Debug)]
pub struct GaussianEnsemble {
    /// Memory parameter.
    pub p: f64,
    /// Step-law scale.
    pub sigma: f64,
    /// Base seed of the draw.
    pub seed: u64,
    /// How the rows were produced.
    pub method: Method,
    /// Evaluation times, ascending.
    pub grid: Vec<f64>,
    /// Components present, in block order.
    pub components: Vec<Component>,
    /// One row per path.
    pub samples: Vec<Vec<f64>>,
}

impl GaussianEnsemble {
    /// Value of `component` at grid position `time_idx` on path `path`, or
    /// `None` when the component is absent or an index is out of range.
    pub fn value(&self, path: usize, component: Component, time_idx: usize) -> Option<f64> {
        let block = self.components.iter().position(|c| *c == component)?;
        if time_idx >= self.grid.len() {
            return None;
        }
        self.samples
            .get(path)
            .map(|row| row[block * self.grid.len() + time_idx])
    }

    /// All values of `component` at grid position `time_idx`, one per path.
    pub fn column(&self, component: Component, time_idx: usize) -> Option<Vec<f64>> {
        let block = self.components.iter().position(|c| *c == component)?;
        if time_idx >= self.grid.len() {
            return None;
        }
        let at = block * self.grid.len() + time_idx;
        Some(self.samples.iter().map(|row| row[at]).collect())
    }
}

const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Lower Cholesky factor of a symmetric positive-semidefinite matrix.
///
/// Exact zero pivots (coinciding limit variables, as at `p = 0`) are
/// rescued by retrying with diagonal jitter from a fixed ladder up to
/// `1e-10`; a matrix that still fails is reported through
/// [`Error::NumericalDegeneracy`] with the order of the offending leading
/// minor.
pub fn cholesky_lower(mat: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = mat.len();
    let mut last_minor = 0;
    for &jitter in &JITTER_LADDER {
        match try_cholesky(mat, jitter, d) {
            Ok(l) => return Ok(l),
            Err(minor) => last_minor = minor,
        }
    }
    Err(Error::NumericalDegeneracy {
        leading_minor: last_minor,
        max_jitter: *JITTER_LADDER.last().unwrap(),
    })
}

fn try_cholesky(mat: &[Vec<f64>], jitter: f64, d: usize) -> std::result::Result<Vec<Vec<f64>>, usize> {
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = mat[i][j];
            if i == j {
                sum += jitter;
            }
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(i + 1);
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Draw `n_paths` joint samples of the requested components on `grid`.
///
/// Paths are mutually independent and fully determined by
/// `(seed, path index)`, so the ensemble is bit-identical however the
/// per-path work is scheduled.  A grid point at `t = 0` is never sampled:
/// its values are emitted as exact zeros.
pub fn sample_limit_triplet(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    components: &[Component],
    n_paths: usize,
    seed: u64,
    method: Method,
) -> Result<GaussianEnsemble> {
    if components.is_empty() {
        return Err(Error::invalid("need at least one component"));
    }
    if components.contains(&Component::Reinforced) && model.p() >= 0.5 {
        return Err(Error::invalid(
            "the noise-reinforced limit requires p < 1/2",
        ));
    }
    let samples = match method {
        Method::Cholesky => sample_cholesky(model, grid, components, n_paths, seed)?,
        Method::Euler { steps } => sample_euler(model, grid, components, n_paths, seed, steps)?,
        Method::TimeChange => {
            if components != [Component::Reinforced] {
                return Err(Error::invalid(
                    "time-change sampling covers only the reinforced component",
                ));
            }
            return reinforced_bm_time_change(model, grid, n_paths, seed);
        }
    };
    Ok(GaussianEnsemble {
        p: model.p(),
        sigma: model.sigma(),
        seed,
        method,
        grid: grid.points().to_vec(),
        components: components.to_vec(),
        samples,
    })
}

fn sample_cholesky(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    components: &[Component],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let times = grid.points();
    let nt = times.len();
    // Zero-time variables are deterministic; factor only the live block.
    let live: Vec<usize> = (0..components.len() * nt)
        .filter(|idx| times[idx % nt] > 0.0)
        .collect();
    let full = covariance_matrix(model, grid, components)?;
    let reduced: Vec<Vec<f64>> = live
        .iter()
        .map(|&i| live.iter().map(|&j| full[i][j]).collect())
        .collect();
    let l = cholesky_lower(&reduced)?;
    let d = live.len();
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let key = stream_key(seed, path, Stream::Gauss);
            let z: Vec<f64> = (0..d as u64).map(|slot| normal_at(key, slot)).collect();
            let mut row = vec![0.0; components.len() * nt];
            for (r, &idx) in live.iter().enumerate() {
                let mut acc = 0.0;
                for (c, zc) in z.iter().enumerate().take(r + 1) {
                    acc += l[r][c] * zc;
                }
                row[idx] = acc;
            }
            row
        })
        .collect())
}

fn sample_euler(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    components: &[Component],
    n_paths: usize,
    seed: u64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if steps == 0 {
        return Err(Error::invalid("euler sampling needs steps >= 1"));
    }
    let p = model.p();
    let sigma = model.sigma();
    let times = grid.points();
    let nt = times.len();
    let delta = 1.0 / steps as f64;
    // Substeps covering (0, t]: nearest-integer snap so t = i/steps lands
    // exactly on substep i.
    let substeps_for = |t: f64| (t * steps as f64 + 0.5).floor() as usize;
    let total = times.iter().map(|&t| substeps_for(t)).max().unwrap_or(0);
    let l3 = cholesky_lower(
        &driver_correlation(p)?
            .iter()
            .map(|r| r.to_vec())
            .collect::<Vec<_>>(),
    )?;
    let sqrt_delta = delta.sqrt();
    // The reinforced integrand s^{−p} blows up on the first substep; that
    // substep instead draws with the exact variance δ^{1−2p}/(1−2p) of
    // ∫_0^δ s^{−2p} ds, standardized from the same correlated increment.
    let first_reinforced = delta.powf(-p) / (1.0 - 2.0 * p).sqrt();
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let key = stream_key(seed, path, Stream::Gauss);
            let mut b = 0.0f64;
            let mut int_r = 0.0f64;
            let mut int_c = 0.0f64;
            let mut row = vec![0.0; components.len() * nt];
            let mut next = 0; // next grid index to record
            let mut record = |done: usize, b: f64, ir: f64, ic: f64, next: &mut usize| {
                while *next < nt && substeps_for(times[*next]) == done {
                    let t = times[*next];
                    for (block, comp) in components.iter().enumerate() {
                        let v = if t == 0.0 {
                            0.0
                        } else {
                            match comp {
                                Component::Plain => sigma * b,
                                Component::Reinforced => sigma * t.powf(p) * ir,
                                Component::Counterbalanced => sigma * t.powf(-p) * ic,
                            }
                        };
                        row[block * nt + *next] = v;
                    }
                    *next += 1;
                }
            };
            record(0, b, int_r, int_c, &mut next);
            for j in 0..total {
                let z = [
                    normal_at(key, 3 * j as u64),
                    normal_at(key, 3 * j as u64 + 1),
                    normal_at(key, 3 * j as u64 + 2),
                ];
                let db = sqrt_delta * (l3[0][0] * z[0]);
                let dr = sqrt_delta * (l3[1][0] * z[0] + l3[1][1] * z[1]);
                let dc = sqrt_delta * (l3[2][0] * z[0] + l3[2][1] * z[1] + l3[2][2] * z[2]);
                let s = j as f64 * delta;
                b += db;
                if j == 0 {
                    int_r += dr * first_reinforced;
                } else {
                    int_r += s.powf(-p) * dr;
                }
                // powf(0, 0) = 1 makes the p = 0 left point collapse to
                // plain Brownian increments.
                int_c += s.powf(p) * dc;
                record(j + 1, b, int_r, int_c, &mut next);
            }
            row
        })
        .collect())
}

/// Exact draws of the reinforced limit alone through its time change:
/// `B̂_t = σ t^p (1−2p)^{−1/2} B(t^{1−2p})` for a standard Brownian `B`.
pub fn reinforced_bm_time_change(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<GaussianEnsemble> {
    let p = model.p();
    if p >= 0.5 {
        return Err(Error::invalid(
            "the noise-reinforced limit requires p < 1/2",
        ));
    }
    let sigma = model.sigma();
    let times = grid.points();
    // t^{1−2p} is increasing for p < 1/2, so the changed times stay a grid.
    let changed: Vec<f64> = times.iter().map(|t| t.powf(1.0 - 2.0 * p)).collect();
    let scale = (1.0 - 2.0 * p).sqrt();
    let samples: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let key = stream_key(seed, path, Stream::Gauss);
            let mut bm = 0.0f64;
            let mut prev = 0.0f64;
            let mut slot = 0u64;
            times
                .iter()
                .zip(&changed)
                .map(|(&t, &u)| {
                    if t == 0.0 {
                        return 0.0;
                    }
                    bm += (u - prev).sqrt() * normal_at(key, slot);
                    prev = u;
                    slot += 1;
                    sigma * t.powf(p) * bm / scale
                })
                .collect()
        })
        .collect();
    Ok(GaussianEnsemble {
        p,
        sigma,
        seed,
        method: Method::TimeChange,
        grid: times.to_vec(),
        components: vec![Component::Reinforced],
        samples,
    })
}

/// Header of the limit-ensemble CSV dump.
pub const LIMIT_CSV_HEADER: &str = "path_id,component,t,value";

/// Write an ensemble as CSV, one row per `(path, component, time)`, in
/// path-major, component-major, time-ascending order.
pub fn write_limit_csv<W: IoWrite>(out: &mut W, ensemble: &GaussianEnsemble) -> Result<()> {
    writeln!(out, "{LIMIT_CSV_HEADER}")?;
    for (path, row) in ensemble.samples.iter().enumerate() {
        for (block, comp) in ensemble.components.iter().enumerate() {
            for (ti, t) in ensemble.grid.iter().enumerate() {
                writeln!(
                    out,
                    "{path},{},{},{}",
                    comp.limit_label(),
                    fmt_f64(*t),
                    fmt_f64(row[block * ensemble.grid.len() + ti])
                )?;
            }
        }
    }
    Ok(())
}
