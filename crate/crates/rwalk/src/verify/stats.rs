//! Scalar statistical primitives: distribution functions, the
//! Kolmogorov–Smirnov test, log-log growth fits, and median bootstrap.

use crate::error::{Error, Result};
use crate::rng::{index_in_at, stream_key, Stream};
use crate::verify::exact::ExactSum;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma_ur;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Mean and its standard error, with an exactly summed numerator.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mut s1 = ExactSum::new();
    let mut s2 = ExactSum::new();
    for &x in samples {
        s1.add(x);
        s2.add(x * x);
    }
    let mean = s1.value() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = (s2.value() - n * mean * mean).max(0.0) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample median (average of the middle pair for even sizes).
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Bootstrap standard error of the median: resample with replacement
/// `resamples` times and take the standard deviation of the resampled
/// medians. Fully determined by `seed`.
pub fn bootstrap_median_se(samples: &[f64], resamples: usize, seed: u64) -> f64 {
    assert!(!samples.is_empty(), "bootstrap of an empty sample");
    let n = samples.len();
    let key = stream_key(seed, 0, Stream::Resample);
    let mut buf = vec![0.0; n];
    let medians: Vec<f64> = (0..resamples)
        .map(|r| {
            for (i, slot) in buf.iter_mut().enumerate() {
                let pick = index_in_at(key, (r * n + i) as u64, n) - 1;
                *slot = samples[pick];
            }
            median(&buf)
        })
        .collect();
    let (_, se_of_mean) = mean_and_se(&medians);
    // mean_and_se returns sd/√r; undo to get the sd of the medians.
    se_of_mean * (resamples as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic `D = sup|F̂ − F|` against the
/// distribution function `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic Kolmogorov survival function
/// `K(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`, truncated at 100 terms and
/// clamped to `[0, 1]`.
pub fn kolmogorov_p(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100u32 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test with a fully specified null: returns
/// `(D, p)` where `p = K(√N·D)`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let d = ks_statistic(samples, &cdf);
    let lambda = (samples.len() as f64).sqrt() * d;
    (d, kolmogorov_p(lambda))
}

/// Upper-tail chi-square p-value with `dof` degrees of freedom.
pub fn chi_square_p(statistic: f64, dof: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof / 2.0, statistic / 2.0)
}

/// Ordinary least squares for `y ≈ intercept + slope·x`; returns
/// `(slope, intercept, rss)`.
fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    (slope, intercept, rss)
}

/// Least-squares fit of a growth exponent from `(n, value)` pairs.
#[derive(Clone, Debug)]
pub struct GrowthFit {
    /// Slope of log value against log n.
    pub slope: f64,
    /// Intercept of the same fit.
    pub intercept: f64,
    /// Residual sum of squares of the pure power fit.
    pub rss: f64,
    /// Slope of the `value ≈ C·n^b·log n` model, when requested.
    pub corrected_slope: Option<f64>,
    /// Residual sum of squares of the log-corrected model.
    pub corrected_rss: Option<f64>,
    /// True when the log-corrected model fit with smaller residual.
    pub prefers_log_correction: bool,
}

/// Fit `value ≈ C·n^slope` by least squares on logs.
///
/// `points` are `(n, value)` pairs, at least 5 of them, values positive.
/// With `critical` set, also fits `value ≈ C·n^b·log n` and reports
/// which of the two models left the smaller residual.
pub fn growth_exponent_fit(points: &[(f64, f64)], critical: bool) -> Result<GrowthFit> {
    if points.len() < 5 {
        return Err(Error::invalid("fewer than 5 points"));
    }
    for &(n, v) in points {
        if !(n > 1.0) || !(v > 0.0) {
            return Err(Error::invalid(
                "growth fit needs n > 1 and positive values",
            ));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, intercept, rss) = ols_line(&xs, &ys);
    let mut fit = GrowthFit {
        slope,
        intercept,
        rss,
        corrected_slope: None,
        corrected_rss: None,
        prefers_log_correction: false,
    };
    if critical {
        // Divide out the log factor, then fit the remaining power.
        let ys_c: Vec<f64> = points
            .iter()
            .map(|&(n, v)| (v / n.ln()).ln())
            .collect();
        let (cs, _, crss) = ols_line(&xs, &ys_c);
        fit.corrected_slope = Some(cs);
        fit.corrected_rss = Some(crss);
        fit.prefers_log_correction = crss < rss;
    }
    Ok(fit)
}
