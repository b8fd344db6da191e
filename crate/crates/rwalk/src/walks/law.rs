//! Step laws and their truncated decompositions.
//!
//! A step law is the common distribution of the fresh steps fed to the walks.
//! Besides sampling, each law exposes exact moments `m = E X`, `σ² = Var X`,
//! `m₂ = E X²`, `m₄ = E X⁴`, which the moment oracles and variance targets
//! consume.
//!
//! [`truncate_law`] splits a law at a threshold `K` into the centred bounded
//! part `X 1{|X| ≤ K} − E[X 1{|X| ≤ K}]` and the centred tail part
//! `X 1{|X| > K} − E[X 1{|X| > K}]`.  Both pieces are sampled by transforming
//! the *same* base draw, so runs with the base law, the bounded part, and the
//! tail part share one event stream and their paths add exactly.

use crate::error::{Error, Result};
use crate::rng::{self, StreamKey};

/// Which side of the threshold a truncated Gaussian law keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    /// Keep `|X| ≤ K`, zero out the tails.
    Low,
    /// Keep `|X| > K`, zero out the bulk.
    High,
}

/// Discrete law with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    values: Vec<f64>,
    weights: Vec<f64>,
    /// Cumulative weights; the last entry is forced to exactly 1.
    cum: Vec<f64>,
}

/// Centred truncation of a Gaussian base law.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedGaussianLaw {
    base_mean: f64,
    base_sd: f64,
    cutoff: f64,
    side: TailSide,
    /// Centering constant: the mean of the kept, un-centred piece.
    shift: f64,
}

/// Common distribution of the fresh steps.
#[derive(Clone, Debug, PartialEq)]
pub enum StepLaw {
    /// Fair ±1 steps.
    Rademacher,
    /// Finitely many atoms with given weights.
    Discrete(DiscreteLaw),
    /// Normal with the given mean and standard deviation.
    Gaussian {
        /// Mean of the law.
        mean: f64,
        /// Standard deviation, strictly positive.
        sd: f64,
    },
    /// Centred truncation of a Gaussian base (see [`truncate_law`]).
    TruncatedGaussian(TruncatedGaussianLaw),
}

impl StepLaw {
    /// Discrete law from atoms and weights.  Weights must be nonnegative with
    /// a positive sum; they are normalized to total mass one.
    pub fn discrete(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::invalid(
                "discrete law needs matching, nonempty values and weights",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("discrete law values must be finite"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("discrete law weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("discrete law weights must have positive sum"));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cum.push(acc);
        }
        *cum.last_mut().expect("nonempty") = 1.0;
        Ok(StepLaw::Discrete(DiscreteLaw { values, weights, cum }))
    }

    /// Discrete law with equal weights on the given atoms.
    pub fn discrete_uniform(values: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; values.len()];
        Self::discrete(values, w)
    }

    /// Gaussian law; `sd` must be strictly positive.
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
            return Err(Error::invalid("gaussian law needs finite mean and sd > 0"));
        }
        Ok(StepLaw::Gaussian { mean, sd })
    }

    /// Mean `E X`.
    pub fn mean(&self) -> f64 {
        match self {
            StepLaw::Rademacher => 0.0,
            StepLaw::Discrete(d) => dot(&d.values, &d.weights, |v| v),
            StepLaw::Gaussian { mean, .. } => *mean,
            StepLaw::TruncatedGaussian(_) => 0.0,
        }
    }

    /// Raw second moment `E X²`.
    pub fn second_moment(&self) -> f64 {
        match self {
            StepLaw::Rademacher => 1.0,
            StepLaw::Discrete(d) => dot(&d.values, &d.weights, |v| v * v),
            StepLaw::Gaussian { mean, sd } => mean * mean + sd * sd,
            StepLaw::TruncatedGaussian(t) => t.central_moment(2),
        }
    }

    /// Variance `Var X`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// Raw fourth moment `E X⁴`.
    pub fn fourth_moment(&self) -> f64 {
        match self {
            StepLaw::Rademacher => 1.0,
            StepLaw::Discrete(d) => dot(&d.values, &d.weights, |v| v * v * v * v),
            StepLaw::Gaussian { mean, sd } => {
                let m2 = mean * mean;
                let s2 = sd * sd;
                m2 * m2 + 6.0 * m2 * s2 + 3.0 * s2 * s2
            }
            StepLaw::TruncatedGaussian(t) => t.central_moment(4),
        }
    }

    /// True when the law has mean zero up to floating-point noise.
    pub fn is_centred(&self) -> bool {
        self.mean().abs() <= 1e-12
    }

    /// Supremum norm of the law, when finite: every sample has absolute
    /// value at most the bound.  `None` for laws with unbounded support
    /// (Gaussian, and the tail part of a Gaussian truncation).
    pub fn bound(&self) -> Option<f64> {
        match self {
            StepLaw::Rademacher => Some(1.0),
            StepLaw::Discrete(d) => {
                Some(d.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            }
            StepLaw::Gaussian { .. } => None,
            StepLaw::TruncatedGaussian(t) => match t.side {
                TailSide::Low => Some(t.cutoff + t.shift.abs()),
                TailSide::High => None,
            },
        }
    }

    /// Draw the step for `index` (1-based).  Consumes the fixed counter block
    /// `{2·index, 2·index + 1}` of `key` regardless of the law, so laws
    /// derived from one another by truncation see identical base draws.
    pub fn sample_at(&self, key: StreamKey, index: u64) -> f64 {
        let c = 2 * index;
        match self {
            StepLaw::Rademacher => {
                if rng::bits_at(key, c) >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            StepLaw::Discrete(d) => {
                let u = rng::open01(rng::bits_at(key, c));
                let mut j = 0;
                while u >= d.cum[j] {
                    j += 1;
                }
                d.values[j]
            }
            StepLaw::Gaussian { mean, sd } => mean + sd * rng::normal_at(key, index),
            StepLaw::TruncatedGaussian(t) => {
                let x = t.base_mean + t.base_sd * rng::normal_at(key, index);
                let kept = match t.side {
                    TailSide::Low => x.abs() <= t.cutoff,
                    TailSide::High => x.abs() > t.cutoff,
                };
                (if kept { x } else { 0.0 }) - t.shift
            }
        }
    }
}

fn dot(values: &[f64], weights: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    values.iter().zip(weights).map(|(v, w)| f(*v) * w).sum()
}

/// Split `law` at threshold `K > 0` into the centred bounded part and the
/// centred tail part, returned as `(low, high)`.
///
/// Discrete laws (including Rademacher) truncate to discrete laws over the
/// transformed atoms, with weights — and hence sampling draws — unchanged.
/// Gaussian laws truncate to [`StepLaw::TruncatedGaussian`] wrappers with
/// closed-form moments.  Truncating an already truncated law is not
/// supported.
pub fn truncate_law(law: &StepLaw, cutoff: f64) -> Result<(StepLaw, StepLaw)> {
    if !cutoff.is_finite() || cutoff <= 0.0 {
        return Err(Error::invalid("truncation threshold must be positive"));
    }
    match law {
        StepLaw::Rademacher => {
            let base = StepLaw::discrete(vec![-1.0, 1.0], vec![0.5, 0.5])?;
            truncate_law(&base, cutoff)
        }
        StepLaw::Discrete(d) => {
            let kept: Vec<f64> = d
                .values
                .iter()
                .map(|v| if v.abs() <= cutoff { *v } else { 0.0 })
                .collect();
            let dropped: Vec<f64> = d
                .values
                .iter()
                .map(|v| if v.abs() > cutoff { *v } else { 0.0 })
                .collect();
            let shift_low = dot(&kept, &d.weights, |v| v);
            let shift_high = dot(&dropped, &d.weights, |v| v);
            let low = StepLaw::discrete(
                kept.iter().map(|v| v - shift_low).collect(),
                d.weights.clone(),
            )?;
            let high = StepLaw::discrete(
                dropped.iter().map(|v| v - shift_high).collect(),
                d.weights.clone(),
            )?;
            Ok((low, high))
        }
        StepLaw::Gaussian { mean, sd } => {
            let window = gaussian_window_raw_moments(*mean, *sd, cutoff);
            let shift_low = window[1];
            let shift_high = mean - shift_low;
            let low = StepLaw::TruncatedGaussian(TruncatedGaussianLaw {
                base_mean: *mean,
                base_sd: *sd,
                cutoff,
                side: TailSide::Low,
                shift: shift_low,
            });
            let high = StepLaw::TruncatedGaussian(TruncatedGaussianLaw {
                base_mean: *mean,
                base_sd: *sd,
                cutoff,
                side: TailSide::High,
                shift: shift_high,
            });
            Ok((low, high))
        }
        StepLaw::TruncatedGaussian(_) => Err(Error::invalid(
            "truncating an already truncated law is not supported",
        )),
    }
}

impl TruncatedGaussianLaw {
    /// `E[(kept piece − shift)^k]` for `k ∈ {2, 4}`.
    ///
    /// On the kept event the variable is `X − shift`; on the complement it is
    /// the constant `−shift`.
    fn central_moment(&self, k: u32) -> f64 {
        let window = gaussian_window_raw_moments(self.base_mean, self.base_sd, self.cutoff);
        let raw = gaussian_raw_moments(self.base_mean, self.base_sd);
        // E[X^j 1{kept}] for the side in question.
        let kept: [f64; 5] = match self.side {
            TailSide::Low => window,
            TailSide::High => std::array::from_fn(|j| raw[j] - window[j]),
        };
        let p_other = 1.0 - kept[0];
        let c = self.shift;
        // E[(X − c)^k 1{kept}] by binomial expansion, plus the atom at −c.
        let mut on_kept = 0.0;
        for j in 0..=k {
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            on_kept += binom(k, j) * sign * c.powi((k - j) as i32) * kept[j as usize];
        }
        on_kept + p_other * (-c).powi(k as i32)
    }
}

fn binom(n: u32, k: u32) -> f64 {
    let mut out = 1.0;
    for j in 0..k {
        out = out * (n - j) as f64 / (j + 1) as f64;
    }
    out
}

/// Raw Gaussian moments `E[X^j]`, `j = 0..4`.
fn gaussian_raw_moments(mean: f64, sd: f64) -> [f64; 5] {
    let m2 = mean * mean;
    let s2 = sd * sd;
    [
        1.0,
        mean,
        m2 + s2,
        mean * (m2 + 3.0 * s2),
        m2 * m2 + 6.0 * m2 * s2 + 3.0 * s2 * s2,
    ]
}

/// Partial moments `E[X^j 1{|X| ≤ K}]`, `j = 0..4`, for `X ~ N(mean, sd²)`.
fn gaussian_window_raw_moments(mean: f64, sd: f64, cutoff: f64) -> [f64; 5] {
    let a = (-cutoff - mean) / sd;
    let b = (cutoff - mean) / sd;
    let z = standard_normal_window_moments(a, b);
    // X = mean + sd Z; binomial expansion of X^j over the window.
    let mut out = [0.0; 5];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..=j {
            acc += binom(j as u32, i as u32)
                * mean.powi((j - i) as i32)
                * sd.powi(i as i32)
                * z[i];
        }
        *slot = acc;
    }
    out
}

/// Partial moments `E[Z^j 1{a ≤ Z ≤ b}]`, `j = 0..4`, for standard normal Z.
fn standard_normal_window_moments(a: f64, b: f64) -> [f64; 5] {
    let pa = phi(a);
    let pb = phi(b);
    let mass = normal_cdf(b) - normal_cdf(a);
    [
        mass,
        pa - pb,
        mass + a * pa - b * pb,
        (a * a + 2.0) * pa - (b * b + 2.0) * pb,
        3.0 * mass + (a * a * a + 3.0 * a) * pa - (b * b * b + 3.0 * b) * pb,
    ]
}

/// Standard normal density.
pub(crate) fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (std::f64::consts::TAU).sqrt()
}

/// Standard normal distribution function.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_key, Stream};

    #[test]
    fn base_law_moments() {
        let r = StepLaw::Rademacher;
        assert_eq!(r.mean(), 0.0);
        assert_eq!(r.variance(), 1.0);
        assert_eq!(r.fourth_moment(), 1.0);

        let d = StepLaw::discrete_uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.mean(), 0.0);
        assert_eq!(d.variance(), 2.5);
        assert_eq!(d.fourth_moment(), 8.5);

        let g = StepLaw::gaussian(1.5, 2.0).unwrap();
        assert!((g.mean() - 1.5).abs() < 1e-15);
        assert!((g.variance() - 4.0).abs() < 1e-12);
        assert!((g.fourth_moment() - (1.5f64.powi(4) + 6.0 * 2.25 * 4.0 + 48.0)).abs() < 1e-10);
    }

    #[test]
    fn discrete_law_rejects_bad_inputs() {
        assert!(StepLaw::discrete(vec![], vec![]).is_err());
        assert!(StepLaw::discrete(vec![1.0], vec![-1.0]).is_err());
        assert!(StepLaw::discrete(vec![1.0], vec![0.0]).is_err());
        assert!(StepLaw::gaussian(0.0, 0.0).is_err());
    }

    // Hand-computed: for atoms {−2, −1, 1, 2} with equal weights and K = 1,
    // the bounded part has variance 1/2 and the tail part variance 2.
    #[test]
    fn discrete_truncation_matches_hand_values() {
        let base = StepLaw::discrete_uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        let (low, high) = truncate_law(&base, 1.0).unwrap();
        assert!(low.mean().abs() < 1e-15);
        assert!(high.mean().abs() < 1e-15);
        assert!((low.variance() - 0.5).abs() < 1e-15);
        assert!((high.variance() - 2.0).abs() < 1e-15);
    }

    // Bounded laws report a sup norm that their samples respect; the bounded
    // part of a truncation at K stays within 2K (the centering shift is at
    // most K itself).
    #[test]
    fn bounds_cover_the_samples() {
        assert_eq!(StepLaw::Rademacher.bound(), Some(1.0));
        let d = StepLaw::discrete_uniform(vec![-3.0, 1.0]).unwrap();
        assert_eq!(d.bound(), Some(3.0));
        let g = StepLaw::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.bound(), None);

        let cutoff = 0.8;
        let (low, high) = truncate_law(&g, cutoff).unwrap();
        let b = low.bound().unwrap();
        assert!(b <= 2.0 * cutoff);
        assert_eq!(high.bound(), None);
        let key = stream_key(31, 2, Stream::Step);
        for i in 1..2000 {
            assert!(low.sample_at(key, i).abs() <= b);
        }
    }

    // A bound that covers the support keeps the law unchanged and leaves a
    // tail part that is identically zero.
    #[test]
    fn truncation_beyond_the_support_is_trivial() {
        let (low, high) = truncate_law(&StepLaw::Rademacher, 2.0).unwrap();
        assert_eq!(low.variance(), 1.0);
        assert_eq!(high.variance(), 0.0);
        let key = stream_key(9, 0, Stream::Step);
        for i in 1..200 {
            assert_eq!(high.sample_at(key, i), 0.0);
            assert_eq!(
                low.sample_at(key, i),
                StepLaw::Rademacher.sample_at(key, i)
            );
        }
    }

    // A bound below the support moves everything into the tail part.
    #[test]
    fn truncation_below_the_support_is_trivial_the_other_way() {
        let (low, high) = truncate_law(&StepLaw::Rademacher, 0.5).unwrap();
        assert_eq!(low.variance(), 0.0);
        assert_eq!(high.variance(), 1.0);
        let key = stream_key(9, 0, Stream::Step);
        for i in 1..200 {
            assert_eq!(low.sample_at(key, i), 0.0);
            assert_eq!(
                high.sample_at(key, i),
                StepLaw::Rademacher.sample_at(key, i)
            );
        }
    }

    /// Adaptive Simpson quadrature; independent oracle for the closed-form
    /// truncated-Gaussian moments.
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, eps / 2.0, depth - 1) + simpson(f, m, b, eps / 2.0, depth - 1)
        }
    }

    fn window_moment_quadrature(mean: f64, sd: f64, cutoff: f64, j: i32) -> f64 {
        let f = move |x: f64| x.powi(j) * phi((x - mean) / sd) / sd;
        simpson(&f, -cutoff, cutoff, 1e-13, 40)
    }

    #[test]
    fn gaussian_window_moments_match_quadrature() {
        for (mean, sd, cutoff) in [(0.0, 1.0, 1.0), (0.5, 2.0, 1.7), (-1.0, 0.7, 2.5)] {
            let closed = gaussian_window_raw_moments(mean, sd, cutoff);
            for j in 0..5 {
                let numeric = window_moment_quadrature(mean, sd, cutoff, j as i32);
                // 5e-9 is the Simpson oracle's own accuracy at j = 4, not a
                // statement about the closed form.
                assert!(
                    (closed[j] - numeric).abs() < 5e-9,
                    "j={j} closed {} vs quadrature {numeric}",
                    closed[j]
                );
            }
        }
    }

    #[test]
    fn truncated_gaussian_moments_match_quadrature() {
        let base = StepLaw::gaussian(0.3, 1.2).unwrap();
        let cutoff = 1.1;
        let (low, high) = truncate_law(&base, cutoff).unwrap();
        let window = gaussian_window_raw_moments(0.3, 1.2, cutoff);
        let shift_low = window[1];
        let shift_high = 0.3 - shift_low;

        let low_var = {
            let f = |x: f64| (x - shift_low).powi(2) * phi((x - 0.3) / 1.2) / 1.2;
            simpson(&f, -cutoff, cutoff, 1e-13, 40) + (1.0 - window[0]) * shift_low * shift_low
        };
        assert!((low.variance() - low_var).abs() < 1e-10);

        let high_var = {
            let f = |x: f64| (x - shift_high).powi(2) * phi((x - 0.3) / 1.2) / 1.2;
            let tails = simpson(&f, -40.0, -cutoff, 1e-13, 46) + simpson(&f, cutoff, 40.0, 1e-13, 46);
            tails + window[0] * shift_high * shift_high
        };
        assert!(
            (high.variance() - high_var).abs() < 1e-9,
            "closed {} quad {high_var}",
            high.variance()
        );

        let low_m4 = {
            let f = |x: f64| (x - shift_low).powi(4) * phi((x - 0.3) / 1.2) / 1.2;
            simpson(&f, -cutoff, cutoff, 1e-13, 40) + (1.0 - window[0]) * shift_low.powi(4)
        };
        assert!((low.fourth_moment() - low_m4).abs() < 1e-9);
    }

    // A Gaussian tail beyond 10 sigma carries essentially no variance.
    #[test]
    fn distant_gaussian_tail_is_negligible() {
        let base = StepLaw::gaussian(0.0, 1.0).unwrap();
        let (_, high) = truncate_law(&base, 10.0).unwrap();
        assert!(high.variance() < 1e-8);
        assert!(high.variance() >= 0.0);
    }

    #[test]
    fn nested_truncation_is_rejected() {
        let base = StepLaw::gaussian(0.0, 1.0).unwrap();
        let (low, _) = truncate_law(&base, 1.0).unwrap();
        assert!(truncate_law(&low, 0.5).is_err());
    }

    // The two truncated pieces of a centred law reassemble the base draw
    // sample by sample, because they transform the same underlying variate.
    #[test]
    fn truncated_samples_add_back_to_the_base_sample() {
        let key = stream_key(123, 4, Stream::Step);
        for (base, cutoff) in [
            (StepLaw::gaussian(0.0, 1.3).unwrap(), 0.9),
            (StepLaw::discrete_uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap(), 1.0),
        ] {
            let (low, high) = truncate_law(&base, cutoff).unwrap();
            for i in 1..500 {
                let x = base.sample_at(key, i);
                let sum = low.sample_at(key, i) + high.sample_at(key, i);
                assert!(
                    (x - sum).abs() < 1e-12,
                    "i={i}: base {x} decomposed {sum}"
                );
            }
        }
    }

    #[test]
    fn discrete_sampling_frequencies_match_weights() {
        let law = StepLaw::discrete(vec![-1.0, 0.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let key = stream_key(77, 0, Stream::Step);
        let n = 100_000;
        let mut counts = [0u32; 3];
        for i in 1..=n {
            let x = law.sample_at(key, i);
            let j = if x == -1.0 {
                0
            } else if x == 0.0 {
                1
            } else {
                2
            };
            counts[j] += 1;
        }
        let expected = [0.2, 0.5, 0.3];
        for j in 0..3 {
            let freq = counts[j] as f64 / n as f64;
            assert!(
                (freq - expected[j]).abs() < 0.006,
                "atom {j}: freq {freq} expected {}",
                expected[j]
            );
        }
    }
}
