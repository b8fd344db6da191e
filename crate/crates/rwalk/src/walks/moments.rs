//! Closed-form moment recursions for the walk triplet.
//!
//! Means follow from the conditional step identities for any step law:
//!
//! ```text
//! E Ŝ_n = n m                      (every X̂_k keeps the marginal law)
//! E Š_1 = m,   E Š_{n+1} = (1 − p) m + (1 − p/n) E Š_n
//! ```
//!
//! so `E Š_n / n → (1 − p) m / (1 + p)`.  Second moments close only for
//! centred laws, where the conditional means are `p Ŝ_n / n` and
//! `−p Š_n / n`:
//!
//! ```text
//! E Ŝ_1² = σ²,   E Ŝ_{n+1}² = (1 + 2p/n) E Ŝ_n² + σ²
//! E Š_1² = σ²,   E Š_{n+1}² = (1 − 2p/n) E Š_n² + σ²
//! ```
//!
//! These recursions are deliberately independent of the simulator's step
//! rule; the exhaustive enumeration check plays the two against each other.

use crate::error::{Error, Result};
use crate::walks::law::StepLaw;

/// Exact means (always) and second moments (centred laws) up to epoch `n`.
#[derive(Clone, Debug)]
pub struct MomentOracle {
    /// Reinforcement probability.
    pub p: f64,
    /// Last epoch covered.
    pub n: usize,
    /// Step-law mean.
    pub mean: f64,
    /// Step-law variance.
    pub sigma2: f64,
    mean_hat: Vec<f64>,
    mean_check: Vec<f64>,
    m2_hat: Option<Vec<f64>>,
    m2_check: Option<Vec<f64>>,
}

/// Evaluate the moment recursions for epochs `0..=n`.
///
/// Requires `p ∈ [0, 1]`.  Second moments are filled only when the law is
/// centred; accessing them otherwise reports the restriction.
pub fn exact_moments(p: f64, law: &StepLaw, n: usize) -> Result<MomentOracle> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "reinforcement probability p must lie in [0, 1], got {p}"
        )));
    }
    let m = law.mean();
    let sigma2 = law.variance();

    let mut mean_hat = Vec::with_capacity(n + 1);
    let mut mean_check = Vec::with_capacity(n + 1);
    mean_hat.push(0.0);
    mean_check.push(0.0);
    if n >= 1 {
        mean_hat.push(m);
        mean_check.push(m);
    }
    for k in 1..n {
        let kf = k as f64;
        mean_hat.push((k + 1) as f64 * m);
        let prev = mean_check[k];
        mean_check.push((1.0 - p) * m + (1.0 - p / kf) * prev);
    }

    let centred = law.is_centred();
    let m2 = centred.then(|| {
        let mut hat = Vec::with_capacity(n + 1);
        let mut check = Vec::with_capacity(n + 1);
        hat.push(0.0);
        check.push(0.0);
        if n >= 1 {
            hat.push(sigma2);
            check.push(sigma2);
        }
        for k in 1..n {
            let kf = k as f64;
            hat.push((1.0 + 2.0 * p / kf) * hat[k] + sigma2);
            check.push((1.0 - 2.0 * p / kf) * check[k] + sigma2);
        }
        (hat, check)
    });
    let (m2_hat, m2_check) = match m2 {
        Some((h, c)) => (Some(h), Some(c)),
        None => (None, None),
    };

    Ok(MomentOracle {
        p,
        n,
        mean: m,
        sigma2,
        mean_hat,
        mean_check,
        m2_hat,
        m2_check,
    })
}

impl MomentOracle {
    /// `E Ŝ_k`.
    pub fn mean_hat(&self, k: usize) -> f64 {
        self.mean_hat[k]
    }

    /// `E Š_k`.
    pub fn mean_check(&self, k: usize) -> f64 {
        self.mean_check[k]
    }

    /// `E Ŝ_k²`; available only for centred laws.
    pub fn second_moment_hat(&self, k: usize) -> Result<f64> {
        self.m2_hat
            .as_ref()
            .map(|v| v[k])
            .ok_or(Error::CentredLawRequired)
    }

    /// `E Š_k²`; available only for centred laws.
    pub fn second_moment_check(&self, k: usize) -> Result<f64> {
        self.m2_check
            .as_ref()
            .map(|v| v[k])
            .ok_or(Error::CentredLawRequired)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hand iteration with m = 1, p = 1/2:
    //   E Š₁ = 1, E Š₂ = 1/2 + 1/2·1 = 1, E Š₃ = 1/2 + 3/4·1 = 5/4.
    #[test]
    fn counterbalanced_means_match_hand_iteration() {
        let law = StepLaw::discrete_uniform(vec![0.0, 2.0]).unwrap();
        let oracle = exact_moments(0.5, &law, 3).unwrap();
        assert!((oracle.mean_check(1) - 1.0).abs() < 1e-15);
        assert!((oracle.mean_check(2) - 1.0).abs() < 1e-15);
        assert!((oracle.mean_check(3) - 1.25).abs() < 1e-15);
        assert_eq!(oracle.mean_hat(3), 3.0);
    }

    // E Š_n / n → (1 − p) m / (1 + p).
    #[test]
    fn counterbalanced_mean_has_the_right_linear_growth() {
        let law = StepLaw::discrete_uniform(vec![0.0, 2.0]).unwrap();
        for p in [0.25, 0.5, 0.75] {
            let n = 200_000;
            let oracle = exact_moments(p, &law, n).unwrap();
            let target = (1.0 - p) / (1.0 + p);
            let got = oracle.mean_check(n) / n as f64;
            assert!((got - target).abs() < 5e-5, "p={p}: {got} vs {target}");
        }
    }

    // Hand values for Rademacher, p = 1/2: E Ŝ₂² = 3, E Š₂² = 1.
    #[test]
    fn second_moments_match_hand_values() {
        let oracle = exact_moments(0.5, &StepLaw::Rademacher, 2).unwrap();
        assert!((oracle.second_moment_hat(2).unwrap() - 3.0).abs() < 1e-15);
        assert!((oracle.second_moment_check(2).unwrap() - 1.0).abs() < 1e-15);
    }

    // At p = 0 both recursions reduce to the plain-walk value nσ².
    #[test]
    fn zero_p_reduces_to_the_plain_walk() {
        let law = StepLaw::discrete_uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        let oracle = exact_moments(0.0, &law, 50).unwrap();
        for k in 0..=50 {
            let expect = k as f64 * 2.5;
            assert!((oracle.second_moment_hat(k).unwrap() - expect).abs() < 1e-12);
            assert!((oracle.second_moment_check(k).unwrap() - expect).abs() < 1e-12);
        }
    }

    // Growth checks: E Ŝ_n² ≍ n/(1−2p) below criticality and E Š_n² ≍
    // n/(1+2p) for every p < 1.
    #[test]
    fn second_moment_growth_constants() {
        let n = 500_000;
        let oracle = exact_moments(0.25, &StepLaw::Rademacher, n).unwrap();
        let hat = oracle.second_moment_hat(n).unwrap() / n as f64;
        assert!((hat - 2.0).abs() < 0.02, "hat/n = {hat}");
        let check = oracle.second_moment_check(n).unwrap() / n as f64;
        assert!((check - 1.0 / 1.5).abs() < 1e-3, "check/n = {check}");

        let oracle = exact_moments(0.75, &StepLaw::Rademacher, n).unwrap();
        let check = oracle.second_moment_check(n).unwrap() / n as f64;
        assert!((check - 0.4).abs() < 1e-3, "check/n = {check}");
    }

    #[test]
    fn second_moments_require_a_centred_law() {
        let law = StepLaw::discrete_uniform(vec![0.0, 2.0]).unwrap();
        let oracle = exact_moments(0.5, &law, 5).unwrap();
        assert_eq!(oracle.mean_hat(5), 5.0);
        let err = oracle.second_moment_hat(5).unwrap_err();
        assert_eq!(err.to_string(), "second-moment oracle requires centred law");
    }
}
