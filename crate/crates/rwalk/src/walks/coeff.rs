//! Martingale normalizing coefficients.
//!
//! The reinforced walk `Ŝ` and the counterbalanced walk `Š` become
//! martingales after multiplication by deterministic sequences `â` and `ǎ`:
//!
//! ```text
//! â₁ = 1,  â_{k+1} = â_k · k / (k + p)        (â_n ≍ n^{-p})
//! ǎ₁ = 1,  ǎ_{k+1} = ǎ_k · k / (k − p)        (ǎ_n ≍ n^{p})
//! ```
//!
//! Both are built by running products: quotients of Gamma values overflow
//! long before the supported `n_max` of 10⁹, the products never leave
//! `[n_max^{-1}, n_max]`.  At `p = 1` the counterbalanced recursion divides
//! by zero at its first step; the table then refuses to produce `ǎ`.
//!
//! With unit first coefficients the closed forms are
//! `â_n = Γ(n)Γ(1+p)/Γ(n+p)` and `ǎ_n = Γ(n)Γ(1−p)/Γ(n−p)`, so the power
//! laws carry the constants `Γ(1+p)` and `Γ(1−p)`:
//! `â_n n^p → Γ(1+p)` and `ǎ_n n^{−p} → Γ(1−p)`.  Scaled constructions that
//! are meant to converge to the covariance kernels with unit constants
//! divide by [`CoefficientTable::a_hat_power_constant`] (resp.
//! [`CoefficientTable::a_check_power_constant`]); the quotient
//! `â_k / Γ(1+p) = Γ(k)/Γ(k+p)` exactly.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Tables of `â_k` and `ǎ_k` for `k = 1..=n_max`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    p: f64,
    a_hat: Vec<f64>,
    /// Absent exactly when `p = 1`.
    a_check: Option<Vec<f64>>,
}

/// Build both coefficient tables up to `n_max`.
///
/// Requires `p ∈ [0, 1]` and `n_max ≥ 1`.  The counterbalanced side is
/// omitted at `p = 1` and reported as an error on access.
pub fn build_coefficients(p: f64, n_max: usize) -> Result<CoefficientTable> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "reinforcement probability p must lie in [0, 1], got {p}"
        )));
    }
    if n_max == 0 {
        return Err(Error::invalid("coefficient table needs n_max >= 1"));
    }
    let mut a_hat = Vec::with_capacity(n_max);
    a_hat.push(1.0);
    for k in 1..n_max {
        let kf = k as f64;
        let prev = a_hat[k - 1];
        a_hat.push(prev * (kf / (kf + p)));
    }
    let a_check = if p == 1.0 {
        None
    } else {
        let mut t = Vec::with_capacity(n_max);
        t.push(1.0);
        for k in 1..n_max {
            let kf = k as f64;
            let prev = t[k - 1];
            t.push(prev * (kf / (kf - p)));
        }
        Some(t)
    };
    Ok(CoefficientTable { p, a_hat, a_check })
}

impl CoefficientTable {
    /// Reinforcement probability the table was built for.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Largest index covered.
    pub fn n_max(&self) -> usize {
        self.a_hat.len()
    }

    /// `â_k` for `1 ≤ k ≤ n_max`.
    pub fn a_hat(&self, k: usize) -> f64 {
        self.a_hat[k - 1]
    }

    /// `ǎ_k` for `1 ≤ k ≤ n_max`; refuses at `p = 1`.
    pub fn a_check(&self, k: usize) -> Result<f64> {
        Ok(self.a_check_slice()?[k - 1])
    }

    /// Whole `â` sequence, `â_1` first.
    pub fn a_hat_slice(&self) -> &[f64] {
        &self.a_hat
    }

    /// Whole `ǎ` sequence; refuses at `p = 1`.
    pub fn a_check_slice(&self) -> Result<&[f64]> {
        self.a_check
            .as_deref()
            .ok_or(Error::CounterbalancedAtUnitP)
    }

    /// Limit of `â_k · k^p`, equal to `Γ(1+p)`.
    ///
    /// Dividing `â` by this constant turns it into the exact Gamma ratio
    /// `Γ(k)/Γ(k+p)`, whose power law has unit constant; scaled paths and
    /// scaled bracket limits divide by it so their limits match the
    /// covariance kernels with no extra constant factor.  At `p = 0` the
    /// constant is exactly 1, so the scalings collapse to the diffusive one
    /// bit for bit (the library Gamma is a few ulp off at 1).
    pub fn a_hat_power_constant(&self) -> f64 {
        if self.p == 0.0 {
            1.0
        } else {
            gamma(1.0 + self.p)
        }
    }

    /// Limit of `ǎ_k · k^{−p}`, equal to `Γ(1−p)`; refuses at `p = 1`
    /// (where `Γ(0)` diverges along with the sequence itself).
    pub fn a_check_power_constant(&self) -> Result<f64> {
        if self.a_check.is_none() {
            return Err(Error::CounterbalancedAtUnitP);
        }
        Ok(if self.p == 0.0 {
            1.0
        } else {
            gamma(1.0 - self.p)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn first_values_match_hand_computation() {
        // â₂ = 1/(1+p), ǎ₂ = 1/(1−p).
        let t = build_coefficients(0.25, 4).unwrap();
        assert_eq!(t.a_hat(1), 1.0);
        assert!((t.a_hat(2) - 0.8).abs() < 1e-15);
        assert!((t.a_check(2).unwrap() - 4.0 / 3.0).abs() < 1e-15);

        let t = build_coefficients(0.5, 4).unwrap();
        assert!((t.a_hat(2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.a_check(2).unwrap() - 2.0).abs() < 1e-15);
        assert!((t.a_hat(3) - (2.0 / 3.0) * (2.0 / 2.5)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_p_zero_keeps_both_tables_at_one() {
        let t = build_coefficients(0.0, 1000).unwrap();
        assert!(t.a_hat_slice().iter().all(|a| *a == 1.0));
        assert!(t.a_check_slice().unwrap().iter().all(|a| *a == 1.0));
    }

    #[test]
    fn unit_p_refuses_the_counterbalanced_side() {
        let t = build_coefficients(1.0, 10).unwrap();
        assert!((t.a_hat(2) - 0.5).abs() < 1e-15);
        let err = t.a_check_slice().unwrap_err();
        assert_eq!(
            err.to_string(),
            "counterbalanced coefficients undefined at p=1"
        );
    }

    #[test]
    fn out_of_range_arguments_are_rejected() {
        assert!(build_coefficients(-0.1, 10).is_err());
        assert!(build_coefficients(1.5, 10).is_err());
        assert!(build_coefficients(0.5, 0).is_err());
    }

    #[test]
    fn monotonicity_and_positivity() {
        let t = build_coefficients(0.37, 5000).unwrap();
        let hat = t.a_hat_slice();
        let check = t.a_check_slice().unwrap();
        for k in 1..hat.len() {
            assert!(hat[k] > 0.0 && hat[k] <= hat[k - 1]);
            assert!(check[k] >= check[k - 1]);
        }
    }

    // Independent oracle: with unit first coefficients the closed forms are
    // â_n = Γ(n)Γ(1+p)/Γ(n+p) and ǎ_n = Γ(n)Γ(1−p)/Γ(n−p).
    #[test]
    fn running_products_match_log_gamma_ratios() {
        for p in [0.25, 0.5, 0.75] {
            let t = build_coefficients(p, 1500).unwrap();
            for n in [2usize, 17, 160, 1500] {
                let nf = n as f64;
                let hat_ref =
                    (ln_gamma(nf) - ln_gamma(nf + p) + ln_gamma(1.0 + p)).exp();
                let rel = (t.a_hat(n) - hat_ref).abs() / hat_ref;
                assert!(rel < 1e-11, "p={p} n={n} rel {rel}");
                let check_ref =
                    (ln_gamma(nf) - ln_gamma(nf - p) + ln_gamma(1.0 - p)).exp();
                let rel = (t.a_check(n).unwrap() - check_ref).abs() / check_ref;
                assert!(rel < 1e-11, "p={p} n={n} rel {rel}");
            }
        }
    }

    // â_n n^p → Γ(1+p) and ǎ_n n^{-p} → Γ(1−p), with relative error O(p/n);
    // dividing by the power constants must land on 1.
    #[test]
    fn power_law_asymptotics_hold_at_the_table_end() {
        for p in [0.25, 0.5, 0.75] {
            let n_max = 1_000_000;
            let t = build_coefficients(p, n_max).unwrap();
            let nf = n_max as f64;
            let hat = t.a_hat(n_max) * nf.powf(p) / t.a_hat_power_constant();
            assert!(
                (hat - 1.0).abs() <= 2.0 * p / nf,
                "p={p}: â_n n^p / Γ(1+p) − 1 = {}",
                hat - 1.0
            );
            let check = t.a_check(n_max).unwrap() * nf.powf(-p)
                / t.a_check_power_constant().unwrap();
            assert!(
                (check - 1.0).abs() <= 2.0 * p / nf,
                "p={p}: ǎ_n n^-p / Γ(1−p) − 1 = {}",
                check - 1.0
            );
        }
    }

    // k^{p+1}(â_k − â_{k+1}) → p·Γ(1+p); the difference scheme the bracket
    // increments rely on must not cancel catastrophically.
    #[test]
    fn difference_estimate_recovers_p() {
        for p in [0.25, 0.5, 0.75] {
            let n_max = 100_000;
            let t = build_coefficients(p, n_max).unwrap();
            let k = n_max - 1;
            let kf = k as f64;
            let est = kf.powf(p + 1.0) * (t.a_hat(k) - t.a_hat(k + 1))
                / t.a_hat_power_constant();
            assert!(
                (est - p).abs() <= 2.0 * p / kf,
                "p={p}: estimate {est}"
            );
        }
    }

    // The sums feeding the bracket limits, after dividing out the power
    // constants (c₊ = Γ(1+p), c₋ = Γ(1−p)):
    //   n^{2p−1} Σ (â_k/c₊)²     → 1/(1−2p)   for p < 1/2,
    //   n^{−(1+2p)} Σ (ǎ_k/c₋)²  → 1/(1+2p),
    //   n^{p−1} Σ_{k≥2} â_k/c₊   → 1/(1−p),
    //   n^{−(1+p)} Σ ǎ_k/c₋      → 1/(1+p),
    // and at p = 1/2 the squares grow like c₊² log n, so a dyadic slice
    // isolates the slope: (Σ_{k≤2m} − Σ_{k≤m}) (â_k/c₊)² → log 2.
    #[test]
    fn coefficient_sum_asymptotics() {
        let n = 2_000_000usize;
        let nf = n as f64;

        let t = build_coefficients(0.25, n).unwrap();
        let cp2 = t.a_hat_power_constant().powi(2);
        let cm = t.a_check_power_constant().unwrap();
        let s: f64 = t.a_hat_slice().iter().map(|a| a * a).sum::<f64>() / cp2;
        assert!((nf.powf(-0.5) * s - 2.0).abs() < 0.01, "{}", nf.powf(-0.5) * s);
        let s: f64 =
            t.a_check_slice().unwrap().iter().map(|a| a * a).sum::<f64>() / (cm * cm);
        assert!((nf.powf(-1.5) * s - 1.0 / 1.5).abs() < 0.01);
        let s: f64 =
            t.a_hat_slice()[1..].iter().sum::<f64>() / t.a_hat_power_constant();
        assert!((nf.powf(-0.75) * s - 1.0 / 0.75).abs() < 0.01);
        let s: f64 = t.a_check_slice().unwrap().iter().sum::<f64>() / cm;
        assert!((nf.powf(-1.25) * s - 0.8).abs() < 0.01);

        let t = build_coefficients(0.5, n).unwrap();
        let cp2 = t.a_hat_power_constant().powi(2);
        let upper: f64 = t.a_hat_slice()[n / 2..].iter().map(|a| a * a).sum();
        let slope = upper / cp2 / 2f64.ln();
        assert!((slope - 1.0).abs() < 1e-4, "critical slope {slope}");
    }

    #[cfg(test)]
    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // The defining recurrences hold exactly as stored.
            #[test]
            fn recurrences_hold(p in 0.0f64..=1.0, n in 2usize..400) {
                let t = build_coefficients(p, n).unwrap();
                for k in 1..n {
                    let kf = k as f64;
                    let lhs = t.a_hat(k + 1);
                    let rhs = t.a_hat(k) * kf / (kf + p);
                    prop_assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs());
                }
                if p < 1.0 {
                    for k in 1..n {
                        let kf = k as f64;
                        let lhs = t.a_check(k + 1).unwrap();
                        let rhs = t.a_check(k).unwrap() * kf / (kf - p);
                        prop_assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs());
                    }
                }
            }
        }
    }
}
