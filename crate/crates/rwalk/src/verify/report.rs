//! Check records and suite reports.

use serde::{Deserialize, Serialize};

/// One named statistical check.
///
/// `pass` is decided at construction: either `|z| ≤ tol` for z-score
/// checks (where `tol` holds the declared z bound), or
/// `|estimate − target| ≤ tol` for tolerance checks. `se` and `z` are
/// absent (JSON `null`) for checks that do not use them; no field is
/// ever NaN.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestCheck {
    /// Stable check identifier within the suite.
    pub name: String,
    /// Human-readable description of the measured quantity.
    pub statistic: String,
    /// Value the statistic should be near.
    pub target: f64,
    /// Measured value.
    pub estimate: f64,
    /// Standard error of the estimate, when one applies.
    pub se: Option<f64>,
    /// Raw z-score `(estimate − target)/se`, when one applies.
    pub z: Option<f64>,
    /// Declared bound: the z limit for z-checks, the absolute or relative
    /// tolerance otherwise.
    pub tol: f64,
    /// Whether the check passed.
    pub pass: bool,
}

fn clean(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

impl TestCheck {
    /// z-score check: pass iff `|estimate − target| ≤ z_max·se`.
    ///
    /// A degenerate (nonpositive or non-finite) `se` passes only an exact
    /// match and reports `z` as absent rather than NaN.
    pub fn z_check(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
        se: f64,
        z_max: f64,
    ) -> Self {
        Self::z_check_with_allowance(name, statistic, target, estimate, se, z_max, 0.0)
    }

    /// z-score check with an additive bias allowance: pass iff
    /// `|estimate − target| ≤ allowance + z_max·se`. The reported `z` is
    /// the raw `(estimate − target)/se`.
    pub fn z_check_with_allowance(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
        se: f64,
        z_max: f64,
        allowance: f64,
    ) -> Self {
        let gap = (estimate - target).abs();
        let (z, pass) = if se.is_finite() && se > 0.0 && estimate.is_finite() {
            (
                Some((estimate - target) / se),
                gap <= allowance + z_max * se,
            )
        } else {
            (None, estimate == target)
        };
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: clean(target),
            estimate: clean(estimate),
            se: se.is_finite().then_some(se),
            z,
            tol: z_max,
            pass,
        }
    }

    /// Absolute-tolerance check: pass iff `|estimate − target| ≤ tol`.
    pub fn tol_check(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
        tol: f64,
    ) -> Self {
        let pass = estimate.is_finite() && (estimate - target).abs() <= tol;
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: clean(target),
            estimate: clean(estimate),
            se: None,
            z: None,
            tol,
            pass,
        }
    }

    /// Relative-tolerance check: pass iff
    /// `|estimate − target| ≤ rel·|target|`. Do not use with target 0.
    pub fn rel_check(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
        rel: f64,
    ) -> Self {
        let pass = estimate.is_finite() && (estimate - target).abs() <= rel * target.abs();
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: clean(target),
            estimate: clean(estimate),
            se: None,
            z: None,
            tol: rel,
            pass,
        }
    }

    /// Relative-tolerance check that still reports the standard error and
    /// z-score for context: pass iff `|estimate − target| ≤ rel·|target|`.
    pub fn rel_check_with_se(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
        se: f64,
        rel: f64,
    ) -> Self {
        let z = (se.is_finite() && se > 0.0 && estimate.is_finite())
            .then(|| (estimate - target) / se);
        let pass = estimate.is_finite() && (estimate - target).abs() <= rel * target.abs();
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: clean(target),
            estimate: clean(estimate),
            se: se.is_finite().then_some(se),
            z,
            tol: rel,
            pass,
        }
    }

    /// Boolean condition reported as a check (estimate 1 when it held).
    pub fn flag(name: impl Into<String>, statistic: impl Into<String>, held: bool) -> Self {
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: 1.0,
            estimate: if held { 1.0 } else { 0.0 },
            se: None,
            z: None,
            tol: 0.0,
            pass: held,
        }
    }

    /// Lower-bound check: pass iff `estimate ≥ target` (e.g. p-values).
    pub fn at_least(
        name: impl Into<String>,
        statistic: impl Into<String>,
        target: f64,
        estimate: f64,
    ) -> Self {
        let pass = estimate.is_finite() && estimate >= target;
        TestCheck {
            name: name.into(),
            statistic: statistic.into(),
            target: clean(target),
            estimate: clean(estimate),
            se: None,
            z: None,
            tol: 0.0,
            pass,
        }
    }
}

/// Outcome of one check suite: configuration echo plus the check list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestReport {
    /// Suite name.
    pub suite: String,
    /// Configuration the suite ran with.
    pub config: serde_json::Value,
    /// Master seed.
    pub seed: u64,
    /// Individual checks, in execution order.
    pub checks: Vec<TestCheck>,
}

impl TestReport {
    /// Empty report for a suite about to run.
    pub fn new(suite: impl Into<String>, config: serde_json::Value, seed: u64) -> Self {
        TestReport {
            suite: suite.into(),
            config,
            seed,
            checks: Vec::new(),
        }
    }

    /// Append a check.
    pub fn push(&mut self, check: TestCheck) {
        self.checks.push(check);
    }

    /// True iff every check passed (and at least one ran).
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// Names of the failing checks.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_check_decides_pass_from_the_z_bound() {
        let c = TestCheck::z_check("a", "mean", 1.0, 1.2, 0.1, 3.0);
        assert!(c.pass);
        assert!((c.z.unwrap() - 2.0).abs() < 1e-12);
        let c = TestCheck::z_check("a", "mean", 1.0, 1.4, 0.1, 3.0);
        assert!(!c.pass);
    }

    #[test]
    fn allowance_widens_the_band() {
        let c = TestCheck::z_check_with_allowance("a", "cov", 1.0, 1.4, 0.1, 3.0, 0.15);
        assert!(c.pass);
        assert!((c.z.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_se_needs_an_exact_match() {
        let c = TestCheck::z_check("a", "mean", 2.0, 2.0, 0.0, 3.0);
        assert!(c.pass);
        assert!(c.z.is_none());
        let c = TestCheck::z_check("a", "mean", 2.0, 2.0 + 1e-15, 0.0, 3.0);
        assert!(!c.pass);
    }

    #[test]
    fn tolerance_and_flag_variants() {
        assert!(TestCheck::tol_check("a", "s", 3.0, 3.05, 0.1).pass);
        assert!(!TestCheck::tol_check("a", "s", 3.0, 3.2, 0.1).pass);
        assert!(TestCheck::rel_check("a", "s", -2.0, -2.08, 0.05).pass);
        assert!(!TestCheck::rel_check("a", "s", -2.0, -2.2, 0.05).pass);
        assert!(TestCheck::flag("a", "monotone", true).pass);
        assert!(!TestCheck::flag("a", "monotone", false).pass);
        assert!(TestCheck::at_least("a", "p-value", 0.01, 0.4).pass);
        assert!(!TestCheck::at_least("a", "p-value", 0.01, 0.002).pass);
    }

    #[test]
    fn nan_estimates_fail_and_serialize_as_finite_numbers() {
        let c = TestCheck::z_check("a", "mean", 1.0, f64::NAN, 0.1, 3.0);
        assert!(!c.pass);
        let text = serde_json::to_string(&c).unwrap();
        assert!(!text.contains("NaN"));
        assert!(text.contains("\"estimate\":0.0"));
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut r = TestReport::new(
            "demo",
            serde_json::json!({"p": 0.25, "n": 64}),
            7,
        );
        assert!(!r.passed());
        r.push(TestCheck::tol_check("one", "x", 1.0, 1.0, 0.0));
        r.push(TestCheck::z_check("two", "y", 0.0, 0.1, 0.05, 3.0));
        assert!(r.passed());
        let text = r.to_json();
        assert!(text.contains("\"suite\""));
        assert!(text.contains("\"se\": null") || text.contains("\"se\":null"));
        let back: TestReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.checks.len(), 2);
        assert_eq!(back.seed, 7);
        assert!(back.passed());
        r.push(TestCheck::flag("three", "held", false));
        assert!(!r.passed());
        assert_eq!(r.failures(), vec!["three"]);
    }
}
