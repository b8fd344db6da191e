//! Ensemble summaries and statistical check suites.

mod checks;
mod enumerate;
mod exact;
mod report;
mod stats;
mod suites;
mod summary;

pub use checks::{
    conditional_step_moments_test, covariance_discrepancy, lln_report, marginal_gaussian_test,
    origin_control, superdiffusive_report,
};

pub use enumerate::{enumerate_rademacher, RademacherEnumeration};
pub use exact::{exact_sum, ExactSum};
pub use report::{TestCheck, TestReport};
pub use stats::{
    bootstrap_median_se, chi_square_p, growth_exponent_fit, kolmogorov_p, ks_statistic, ks_test,
    mean_and_se, median, normal_cdf, GrowthFit,
};
pub use suites::{run_suite, suite_step_probabilities, SuiteOptions, SUITE_NAMES};
pub use summary::{empirical_moments, empirical_moments_scaled, EnsembleSummary, VectorSummary};
