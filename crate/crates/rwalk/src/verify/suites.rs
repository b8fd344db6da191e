//! Named end-to-end suites: each bundles simulation, diagnostics and
//! limit-law predictions into one seeded [`TestReport`].
//!
//! Every suite is a pure function of its seed and path budget.  Parallel
//! path generation keeps path order and all reductions are sequential, so
//! two runs with the same options serialize to byte-identical JSON on any
//! thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;

use crate::diagnostics::{
    bracket_walk_cross, brackets, diagonal_increment, mixed_increment, scaled_epoch_float,
    scaled_paths, BracketKind, Regime, ScaledPath,
};
use crate::error::{Error, Result};
use crate::limits::{sample_limit_triplet, LimitCovarianceModel, Method, TimeGrid};
use crate::rng::{stream_key, uniform_at, Stream};
use crate::verify::checks::{path_rows, summarize_rows};
use crate::verify::{
    bootstrap_median_se, chi_square_p, conditional_step_moments_test, covariance_discrepancy,
    empirical_moments, empirical_moments_scaled, enumerate_rademacher, growth_exponent_fit,
    lln_report, marginal_gaussian_test, median, origin_control, superdiffusive_report, TestCheck,
    TestReport,
};
use crate::walks::{
    build_coefficients, exact_moments, simulate_coupled, simulate_decomposed, CoefficientTable,
    CoupledPath, ReinforcementParams, Series, StepLaw,
};
use crate::Component;

/// Optional overrides shared by every suite.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    /// Master seed; each suite carries its own fixed default.
    pub seed: Option<u64>,
    /// Monte Carlo path budget; each suite carries its own fixed default.
    pub n_paths: Option<usize>,
}

/// Suite names accepted by [`run_suite`], in recommended running order.
pub const SUITE_NAMES: [&str; 14] = [
    "enumeration",
    "reinforced-variance",
    "counterbalanced-variance",
    "triplet-diffusive",
    "critical",
    "bracket-limits",
    "isometry",
    "growth",
    "lln",
    "superdiffusive",
    "truncation",
    "limit-sampler",
    "conditional-moments",
    "determinism",
];

/// Run one named suite with its default seed and budget unless overridden.
pub fn run_suite(name: &str, options: &SuiteOptions) -> Result<TestReport> {
    let run = |seed: u64, paths: usize, f: fn(u64, usize) -> Result<TestReport>| {
        f(
            options.seed.unwrap_or(seed),
            options.n_paths.unwrap_or(paths),
        )
    };
    match name {
        "enumeration" => run(101, 20_000, enumeration_suite),
        "reinforced-variance" => run(202, 20_000, reinforced_variance_suite),
        "counterbalanced-variance" => run(303, 20_000, counterbalanced_variance_suite),
        "triplet-diffusive" => run(404, 20_000, triplet_diffusive_suite),
        "critical" => run(507, 20_000, critical_suite),
        "bracket-limits" => run(606, 100, bracket_limits_suite),
        "isometry" => run(707, 100_000, isometry_suite),
        "growth" => run(808, 10_000, growth_suite),
        "lln" => run(909, 2_000, lln_suite),
        "superdiffusive" => run(1010, 20_000, superdiffusive_suite),
        "truncation" => run(1111, 20_000, truncation_suite),
        "limit-sampler" => run(1212, 20_000, limit_sampler_suite),
        "conditional-moments" => run(1313, 20_000, conditional_moments_suite),
        "determinism" => run(1414, 500, determinism_suite),
        _ => Err(Error::invalid(format!(
            "unknown suite {name:?}; expected one of: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Reinforcement probabilities a named suite pins, if any.
///
/// Suites carry their own parameters because every tolerance is calibrated
/// against them.  Front ends use this to cross-check a user-supplied `p`
/// before spending compute: `Some(ps)` lists the pinned values, `None`
/// means the suite draws its probabilities internally.  Unknown names get
/// the same error as [`run_suite`].
pub fn suite_step_probabilities(name: &str) -> Result<Option<&'static [f64]>> {
    match name {
        "enumeration" => Ok(Some(&[0.25, 0.5, 0.75])),
        "reinforced-variance" => Ok(Some(&[0.25])),
        "counterbalanced-variance" => Ok(Some(&[0.75, 1.0])),
        "triplet-diffusive" => Ok(Some(&[0.3])),
        "critical" => Ok(Some(&[0.5])),
        "bracket-limits" => Ok(Some(&[0.25, 0.75, 0.5, 0.3])),
        "isometry" => Ok(Some(&[0.1, 0.3, 0.45])),
        "growth" => Ok(Some(&[0.25, 0.5, 0.75])),
        "lln" => Ok(Some(&[0.5, 0.25])),
        "superdiffusive" => Ok(Some(&[0.75])),
        "truncation" => Ok(None),
        "limit-sampler" => Ok(Some(&[0.3])),
        "conditional-moments" => Ok(None),
        "determinism" => Ok(Some(&[0.3])),
        _ => Err(Error::invalid(format!(
            "unknown suite {name:?}; expected one of: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// One statistics row per path, in parallel, keeping path order.
fn walk_rows<F>(base: &ReinforcementParams, n_paths: usize, row: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&CoupledPath) -> Result<Vec<f64>> + Send + Sync,
{
    path_rows(n_paths, |i| row(&simulate_coupled(&base.for_path(i))?))
}

/// Append `sub`'s checks to `report`, tagging each name with `suffix`.
fn merge_checks(report: &mut TestReport, sub: TestReport, suffix: &str) {
    for mut check in sub.checks {
        check.name = format!("{}{}", check.name, suffix);
        report.push(check);
    }
}

fn enumeration_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let n = 6;
    let ps = [0.25, 0.5, 0.75];
    let mut report = TestReport::new(
        "enumeration",
        json!({ "law": "rademacher", "n": n, "ps": ps, "n_paths": n_paths }),
        seed,
    );
    for (slot, &p) in ps.iter().enumerate() {
        let en = enumerate_rademacher(p, n)?;
        let oracle = exact_moments(p, &StepLaw::Rademacher, n)?;
        let mut gap = 0.0f64;
        for k in 1..=n {
            gap = gap.max((en.mean_hat(k) - oracle.mean_hat(k)).abs());
            gap = gap.max((en.mean_check(k) - oracle.mean_check(k)).abs());
            gap = gap.max((en.second_moment_hat(k) - oracle.second_moment_hat(k)?).abs());
            gap = gap.max((en.second_moment_check(k) - oracle.second_moment_check(k)?).abs());
        }
        report.push(TestCheck::tol_check(
            format!("enumeration-matches-recursions(p={p})"),
            "max |enumerated moment - recursion| over epochs 1..=6",
            0.0,
            gap,
            1e-12,
        ));
        let params =
            ReinforcementParams::new(p, StepLaw::Rademacher, n, seed.wrapping_add(slot as u64))
                .with_indices(vec![n]);
        let rows = walk_rows(&params, n_paths, |path| {
            Ok(vec![
                path.value(Series::S, n).expect("recorded epoch"),
                path.value(Series::SHat, n).expect("recorded epoch"),
                path.value(Series::SCheck, n).expect("recorded epoch"),
            ])
        })?;
        let mut counts: BTreeMap<(i64, i64, i64), u64> = BTreeMap::new();
        for row in &rows {
            let key = (
                row[0].round() as i64,
                row[1].round() as i64,
                row[2].round() as i64,
            );
            *counts.entry(key).or_insert(0) += 1;
        }
        let off_support: u64 = counts
            .iter()
            .filter(|(k, _)| en.probability(k.0, k.1, k.2) == 0.0)
            .map(|(_, c)| *c)
            .sum();
        // Cells expecting fewer than five hits are pooled before chi-square.
        let mut stat = 0.0;
        let mut cells = 0usize;
        let (mut pooled_expected, mut pooled_observed) = (0.0f64, 0.0f64);
        for (key, prob) in en.pmf() {
            let expected = prob * n_paths as f64;
            let observed = counts.get(key).copied().unwrap_or(0) as f64;
            if expected < 5.0 {
                pooled_expected += expected;
                pooled_observed += observed;
            } else {
                stat += (observed - expected).powi(2) / expected;
                cells += 1;
            }
        }
        if pooled_expected > 0.0 {
            stat += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
            cells += 1;
        }
        let p_value = if off_support > 0 || cells < 2 {
            0.0
        } else {
            chi_square_p(stat, (cells - 1) as f64)
        };
        report.push(TestCheck::at_least(
            format!("terminal-pmf-chi-square(p={p})"),
            "chi-square p-value of simulated (S, S_hat, S_check) at n=6 vs the enumerated law",
            0.01,
            p_value,
        ));
    }
    let en = enumerate_rademacher(0.5, 2)?;
    report.push(TestCheck::tol_check(
        "second-moment-hat(n=2)",
        "E[S_hat_2^2] at p=1/2",
        3.0,
        en.second_moment_hat(2),
        1e-12,
    ));
    report.push(TestCheck::tol_check(
        "second-moment-check(n=2)",
        "E[S_check_2^2] at p=1/2",
        1.0,
        en.second_moment_check(2),
        1e-12,
    ));
    Ok(report)
}

fn reinforced_variance_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let (p, n) = (0.25, 4096usize);
    let mut report = TestReport::new(
        "reinforced-variance",
        json!({ "p": p, "n": n, "law": "rademacher", "n_paths": n_paths }),
        seed,
    );
    let oracle = exact_moments(p, &StepLaw::Rademacher, n)?;
    let oracle_var = oracle.second_moment_hat(n)? / n as f64;
    let sqrt_n = (n as f64).sqrt();
    let params = ReinforcementParams::new(p, StepLaw::Rademacher, n, seed).with_indices(vec![n]);
    let rows = walk_rows(&params, n_paths, |path| {
        Ok(vec![
            path.value(Series::SHat, n).expect("recorded epoch") / sqrt_n,
        ])
    })?;
    let summary = summarize_rows(&rows, 1);
    report.push(TestCheck::z_check(
        "mc-variance-vs-recursion",
        "Var(S_hat_n/sqrt(n)) vs E[S_hat_n^2]/n from the moment recursion",
        oracle_var,
        summary.covariance(0, 0),
        summary.covariance_se(0, 0),
        3.0,
    ));
    report.push(TestCheck::rel_check(
        "recursion-vs-limit",
        "E[S_hat_n^2]/n vs 1/(1-2p)",
        2.0,
        oracle_var,
        0.05,
    ));
    Ok(report)
}

fn counterbalanced_variance_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let n = 4096usize;
    let ps = [0.75, 1.0];
    let mut report = TestReport::new(
        "counterbalanced-variance",
        json!({ "n": n, "law": "rademacher", "ps": ps, "n_paths": n_paths }),
        seed,
    );
    let sqrt_n = (n as f64).sqrt();
    for (slot, &p) in ps.iter().enumerate() {
        let oracle = exact_moments(p, &StepLaw::Rademacher, n)?;
        let oracle_var = oracle.second_moment_check(n)? / n as f64;
        let params =
            ReinforcementParams::new(p, StepLaw::Rademacher, n, seed.wrapping_add(slot as u64))
                .with_indices(vec![n]);
        let rows = walk_rows(&params, n_paths, |path| {
            Ok(vec![
                path.value(Series::SCheck, n).expect("recorded epoch") / sqrt_n,
            ])
        })?;
        let summary = summarize_rows(&rows, 1);
        report.push(TestCheck::z_check(
            format!("mc-variance-vs-recursion(p={p})"),
            "Var(S_check_n/sqrt(n)) vs E[S_check_n^2]/n from the moment recursion",
            oracle_var,
            summary.covariance(0, 0),
            summary.covariance_se(0, 0),
            3.0,
        ));
        report.push(TestCheck::rel_check(
            format!("recursion-vs-limit(p={p})"),
            "E[S_check_n^2]/n vs 1/(1+2p)",
            1.0 / (1.0 + 2.0 * p),
            oracle_var,
            if p < 1.0 { 0.03 } else { 0.05 },
        ));
    }
    // The marginal shape check needs a continuous step law: on the +-1
    // lattice the spacing alone is resolvable by KS at this sample size.
    let p = 0.75;
    let law = StepLaw::gaussian(0.0, 1.0)?;
    let oracle = exact_moments(p, &law, n)?;
    let oracle_var = oracle.second_moment_check(n)? / n as f64;
    let params = ReinforcementParams::new(p, law, n, seed.wrapping_add(7)).with_indices(vec![n]);
    let rows = walk_rows(&params, n_paths, |path| {
        Ok(vec![
            path.value(Series::SCheck, n).expect("recorded epoch") / sqrt_n,
        ])
    })?;
    let samples: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let sub = marginal_gaussian_test(&samples, oracle_var)?;
    merge_checks(&mut report, sub, "(p=0.75, gaussian)");
    Ok(report)
}

fn triplet_diffusive_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let (p, n) = (0.3, 4096usize);
    let grid = [0.25, 0.5, 1.0];
    let mut report = TestReport::new(
        "triplet-diffusive",
        json!({
            "p": p,
            "n": n,
            "grid": grid,
            "law": "rademacher",
            "n_paths": n_paths,
            "z_max": 4.0,
            "allowance": 0.05,
        }),
        seed,
    );
    let coeffs = build_coefficients(p, n)?;
    let model = LimitCovarianceModel::new(p, 1.0)?;
    let epochs: Vec<usize> = grid.iter().map(|t| (n as f64 * t).round() as usize).collect();
    let params = ReinforcementParams::new(p, StepLaw::Rademacher, n, seed).with_indices(epochs);
    let scaled: Vec<ScaledPath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_coupled(&params.for_path(i))?;
            scaled_paths(&path, &coeffs, &grid, Regime::Diffusive)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = empirical_moments_scaled(&scaled)?;
    let sub = covariance_discrepancy(&summary, &model, 4.0, 0.05)?;
    merge_checks(&mut report, sub, "");
    Ok(report)
}

fn critical_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let (p, n) = (0.5, 10_000usize);
    let grid = [0.5, 1.0];
    let mut report = TestReport::new(
        "critical",
        json!({
            "p": p,
            "n": n,
            "exponent_grid": grid,
            "law": "rademacher",
            "n_paths": n_paths,
        }),
        seed,
    );
    let coeffs = build_coefficients(p, n)?;
    let epochs: Vec<usize> = grid
        .iter()
        .map(|t| scaled_epoch_float((n as f64).powf(*t)))
        .collect();
    let params = ReinforcementParams::new(p, StepLaw::Rademacher, n, seed).with_indices(epochs);
    let scaled: Vec<ScaledPath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_coupled(&params.for_path(i))?;
            scaled_paths(&path, &coeffs, &grid, Regime::Critical)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = empirical_moments_scaled(&scaled)?;
    report.push(TestCheck::rel_check_with_se(
        "critical-variance(t=1)",
        "Var(S_hat_n / (sigma sqrt(n ln n))) vs 1",
        1.0,
        summary.covariance[1][1],
        summary.covariance_se[1][1],
        0.10,
    ));
    let cells: [(usize, usize, f64, f64); 3] =
        [(0, 0, 0.5, 0.5), (0, 1, 0.5, 1.0), (1, 1, 1.0, 1.0)];
    for (i, j, s, t) in cells {
        let target = s.min(t);
        report.push(TestCheck::z_check_with_allowance(
            format!("critical-covariance(s={s},t={t})"),
            "covariance of the critically scaled reinforced walk vs min(s, t)",
            target,
            summary.covariance[i][j],
            summary.covariance_se[i][j],
            3.0,
            0.1 * target,
        ));
    }
    Ok(report)
}

fn bracket_limits_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let n = 100_000usize;
    let resamples = 200;
    let cross_n = 10_000usize;
    let mut report = TestReport::new(
        "bracket-limits",
        json!({
            "n": n,
            "law": "rademacher",
            "n_paths": n_paths,
            "bootstrap_resamples": resamples,
            "cross": { "p": 0.3, "n": cross_n, "times": [0.5, 1.0] },
        }),
        seed,
    );
    let cases: [(f64, BracketKind, f64, f64, &str, &str); 3] = [
        (
            0.25,
            BracketKind::Reinforced,
            2.0,
            0.05,
            "reinforced",
            "median scaled <M_hat>_n vs 1/(1-2p)",
        ),
        (
            0.75,
            BracketKind::Counterbalanced,
            0.4,
            0.05,
            "counterbalanced",
            "median scaled <M_check>_n vs 1/(1+2p)",
        ),
        (
            0.5,
            BracketKind::Mixed,
            1.0 / 3.0,
            0.10,
            "mixed",
            "median scaled <M_hat, M_check>_n vs (1-p)/(1+p)",
        ),
    ];
    for (slot, (p, kind, target, rel, tag, statistic)) in cases.into_iter().enumerate() {
        let coeffs = build_coefficients(p, n)?;
        let params =
            ReinforcementParams::new(p, StepLaw::Rademacher, n, seed.wrapping_add(slot as u64))
                .with_aux();
        let rows = walk_rows(&params, n_paths, |path| {
            Ok(vec![brackets(path, &coeffs)?.scaled(kind, 1.0)?])
        })?;
        let values: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let estimate = median(&values);
        let se = bootstrap_median_se(&values, resamples, seed.wrapping_add(100 + slot as u64));
        report.push(TestCheck::rel_check_with_se(
            format!("bracket-limit-{tag}(p={p})"),
            statistic,
            target,
            estimate,
            se,
            rel,
        ));
    }
    // The walk-cross brackets are deterministic, so no simulation is needed.
    let p = 0.3;
    let coeffs = build_coefficients(p, cross_n)?;
    for t in [0.5, 1.0] {
        let reinforced = bracket_walk_cross(cross_n, t, &coeffs, 1.0, Component::Reinforced)?;
        report.push(TestCheck::rel_check(
            format!("walk-cross-reinforced(t={t})"),
            "scaled reinforced walk-cross bracket vs t^(1-p)",
            t.powf(1.0 - p),
            reinforced,
            0.02,
        ));
        let counter = bracket_walk_cross(cross_n, t, &coeffs, 1.0, Component::Counterbalanced)?;
        report.push(TestCheck::rel_check(
            format!("walk-cross-counterbalanced(t={t})"),
            "scaled counterbalanced walk-cross bracket vs (1-p) t^(1+p)/(1+p)",
            (1.0 - p) * t.powf(1.0 + p) / (1.0 + p),
            counter,
            0.02,
        ));
    }
    Ok(report)
}

/// Martingale-minus-bracket discrepancies `M_k^2 - <M>_k` (hat, check and
/// mixed) streamed at the given checkpoint epochs without materializing the
/// series; bit-identical to reading [`brackets`] and
/// [`martingale_transform`] at the same epochs.
fn isometry_row(
    path: &CoupledPath,
    coeffs: &CoefficientTable,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    let v = path.v_hat.as_deref().ok_or(Error::AuxiliaryRequired)?;
    let g = path.g_check.as_deref().ok_or(Error::AuxiliaryRequired)?;
    let ah = coeffs.a_hat_slice();
    let ac = coeffs.a_check_slice()?;
    let p = path.p;
    let s2 = path.sigma2;
    let mut row = Vec::with_capacity(3 * checkpoints.len());
    let mut snapshot = |k: usize, h: f64, c: f64, m: f64| {
        let m_hat = ah[k - 1] * path.s_hat[k];
        let m_check = ac[k - 1] * path.s_check[k];
        row.push(m_hat * m_hat - h);
        row.push(m_check * m_check - c);
        row.push(m_hat * m_check - m);
    };
    let (mut h, mut c, mut m) = (s2, s2, s2);
    let mut next = 0usize;
    if checkpoints.first() == Some(&1) {
        snapshot(1, h, c, m);
        next = 1;
    }
    for k in 2..=path.n {
        let q = (k - 1) as f64;
        h += ah[k - 1].powi(2) * diagonal_increment(p, s2, path.s_hat[k - 1], v[k - 1], q);
        c += ac[k - 1].powi(2) * diagonal_increment(p, s2, path.s_check[k - 1], v[k - 1], q);
        m += mixed_increment(
            p,
            s2,
            ah[k - 1],
            ac[k - 1],
            ah[k - 1] - ah[k - 2],
            ac[k - 1] - ac[k - 2],
            path.s_hat[k - 1],
            path.s_check[k - 1],
            g[k - 1],
            q,
        );
        if next < checkpoints.len() && k == checkpoints[next] {
            snapshot(k, h, c, m);
            next += 1;
        }
    }
    if next < checkpoints.len() {
        return Err(Error::invalid(
            "isometry checkpoints must be increasing epochs within the path",
        ));
    }
    Ok(row)
}

fn isometry_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let ps = [0.1, 0.3, 0.45];
    let ns = [64usize, 512, 4096];
    let n_max = 4096usize;
    let mut report = TestReport::new(
        "isometry",
        json!({ "ps": ps, "ns": ns, "law": "rademacher", "n_paths": n_paths }),
        seed,
    );
    for (slot, &p) in ps.iter().enumerate() {
        let coeffs = build_coefficients(p, n_max)?;
        let params =
            ReinforcementParams::new(p, StepLaw::Rademacher, n_max, seed.wrapping_add(slot as u64))
                .with_aux();
        let rows = walk_rows(&params, n_paths, |path| isometry_row(path, &coeffs, &ns))?;
        let summary = summarize_rows(&rows, 3 * ns.len());
        for (ni, &n) in ns.iter().enumerate() {
            let labels = [
                ("hat", "mean(M_hat_n^2 - <M_hat>_n)"),
                ("check", "mean(M_check_n^2 - <M_check>_n)"),
                ("mixed", "mean(M_hat_n M_check_n - <M_hat, M_check>_n)"),
            ];
            for (ki, (kind, statistic)) in labels.into_iter().enumerate() {
                let idx = 3 * ni + ki;
                report.push(TestCheck::z_check(
                    format!("isometry-{kind}(p={p},n={n})"),
                    statistic,
                    0.0,
                    summary.mean(idx),
                    summary.mean_se(idx),
                    3.0,
                ));
            }
        }
    }
    Ok(report)
}

fn growth_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let n_max = 1usize << 16;
    let checkpoints: Vec<usize> = (10..=16).map(|e| 1usize << e).collect();
    let proxy_ns = [1usize << 12, 1 << 14, 1 << 16];
    let ps = [0.25, 0.5, 0.75];
    let mut report = TestReport::new(
        "growth",
        json!({
            "ps": ps,
            "checkpoints": checkpoints,
            "proxy_ns": proxy_ns,
            "law": "rademacher",
            "n_paths": n_paths,
        }),
        seed,
    );
    for (slot, &p) in ps.iter().enumerate() {
        // Scale of the reinforced strong law in each memory regime.
        let proxy_scale = |m: usize| -> f64 {
            let mf = m as f64;
            if p < 0.5 {
                mf.powf(1.0 - p)
            } else if p > 0.5 {
                mf
            } else {
                mf.sqrt() * mf.ln()
            }
        };
        let params =
            ReinforcementParams::new(p, StepLaw::Rademacher, n_max, seed.wrapping_add(slot as u64));
        let rows = walk_rows(&params, n_paths, |path| {
            let mut row = Vec::with_capacity(checkpoints.len() + proxy_ns.len());
            let mut sup = 0.0f64;
            let mut next = 0usize;
            for (k, &v) in path.s_hat.iter().enumerate() {
                sup = sup.max(v.abs());
                if next < checkpoints.len() && k == checkpoints[next] {
                    row.push(sup * sup);
                    next += 1;
                }
            }
            for &m in &proxy_ns {
                row.push((path.s_hat[m] / proxy_scale(m)).powi(2));
            }
            Ok(row)
        })?;
        let summary = summarize_rows(&rows, checkpoints.len() + proxy_ns.len());
        let points: Vec<(f64, f64)> = checkpoints
            .iter()
            .enumerate()
            .map(|(i, &m)| (m as f64, summary.mean(i)))
            .collect();
        let fit = growth_exponent_fit(&points, p == 0.5)?;
        if p == 0.5 {
            report.push(TestCheck::flag(
                "sup-growth-log-correction(p=0.5)",
                "the log-corrected power fit of E[sup^2] beats the pure power fit in rss",
                fit.prefers_log_correction,
            ));
        } else {
            let target = if p < 0.5 { 1.0 } else { 2.0 * p };
            report.push(TestCheck::tol_check(
                format!("sup-growth-exponent(p={p})"),
                "ols slope of ln E[sup_k<=n S_hat_k^2] on ln n",
                target,
                fit.slope,
                0.1,
            ));
        }
        let b = checkpoints.len();
        let (m1, m2, m3) = (summary.mean(b), summary.mean(b + 1), summary.mean(b + 2));
        report.push(TestCheck::flag(
            format!("l2-proxy-decreasing(p={p})"),
            "mean squares of the scaled reinforced walk decrease across n = 2^12, 2^14, 2^16",
            m1 > m2 && m2 > m3,
        ));
    }
    Ok(report)
}

fn lln_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let n = 100_000usize;
    let mut report = TestReport::new(
        "lln",
        json!({
            "n": n,
            "n_paths": n_paths,
            "cases": ["p=0.5 uniform{0,2}", "p=0.5 rademacher", "p=0.25 rademacher"],
        }),
        seed,
    );
    let shifted = StepLaw::discrete_uniform(vec![0.0, 2.0])?;
    let sub = lln_report(0.5, &shifted, n, n_paths, seed)?;
    merge_checks(&mut report, sub, "(p=0.5, uniform{0,2})");
    let sub = lln_report(0.5, &StepLaw::Rademacher, n, n_paths, seed.wrapping_add(1))?;
    merge_checks(&mut report, sub, "(p=0.5, rademacher)");
    let sub = lln_report(0.25, &StepLaw::Rademacher, n, n_paths, seed.wrapping_add(2))?;
    merge_checks(&mut report, sub, "(p=0.25, rademacher)");
    Ok(report)
}

fn superdiffusive_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let ns = [1usize << 12, 1 << 13, 1 << 14, 1 << 15];
    let mut report = superdiffusive_report(0.75, &StepLaw::Rademacher, &ns, n_paths, seed)?;
    report.suite = "superdiffusive".into();
    Ok(report)
}

fn truncation_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let configurations = 100usize;
    let (origin_n, eps) = (100_000usize, 0.35);
    let deltas = [0.04, 0.02, 0.01];
    let mut report = TestReport::new(
        "truncation",
        json!({
            "configurations": configurations,
            "origin": { "p": 0.5, "n": origin_n, "eps": eps, "deltas": deltas, "n_paths": n_paths },
        }),
        seed,
    );
    let gaps = path_rows(configurations, |cfg| {
        let key = stream_key(seed, cfg, Stream::Step);
        let p = uniform_at(key, 0);
        let n = 50 + (uniform_at(key, 1) * 450.0) as usize;
        let cutoff = 0.3 + 1.7 * uniform_at(key, 2);
        let law = match cfg % 3 {
            0 => StepLaw::Rademacher,
            1 => StepLaw::gaussian(0.0, 1.0)?,
            _ => StepLaw::discrete_uniform(vec![-1.5, -0.5, 2.0])?,
        };
        let params = ReinforcementParams::new(p, law, n, seed.wrapping_add(1000 + cfg));
        let split = simulate_decomposed(&params, cutoff)?;
        let mut worst = 0.0f64;
        for k in 0..=n {
            worst = worst.max((split.total.s[k] - split.low.s[k] - split.high.s[k]).abs());
            worst =
                worst.max((split.total.s_hat[k] - split.low.s_hat[k] - split.high.s_hat[k]).abs());
            worst = worst
                .max((split.total.s_check[k] - split.low.s_check[k] - split.high.s_check[k]).abs());
        }
        Ok(vec![worst])
    })?;
    let max_gap = gaps.iter().map(|r| r[0]).fold(0.0f64, f64::max);
    report.push(TestCheck::tol_check(
        "pathwise-additivity",
        "max |total - low - high| over random configurations, all epochs and walks",
        0.0,
        max_gap,
        1e-9,
    ));
    let mut estimates = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        let q = origin_control(
            0.5,
            &StepLaw::Rademacher,
            origin_n,
            n_paths,
            delta,
            eps,
            seed.wrapping_add(2000 + i as u64),
        )?;
        let se = (q * (1.0 - q) / n_paths as f64).sqrt();
        report.push(TestCheck::tol_check(
            format!("origin-exceedance(delta={delta})"),
            "P(max over k <= delta n of |S_check_k| > eps sqrt(n)), reported for context",
            0.0,
            q,
            1.0,
        ));
        estimates.push((q, se));
    }
    for (w, pair) in estimates.windows(2).enumerate() {
        let ((qa, sa), (qb, sb)) = (pair[0], pair[1]);
        let combined = (sa * sa + sb * sb).sqrt();
        report.push(TestCheck::flag(
            format!("origin-monotone(delta={})", deltas[w + 1]),
            "exceedance probability does not grow as delta shrinks, within 2 SE",
            qb <= qa + 2.0 * combined,
        ));
        report.push(TestCheck::flag(
            format!("origin-linear-decay(delta={})", deltas[w + 1]),
            "halving delta at least halves the exceedance probability, within 2 SE",
            qb <= 0.5 * qa + 2.0 * combined,
        ));
    }
    Ok(report)
}

fn limit_sampler_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let (p, sigma) = (0.3, 1.0);
    let euler_steps = 16_384usize;
    let euler_paths = (n_paths / 2).max(2);
    let mut report = TestReport::new(
        "limit-sampler",
        json!({
            "p": p,
            "sigma": sigma,
            "grid": [0.5, 1.0],
            "n_paths": n_paths,
            "euler_paths": euler_paths,
            "euler_steps": euler_steps,
        }),
        seed,
    );
    let model = LimitCovarianceModel::new(p, sigma)?;
    let grid = TimeGrid::new(vec![0.5, 1.0])?;
    let nt = grid.len();

    let cholesky = sample_limit_triplet(
        &model,
        &grid,
        &Component::ALL,
        n_paths,
        seed,
        Method::Cholesky,
    )?;
    let cholesky_summary = empirical_moments(&cholesky)?;
    let sub = covariance_discrepancy(&cholesky_summary, &model, 4.0, 0.0)?;
    merge_checks(&mut report, sub, " [cholesky]");

    let euler = sample_limit_triplet(
        &model,
        &grid,
        &Component::ALL,
        euler_paths,
        seed.wrapping_add(1),
        Method::Euler { steps: euler_steps },
    )?;
    let euler_summary = empirical_moments(&euler)?;
    let d = Component::ALL.len() * nt;
    let label = |i: usize| {
        format!(
            "{}({})",
            Component::ALL[i / nt].limit_label(),
            grid.points()[i % nt]
        )
    };
    for i in 0..d {
        for j in i..d {
            let target = cholesky_summary.covariance[i][j];
            let estimate = euler_summary.covariance[i][j];
            let se = (cholesky_summary.covariance_se[i][j].powi(2)
                + euler_summary.covariance_se[i][j].powi(2))
            .sqrt();
            report.push(TestCheck::z_check_with_allowance(
                format!("euler-vs-cholesky cov[{},{}]", label(i), label(j)),
                "discretized covariance vs direct covariance, combined SE",
                target,
                estimate,
                se,
                3.0,
                0.02 * target.abs(),
            ));
        }
    }

    let reinforced = [Component::Reinforced];
    let time_change = sample_limit_triplet(
        &model,
        &grid,
        &reinforced,
        n_paths,
        seed.wrapping_add(2),
        Method::TimeChange,
    )?;
    let tc_summary = empirical_moments(&time_change)?;
    let direct = sample_limit_triplet(
        &model,
        &grid,
        &reinforced,
        n_paths,
        seed.wrapping_add(3),
        Method::Cholesky,
    )?;
    let direct_summary = empirical_moments(&direct)?;
    for i in 0..nt {
        for j in i..nt {
            let se = (tc_summary.covariance_se[i][j].powi(2)
                + direct_summary.covariance_se[i][j].powi(2))
            .sqrt();
            report.push(TestCheck::z_check(
                format!(
                    "time-change-vs-cholesky cov[B_hat({}),B_hat({})]",
                    grid.points()[i],
                    grid.points()[j]
                ),
                "time-changed covariance vs direct covariance, combined SE",
                direct_summary.covariance[i][j],
                tc_summary.covariance[i][j],
                se,
                3.0,
            ));
        }
    }
    Ok(report)
}

fn conditional_moments_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let prefixes = 10u64;
    let mut report = TestReport::new(
        "conditional-moments",
        json!({ "prefixes": prefixes, "resamples": n_paths }),
        seed,
    );
    for i in 0..prefixes {
        let key = stream_key(seed, i, Stream::Gauss);
        let p = 0.05 + 0.9 * uniform_at(key, 0);
        let n = 20 + (uniform_at(key, 1) * 180.0) as usize;
        let law = match i % 4 {
            0 => StepLaw::Rademacher,
            1 => StepLaw::gaussian(0.0, 1.0)?,
            2 => StepLaw::discrete_uniform(vec![0.0, 2.0])?,
            _ => StepLaw::discrete_uniform(vec![-1.0, 0.0, 1.0])?,
        };
        let prefix = simulate_coupled(
            &ReinforcementParams::new(p, law.clone(), n, seed.wrapping_add(1000 + i)).with_aux(),
        )?;
        let sub = conditional_step_moments_test(&prefix, &law, n_paths, seed.wrapping_add(2000 + i))?;
        merge_checks(&mut report, sub, &format!("(prefix {i})"));
    }
    Ok(report)
}

fn determinism_suite(seed: u64, n_paths: usize) -> Result<TestReport> {
    let mut report = TestReport::new(
        "determinism",
        json!({ "n_paths": n_paths, "threads": [1, 4] }),
        seed,
    );
    let first = lln_report(0.3, &StepLaw::Rademacher, 2_000, n_paths, seed)?.to_json();
    let second = lln_report(0.3, &StepLaw::Rademacher, 2_000, n_paths, seed)?.to_json();
    report.push(TestCheck::flag(
        "repeat-run-identical",
        "two runs with one seed serialize to identical JSON",
        first == second,
    ));
    let other = lln_report(0.3, &StepLaw::Rademacher, 2_000, n_paths, seed.wrapping_add(1))?
        .to_json();
    report.push(TestCheck::flag(
        "seed-changes-output",
        "changing the master seed changes the serialized report",
        first != other,
    ));

    let pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))
    };
    let summary_bits = |threads: usize| -> Result<Vec<u64>> {
        pool(threads)?.install(|| {
            let n = 512usize;
            let params = ReinforcementParams::new(0.3, StepLaw::Rademacher, n, seed)
                .with_indices(vec![n]);
            let rows = walk_rows(&params, n_paths, |path| {
                Ok(vec![
                    path.value(Series::SHat, n).expect("recorded epoch"),
                    path.value(Series::SCheck, n).expect("recorded epoch"),
                ])
            })?;
            let s = summarize_rows(&rows, 2);
            Ok(vec![
                s.mean(0).to_bits(),
                s.mean(1).to_bits(),
                s.covariance(0, 0).to_bits(),
                s.covariance(0, 1).to_bits(),
                s.covariance(1, 1).to_bits(),
                s.covariance_se(0, 0).to_bits(),
            ])
        })
    };
    report.push(TestCheck::flag(
        "thread-count-invariant-summary",
        "ensemble summary bits agree between 1 and 4 worker threads",
        summary_bits(1)? == summary_bits(4)?,
    ));

    let sampler_rows = |threads: usize| -> Result<Vec<Vec<f64>>> {
        let model = LimitCovarianceModel::new(0.3, 1.0)?;
        let grid = TimeGrid::new(vec![0.5, 1.0])?;
        pool(threads)?.install(|| {
            Ok(sample_limit_triplet(
                &model,
                &grid,
                &Component::ALL,
                1_000,
                seed,
                Method::Cholesky,
            )?
            .samples)
        })
    };
    let (rows1, rows4) = (sampler_rows(1)?, sampler_rows(4)?);
    let bits_equal = rows1.len() == rows4.len()
        && rows1.iter().zip(&rows4).all(|(a, b)| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        });
    report.push(TestCheck::flag(
        "thread-count-invariant-sampler",
        "limit-sampler draws agree bitwise between 1 and 4 worker threads",
        bits_equal,
    ));
    Ok(report)
}
