//! Named statistical checks confronting simulations with their limits.

use crate::error::{Error, Result};
use crate::limits::{limit_covariance, LimitCovarianceModel};
use crate::rng::{index_in_at, stream_key, uniform_at, Stream};
use crate::verify::report::{TestCheck, TestReport};
use crate::verify::stats::{ks_test, mean_and_se, normal_cdf};
use crate::verify::summary::{EnsembleSummary, VectorSummary};
use crate::walks::{
    build_coefficients, exact_moments, simulate_coupled, CoupledPath, ReinforcementParams,
    Series, StepLaw,
};
use rayon::prelude::*;

/// Generate one row of ensemble statistics per path in parallel, keeping
/// path order; reductions over the returned rows must stay sequential so
/// results do not depend on the thread count.
pub(crate) fn path_rows<F>(n_paths: usize, row: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Send + Sync,
{
    (0..n_paths as u64).into_par_iter().map(row).collect()
}

/// Sequentially fold rows into a [`VectorSummary`].
pub(crate) fn summarize_rows(rows: &[Vec<f64>], d: usize) -> VectorSummary {
    let mut acc = VectorSummary::new(d);
    for row in rows {
        acc.push(row);
    }
    acc
}

/// Compare every covariance entry of `summary` against the limit kernel.
///
/// Each entry passes when `|estimate − kernel| ≤ allowance + z_max·SE`;
/// the allowance absorbs finite-n bias and is configuration, not a
/// statistical quantity.
pub fn covariance_discrepancy(
    summary: &EnsembleSummary,
    model: &LimitCovarianceModel,
    z_max: f64,
    allowance: f64,
) -> Result<TestReport> {
    let nt = summary.grid.len();
    let mut report = TestReport::new(
        "covariance-discrepancy",
        serde_json::json!({
            "p": model.p(),
            "sigma": model.sigma(),
            "n_paths": summary.n_paths,
            "z_max": z_max,
            "allowance": allowance,
        }),
        0,
    );
    for (bi, &ci) in summary.components.iter().enumerate() {
        for (bj, &cj) in summary.components.iter().enumerate().skip(bi) {
            for (ti, &s) in summary.grid.iter().enumerate() {
                for (tj, &t) in summary.grid.iter().enumerate() {
                    let a = bi * nt + ti;
                    let b = bj * nt + tj;
                    if b < a {
                        continue;
                    }
                    let target = limit_covariance(model, ci, cj, s, t)?;
                    let name = format!(
                        "cov[{}({s}),{}({t})]",
                        ci.limit_label(),
                        cj.limit_label()
                    );
                    report.push(TestCheck::z_check_with_allowance(
                        name,
                        "ensemble covariance entry vs limit kernel",
                        target,
                        summary.covariance[a][b],
                        summary.covariance_se[a][b],
                        z_max,
                        allowance,
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// Variance-ratio and Kolmogorov–Smirnov checks of a sample against the
/// centred Gaussian with `target_variance`.
pub fn marginal_gaussian_test(samples: &[f64], target_variance: f64) -> Result<TestReport> {
    if samples.len() < 1000 {
        return Err(Error::invalid(
            "marginal test needs at least 1000 samples",
        ));
    }
    if !(target_variance > 0.0) {
        return Err(Error::invalid("nonpositive target variance"));
    }
    let mut report = TestReport::new(
        "marginal-gaussian",
        serde_json::json!({
            "n_samples": samples.len(),
            "target_variance": target_variance,
            "z_max": 4.0,
            "alpha": 0.01,
        }),
        0,
    );
    let mut acc = VectorSummary::new(1);
    for &x in samples {
        acc.push(&[x]);
    }
    report.push(TestCheck::z_check(
        "variance-ratio",
        "sample variance vs target variance",
        target_variance,
        acc.covariance(0, 0),
        acc.covariance_se(0, 0),
        4.0,
    ));
    let sd = target_variance.sqrt();
    let (d, p_value) = ks_test(samples, |x| normal_cdf(x / sd));
    report.push(TestCheck::at_least(
        "ks-p-value",
        format!("Kolmogorov-Smirnov p-value (D = {d:.4}) vs alpha"),
        0.01,
        p_value,
    ));
    Ok(report)
}

fn reinforced_lln_scale(p: f64, n: usize) -> (f64, &'static str) {
    let nf = n as f64;
    if p < 0.5 {
        (nf.powf(1.0 - p), "n^(1-p)")
    } else if p == 0.5 {
        (nf.sqrt() * nf.ln(), "sqrt(n)*log(n)")
    } else {
        (nf, "n")
    }
}

/// Law-of-large-numbers report: ensemble means of `Šₙ/n`, the rescaled
/// reinforced walk, and `Ǧₙ/n` against their limits.
///
/// The reinforced statistic is `(Ŝₙ − mn)/scale` with `m` the step mean,
/// so its target is zero for every law; for centred laws this is exactly
/// the plain rescaled walk. The scale is `n^(1−p)` for `p < 1/2`,
/// `√n·log n` at `p = 1/2`, and `n` for `p > 1/2`.
pub fn lln_report(
    p: f64,
    law: &StepLaw,
    n: usize,
    n_paths: usize,
    seed: u64,
) -> Result<TestReport> {
    if n < 2 {
        return Err(Error::invalid("lln report needs n >= 2"));
    }
    if n_paths < 2 {
        return Err(Error::invalid("lln report needs at least two paths"));
    }
    let (scale, scale_name) = reinforced_lln_scale(p, n);
    let params = ReinforcementParams::new(p, law.clone(), n, seed)
        .with_aux()
        .with_indices(vec![n]);
    let rows = path_rows(n_paths, |i| {
        let path = simulate_coupled(&params.for_path(i))?;
        let nf = n as f64;
        Ok(vec![
            path.value(Series::SCheck, n).expect("recorded epoch") / nf,
            (path.value(Series::SHat, n).expect("recorded epoch") - law.mean() * nf) / scale,
            path.value(Series::GCheck, n).expect("aux recorded") / nf,
        ])
    })?;
    let acc = summarize_rows(&rows, 3);
    let mut report = TestReport::new(
        "lln",
        serde_json::json!({
            "p": p,
            "law": format!("{law:?}"),
            "n": n,
            "n_paths": n_paths,
            "reinforced_scale": scale_name,
            "rel_tol": 0.05,
            "z_max": 3.0,
        }),
        seed,
    );
    let ballistic = (1.0 - p) * law.mean() / (1.0 + p);
    if ballistic.abs() > 0.0 {
        report.push(TestCheck::rel_check_with_se(
            "counterbalanced-lln",
            "mean of S_check_n/n vs (1-p)m/(1+p)",
            ballistic,
            acc.mean(0),
            acc.mean_se(0),
            0.05,
        ));
    } else {
        report.push(TestCheck::z_check(
            "counterbalanced-lln",
            "mean of S_check_n/n vs 0",
            0.0,
            acc.mean(0),
            acc.mean_se(0),
            3.0,
        ));
    }
    report.push(TestCheck::z_check(
        "reinforced-lln",
        format!("mean of (S_hat_n - m*n)/{scale_name} vs 0"),
        0.0,
        acc.mean(1),
        acc.mean_se(1),
        3.0,
    ));
    report.push(TestCheck::rel_check_with_se(
        "squared-counterbalanced-lln",
        "mean of G_check_n/n vs (1-p)E[X^2]/(1+p)",
        (1.0 - p) * law.second_moment() / (1.0 + p),
        acc.mean(2),
        acc.mean_se(2),
        0.05,
    ));
    Ok(report)
}

/// Convergence diagnostics for the reinforced martingale in the
/// superdiffusive regime: the exact variance plateau and the Monte Carlo
/// Cauchy differences.
///
/// `ns` must be at least four epochs, each double the one before.
pub fn superdiffusive_report(
    p: f64,
    law: &StepLaw,
    ns: &[usize],
    n_paths: usize,
    seed: u64,
) -> Result<TestReport> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::invalid(
            "superdiffusive report needs p in (1/2, 1)",
        ));
    }
    if !law.is_centred() {
        return Err(Error::CentredLawRequired);
    }
    if ns.len() < 4 || ns[0] < 2 || ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::invalid(
            "need at least four doubling epochs, the first >= 2",
        ));
    }
    let &n_max = ns.last().expect("nonempty");
    let coeffs = build_coefficients(p, n_max)?;
    let oracle = exact_moments(p, law, n_max)?;
    let var_oracle: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let a = coeffs.a_hat(n);
            Ok(a * a * oracle.second_moment_hat(n)?)
        })
        .collect::<Result<_>>()?;

    let k = ns.len();
    let params = ReinforcementParams::new(p, law.clone(), n_max, seed)
        .with_indices(ns.to_vec());
    let rows = path_rows(n_paths, |i| {
        let path = simulate_coupled(&params.for_path(i))?;
        let m_hat: Vec<f64> = ns
            .iter()
            .map(|&n| coeffs.a_hat(n) * path.value(Series::SHat, n).expect("recorded"))
            .collect();
        let mut row = m_hat.clone();
        for w in m_hat.windows(2) {
            let gap = w[1] - w[0];
            row.push(gap * gap);
        }
        Ok(row)
    })?;
    let acc = summarize_rows(&rows, 2 * k - 1);

    let mut report = TestReport::new(
        "superdiffusive",
        serde_json::json!({
            "p": p,
            "law": format!("{law:?}"),
            "ns": ns,
            "n_paths": n_paths,
            "plateau_band": [1.0, 1.05],
            "z_max": 3.0,
        }),
        seed,
    );
    report.push(TestCheck::flag(
        "oracle-variance-increasing",
        "exact Var(M_hat_n) increases along the epochs",
        var_oracle.windows(2).all(|w| w[1] > w[0]),
    ));
    let ratio = var_oracle[k - 1] / var_oracle[k - 2];
    report.push(TestCheck::tol_check(
        "oracle-plateau-ratio",
        format!(
            "Var(M_hat) ratio at {} -> {} inside [1.0, 1.05]",
            ns[k - 2],
            ns[k - 1]
        ),
        1.025,
        ratio,
        0.025,
    ));
    report.push(TestCheck::z_check(
        "mc-variance",
        format!("Monte Carlo Var(M_hat_n) at n = {} vs the exact value", ns[0]),
        var_oracle[0],
        acc.covariance(0, 0),
        acc.covariance_se(0, 0),
        3.0,
    ));
    let gaps: Vec<f64> = (0..k - 1).map(|j| acc.mean(k + j)).collect();
    report.push(TestCheck::flag(
        "cauchy-gaps-decreasing",
        "mean (M_hat_2n - M_hat_n)^2 decreases over consecutive levels",
        gaps.windows(2).all(|w| w[1] < w[0]),
    ));
    Ok(report)
}

/// Monte Carlo estimate of the early-time exceedance probability
/// `P(sup_{k ≤ δn} |Šₖ| / √n > ε)`.
pub fn origin_control(
    p: f64,
    law: &StepLaw,
    n: usize,
    n_paths: usize,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    if !law.is_centred() {
        return Err(Error::CentredLawRequired);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1]"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    if n == 0 || n_paths == 0 {
        return Err(Error::invalid("n and n_paths must be positive"));
    }
    let m = ((delta * n as f64).floor() as usize).min(n);
    if m == 0 {
        return Ok(0.0);
    }
    let threshold = eps * (n as f64).sqrt();
    let params = ReinforcementParams::new(p, law.clone(), m, seed);
    let rows = path_rows(n_paths, |i| {
        let path = simulate_coupled(&params.for_path(i))?;
        let exceeded = path.s_check.iter().any(|&x| x.abs() > threshold);
        Ok(vec![if exceeded { 1.0 } else { 0.0 }])
    })?;
    let hits: f64 = rows.iter().map(|r| r[0]).sum();
    Ok(hits / n_paths as f64)
}

/// Resample the next step of a fixed prefix and compare the resampled
/// means of `X̂ₙ₊₁`, `X̌ₙ₊₁`, `X̂ₙ₊₁²` with their closed-form conditional
/// expectations. For a centred law these are `pŜₙ/n`, `−pŠₙ/n`,
/// `pV̂ₙ/n + (1−p)E[X²]`; a drift `m` adds `(1−p)m` to both means through
/// the fresh branch.
///
/// The prefix must be a full recording with auxiliaries; `law` must be
/// the step law the prefix was simulated with.
pub fn conditional_step_moments_test(
    prefix: &CoupledPath,
    law: &StepLaw,
    resamples: usize,
    seed: u64,
) -> Result<TestReport> {
    if !prefix.is_full() {
        return Err(Error::invalid(
            "conditional test needs a full prefix recording",
        ));
    }
    let v_hat_n = prefix
        .value(Series::VHat, prefix.n)
        .ok_or(Error::AuxiliaryRequired)?;
    if resamples == 0 {
        return Err(Error::invalid("resamples must be positive"));
    }
    let n = prefix.n;
    let p = prefix.p;
    let nf = n as f64;
    // Step values, reconstructed from the recorded partial sums.
    let x_hat: Vec<f64> = (1..=n)
        .map(|k| {
            prefix.value(Series::SHat, k).expect("full recording")
                - prefix.value(Series::SHat, k - 1).expect("full recording")
        })
        .collect();
    let x_check: Vec<f64> = (1..=n)
        .map(|k| {
            prefix.value(Series::SCheck, k).expect("full recording")
                - prefix.value(Series::SCheck, k - 1).expect("full recording")
        })
        .collect();

    let counter = (n + 1) as u64;
    let draws: Vec<[f64; 3]> = (0..resamples as u64)
        .map(|r| {
            let eps_key = stream_key(seed, r, Stream::Epsilon);
            let rep_key = stream_key(seed, r, Stream::RepeatIndex);
            let step_key = stream_key(seed, r, Stream::Step);
            let reinforce = uniform_at(eps_key, counter) < p;
            if reinforce {
                let j = index_in_at(rep_key, counter, n);
                [x_hat[j - 1], -x_check[j - 1], x_hat[j - 1] * x_hat[j - 1]]
            } else {
                let x = law.sample_at(step_key, counter);
                [x, x, x * x]
            }
        })
        .collect();

    let s_hat_n = prefix.value(Series::SHat, n).expect("full recording");
    let s_check_n = prefix.value(Series::SCheck, n).expect("full recording");
    let fresh = 1.0 - p;
    let targets = [
        p * s_hat_n / nf + fresh * law.mean(),
        -p * s_check_n / nf + fresh * law.mean(),
        p * v_hat_n / nf + fresh * law.second_moment(),
    ];
    let names = ["reinforced-step-mean", "counterbalanced-step-mean", "reinforced-step-square"];
    let statistics = [
        "resampled mean of X_hat_{n+1} vs p*S_hat_n/n + (1-p)m",
        "resampled mean of X_check_{n+1} vs -p*S_check_n/n + (1-p)m",
        "resampled mean of X_hat_{n+1}^2 vs p*V_hat_n/n + (1-p)E[X^2]",
    ];
    let mut report = TestReport::new(
        "conditional-step-moments",
        serde_json::json!({
            "p": p,
            "n": n,
            "law": format!("{law:?}"),
            "resamples": resamples,
            "z_max": 3.0,
        }),
        seed,
    );
    for slot in 0..3 {
        let column: Vec<f64> = draws.iter().map(|d| d[slot]).collect();
        let (mean, se) = mean_and_se(&column);
        report.push(TestCheck::z_check(
            names[slot],
            statistics[slot],
            targets[slot],
            mean,
            se,
            3.0,
        ));
    }
    Ok(report)
}
