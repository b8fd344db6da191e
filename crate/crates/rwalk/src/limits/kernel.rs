//! Covariance kernels of the Gaussian limit triplet.

use crate::error::{Error, Result};
use crate::walks::fmt_f64;
use crate::Component;

/// The limit law `(B, B̂, B̌)` of the diffusively scaled triplet: Brownian
/// motion, noise-reinforced Brownian motion, and its counterbalanced
/// counterpart, with step-law scale `σ`.
///
/// All three are centred Gaussian processes started at 0; the reinforced
/// component only exists below the critical memory `p = 1/2`.
#[derive(Clone, Copy, Debug)]
pub struct LimitCovarianceModel {
    p: f64,
    sigma: f64,
}

impl LimitCovarianceModel {
    /// Model with memory `p ∈ [0, 1)` and scale `sigma > 0`.
    pub fn new(p: f64, sigma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "limit model requires p in [0, 1), got {p}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid("limit model requires sigma > 0"));
        }
        Ok(LimitCovarianceModel { p, sigma })
    }

    /// Memory parameter.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Step-law scale.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Covariance `Cov(X_s, Y_t)` where `X` is `ci` at time `s` and `Y` is `cj`
/// at time `t`.
///
/// With `m = s∧t`, `M = s∨t`, and every value carrying `σ²`:
///
/// ```text
/// (B,  B )  m
/// (B̂,  B̂)  m (M/m)^p / (1−2p)            p < 1/2 only
/// (B̌,  B̌)  m (m/M)^p / (1+2p)
/// (B,  B̂)  m (t/m)^p                      t the B̂ time
/// (B,  B̌)  m (m/t)^p (1−p)/(1+p)          t the B̌ time
/// (B̂,  B̌)  m (s/t)^p (1−p)/(1+p)          s the B̂ time, t the B̌ time
/// ```
///
/// The ratio forms make the diagonal identities exact: at `s = t` the ratio
/// factor is exactly 1, so `Var B̌_t = σ² t/(1+2p)` to the last bit.  Any
/// zero time returns exact 0.  Requesting `B̂` at `p ≥ 1/2` is a domain
/// error: the reinforced limit degenerates at critical memory.
pub fn limit_covariance(
    model: &LimitCovarianceModel,
    ci: Component,
    cj: Component,
    s: f64,
    t: f64,
) -> Result<f64> {
    for x in [s, t] {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::invalid(
                "kernel times must be finite and nonnegative",
            ));
        }
    }
    let p = model.p;
    if (ci == Component::Reinforced || cj == Component::Reinforced) && p >= 0.5 {
        return Err(Error::invalid(
            "the noise-reinforced kernel requires p < 1/2",
        ));
    }
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let s2 = model.sigma * model.sigma;
    let m = s.min(t);
    let big = s.max(t);
    use Component::{Counterbalanced as C, Plain as P, Reinforced as R};
    let value = match (ci, cj) {
        (P, P) => m,
        (R, R) => m * (big / m).powf(p) / (1.0 - 2.0 * p),
        (C, C) => m * (m / big).powf(p) / (1.0 + 2.0 * p),
        // The exponent attaches to the perturbed component's own time.
        (P, R) => m * (t / m).powf(p),
        (R, P) => m * (s / m).powf(p),
        (P, C) => m * (m / t).powf(p) * (1.0 - p) / (1.0 + p),
        (C, P) => m * (m / s).powf(p) * (1.0 - p) / (1.0 + p),
        (R, C) => m * (s / t).powf(p) * (1.0 - p) / (1.0 + p),
        (C, R) => m * (t / s).powf(p) * (1.0 - p) / (1.0 + p),
    };
    Ok(s2 * value)
}

/// Correlation matrix of the three driving Brownian motions in the integral
/// representation `(B_t, t^p ∫₀ᵗ s^{−p} dβ^r_s, t^{−p} ∫₀ᵗ s^p dβ^c_s)`,
/// ordered `(B, β^r, β^c)`:
///
/// ```text
/// ⎡ 1      1−p        1−p      ⎤
/// ⎢ 1−p    1          (1−p)/(1+p) ⎥
/// ⎣ 1−p    (1−p)/(1+p)  1      ⎦
/// ```
///
/// At `p = 0` all three drivers coincide (the all-ones matrix); at `p = 1`
/// they are independent.  Positive semidefinite on all of `[0, 1]`.
pub fn driver_correlation(p: f64) -> Result<[[f64; 3]; 3]> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "driver correlation requires p in [0, 1], got {p}"
        )));
    }
    let a = 1.0 - p;
    let b = (1.0 - p) / (1.0 + p);
    Ok([[1.0, a, a], [a, 1.0, b], [a, b, 1.0]])
}

/// Eigenvalues of a symmetric 3x3 matrix, ascending; the trigonometric
/// closed form for the characteristic cubic.
pub fn sym3_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    // B = (M − qI)/p; r = det(B)/2 clamped into [−1, 1].
    let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut out = [e1, e2, e3];
    out.sort_by(f64::total_cmp);
    out
}

/// Strictly increasing evaluation times; 0 is permitted only as the first
/// point (the processes are pinned there).
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    /// Grid from explicit points.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("time grid must be nonempty"));
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid(
                "time grid entries must be finite and nonnegative",
            ));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        Ok(TimeGrid { points })
    }

    /// `k` uniform points `t_max/k, 2 t_max/k, ..., t_max` (0 excluded).
    pub fn uniform(t_max: f64, k: usize) -> Result<Self> {
        if k == 0 || !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::invalid("uniform grid needs k >= 1 and t_max > 0"));
        }
        Self::new((1..=k).map(|i| t_max * i as f64 / k as f64).collect())
    }

    /// The points, ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the grid is empty (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Covariance matrix of the limit variables `(component, time)` ordered
/// component-major, time-ascending inside each component block.
pub fn covariance_matrix(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    components: &[Component],
) -> Result<Vec<Vec<f64>>> {
    if components.is_empty() {
        return Err(Error::invalid("need at least one component"));
    }
    let times = grid.points();
    let d = components.len() * times.len();
    let mut out = vec![vec![0.0; d]; d];
    for (bi, ci) in components.iter().enumerate() {
        for (si, s) in times.iter().enumerate() {
            for (bj, cj) in components.iter().enumerate() {
                for (tj, t) in times.iter().enumerate() {
                    let row = bi * times.len() + si;
                    let col = bj * times.len() + tj;
                    if col < row {
                        continue;
                    }
                    let v = limit_covariance(model, *ci, *cj, *s, *t)?;
                    out[row][col] = v;
                    out[col][row] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Kernel dump as a JSON object with 17-significant-digit floats:
/// `{"p","sigma","components","grid","cov"}` where `cov` is the
/// component-major covariance matrix of [`covariance_matrix`].
pub fn kernel_json(
    model: &LimitCovarianceModel,
    grid: &TimeGrid,
    components: &[Component],
) -> Result<String> {
    let cov = covariance_matrix(model, grid, components)?;
    let mut s = String::new();
    s.push_str(&format!(
        "{{\"p\":{},\"sigma\":{},\"components\":[",
        fmt_f64(model.p),
        fmt_f64(model.sigma)
    ));
    for (i, c) in components.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("\"{}\"", c.limit_label()));
    }
    s.push_str("],\"grid\":[");
    for (i, t) in grid.points().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_f64(*t));
    }
    s.push_str("],\"cov\":[");
    for (i, row) in cov.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*v));
        }
        s.push(']');
    }
    s.push_str("]}");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Component::{Counterbalanced as C, Plain as P, Reinforced as R};

    #[test]
    fn model_validates_its_parameters() {
        assert!(LimitCovarianceModel::new(0.5, 1.0).is_ok());
        assert!(LimitCovarianceModel::new(1.0, 1.0).is_err());
        assert!(LimitCovarianceModel::new(-0.1, 1.0).is_err());
        assert!(LimitCovarianceModel::new(0.3, 0.0).is_err());
    }

    #[test]
    fn unit_time_variances_match_hand_values() {
        let m = LimitCovarianceModel::new(0.25, 1.0).unwrap();
        assert_eq!(limit_covariance(&m, P, P, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(limit_covariance(&m, R, R, 1.0, 1.0).unwrap(), 2.0);
        assert!((limit_covariance(&m, C, C, 1.0, 1.0).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        assert_eq!(limit_covariance(&m, P, R, 1.0, 1.0).unwrap(), 1.0);
        assert!((limit_covariance(&m, R, C, 1.0, 1.0).unwrap() - 0.6).abs() < 1e-15);

        let m = LimitCovarianceModel::new(0.5, 1.0).unwrap();
        assert_eq!(limit_covariance(&m, C, C, 1.0, 1.0).unwrap(), 0.5);
        assert!(limit_covariance(&m, R, R, 1.0, 1.0).is_err());

        // σ² scales every entry.
        let m = LimitCovarianceModel::new(0.25, 2.0).unwrap();
        assert_eq!(limit_covariance(&m, R, R, 1.0, 1.0).unwrap(), 8.0);
    }

    // Var B̌_t must be σ²t/(1+2p) with no power-function noise at all.
    #[test]
    fn diagonal_values_are_ratio_exact() {
        let m = LimitCovarianceModel::new(0.37, 1.0).unwrap();
        for t in [0.1, 0.3, 0.7, 1.0, 2.5] {
            let v = limit_covariance(&m, C, C, t, t).unwrap();
            assert_eq!(v, t / (1.0 + 2.0 * 0.37));
            let v = limit_covariance(&m, R, R, t, t).unwrap();
            assert_eq!(v, t / (1.0 - 2.0 * 0.37));
        }
    }

    #[test]
    fn kernels_are_symmetric_under_argument_swap() {
        let m = LimitCovarianceModel::new(0.3, 1.4).unwrap();
        let times = [0.2, 0.7, 1.0, 1.9];
        for ci in Component::ALL {
            for cj in Component::ALL {
                for s in times {
                    for t in times {
                        let a = limit_covariance(&m, ci, cj, s, t).unwrap();
                        let b = limit_covariance(&m, cj, ci, t, s).unwrap();
                        assert_eq!(a, b, "{ci:?} {cj:?} {s} {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_time_is_exactly_zero() {
        let m = LimitCovarianceModel::new(0.3, 1.0).unwrap();
        for c in Component::ALL {
            assert_eq!(limit_covariance(&m, c, c, 0.0, 1.0).unwrap(), 0.0);
            assert_eq!(limit_covariance(&m, P, c, 0.0, 0.0).unwrap(), 0.0);
        }
        assert!(limit_covariance(&m, P, P, -1.0, 1.0).is_err());
        assert!(limit_covariance(&m, P, P, f64::NAN, 1.0).is_err());
    }

    // Independent oracle: each kernel equals prefactors times the integral
    // of the product of the integrand powers against the driver correlation.
    // The integral is summed over dyadic slices so the s^{−2p} singularity
    // never meets the quadrature rule.
    fn dyadic_integral(alpha: f64, m: f64) -> f64 {
        // ∫₀^m s^alpha ds for alpha > −1, by composite Simpson on dyadic
        // slices [m 2^{−j−1}, m 2^{−j}]; the slice integrals decay
        // geometrically, so stop once they stop mattering.
        let mut total = 0.0;
        for j in 0..4000 {
            let hi = m * 2f64.powi(-j);
            let lo = hi / 2.0;
            let panels = 64;
            let h = (hi - lo) / panels as f64;
            let mut piece = 0.0;
            for k in 0..panels {
                let a = lo + k as f64 * h;
                let b = a + h;
                let mid = 0.5 * (a + b);
                piece += (h / 6.0)
                    * (a.powf(alpha) + 4.0 * mid.powf(alpha) + b.powf(alpha));
            }
            total += piece;
            if piece < total * 1e-14 {
                break;
            }
        }
        total
    }

    #[test]
    fn kernels_match_the_integral_representation() {
        for p in [0.05, 0.25, 0.45] {
            let sigma = 1.3;
            let m = LimitCovarianceModel::new(p, sigma).unwrap();
            let corr = driver_correlation(p).unwrap();
            // (prefactor exponent, integrand exponent, driver row) per component.
            let spec = |c: Component| match c {
                P => (0.0, 0.0, 0usize),
                R => (p, -p, 1usize),
                C => (-p, p, 2usize),
            };
            for ci in Component::ALL {
                for cj in Component::ALL {
                    for (u, v) in [(0.4f64, 0.4f64), (0.3, 1.0), (1.7, 0.6)] {
                        let (eu, gu, ru) = spec(ci);
                        let (ev, gv, rv) = spec(cj);
                        let integral = dyadic_integral(gu + gv, u.min(v));
                        let oracle = sigma * sigma
                            * u.powf(eu)
                            * v.powf(ev)
                            * corr[ru][rv]
                            * integral;
                        let got = limit_covariance(&m, ci, cj, u, v).unwrap();
                        let rel = (got - oracle).abs() / oracle.abs().max(1e-300);
                        assert!(
                            rel < 1e-8,
                            "p={p} {ci:?}{cj:?} ({u},{v}): {got} vs {oracle}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn driver_matrix_is_positive_semidefinite_across_p() {
        for i in 0..=16 {
            let p = i as f64 / 16.0;
            let m = driver_correlation(p).unwrap();
            let eig = sym3_eigenvalues(&m);
            assert!(eig[0] >= -1e-12, "p={p}: min eigenvalue {}", eig[0]);
        }
        // Spot values: all-ones at p = 0, identity at p = 1.
        let m0 = driver_correlation(0.0).unwrap();
        assert_eq!(m0[0][1], 1.0);
        let m1 = driver_correlation(1.0).unwrap();
        assert_eq!(m1[0][1], 0.0);
        assert_eq!(m1[1][2], 0.0);
        // p = 1/2 determinant by cofactors:
        // 1·(1 − 1/9) − 1/2·(1/2 − 1/6) + 1/2·(1/6 − 1/2) = 5/9.
        let mh = driver_correlation(0.5).unwrap();
        let eig = sym3_eigenvalues(&mh);
        let det = eig[0] * eig[1] * eig[2];
        assert!((det - 5.0 / 9.0).abs() < 1e-12, "det {det}");
    }

    #[test]
    fn time_grids_are_validated() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![-0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 1.0]).is_ok());
        let u = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(u.points(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn covariance_matrix_is_symmetric_with_kernel_entries() {
        let m = LimitCovarianceModel::new(0.25, 1.0).unwrap();
        let grid = TimeGrid::new(vec![0.5, 1.0]).unwrap();
        let cov = covariance_matrix(&m, &grid, &Component::ALL).unwrap();
        assert_eq!(cov.len(), 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(cov[i][j], cov[j][i]);
            }
        }
        // Entry (B block t=1, B̂ block t=0.5) = Cov(B_1, B̂_0.5).
        let expect = limit_covariance(&m, P, R, 1.0, 0.5).unwrap();
        assert_eq!(cov[1][2], expect);
    }

    #[test]
    fn kernel_json_is_parseable_and_17_digit() {
        let m = LimitCovarianceModel::new(0.25, 1.0).unwrap();
        let grid = TimeGrid::new(vec![0.5, 1.0]).unwrap();
        let s = kernel_json(&m, &grid, &[P, R]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["components"][1], "B_hat");
        assert_eq!(v["cov"].as_array().unwrap().len(), 4);
        let back = v["cov"][3][3].as_f64().unwrap();
        assert_eq!(back, 2.0); // Var B̂_1 at p = 0.25
        assert!(s.contains("2.5000000000000000e-1"));
    }
}
