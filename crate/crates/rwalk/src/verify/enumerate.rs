//! Exhaustive enumeration of the coupled triplet law for small
//! rademacher walks.
//!
//! Walks the full event tree (fresh-step sign, reinforcement choice,
//! repeat index) with exact branch probabilities, yielding the joint law
//! of `(Sₙ, Ŝₙ, Šₙ)` and every marginal moment along the way. This is an
//! oracle with no Monte Carlo error and no shared code with the moment
//! recursions it cross-checks, beyond the single step rule in
//! [`TripletState`].

use crate::error::{Error, Result};
use crate::verify::exact::ExactSum;
use crate::walks::{StepEvent, TripletState};
use std::collections::BTreeMap;

/// Joint law of the coupled triplet under rademacher steps, computed by
/// exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct RademacherEnumeration {
    p: f64,
    n: usize,
    leaves: u64,
    mean_hat: Vec<f64>,
    mean_check: Vec<f64>,
    second_hat: Vec<f64>,
    second_check: Vec<f64>,
    pmf: BTreeMap<(i64, i64, i64), f64>,
}

struct Accumulator {
    mean_hat: Vec<ExactSum>,
    mean_check: Vec<ExactSum>,
    second_hat: Vec<ExactSum>,
    second_check: Vec<ExactSum>,
    pmf: BTreeMap<(i64, i64, i64), ExactSum>,
    leaves: u64,
}

/// Enumerate the triplet law for `±1` steps: `p ∈ [0, 1]`, `1 ≤ n ≤ 7`.
///
/// Step `i` multiplies the branch count by `2i`, so `n = 7` visits about
/// 645k leaves and stays fast; anything larger is rejected.
pub fn enumerate_rademacher(p: f64, n: usize) -> Result<RademacherEnumeration> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if n > 7 {
        return Err(Error::invalid("n > 7 is too large to enumerate"));
    }
    let mut acc = Accumulator {
        mean_hat: vec![ExactSum::new(); n],
        mean_check: vec![ExactSum::new(); n],
        second_hat: vec![ExactSum::new(); n],
        second_check: vec![ExactSum::new(); n],
        pmf: BTreeMap::new(),
        leaves: 0,
    };
    let mut state = TripletState::with_capacity(n);
    descend(&mut state, p, n, 1.0, &mut acc);
    Ok(RademacherEnumeration {
        p,
        n,
        leaves: acc.leaves,
        mean_hat: acc.mean_hat.iter().map(ExactSum::value).collect(),
        mean_check: acc.mean_check.iter().map(ExactSum::value).collect(),
        second_hat: acc.second_hat.iter().map(ExactSum::value).collect(),
        second_check: acc.second_check.iter().map(ExactSum::value).collect(),
        pmf: acc
            .pmf
            .iter()
            .map(|(&key, sum)| (key, sum.value()))
            .collect(),
    })
}

fn descend(state: &mut TripletState, p: f64, n: usize, weight: f64, acc: &mut Accumulator) {
    let i = state.epoch() + 1;
    let take = |state: &mut TripletState, ev: StepEvent, w: f64, acc: &mut Accumulator| {
        state.advance(ev);
        let k = state.epoch() - 1;
        acc.mean_hat[k].add(w * state.s_hat());
        acc.mean_check[k].add(w * state.s_check());
        acc.second_hat[k].add(w * state.s_hat() * state.s_hat());
        acc.second_check[k].add(w * state.s_check() * state.s_check());
        if state.epoch() == n {
            acc.leaves += 1;
            let key = (
                state.s().round() as i64,
                state.s_hat().round() as i64,
                state.s_check().round() as i64,
            );
            acc.pmf.entry(key).or_insert_with(ExactSum::new).add(w);
        } else {
            descend(state, p, n, w, acc);
        }
        state.retreat(ev);
    };
    for step in [1.0, -1.0] {
        if i == 1 {
            let ev = StepEvent {
                reinforce: false,
                repeat_index: 1,
                step,
            };
            take(state, ev, weight * 0.5, acc);
            continue;
        }
        // The fresh draw X_i exists on every step; the plain walk consumes
        // it even when the reinforced pair repeats, so both layers branch.
        if p < 1.0 {
            let ev = StepEvent {
                reinforce: false,
                repeat_index: 1,
                step,
            };
            take(state, ev, weight * (1.0 - p) * 0.5, acc);
        }
        if p > 0.0 {
            let branch = weight * p * 0.5 / (i - 1) as f64;
            for j in 1..i {
                let ev = StepEvent {
                    reinforce: true,
                    repeat_index: j as u32,
                    step,
                };
                take(state, ev, branch, acc);
            }
        }
    }
}

impl RademacherEnumeration {
    /// Reinforcement probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Number of steps enumerated.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of event-tree leaves visited.
    pub fn leaves(&self) -> u64 {
        self.leaves
    }

    /// `E[Ŝₖ]` for `1 ≤ k ≤ n`.
    pub fn mean_hat(&self, k: usize) -> f64 {
        self.mean_hat[k - 1]
    }

    /// `E[Šₖ]` for `1 ≤ k ≤ n`.
    pub fn mean_check(&self, k: usize) -> f64 {
        self.mean_check[k - 1]
    }

    /// `E[Ŝₖ²]` for `1 ≤ k ≤ n`.
    pub fn second_moment_hat(&self, k: usize) -> f64 {
        self.second_hat[k - 1]
    }

    /// `E[Šₖ²]` for `1 ≤ k ≤ n`.
    pub fn second_moment_check(&self, k: usize) -> f64 {
        self.second_check[k - 1]
    }

    /// Joint pmf of `(Sₙ, Ŝₙ, Šₙ)` over its integer support.
    pub fn pmf(&self) -> &BTreeMap<(i64, i64, i64), f64> {
        &self.pmf
    }

    /// Probability of one outcome (0 off the support).
    pub fn probability(&self, s: i64, s_hat: i64, s_check: i64) -> f64 {
        self.pmf.get(&(s, s_hat, s_check)).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::{exact_moments, StepLaw};

    #[test]
    fn total_mass_is_one() {
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let e = enumerate_rademacher(p, 5).unwrap();
            let mass: f64 = e.pmf().values().sum();
            assert!((mass - 1.0).abs() < 1e-13, "p = {p}: mass = {mass}");
        }
    }

    #[test]
    fn leaf_counts_match_the_tree_shape() {
        // Interior p: 2·Π_{i=2..6} 2i; p = 0 drops repeats; p = 1 drops
        // fresh branches past the first step.
        assert_eq!(enumerate_rademacher(0.5, 6).unwrap().leaves(), 46080);
        assert_eq!(enumerate_rademacher(0.0, 6).unwrap().leaves(), 64);
        assert_eq!(enumerate_rademacher(1.0, 6).unwrap().leaves(), 7680);
    }

    #[test]
    fn two_step_moments_by_hand() {
        let e = enumerate_rademacher(0.5, 2).unwrap();
        assert_eq!(e.second_moment_hat(2), 3.0);
        assert_eq!(e.second_moment_check(2), 1.0);
        assert_eq!(e.mean_hat(2), 0.0);
        assert_eq!(e.mean_check(2), 0.0);
    }

    #[test]
    fn matches_the_moment_recursions() {
        for p in [0.25, 0.5, 0.75] {
            let e = enumerate_rademacher(p, 6).unwrap();
            let oracle = exact_moments(p, &StepLaw::Rademacher, 6).unwrap();
            for k in 1..=6 {
                assert!((e.mean_hat(k) - oracle.mean_hat(k)).abs() < 1e-12);
                assert!((e.mean_check(k) - oracle.mean_check(k)).abs() < 1e-12);
                assert!(
                    (e.second_moment_hat(k) - oracle.second_moment_hat(k).unwrap()).abs() < 1e-12,
                    "p = {p}, k = {k}"
                );
                assert!(
                    (e.second_moment_check(k) - oracle.second_moment_check(k).unwrap()).abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn zero_memory_collapses_to_one_binomial_walk() {
        let e = enumerate_rademacher(0.0, 6).unwrap();
        for (&(s, sh, sc), &w) in e.pmf() {
            assert!(w > 0.0);
            assert_eq!(s, sh);
            assert_eq!(s, sc);
        }
        assert_eq!(e.probability(6, 6, 6), 1.0 / 64.0);
    }

    #[test]
    fn full_memory_extremes() {
        let e = enumerate_rademacher(1.0, 4).unwrap();
        // Every reinforced step copies a copy of X₁: Ŝₙ = n·X₁.
        for (&(_, sh, _), &w) in e.pmf() {
            if w > 0.0 {
                assert!(sh == 4 || sh == -4);
            }
        }
        // The first counterbalanced repeat cancels X₁ exactly.
        let e2 = enumerate_rademacher(1.0, 2).unwrap();
        assert_eq!(e2.second_moment_check(2), 0.0);
    }

    #[test]
    fn enumeration_rejects_bad_arguments() {
        assert!(enumerate_rademacher(-0.1, 3).is_err());
        assert!(enumerate_rademacher(1.1, 3).is_err());
        assert!(enumerate_rademacher(0.5, 0).is_err());
        assert!(enumerate_rademacher(0.5, 8).is_err());
    }
}
