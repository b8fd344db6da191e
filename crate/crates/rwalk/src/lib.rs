//! Simulation and statistical verification of step-reinforced random walks.
//!
//! A step-reinforced random walk perturbs an ordinary random walk with
//! independent identically distributed steps: at each epoch, with probability
//! `p`, the walk repeats a uniformly chosen past step instead of drawing a
//! fresh one.  Repeating the step as is yields the *reinforced* walk `Ŝ`
//! ("elephant-like" memory); repeating it with flipped sign yields the
//! *counterbalanced* walk `Š`.  Coupling both to the unperturbed walk `S` on
//! one event stream gives the triplet `(S, Ŝ, Š)` that this crate simulates,
//! diagnoses, and verifies:
//!
//! * [`walks`] — step laws and truncation splits, the coupled simulator, the
//!   normalizing coefficient tables `â`, `ǎ`, and closed-form moment oracles;
//! * [`diagnostics`] — martingale transforms `â_n Ŝ_n`, `ǎ_n Š_n`, their
//!   pathwise quadratic variations and cross brackets, scaled path regimes,
//!   and jump diagnostics;
//! * [`limits`] — the Gaussian limit triplet `(B, B̂, B̌)`: covariance
//!   kernels, exact Cholesky and Euler samplers, and the time-change
//!   representation of `B̂`;
//! * [`verify`] — streaming ensemble summaries and the named statistical
//!   check suites that compare simulations against the limit predictions;
//! * a command-line front end (the `rwalk` binary in the companion crate)
//!   for simulation dumps, coefficient tables, limit ensembles, and
//!   verification reports.
//!
//! Everything downstream of a master seed is deterministic: draws are pure
//! functions of (seed, path, stream, counter) addresses, ensembles reduce in
//! fixed order, and reruns reproduce bit-identical artifacts regardless of
//! thread count.
//!
//! ```
//! use rwalk::walks::{simulate_coupled, ReinforcementParams, StepLaw};
//!
//! let params = ReinforcementParams::new(0.5, StepLaw::Rademacher, 100, 7).with_aux();
//! let path = simulate_coupled(&params).unwrap();
//! assert_eq!(path.s.len(), 101);
//! // The reinforced and counterbalanced walks share squared increments.
//! let v = path.v_hat.as_ref().unwrap();
//! assert_eq!(v[100], 100.0);
//! ```

#![forbid(unsafe_code)]
#![deny(missing_docs)]

mod error;

pub mod diagnostics;
pub mod limits;
pub mod rng;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};

/// The three walk components and their Gaussian limit counterparts.
///
/// Prelimit labels are `S`, `S_hat`, `S_check`; limit labels are `B`,
/// `B_hat`, `B_check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    /// The unperturbed walk `S` / Brownian motion `B`.
    Plain,
    /// The reinforced walk `Ŝ` / noise-reinforced Brownian motion `B̂`.
    Reinforced,
    /// The counterbalanced walk `Š` / its limit `B̌`.
    Counterbalanced,
}

impl Component {
    /// All components in canonical order.
    pub const ALL: [Component; 3] = [
        Component::Plain,
        Component::Reinforced,
        Component::Counterbalanced,
    ];

    /// Column label used in walk-level dumps.
    pub fn walk_label(self) -> &'static str {
        match self {
            Component::Plain => "S",
            Component::Reinforced => "S_hat",
            Component::Counterbalanced => "S_check",
        }
    }

    /// Column label used in limit-level dumps.
    pub fn limit_label(self) -> &'static str {
        match self {
            Component::Plain => "B",
            Component::Reinforced => "B_hat",
            Component::Counterbalanced => "B_check",
        }
    }

    /// Parse either a walk or a limit label.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "S" | "B" => Ok(Component::Plain),
            "S_hat" | "B_hat" => Ok(Component::Reinforced),
            "S_check" | "B_check" => Ok(Component::Counterbalanced),
            _ => Err(Error::InvalidArgument(format!(
                "unknown component {s:?} (expected S/S_hat/S_check or B/B_hat/B_check)"
            ))),
        }
    }
}
