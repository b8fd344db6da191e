//! Step laws, normalizing coefficients, and the coupled simulator.

mod coeff;
mod law;
mod moments;
mod sim;

pub use coeff::{build_coefficients, CoefficientTable};
pub use law::{truncate_law, DiscreteLaw, StepLaw, TailSide, TruncatedGaussianLaw};
pub use moments::{exact_moments, MomentOracle};
pub use sim::{
    read_paths_csv, simulate_coupled, simulate_decomposed, write_paths_csv, write_paths_jsonl,
    CoupledPath, Decomposition, PathRecord, Recording, ReinforcementParams, Series, StepEvent,
    TripletState, PATH_CSV_HEADER,
};

pub(crate) use sim::fmt_f64;
