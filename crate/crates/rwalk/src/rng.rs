//! Deterministic counter-based randomness.
//!
//! Every random quantity in a simulation is addressed by the tuple
//! (master seed, path index, stream, counter) and is a pure function of that
//! address.  Draws never depend on generator state, so:
//!
//! * parallel ensembles reproduce bit-identically regardless of scheduling,
//! * any path or path suffix can be replayed without rewinding,
//! * runs that share a seed share their event streams even when they consume
//!   different subsets of the draws (a truncated-law run reuses the step
//!   draws of the untruncated run untouched).
//!
//! The generator is a SplitMix-style mixer applied to
//! `key + counter * GOLDEN`; keys are derived by chained avalanche rounds
//! over the seed, path index, and stream tag.

/// Odd constant with good mixing properties (2^64 / phi).
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent sub-streams of one path's randomness.
///
/// A simulation step `i` reads the reinforcement flag `ε_i` at counter `i` of
/// `Epsilon`, the repeated-step index `U_i` at counter `i` of `RepeatIndex`,
/// and the fresh step `X_i` from the two-counter block `{2i, 2i+1}` of
/// `Step`.  Gaussian limit samplers draw from `Gauss`, and conditional-moment
/// replays from `Resample`, so that no consumer can alias another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Bernoulli(p) reinforcement flags, one counter per step.
    Epsilon,
    /// Uniform past-index draws, one counter per step.
    RepeatIndex,
    /// Fresh step-law draws, two counters per step.
    Step,
    /// Gaussian draws for limit-process samplers, two counters per slot.
    Gauss,
    /// Extra draws for conditional-step resampling.
    Resample,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Epsilon => 1,
            Stream::RepeatIndex => 2,
            Stream::Step => 3,
            Stream::Gauss => 4,
            Stream::Resample => 5,
        }
    }
}

/// Fully derived stream key; addresses one lane of 2^64 counters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey(u64);

/// 64-bit finalizer (Stafford's mix13 variant); full avalanche.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the key for `(seed, path, stream)`.
///
/// Three chained finalizer rounds keep distinct addresses decorrelated even
/// when seeds or path indices are small consecutive integers.
pub fn stream_key(seed: u64, path: u64, stream: Stream) -> StreamKey {
    let a = mix64(seed ^ GOLDEN);
    let b = mix64(a ^ path.wrapping_mul(0xD605_BBB5_8C8A_BC03));
    StreamKey(mix64(b ^ stream.tag().wrapping_mul(0xA24B_AED4_963E_E407)))
}

/// Raw 64-bit draw at `counter`.
#[inline]
pub fn bits_at(key: StreamKey, counter: u64) -> u64 {
    mix64(key.0.wrapping_add(counter.wrapping_mul(GOLDEN)))
}

/// Map 64 bits to the open interval (0, 1); 52-bit resolution, never 0 or 1.
///
/// The top 52 bits select a cell midpoint `(k + 0.5) * 2^-52`, so every value
/// is exactly representable and the extremes are `2^-53` and `1 - 2^-53`.
/// (A 53-bit midpoint would round `(2^53 - 1) + 0.5` up to `2^53` and emit an
/// exact 1.0, which `ln` in Box-Muller cannot tolerate.)
#[inline]
pub fn open01(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / 4_503_599_627_370_496.0; // 2^-52
    ((bits >> 12) as f64 + 0.5) * SCALE
}

/// Uniform (0, 1) draw at `counter`.
#[inline]
pub fn uniform_at(key: StreamKey, counter: u64) -> f64 {
    open01(bits_at(key, counter))
}

/// Uniform draw on `{1, ..., m}` by widening multiply-shift; rejection-free.
///
/// The bias relative to exact uniformity is below `m / 2^64`.
#[inline]
pub fn index_in_at(key: StreamKey, counter: u64, m: usize) -> usize {
    debug_assert!(m >= 1);
    let wide = (bits_at(key, counter) as u128) * (m as u128);
    (wide >> 64) as usize + 1
}

/// Standard normal draw for `slot`, consuming counters `2*slot` and
/// `2*slot + 1` (Box-Muller).  Purely positional: the same address always
/// yields the same variate.
#[inline]
pub fn normal_at(key: StreamKey, slot: u64) -> f64 {
    let u1 = uniform_at(key, 2 * slot);
    let u2 = uniform_at(key, 2 * slot + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
