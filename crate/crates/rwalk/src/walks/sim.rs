//! Coupled simulation of the walk triplet.
//!
//! One event stream drives three walks at once.  Step 1 uses a fresh draw
//! `X₁` for all of them.  At step `i ≥ 2` a Bernoulli(p) flag `ε_i` decides
//! between a fresh draw (shared by all three) and a repetition of the step at
//! a uniform past index `U_i ∈ {1..i−1}`:
//!
//! ```text
//! S_i  uses X_i always                       (plain walk)
//! Ŝ_i  repeats X̂_{U_i} as is                 (reinforced)
//! Š_i  repeats X̌_{U_i} with flipped sign     (counterbalanced)
//! ```
//!
//! Two auxiliary series ride on the same events: `V̂_n = Σ X̂_k²`, and the
//! counterbalanced walk `Ǧ_n` built from the squared steps, which equals
//! `Σ X̂_k X̌_k` pathwise.  Both feed the bracket evaluations.
//!
//! Draws are addressed positionally (see [`crate::rng`]), so the flag/index/
//! step streams of a path are fixed by `(seed, path_index)` alone: runs that
//! differ only in the step law, the recording choice, or the auxiliary flag
//! consume identical events.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::walks::law::StepLaw;

/// One resolved simulation event.
///
/// For the first step `reinforce` is always false.  `repeat_index` is only
/// meaningful when `reinforce` is set.
#[derive(Clone, Copy, Debug)]
pub struct StepEvent {
    /// Whether this step repeats a past step instead of drawing fresh.
    pub reinforce: bool,
    /// 1-based index of the repeated step (when `reinforce`).
    pub repeat_index: u32,
    /// The fresh draw `X_i`; consumed by the plain walk even on repeat steps.
    pub step: f64,
}

/// Running state of the coupled triplet; the step rule lives here so that
/// simulation, replay, and exhaustive enumeration all share one transition.
#[derive(Clone, Debug, Default)]
pub struct TripletState {
    i: usize,
    s: f64,
    s_hat: f64,
    s_check: f64,
    v_hat: f64,
    g_check: f64,
    x_hat: Vec<f64>,
    x_check: Vec<f64>,
    y_check: Vec<f64>,
}

impl TripletState {
    /// Empty state at epoch 0.
    pub fn new() -> Self {
        Self::default()
    }

    /// State with room for `n` steps.
    pub fn with_capacity(n: usize) -> Self {
        TripletState {
            x_hat: Vec::with_capacity(n),
            x_check: Vec::with_capacity(n),
            y_check: Vec::with_capacity(n),
            ..Self::default()
        }
    }

    /// Apply one event.  Panics in debug builds if a repeat index is out of
    /// range; the simulator and enumerator construct only valid events.
    pub fn advance(&mut self, ev: StepEvent) {
        self.i += 1;
        let (xh, xc, yc) = if self.i == 1 || !ev.reinforce {
            (ev.step, ev.step, ev.step * ev.step)
        } else {
            let j = ev.repeat_index as usize;
            debug_assert!(1 <= j && j < self.i);
            (self.x_hat[j - 1], -self.x_check[j - 1], -self.y_check[j - 1])
        };
        self.x_hat.push(xh);
        self.x_check.push(xc);
        self.y_check.push(yc);
        self.s += ev.step;
        self.s_hat += xh;
        self.s_check += xc;
        self.v_hat += xh * xh;
        self.g_check += yc;
    }

    /// Undo the most recent `advance`; used by the exhaustive enumerator.
    pub fn retreat(&mut self, ev: StepEvent) {
        let xh = self.x_hat.pop().expect("retreat past epoch 0");
        let xc = self.x_check.pop().expect("retreat past epoch 0");
        let yc = self.y_check.pop().expect("retreat past epoch 0");
        self.s -= ev.step;
        self.s_hat -= xh;
        self.s_check -= xc;
        self.v_hat -= xh * xh;
        self.g_check -= yc;
        self.i -= 1;
    }

    /// Current epoch.
    pub fn epoch(&self) -> usize {
        self.i
    }
    /// Plain walk value `S_i`.
    pub fn s(&self) -> f64 {
        self.s
    }
    /// Reinforced walk value `Ŝ_i`.
    pub fn s_hat(&self) -> f64 {
        self.s_hat
    }
    /// Counterbalanced walk value `Š_i`.
    pub fn s_check(&self) -> f64 {
        self.s_check
    }
    /// Squared-step sum `V̂_i`.
    pub fn v_hat(&self) -> f64 {
        self.v_hat
    }
    /// Counterbalanced squared-step walk `Ǧ_i`.
    pub fn g_check(&self) -> f64 {
        self.g_check
    }
    /// Reinforced step values `X̂_1..X̂_i`.
    pub fn x_hat_steps(&self) -> &[f64] {
        &self.x_hat
    }
    /// Counterbalanced step values `X̌_1..X̌_i`.
    pub fn x_check_steps(&self) -> &[f64] {
        &self.x_check
    }
}

/// Which epochs a simulation keeps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recording {
    /// Keep every epoch `0..=n`.
    Full,
    /// Keep exactly these epochs (strictly increasing, all `≤ n`).
    Indices(Vec<usize>),
}

/// Inputs of one coupled simulation.
#[derive(Clone, Debug)]
pub struct ReinforcementParams {
    /// Reinforcement probability `p ∈ [0, 1]`.
    pub p: f64,
    /// Law of the fresh steps.
    pub law: StepLaw,
    /// Number of steps.
    pub n: usize,
    /// Master seed shared by a whole ensemble.
    pub seed: u64,
    /// Slot of this path inside the ensemble.
    pub path_index: u64,
    /// Record the auxiliary series `V̂` and `Ǧ`.
    pub emit_aux: bool,
    /// Epochs to keep.
    pub recording: Recording,
    /// Keep the resolved events for later replay.
    pub record_events: bool,
}

impl ReinforcementParams {
    /// Parameters with full recording, no auxiliaries, path slot 0.
    pub fn new(p: f64, law: StepLaw, n: usize, seed: u64) -> Self {
        ReinforcementParams {
            p,
            law,
            n,
            seed,
            path_index: 0,
            emit_aux: false,
            recording: Recording::Full,
            record_events: false,
        }
    }

    /// Same parameters for a different ensemble slot.
    pub fn for_path(&self, path_index: u64) -> Self {
        ReinforcementParams { path_index, ..self.clone() }
    }

    /// Enable the auxiliary series.
    pub fn with_aux(mut self) -> Self {
        self.emit_aux = true;
        self
    }

    /// Restrict recording to the given epochs.
    pub fn with_indices(mut self, indices: Vec<usize>) -> Self {
        self.recording = Recording::Indices(indices);
        self
    }

    /// Keep resolved events for replay.
    pub fn with_events(mut self) -> Self {
        self.record_events = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!(
                "reinforcement probability p must lie in [0, 1], got {}",
                self.p
            )));
        }
        if self.n == 0 {
            return Err(Error::invalid("path length n must be at least 1"));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::invalid("path length n must fit in 32 bits"));
        }
        if let Recording::Indices(idx) = &self.recording {
            if idx.is_empty() {
                return Err(Error::invalid("recording index set must be nonempty"));
            }
            if !idx.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::invalid(
                    "recording indices must be strictly increasing",
                ));
            }
            if *idx.last().expect("nonempty") > self.n {
                return Err(Error::invalid("recording indices must not exceed n"));
            }
        }
        Ok(())
    }
}

/// One simulated triplet path, recorded at `indices`.
#[derive(Clone, Debug, Serialize)]
pub struct CoupledPath {
    /// Number of simulated steps.
    pub n: usize,
    /// Reinforcement probability used.
    pub p: f64,
    /// Mean of the step law.
    pub mean: f64,
    /// Variance of the step law.
    pub sigma2: f64,
    /// Master seed.
    pub seed: u64,
    /// Ensemble slot.
    pub path_index: u64,
    /// Recorded epochs, strictly increasing.
    pub indices: Vec<usize>,
    /// Plain walk at the recorded epochs.
    pub s: Vec<f64>,
    /// Reinforced walk at the recorded epochs.
    pub s_hat: Vec<f64>,
    /// Counterbalanced walk at the recorded epochs.
    pub s_check: Vec<f64>,
    /// Squared-step sums, when auxiliaries were emitted.
    pub v_hat: Option<Vec<f64>>,
    /// Counterbalanced squared-step walk, when auxiliaries were emitted.
    pub g_check: Option<Vec<f64>>,
    /// Resolved events (step 1 first), when requested.
    #[serde(skip)]
    pub events: Option<Vec<StepEvent>>,
}

/// Series selector for [`CoupledPath::value`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Series {
    /// Plain walk `S`.
    S,
    /// Reinforced walk `Ŝ`.
    SHat,
    /// Counterbalanced walk `Š`.
    SCheck,
    /// Squared-step sum `V̂`.
    VHat,
    /// Counterbalanced squared-step walk `Ǧ`.
    GCheck,
}

impl CoupledPath {
    /// True when every epoch `0..=n` was recorded.
    pub fn is_full(&self) -> bool {
        self.indices.len() == self.n + 1 && self.indices[0] == 0
    }

    /// Value of `series` at epoch `k`, when recorded.
    pub fn value(&self, series: Series, k: usize) -> Option<f64> {
        let pos = if self.is_full() {
            if k > self.n {
                return None;
            }
            k
        } else {
            self.indices.binary_search(&k).ok()?
        };
        let col = match series {
            Series::S => &self.s,
            Series::SHat => &self.s_hat,
            Series::SCheck => &self.s_check,
            Series::VHat => self.v_hat.as_ref()?,
            Series::GCheck => self.g_check.as_ref()?,
        };
        col.get(pos).copied()
    }
}

struct PathBuilder {
    indices: Vec<usize>,
    s: Vec<f64>,
    s_hat: Vec<f64>,
    s_check: Vec<f64>,
    v_hat: Option<Vec<f64>>,
    g_check: Option<Vec<f64>>,
}

impl PathBuilder {
    fn new(rows: usize, emit_aux: bool) -> Self {
        PathBuilder {
            indices: Vec::with_capacity(rows),
            s: Vec::with_capacity(rows),
            s_hat: Vec::with_capacity(rows),
            s_check: Vec::with_capacity(rows),
            v_hat: emit_aux.then(|| Vec::with_capacity(rows)),
            g_check: emit_aux.then(|| Vec::with_capacity(rows)),
        }
    }

    fn push(&mut self, k: usize, st: &TripletState) {
        self.indices.push(k);
        self.s.push(st.s());
        self.s_hat.push(st.s_hat());
        self.s_check.push(st.s_check());
        if let Some(col) = self.v_hat.as_mut() {
            col.push(st.v_hat());
        }
        if let Some(col) = self.g_check.as_mut() {
            col.push(st.g_check());
        }
    }
}

/// Simulate one coupled path.
pub fn simulate_coupled(params: &ReinforcementParams) -> Result<CoupledPath> {
    params.validate()?;
    let eps_key = rng::stream_key(params.seed, params.path_index, Stream::Epsilon);
    let rep_key = rng::stream_key(params.seed, params.path_index, Stream::RepeatIndex);
    let step_key = rng::stream_key(params.seed, params.path_index, Stream::Step);

    let (grid, rows): (&[usize], usize) = match &params.recording {
        Recording::Full => (&[], params.n + 1),
        Recording::Indices(idx) => (idx, idx.len()),
    };
    let full = matches!(params.recording, Recording::Full);
    let mut cursor = 0usize;
    let mut wants = move |k: usize| -> bool {
        if full {
            return true;
        }
        if cursor < grid.len() && grid[cursor] == k {
            cursor += 1;
            true
        } else {
            false
        }
    };

    let mut rowset = PathBuilder::new(rows, params.emit_aux);
    let mut events = params.record_events.then(|| Vec::with_capacity(params.n));
    let mut state = TripletState::with_capacity(params.n);

    if wants(0) {
        rowset.push(0, &state);
    }
    for i in 1..=params.n {
        // Fixed per-step order: reinforcement flag, repeat index if needed,
        // fresh step.  Every draw is positional, so skipped draws do not
        // shift later ones.
        let reinforce = i >= 2 && rng::uniform_at(eps_key, i as u64) < params.p;
        let repeat_index = if reinforce {
            rng::index_in_at(rep_key, i as u64, i - 1) as u32
        } else {
            0
        };
        let step = params.law.sample_at(step_key, i as u64);
        let ev = StepEvent { reinforce, repeat_index, step };
        if let Some(evs) = events.as_mut() {
            evs.push(ev);
        }
        state.advance(ev);
        if wants(i) {
            rowset.push(i, &state);
        }
    }

    Ok(CoupledPath {
        n: params.n,
        p: params.p,
        mean: params.law.mean(),
        sigma2: params.law.variance(),
        seed: params.seed,
        path_index: params.path_index,
        indices: rowset.indices,
        s: rowset.s,
        s_hat: rowset.s_hat,
        s_check: rowset.s_check,
        v_hat: rowset.v_hat,
        g_check: rowset.g_check,
        events,
    })
}

/// The triplet paths of a truncation split, driven by one event stream.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Paths under the base law.
    pub total: CoupledPath,
    /// Paths under the centred bounded part.
    pub low: CoupledPath,
    /// Paths under the centred tail part.
    pub high: CoupledPath,
}

/// Simulate the base law and its truncation split at `cutoff` on one shared
/// event stream.  Because the reinforcement recursion is linear in the step
/// values and the truncated pieces of a centred law add back to the base
/// draw sample by sample, the three paths satisfy `total = low + high`
/// exactly, series by series.
///
/// Requires a centred base law; with a drift the split would differ from the
/// base walk by a deterministic reinforced walk of the truncation means.
pub fn simulate_decomposed(params: &ReinforcementParams, cutoff: f64) -> Result<Decomposition> {
    if !params.law.is_centred() {
        return Err(Error::invalid(
            "decomposition requires a centred base law",
        ));
    }
    let (low_law, high_law) = crate::walks::law::truncate_law(&params.law, cutoff)?;
    let total = simulate_coupled(params)?;
    let low = simulate_coupled(&ReinforcementParams { law: low_law, ..params.clone() })?;
    let high = simulate_coupled(&ReinforcementParams { law: high_law, ..params.clone() })?;
    Ok(Decomposition { total, low, high })
}

/// Fixed CSV header of a path dump.
pub const PATH_CSV_HEADER: &str = "path_id,k,S,S_hat,S_check,V_hat,G_check";

/// Format a float with 17 significant digits; parses back bit-identically.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write paths as CSV, one row per recorded epoch.  Auxiliary columns are
/// left empty when the series were not emitted.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[CoupledPath]) -> Result<()> {
    writeln!(out, "{PATH_CSV_HEADER}")?;
    for path in paths {
        for (row, k) in path.indices.iter().enumerate() {
            let aux = |col: &Option<Vec<f64>>| {
                col.as_ref().map(|v| fmt_f64(v[row])).unwrap_or_default()
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                path.path_index,
                k,
                fmt_f64(path.s[row]),
                fmt_f64(path.s_hat[row]),
                fmt_f64(path.s_check[row]),
                aux(&path.v_hat),
                aux(&path.g_check),
            )?;
        }
    }
    Ok(())
}

/// Write paths as JSON lines, one object per recorded epoch.
pub fn write_paths_jsonl<W: Write>(out: &mut W, paths: &[CoupledPath]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        path_id: u64,
        k: usize,
        #[serde(rename = "S")]
        s: f64,
        #[serde(rename = "S_hat")]
        s_hat: f64,
        #[serde(rename = "S_check")]
        s_check: f64,
        #[serde(rename = "V_hat", skip_serializing_if = "Option::is_none")]
        v_hat: &'a Option<f64>,
        #[serde(rename = "G_check", skip_serializing_if = "Option::is_none")]
        g_check: &'a Option<f64>,
    }
    for path in paths {
        for (row, k) in path.indices.iter().enumerate() {
            let line = Row {
                path_id: path.path_index,
                k: *k,
                s: path.s[row],
                s_hat: path.s_hat[row],
                s_check: path.s_check[row],
                v_hat: &path.v_hat.as_ref().map(|v| v[row]),
                g_check: &path.g_check.as_ref().map(|v| v[row]),
            };
            serde_json::to_writer(&mut *out, &line)
                .map_err(|e| Error::Parse(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// A path table read back from CSV: the recorded epochs and value columns of
/// one path, without the simulation metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    /// Path slot from the `path_id` column.
    pub path_index: u64,
    /// Recorded epochs.
    pub indices: Vec<usize>,
    /// Plain walk column.
    pub s: Vec<f64>,
    /// Reinforced walk column.
    pub s_hat: Vec<f64>,
    /// Counterbalanced walk column.
    pub s_check: Vec<f64>,
    /// Squared-step column, when present.
    pub v_hat: Option<Vec<f64>>,
    /// Counterbalanced squared-step column, when present.
    pub g_check: Option<Vec<f64>>,
}

impl PathRecord {
    /// Value of `series` at epoch `k`, when recorded.
    pub fn value(&self, series: Series, k: usize) -> Option<f64> {
        let pos = self.indices.binary_search(&k).ok()?;
        let col = match series {
            Series::S => &self.s,
            Series::SHat => &self.s_hat,
            Series::SCheck => &self.s_check,
            Series::VHat => self.v_hat.as_ref()?,
            Series::GCheck => self.g_check.as_ref()?,
        };
        col.get(pos).copied()
    }
}

/// Read a CSV path dump written by [`write_paths_csv`].  Rows of one path
/// must be contiguous; paths are returned in file order.
pub fn read_paths_csv<R: BufRead>(input: R) -> Result<Vec<PathRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty path CSV".into()))?
        .map_err(Error::Io)?;
    if header.trim() != PATH_CSV_HEADER {
        return Err(Error::Parse(format!(
            "unexpected path CSV header: {header:?}"
        )));
    }
    let mut out: Vec<PathRecord> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(Error::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "row {}: expected 7 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::Parse(format!("row {}: bad {what}: {s:?}", lineno + 2))
            })
        };
        let path_index: u64 = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad path_id", lineno + 2)))?;
        let k: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad k", lineno + 2)))?;
        let has_aux = !fields[5].is_empty();
        if out.last().map(|r| r.path_index) != Some(path_index) {
            out.push(PathRecord {
                path_index,
                indices: Vec::new(),
                s: Vec::new(),
                s_hat: Vec::new(),
                s_check: Vec::new(),
                v_hat: has_aux.then(Vec::new),
                g_check: has_aux.then(Vec::new),
            });
        }
        let rec = out.last_mut().expect("pushed above");
        rec.indices.push(k);
        rec.s.push(parse_f(fields[2], "S")?);
        rec.s_hat.push(parse_f(fields[3], "S_hat")?);
        rec.s_check.push(parse_f(fields[4], "S_check")?);
        if let Some(col) = rec.v_hat.as_mut() {
            col.push(parse_f(fields[5], "V_hat")?);
        }
        if let Some(col) = rec.g_check.as_mut() {
            col.push(parse_f(fields[6], "G_check")?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, n: usize, seed: u64) -> ReinforcementParams {
        ReinforcementParams::new(p, StepLaw::Rademacher, n, seed)
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(simulate_coupled(&params(1.2, 10, 0)).is_err());
        assert!(simulate_coupled(&params(-0.1, 10, 0)).is_err());
        assert!(simulate_coupled(&params(0.5, 0, 0)).is_err());
        let bad = params(0.5, 10, 0).with_indices(vec![3, 3]);
        assert!(simulate_coupled(&bad).is_err());
        let bad = params(0.5, 10, 0).with_indices(vec![11]);
        assert!(simulate_coupled(&bad).is_err());
    }

    // p = 0 never reinforces: all three walks coincide with the plain walk.
    #[test]
    fn zero_p_collapses_the_triplet() {
        let path = simulate_coupled(&params(0.0, 500, 42).with_aux()).unwrap();
        assert_eq!(path.s, path.s_hat);
        assert_eq!(path.s, path.s_check);
        let v = path.v_hat.as_ref().unwrap();
        let g = path.g_check.as_ref().unwrap();
        assert_eq!(v, g);
        for (k, row) in path.indices.iter().zip(v) {
            assert_eq!(*row, *k as f64); // Rademacher squares are all 1
        }
    }

    // p = 1 always reinforces: every reinforced step repeats X₁, so
    // Ŝ_n = n·X₁, and the counterbalanced walk only sees sign flips of X₁.
    #[test]
    fn unit_p_freezes_the_reinforced_walk() {
        let path = simulate_coupled(&params(1.0, 300, 7)).unwrap();
        let x1 = path.s_hat[1];
        for (k, v) in path.indices.iter().zip(&path.s_hat) {
            assert_eq!(*v, *k as f64 * x1);
        }
        for w in path.s_check.windows(2) {
            assert!((w[1] - w[0]).abs() == 1.0);
        }
    }

    // Squared steps propagate through the repetition genealogy unchanged:
    // ΔŜ² = ΔŠ² at every epoch, V̂ sums them, |Ǧ| never exceeds V̂, and the
    // product of the two step values equals the squared-step walk increment.
    #[test]
    fn squared_step_identities_hold_pathwise() {
        for seed in 0..100 {
            let path = simulate_coupled(&params(0.4, 200, seed).with_aux()).unwrap();
            let v = path.v_hat.as_ref().unwrap();
            let g = path.g_check.as_ref().unwrap();
            let mut prev_g = 0.0;
            for k in 1..=path.n {
                let dh = path.s_hat[k] - path.s_hat[k - 1];
                let dc = path.s_check[k] - path.s_check[k - 1];
                assert!((dh * dh - dc * dc).abs() < 1e-12);
                assert!((v[k] - v[k - 1] - dh * dh).abs() < 1e-12);
                assert!(g[k].abs() <= v[k] + 1e-12);
                let dg = g[k] - prev_g;
                assert!((dg - dh * dc).abs() < 1e-12, "seed {seed} k {k}");
                prev_g = g[k];
            }
        }
    }

    // Same address, same numbers: recording choices and the auxiliary flag
    // must not perturb the event stream.
    #[test]
    fn recording_options_do_not_disturb_the_draws() {
        let full = simulate_coupled(&params(0.3, 400, 9).with_aux()).unwrap();
        let bare = simulate_coupled(&params(0.3, 400, 9)).unwrap();
        assert_eq!(full.s, bare.s);
        assert_eq!(full.s_hat, bare.s_hat);
        assert_eq!(full.s_check, bare.s_check);
        assert!(bare.v_hat.is_none());

        let sparse = simulate_coupled(
            &params(0.3, 400, 9).with_aux().with_indices(vec![0, 100, 400]),
        )
        .unwrap();
        assert_eq!(sparse.indices, vec![0, 100, 400]);
        for (pos, k) in sparse.indices.iter().enumerate() {
            assert_eq!(sparse.s[pos], full.s[*k]);
            assert_eq!(sparse.s_hat[pos], full.s_hat[*k]);
            assert_eq!(sparse.v_hat.as_ref().unwrap()[pos], full.v_hat.as_ref().unwrap()[*k]);
        }
    }

    #[test]
    fn replaying_recorded_events_rebuilds_the_path() {
        let path = simulate_coupled(&params(0.6, 250, 3).with_events()).unwrap();
        let evs = path.events.as_ref().unwrap();
        let mut st = TripletState::new();
        for (i, ev) in evs.iter().enumerate() {
            st.advance(*ev);
            assert_eq!(st.s_hat(), path.s_hat[i + 1]);
            assert_eq!(st.s_check(), path.s_check[i + 1]);
        }
    }

    #[test]
    fn retreat_inverts_advance() {
        let path = simulate_coupled(&params(0.5, 60, 11).with_events()).unwrap();
        let evs = path.events.as_ref().unwrap();
        let mut st = TripletState::new();
        for ev in &evs[..40] {
            st.advance(*ev);
        }
        let snapshot = (st.s(), st.s_hat(), st.s_check(), st.v_hat(), st.g_check());
        st.advance(evs[40]);
        st.retreat(evs[40]);
        assert_eq!(
            snapshot,
            (st.s(), st.s_hat(), st.s_check(), st.v_hat(), st.g_check())
        );
    }

    // Every X̂_k keeps the marginal step law: check the symmetry of the
    // Rademacher marginal at several epochs over a large ensemble.
    #[test]
    fn reinforced_steps_keep_the_marginal_law() {
        let n = 12;
        let paths = 60_000u64;
        let mut plus = [0u32; 13];
        for path_index in 0..paths {
            let p = ReinforcementParams {
                path_index,
                ..params(0.5, n, 20_260_101)
            };
            let path = simulate_coupled(&p).unwrap();
            for k in 1..=n {
                if path.s_hat[k] - path.s_hat[k - 1] > 0.0 {
                    plus[k] += 1;
                }
            }
        }
        // Binomial(60000, 1/2): 4.5 sigma is ~551.
        for k in 1..=n {
            let dev = (plus[k] as f64 - paths as f64 / 2.0).abs();
            assert!(dev < 560.0, "epoch {k}: deviation {dev}");
        }
    }

    #[test]
    fn decomposition_is_exactly_additive() {
        let base = ReinforcementParams::new(
            0.35,
            StepLaw::discrete_uniform(vec![-2.0, -1.0, 1.0, 2.0]).unwrap(),
            300,
            17,
        )
        .with_aux();
        let dec = simulate_decomposed(&base, 1.0).unwrap();
        for k in 0..=300 {
            assert!((dec.total.s[k] - dec.low.s[k] - dec.high.s[k]).abs() < 1e-9);
            assert!((dec.total.s_hat[k] - dec.low.s_hat[k] - dec.high.s_hat[k]).abs() < 1e-9);
            assert!(
                (dec.total.s_check[k] - dec.low.s_check[k] - dec.high.s_check[k]).abs() < 1e-9
            );
        }
    }

    #[test]
    fn decomposition_requires_a_centred_law() {
        let skew = ReinforcementParams::new(
            0.5,
            StepLaw::discrete_uniform(vec![0.0, 2.0]).unwrap(),
            10,
            1,
        );
        assert!(simulate_decomposed(&skew, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut paths = Vec::new();
        for idx in 0..3 {
            let p = ReinforcementParams {
                path_index: idx,
                ..params(0.45, 40, 5).with_aux()
            };
            paths.push(simulate_coupled(&p).unwrap());
        }
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &paths).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(PATH_CSV_HEADER));
        let records = read_paths_csv(&buf[..]).unwrap();
        assert_eq!(records.len(), paths.len());
        for (rec, path) in records.iter().zip(&paths) {
            assert_eq!(rec.indices, path.indices);
            assert_eq!(rec.s, path.s);
            assert_eq!(rec.s_hat, path.s_hat);
            assert_eq!(rec.s_check, path.s_check);
            assert_eq!(rec.v_hat.as_ref(), path.v_hat.as_ref());
            assert_eq!(rec.g_check.as_ref(), path.g_check.as_ref());
        }
    }

    #[test]
    fn csv_reader_rejects_malformed_input() {
        assert!(read_paths_csv(&b"wrong,header\n"[..]).is_err());
        let bad = format!("{PATH_CSV_HEADER}\n0,1,1.0\n");
        assert!(read_paths_csv(bad.as_bytes()).is_err());
        let bad = format!("{PATH_CSV_HEADER}\n0,1,x,0,0,,\n");
        assert!(read_paths_csv(bad.as_bytes()).is_err());
    }
}
