//! Random walks with local memory on Z²: local mechanisms (H–V and p-rotor),
//! lazily materialized rotor fields, and the frozen walk stopped at the
//! outer boundary of a ball.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DiskMask, Direction, Label, Vertex, ORIGIN};
use crate::seed;

/// Transition law of the rotor at a site: `rows[from][to]`, indexed by
/// [`Direction::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMechanism {
    rows: [[f64; 4]; 4],
    cumulative: [[f64; 4]; 4],
    q: Option<f64>,
}

impl LocalMechanism {
    fn from_rows(rows: [[f64; 4]; 4], q: Option<f64>) -> Self {
        let mut cumulative = [[0.0; 4]; 4];
        for (c, row) in cumulative.iter_mut().zip(&rows) {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += row[j];
                c[j] = acc;
            }
            // Absorb rounding: the last reachable entry takes all remaining mass.
            let last = (0..4).rev().find(|&j| row[j] > 0.0).unwrap_or(3);
            c[last..].iter_mut().for_each(|x| *x = f64::INFINITY);
        }
        LocalMechanism { rows, cumulative, q }
    }

    /// The H–V mechanism: keep the label w.p. `1 − q`, flip it w.p. `q`, then
    /// pick one of the label's two directions uniformly.
    pub fn hv(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Parameter(format!("q must lie in (0,1], got {q}")));
        }
        Ok(Self::hv_unchecked(q))
    }

    fn hv_unchecked(q: f64) -> Self {
        let mut rows = [[0.0; 4]; 4];
        for from in Direction::ALL {
            for to in Direction::ALL {
                rows[from.index()][to.index()] = if from.label() == to.label() { (1.0 - q) / 2.0 } else { q / 2.0 };
            }
        }
        Self::from_rows(rows, Some(q))
    }

    /// The q = 0 walk: labels never change. Not irreducible, and kept out of
    /// the martingale machinery.
    pub fn hv_frozen_labels() -> Self {
        let mut m = Self::hv_unchecked(0.0);
        m.q = Some(0.0);
        m
    }

    /// Quarter turn counter-clockwise w.p. `p`, clockwise w.p. `1 − p`.
    pub fn p_rotor(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("p must lie in [0,1], got {p}")));
        }
        let mut rows = [[0.0; 4]; 4];
        for from in Direction::ALL {
            rows[from.index()][from.ccw().index()] += p;
            rows[from.index()][from.cw().index()] += 1.0 - p;
        }
        Ok(Self::from_rows(rows, None))
    }

    /// The flip probability, for H–V mechanisms.
    pub fn q(&self) -> Option<f64> {
        self.q
    }

    pub fn row(&self, from: Direction) -> [f64; 4] {
        self.rows[from.index()]
    }

    pub fn prob(&self, from: Direction, to: Direction) -> f64 {
        self.rows[from.index()][to.index()]
    }

    /// Inverse-CDF draw from the row of `from` given `u ∈ [0,1)`.
    pub fn sample_with(&self, from: Direction, u: f64) -> Direction {
        let c = &self.cumulative[from.index()];
        let mut j = 0;
        while u >= c[j] || self.rows[from.index()][j] == 0.0 {
            j += 1;
        }
        Direction::from_index(j)
    }

    pub fn sample<G: Rng>(&self, from: Direction, rng: &mut G) -> Direction {
        self.sample_with(from, rng.random::<f64>())
    }

    pub fn rows_stochastic(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.iter().all(|&p| p >= 0.0) && (r.iter().sum::<f64>() - 1.0).abs() <= tol)
    }

    /// Whether the four-state chain is irreducible.
    pub fn is_irreducible(&self) -> bool {
        (0..4).all(|s| {
            let mut seen = [false; 4];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(i) = stack.pop() {
                for j in 0..4 {
                    if self.rows[i][j] > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|&b| b)
        })
    }
}

/// Initial rotor of every vertex. Must be a pure function of the vertex.
pub trait RotorSource: Sync {
    fn rotor(&self, v: Vertex) -> Direction;

    fn label(&self, v: Vertex) -> Label {
        self.rotor(v).label()
    }
}

impl<F: Fn(Vertex) -> Direction + Sync> RotorSource for F {
    fn rotor(&self, v: Vertex) -> Direction {
        self(v)
    }
}

const UNSET: u8 = u8::MAX;

/// A rotor configuration read lazily from a [`RotorSource`] with local
/// mutations on top. A dense square window covers the region the walk is
/// expected to use; anything outside spills into a hash map.
#[derive(Clone, Debug)]
pub struct RotorField {
    half: i32,
    side: usize,
    cells: Vec<u8>,
    touched: Vec<u32>,
    spill: HashMap<Vertex, Direction>,
}

impl RotorField {
    pub fn new(half: i32) -> Self {
        let side = (2 * half + 1) as usize;
        RotorField { half, side, cells: vec![UNSET; side * side], touched: Vec::new(), spill: HashMap::new() }
    }

    #[inline]
    fn slot(&self, v: Vertex) -> Option<usize> {
        if v.x.abs() <= self.half && v.y.abs() <= self.half {
            Some(((v.y + self.half) as usize) * self.side + (v.x + self.half) as usize)
        } else {
            None
        }
    }

    /// Forget every read and mutation.
    pub fn reset(&mut self) {
        for &i in &self.touched {
            self.cells[i as usize] = UNSET;
        }
        self.touched.clear();
        self.spill.clear();
    }

    #[inline]
    pub fn get(&mut self, v: Vertex, source: &dyn RotorSource) -> Direction {
        match self.slot(v) {
            Some(i) => {
                let c = self.cells[i];
                if c != UNSET {
                    return Direction::from_index(c as usize);
                }
                let d = source.rotor(v);
                self.cells[i] = d.index() as u8;
                self.touched.push(i as u32);
                d
            }
            None => *self.spill.entry(v).or_insert_with(|| source.rotor(v)),
        }
    }

    /// Current rotor if `v` was ever read or written.
    pub fn peek(&self, v: Vertex) -> Option<Direction> {
        match self.slot(v) {
            Some(i) => (self.cells[i] != UNSET).then(|| Direction::from_index(self.cells[i] as usize)),
            None => self.spill.get(&v).copied(),
        }
    }

    #[inline]
    pub fn set(&mut self, v: Vertex, d: Direction) {
        match self.slot(v) {
            Some(i) => {
                if self.cells[i] == UNSET {
                    self.touched.push(i as u32);
                }
                self.cells[i] = d.index() as u8;
            }
            None => {
                self.spill.insert(v, d);
            }
        }
    }

    /// Vertices that have been read or written, with their current rotors.
    pub fn entries(&self) -> Vec<(Vertex, Direction)> {
        let mut out: Vec<(Vertex, Direction)> = self
            .touched
            .iter()
            .map(|&i| {
                let i = i as usize;
                let v = Vertex::new((i % self.side) as i32 - self.half, (i / self.side) as i32 - self.half);
                (v, Direction::from_index(self.cells[i] as usize))
            })
            .chain(self.spill.iter().map(|(&v, &d)| (v, d)))
            .collect();
        out.sort();
        out
    }
}

/// One move of one walker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepEvent {
    pub t: u64,
    pub walker: usize,
    pub from: Vertex,
    pub to: Vertex,
    pub rotor_before: Direction,
    pub rotor_after: Direction,
}

/// Hook called after every move of a walk.
pub trait StepObserver {
    fn on_step(&mut self, _ev: &StepEvent) {}
}

impl StepObserver for () {}

/// Positions, environment and counters of a multi-walker RWLM.
#[derive(Clone, Debug)]
pub struct WalkState {
    pub positions: Vec<Vertex>,
    pub field: RotorField,
    /// Arrivals at the origin.
    pub returns: u64,
    /// Departures from the origin.
    pub departures: u64,
    pub time: u64,
}

impl WalkState {
    pub fn new(n: usize, half: i32) -> Self {
        WalkState { positions: vec![ORIGIN; n], field: RotorField::new(half), returns: 0, departures: 0, time: 0 }
    }

    pub fn reset(&mut self) {
        self.positions.iter_mut().for_each(|p| *p = ORIGIN);
        self.field.reset();
        self.returns = 0;
        self.departures = 0;
        self.time = 0;
    }
}

/// Move walker `i`: resample the rotor at its site from `mech`, store it,
/// and follow it. Advances the clock by one.
#[inline]
pub fn step_rwlm<G: Rng>(
    state: &mut WalkState,
    i: usize,
    mech: &LocalMechanism,
    source: &dyn RotorSource,
    rng: &mut G,
) -> StepEvent {
    let from = state.positions[i];
    let before = state.field.get(from, source);
    let after = mech.sample(before, rng);
    state.field.set(from, after);
    let to = from.step(after);
    state.positions[i] = to;
    state.time += 1;
    if from == ORIGIN {
        state.departures += 1;
    }
    if to == ORIGIN {
        state.returns += 1;
    }
    StepEvent { t: state.time, walker: i, from, to, rotor_before: before, rotor_after: after }
}

/// Why a frozen run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    KReturnsReached,
    AllFrozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenRunResult {
    pub tau: u64,
    pub returns: u64,
    pub departures: u64,
    pub reason: StopReason,
    /// Labels at time τ of every vertex that was visited.
    pub final_labels: Vec<(Vertex, Label)>,
    pub visited: Vec<Vertex>,
    pub walker_endpoints: Vec<Vertex>,
}

/// Parameters of a frozen walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrozenParams {
    pub n: usize,
    pub k: u64,
    pub r: f64,
    pub step_cap: u64,
}

pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

impl FrozenParams {
    pub fn new(n: usize, k: u64, r: f64) -> Self {
        FrozenParams { n, k, r, step_cap: DEFAULT_STEP_CAP }
    }
}

/// Reusable buffers for frozen walks at a fixed radius.
#[derive(Clone, Debug)]
pub struct FrozenEngine {
    params: FrozenParams,
    mask: DiskMask,
    state: WalkState,
    visited_flag: Vec<bool>,
    visited: Vec<Vertex>,
    frozen: Vec<bool>,
}

impl FrozenEngine {
    pub fn new(params: FrozenParams) -> Result<Self> {
        if params.n == 0 {
            return Err(Error::Parameter("need at least one walker".into()));
        }
        if !(params.r >= 1.0) {
            return Err(Error::Parameter(format!("radius must be >= 1, got {}", params.r)));
        }
        let mask = DiskMask::new(params.r);
        let half = mask.half_width();
        let side = (2 * half + 1) as usize;
        Ok(FrozenEngine {
            params,
            state: WalkState::new(params.n, half),
            mask,
            visited_flag: vec![false; side * side],
            visited: Vec::new(),
            frozen: vec![false; params.n],
        })
    }

    pub fn params(&self) -> &FrozenParams {
        &self.params
    }

    pub fn mask(&self) -> &DiskMask {
        &self.mask
    }

    /// Field and positions as left by the last run.
    pub fn state(&self) -> &WalkState {
        &self.state
    }

    fn mark(&mut self, v: Vertex) {
        let h = self.mask.half_width();
        let i = ((v.y + h) as usize) * (2 * h + 1) as usize + (v.x + h) as usize;
        if !self.visited_flag[i] {
            self.visited_flag[i] = true;
            self.visited.push(v);
        }
    }

    fn clear(&mut self) {
        let h = self.mask.half_width();
        for v in self.visited.drain(..) {
            self.visited_flag[((v.y + h) as usize) * (2 * h + 1) as usize + (v.x + h) as usize] = false;
        }
        self.state.reset();
        self.frozen.iter_mut().for_each(|f| *f = false);
    }

    /// Run one frozen walk and report only the counters (no label dump).
    pub fn run_counts<G: Rng, O: StepObserver>(
        &mut self,
        source: &dyn RotorSource,
        mech: &LocalMechanism,
        rng: &mut G,
        obs: &mut O,
    ) -> Result<(u64, StopReason)> {
        self.clear();
        let FrozenParams { n, k, step_cap, .. } = self.params;
        self.mark(ORIGIN);
        let mut n_frozen = 0usize;
        if self.mask.on_boundary(ORIGIN) {
            self.frozen.iter_mut().for_each(|f| *f = true);
            n_frozen = n;
        }
        let mut t = 0u64;
        loop {
            if self.state.returns >= k {
                return Ok((t, StopReason::KReturnsReached));
            }
            if n_frozen == n {
                return Ok((t, StopReason::AllFrozen));
            }
            if t >= step_cap {
                return Err(Error::StepCap { cap: step_cap });
            }
            t += 1;
            let i = ((t - 1) % n as u64) as usize;
            if self.frozen[i] {
                self.state.time += 1;
                continue;
            }
            let ev = step_rwlm(&mut self.state, i, mech, source, rng);
            obs.on_step(&ev);
            self.mark(ev.to);
            if self.mask.on_boundary(ev.to) {
                self.frozen[i] = true;
                n_frozen += 1;
            }
        }
    }

    /// Run one frozen walk with a full result record.
    pub fn run<G: Rng, O: StepObserver>(
        &mut self,
        source: &dyn RotorSource,
        mech: &LocalMechanism,
        rng: &mut G,
        obs: &mut O,
    ) -> Result<FrozenRunResult> {
        let (tau, reason) = self.run_counts(source, mech, rng, obs)?;
        let mut visited = self.visited.clone();
        visited.sort();
        let final_labels = visited
            .iter()
            .map(|&v| (v, self.state.field.get(v, source).label()))
            .collect();
        Ok(FrozenRunResult {
            tau,
            returns: self.state.returns,
            departures: self.state.departures,
            reason,
            final_labels,
            visited,
            walker_endpoints: self.state.positions.clone(),
        })
    }

    /// Vertices visited by the last run, in first-visit order.
    pub fn visited(&self) -> &[Vertex] {
        &self.visited
    }
}

/// Run a single frozen H–V walk from the origin with cyclic turn order.
pub fn run_frozen(
    source: &dyn RotorSource,
    q: f64,
    n: usize,
    k: u64,
    r: f64,
    walk_seed: u64,
) -> Result<FrozenRunResult> {
    let mech = LocalMechanism::hv(q)?;
    let mut engine = FrozenEngine::new(FrozenParams::new(n, k, r))?;
    engine.run(source, &mech, &mut seed::rng(walk_seed), &mut ())
}

/// A Bernoulli proportion with its 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnEstimate {
    pub trials: u64,
    pub successes: u64,
    pub cap_hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ReturnEstimate {
    pub fn from_counts(successes: u64, trials: u64, cap_hits: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, 1.959_963_984_540_054);
        ReturnEstimate {
            trials,
            successes,
            cap_hits,
            p_hat: if trials == 0 { f64::NAN } else { successes as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }

    /// Binomial standard error of `p_hat`.
    pub fn stderr(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Estimate `p_{k,r}` from independent frozen walks. Trial `i` uses the
/// environment built by `config(i)` and a walk seed derived from `seed` and
/// `i`; results do not depend on the number of threads.
pub fn estimate_return_prob<S, F>(
    config: F,
    mech: &LocalMechanism,
    params: FrozenParams,
    trials: u64,
    seed: u64,
) -> Result<ReturnEstimate>
where
    S: RotorSource,
    F: Fn(u64) -> S + Sync,
{
    if trials == 0 {
        return Err(Error::Parameter("trials must be >= 1".into()));
    }
    FrozenEngine::new(params)?;
    let (succ, caps) = (0..trials)
        .into_par_iter()
        .map_init(
            || FrozenEngine::new(params).expect("validated"),
            |engine, i| {
                let env = config(i);
                let mut rng = seed::rng(seed::derive(seed, seed::TAG_WALK, i));
                match engine.run_counts(&env, mech, &mut rng, &mut ()) {
                    Ok((_, StopReason::KReturnsReached)) => (1u64, 0u64),
                    Ok((_, StopReason::AllFrozen)) => (0, 0),
                    Err(_) => (0, 1),
                }
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ReturnEstimate::from_counts(succ, trials - caps, caps))
}

/// An unfrozen single-walker RWLM from the origin, for trajectories.
pub struct FreeWalk<'a> {
    pub state: WalkState,
    mech: LocalMechanism,
    source: &'a dyn RotorSource,
}

impl<'a> FreeWalk<'a> {
    /// `half` sizes the dense part of the rotor field.
    pub fn new(source: &'a dyn RotorSource, mech: LocalMechanism, half: i32) -> Self {
        FreeWalk { state: WalkState::new(1, half), mech, source }
    }

    pub fn position(&self) -> Vertex {
        self.state.positions[0]
    }

    pub fn step<G: Rng>(&mut self, rng: &mut G) -> StepEvent {
        step_rwlm(&mut self.state, 0, &self.mech, self.source, rng)
    }

    pub fn rotor(&mut self, v: Vertex) -> Direction {
        self.state.field.get(v, self.source)
    }

    pub fn trajectory<G: Rng>(&mut self, steps: u64, rng: &mut G) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(steps as usize + 1);
        out.push(self.position());
        for _ in 0..steps {
            out.push(self.step(rng).to);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    fn iud(seed: u64) -> impl Fn(Vertex) -> Direction + Sync {
        move |v: Vertex| Direction::from_index((seed::site_hash(seed, v.x, v.y) >> 62) as usize)
    }

    #[test]
    fn hv_rows() {
        let m = LocalMechanism::hv(1.0).unwrap();
        assert_eq!(m.row(East), [0.0, 0.0, 0.5, 0.5]);
        let m = LocalMechanism::hv(0.5).unwrap();
        assert!(m.row(North).iter().all(|&p| p == 0.25));
        for i in 1..=10 {
            let m = LocalMechanism::hv(i as f64 / 10.0).unwrap();
            assert!(m.rows_stochastic(1e-15));
            assert!(m.is_irreducible());
        }
        assert!(LocalMechanism::hv(0.0).is_err());
        assert!(LocalMechanism::hv(1.5).is_err());
        assert!(!LocalMechanism::hv_frozen_labels().is_irreducible());
    }

    #[test]
    fn p_rotor_rows() {
        let half = LocalMechanism::p_rotor(0.5).unwrap();
        let hv1 = LocalMechanism::hv(1.0).unwrap();
        for d in Direction::ALL {
            assert_eq!(half.row(d), hv1.row(d));
        }
        let cw = LocalMechanism::p_rotor(0.0).unwrap();
        for d in Direction::ALL {
            assert_eq!(cw.prob(d, d.cw()), 1.0);
            assert_eq!(cw.row(d).iter().filter(|&&p| p > 0.0).count(), 1);
        }
        assert!(LocalMechanism::p_rotor(-0.1).is_err());
        assert!(LocalMechanism::p_rotor(0.3).unwrap().rows_stochastic(1e-15));
    }

    #[test]
    fn sampling_never_picks_zero_entries() {
        let m = LocalMechanism::hv(1.0).unwrap();
        for u in [0.0, 0.25, 0.4999999, 0.5, 0.75, 0.9999999] {
            assert_eq!(m.sample_with(East, u).label(), Label::V);
        }
        let cw = LocalMechanism::p_rotor(0.0).unwrap();
        for u in [0.0, 0.5, 0.999] {
            assert_eq!(cw.sample_with(North, u), East);
        }
    }

    #[test]
    fn q1_step_flips_label() {
        let src = |_: Vertex| East;
        let mech = LocalMechanism::hv(1.0).unwrap();
        let mut st = WalkState::new(1, 8);
        let mut rng = seed::rng(3);
        let ev = step_rwlm(&mut st, 0, &mech, &src, &mut rng);
        assert_eq!(ev.rotor_after.label(), Label::V);
        assert_eq!(ev.to.x, 0);
        assert_eq!(st.departures, 1);
        assert_eq!(st.field.peek(ORIGIN), Some(ev.rotor_after));
    }

    #[test]
    fn field_reads_are_stable() {
        let src = iud(4);
        let mut f = RotorField::new(3);
        for v in [Vertex::new(1, 2), Vertex::new(10, -7)] {
            let a = f.get(v, &src);
            assert_eq!(f.get(v, &src), a);
            f.set(v, a.ccw());
            assert_eq!(f.get(v, &src), a.ccw());
        }
        f.reset();
        assert_eq!(f.peek(Vertex::new(1, 2)), None);
    }

    #[test]
    fn k_zero_stops_at_once() {
        let res = run_frozen(&iud(1), 0.7, 2, 0, 10.0, 5).unwrap();
        assert_eq!(res.tau, 0);
        assert_eq!(res.reason, StopReason::KReturnsReached);
    }

    #[test]
    fn radius_one_freezes_after_one_step() {
        let res = run_frozen(&iud(1), 0.7, 1, 3, 1.0, 5).unwrap();
        assert_eq!(res.tau, 1);
        assert_eq!(res.returns, 0);
        assert_eq!(res.reason, StopReason::AllFrozen);
    }

    #[test]
    fn replay_identical() {
        let a = run_frozen(&iud(2), 0.6, 3, 4, 12.0, 99).unwrap();
        let b = run_frozen(&iud(2), 0.6, 3, 4, 12.0, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn result_invariants() {
        let mask = DiskMask::new(9.0);
        for s in 0..200 {
            let res = run_frozen(&iud(s), 0.3 + (s % 7) as f64 / 10.0, 1 + (s % 3) as usize, 1 + s % 4, 9.0, s).unwrap();
            assert!(res.returns <= 1 + s % 4);
            match res.reason {
                StopReason::KReturnsReached => assert_eq!(res.returns, 1 + s % 4),
                StopReason::AllFrozen => assert!(res.walker_endpoints.iter().all(|&p| mask.on_boundary(p))),
            }
            let away = res.walker_endpoints.iter().filter(|p| !p.is_origin()).count() as u64;
            assert_eq!(res.departures - res.returns, away);
        }
    }

    #[test]
    fn step_cap_reported() {
        let mut params = FrozenParams::new(1, 1_000_000, 50.0);
        params.step_cap = 10;
        let mut engine = FrozenEngine::new(params).unwrap();
        let mech = LocalMechanism::hv(0.5).unwrap();
        let err = engine.run(&iud(0), &mech, &mut seed::rng(0), &mut ()).unwrap_err();
        assert!(matches!(err, Error::StepCap { cap: 10 }));
    }

    #[test]
    fn estimate_k_zero_is_one() {
        let mech = LocalMechanism::hv(0.8).unwrap();
        let est = estimate_return_prob(iud, &mech, FrozenParams::new(1, 0, 10.0), 50, 1).unwrap();
        assert_eq!(est.p_hat, 1.0);
    }

    #[test]
    fn wilson_contains_p_hat() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson_interval(0, 10, 1.96).0, 0.0);
    }
}
