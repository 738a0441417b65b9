//! The departure-counting martingale of the frozen H–V walk, its exact
//! one-step drift, Monte Carlo optional-stopping checks and the closed-form
//! lower bounds on return probabilities.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configs::ConfigGenerator;
use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::lattice::{boundary, Direction, Label, Vertex, ORIGIN};
use crate::rwlm::{FrozenEngine, FrozenParams, LocalMechanism, RotorSource, StepEvent, StepObserver, StopReason};
use crate::seed;

/// `(2q − 1) / q`.
pub fn weight_coefficient(q: f64) -> f64 {
    (2.0 * q - 1.0) / q
}

/// Incremental value of
/// `M_t = Σ_i a(Y_t^i) − N_t + ((2q−1)/q) Σ_{x visited} (wt(x,t) − wt(x,0))`.
#[derive(Clone, Debug)]
pub struct MartingaleTracker<'k> {
    kernel: &'k KernelTable,
    coef: f64,
    sum_a: f64,
    departures: u64,
    weight_delta: f64,
    max_abs: f64,
}

impl<'k> MartingaleTracker<'k> {
    /// All `n` walkers start at the origin, where `a = 0`.
    pub fn new(kernel: &'k KernelTable, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Parameter(format!("martingale needs q in (0,1], got {q}")));
        }
        Ok(MartingaleTracker { kernel, coef: weight_coefficient(q), sum_a: 0.0, departures: 0, weight_delta: 0.0, max_abs: 0.0 })
    }

    pub fn reset(&mut self) {
        self.sum_a = 0.0;
        self.departures = 0;
        self.weight_delta = 0.0;
        self.max_abs = 0.0;
    }

    pub fn value(&self) -> f64 {
        self.sum_a - self.departures as f64 + self.coef * self.weight_delta
    }

    /// `Σ_{x visited} (wt(x,t) − wt(x,0))`.
    pub fn weight_delta(&self) -> f64 {
        self.weight_delta
    }

    pub fn departures(&self) -> u64 {
        self.departures
    }

    /// Largest `|M_s|` seen so far.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }
}

impl StepObserver for MartingaleTracker<'_> {
    #[inline]
    fn on_step(&mut self, ev: &StepEvent) {
        let k = self.kernel;
        self.sum_a += k.value_unchecked(ev.to) - k.value_unchecked(ev.from);
        if ev.from == ORIGIN {
            self.departures += 1;
        }
        let (lb, la) = (ev.rotor_before.label(), ev.rotor_after.label());
        if lb != la {
            self.weight_delta += unchecked_weight(k, ev.from, la) - unchecked_weight(k, ev.from, lb);
        }
        self.max_abs = self.max_abs.max(self.value().abs());
    }
}

#[inline]
fn unchecked_weight(k: &KernelTable, v: Vertex, label: Label) -> f64 {
    let e = match label {
        Label::H => Vertex::new(0, 1),
        Label::V => Vertex::new(1, 0),
    };
    (k.value_unchecked(v + e) + k.value_unchecked(v - e) - 2.0 * k.value_unchecked(v)) / 4.0
}

/// `M_t` recomputed from the final state alone: walker positions, the
/// departure count, and the current and initial rotors of every touched
/// vertex.
pub fn martingale_from_scratch(
    kernel: &KernelTable,
    q: f64,
    positions: &[Vertex],
    departures: u64,
    touched: &[(Vertex, Direction)],
    initial: &dyn RotorSource,
) -> Result<f64> {
    let mut sum_a = 0.0;
    for &p in positions {
        sum_a += kernel.value(p)?;
    }
    let mut delta = 0.0;
    for &(v, now) in touched {
        let was = initial.rotor(v).label();
        if was != now.label() {
            delta += kernel.weight(v, now.label())? - kernel.weight(v, was)?;
        }
    }
    Ok(sum_a - departures as f64 + weight_coefficient(q) * delta)
}

/// `E[M_{t+1} − M_t | F_t]` for a walker at `position` whose site carries
/// `label`, by enumerating the four outcomes.
pub fn one_step_drift(kernel: &KernelTable, label: Label, position: Vertex, q: f64) -> Result<f64> {
    let mech = LocalMechanism::hv(q)?;
    let from = label.canonical_direction();
    let coef = weight_coefficient(q);
    let a0 = kernel.value(position)?;
    let w0 = kernel.weight(position, label)?;
    let indicator = if position == ORIGIN { 1.0 } else { 0.0 };
    let mut drift = 0.0;
    for d in Direction::ALL {
        let p = mech.prob(from, d);
        if p == 0.0 {
            continue;
        }
        let dm = kernel.value(position.step(d))? - a0 - indicator + coef * (kernel.weight(position, d.label())? - w0);
        drift += p * dm;
    }
    Ok(drift)
}

/// `1 − |4q − 2| / (nq)`.
pub fn bound_many_walkers(q: f64, n: usize) -> f64 {
    1.0 - (4.0 * q - 2.0).abs() / (n as f64 * q)
}

/// `1 − |2q − 1| / (nq)`.
pub fn bound_iud(q: f64, n: usize) -> f64 {
    1.0 - (2.0 * q - 1.0).abs() / (n as f64 * q)
}

/// `1 − (π / (2 ln r)) · ( ((2q−1)/(nq)) · W + k/n + C )`.
pub fn finite_r_bound(k: u64, r: f64, q: f64, n: usize, weight_term: f64, c: f64) -> f64 {
    let n = n as f64;
    1.0 - PI / (2.0 * r.ln()) * ((2.0 * q - 1.0) / (n * q) * weight_term + k as f64 / n + c)
}

/// `1 + max_{x ∈ ∂B_r} ((2/π) ln r − a(x))₊`: the kernel deficit on the
/// boundary, plus one.
pub fn finite_r_constant(kernel: &KernelTable, r: f64) -> Result<f64> {
    let target = 2.0 / PI * r.ln();
    let mut worst = 0.0f64;
    for v in boundary(r) {
        worst = worst.max(target - kernel.value(v)?);
    }
    Ok(1.0 + worst)
}

/// `n · max_{B_{r+1}} a + (k + n) + (|2q−1|/q) · 2 · Σ_{B_{r+1}} f`.
pub fn path_bound(kernel: &KernelTable, q: f64, n: usize, k: u64, r: u32) -> Result<f64> {
    Ok(n as f64 * kernel.max_over_ball(r)?
        + (k + n as u64) as f64
        + (2.0 * q - 1.0).abs() / q * 2.0 * kernel.weight_ball_sum(r)?)
}

/// One frozen run seen through the martingale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub tau: u64,
    pub returns: u64,
    pub departures: u64,
    pub reached_k: bool,
    pub m_tau: f64,
    pub weight_delta: f64,
    pub max_abs_m: f64,
    pub cap_hit: bool,
}

/// Parameters of one experiment cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub q: f64,
    pub n: usize,
    pub k: u64,
    pub r: u32,
}

/// Run `trials` frozen walks of `cell`, trial `i` on `config.for_trial(i)`
/// with walk seed derived from `(seed, i)`. Records come back in trial
/// order whatever the thread count.
pub fn run_cell(
    kernel: &KernelTable,
    config: &ConfigGenerator,
    cell: Cell,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    let mech = LocalMechanism::hv(cell.q)?;
    let params = FrozenParams::new(cell.n, cell.k, cell.r as f64);
    if kernel.window() < cell.r as i32 + 1 {
        return Err(Error::Parameter(format!("kernel radius {} too small for r = {}", kernel.radius(), cell.r)));
    }
    FrozenEngine::new(params)?;
    MartingaleTracker::new(kernel, cell.q)?;
    config.for_trial(0)?;
    let records = (0..trials)
        .into_par_iter()
        .map_init(
            || (FrozenEngine::new(params).expect("validated"), MartingaleTracker::new(kernel, cell.q).expect("validated")),
            |(engine, tracker), i| {
                let env = config.for_trial(i).expect("validated");
                let mut rng = seed::rng(seed::derive(seed, seed::TAG_WALK, i));
                tracker.reset();
                match engine.run_counts(&env, &mech, &mut rng, tracker) {
                    Ok((tau, reason)) => TrialRecord {
                        trial: i,
                        tau,
                        returns: engine.state().returns,
                        departures: tracker.departures(),
                        reached_k: reason == StopReason::KReturnsReached,
                        m_tau: tracker.value(),
                        weight_delta: tracker.weight_delta(),
                        max_abs_m: tracker.max_abs(),
                        cap_hit: false,
                    },
                    Err(_) => TrialRecord {
                        trial: i,
                        tau: params.step_cap,
                        returns: engine.state().returns,
                        departures: tracker.departures(),
                        reached_k: false,
                        m_tau: f64::NAN,
                        weight_delta: f64::NAN,
                        max_abs_m: tracker.max_abs(),
                        cap_hit: true,
                    },
                }
            },
        )
        .collect();
    Ok(records)
}

/// Sample mean and standard error, summed in slice order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingReport {
    pub trials: u64,
    pub cap_hits: u64,
    pub mean: f64,
    pub stderr: f64,
    pub z: f64,
}

impl StoppingReport {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let ms: Vec<f64> = records.iter().filter(|r| !r.cap_hit).map(|r| r.m_tau).collect();
        let (mean, stderr) = mean_stderr(&ms);
        let z = if stderr > 0.0 {
            mean / stderr
        } else if mean.abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        StoppingReport { trials: ms.len() as u64, cap_hits: records.len() as u64 - ms.len() as u64, mean, stderr, z }
    }
}

/// Monte Carlo mean of `M_τ`, which optional stopping says is 0.
pub fn verify_optional_stopping(
    kernel: &KernelTable,
    config: &ConfigGenerator,
    cell: Cell,
    trials: u64,
    seed: u64,
) -> Result<StoppingReport> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be >= 1".into()));
    }
    Ok(StoppingReport::from_records(&run_cell(kernel, config, cell, trials, seed)?))
}

/// Return-probability estimate against the finite-radius bound for a cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub q: f64,
    pub n: usize,
    pub k: u64,
    pub r: u32,
    pub trials: u64,
    pub cap_hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_stderr: f64,
    /// `Σ_{B_{r+1}} (wt(x,0) − E wt(x,τ))`, estimated.
    pub weight_term: f64,
    pub weight_term_stderr: f64,
    pub constant_c: f64,
    pub bound: f64,
    /// Combined standard error of `p_hat − bound`.
    pub slack_stderr: f64,
    pub z: f64,
}

impl CellReport {
    /// `p_hat ≥ bound − sigmas · slack_stderr`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.p_hat >= self.bound - sigmas * self.slack_stderr
    }

    pub const CSV_HEADER: &'static str = "q,n,k,r,trials,p_hat,ci_low,ci_high,bound,slack,z";

    /// One CSV row; `slack` is three combined standard errors.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.4}",
            self.q,
            self.n,
            self.k,
            self.r,
            self.trials,
            self.p_hat,
            self.ci_low,
            self.ci_high,
            self.bound,
            3.0 * self.slack_stderr,
            self.z
        )
    }
}

/// Summarize a cell's trial records against the finite-radius bound.
pub fn cell_report(kernel: &KernelTable, cell: Cell, records: &[TrialRecord]) -> Result<CellReport> {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.cap_hit).collect();
    let succ = ok.iter().filter(|r| r.reached_k).count() as u64;
    let est = crate::rwlm::ReturnEstimate::from_counts(succ, ok.len() as u64, (records.len() - ok.len()) as u64);
    let deltas: Vec<f64> = ok.iter().map(|r| -r.weight_delta).collect();
    let (w, w_se) = mean_stderr(&deltas);
    let r = cell.r as f64;
    let c = finite_r_constant(kernel, r)?;
    let bound = finite_r_bound(cell.k, r, cell.q, cell.n, w, c);
    let scale = PI / (2.0 * r.ln()) * ((2.0 * cell.q - 1.0) / (cell.n as f64 * cell.q)).abs();
    let bound_se = if w_se.is_finite() { scale * w_se } else { 0.0 };
    let p_se = est.stderr();
    let stop = StoppingReport::from_records(records);
    Ok(CellReport {
        q: cell.q,
        n: cell.n,
        k: cell.k,
        r: cell.r,
        trials: est.trials,
        cap_hits: est.cap_hits,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        p_stderr: p_se,
        weight_term: w,
        weight_term_stderr: w_se,
        constant_c: c,
        bound,
        slack_stderr: (p_se * p_se + bound_se * bound_se).sqrt(),
        z: stop.z,
    })
}

/// Write a CSV report, one row per cell.
pub fn write_cell_csv<W: Write>(reports: &[CellReport], mut out: W) -> Result<()> {
    writeln!(out, "{}", CellReport::CSV_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::ConfigKind;
    use std::sync::OnceLock;

    fn kernel() -> &'static KernelTable {
        static K: OnceLock<KernelTable> = OnceLock::new();
        K.get_or_init(|| KernelTable::build(24).unwrap())
    }

    #[test]
    fn bound_formulas() {
        assert!((bound_many_walkers(1.0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(bound_many_walkers(0.5, 1), 1.0);
        assert_eq!(bound_iud(0.5, 1), 1.0);
        assert!(bound_iud(1.0 / 3.0, 1).abs() < 1e-15);
    }

    #[test]
    fn finite_bound_k0_half() {
        let c = finite_r_constant(kernel(), 20.0).unwrap();
        assert!(c >= 1.0);
        let b = finite_r_bound(0, 20.0, 0.5, 1, 123.0, c);
        assert!((b - (1.0 - PI / (2.0 * 20f64.ln()) * c)).abs() < 1e-15);
    }

    #[test]
    fn drift_vanishes() {
        let k = kernel();
        for q in [0.1, 0.37, 0.5, 0.8, 1.0] {
            for label in [Label::H, Label::V] {
                for v in [ORIGIN, Vertex::new(1, 0), Vertex::new(3, -7), Vertex::new(-12, 9)] {
                    let d = one_step_drift(k, label, v, q).unwrap();
                    assert!(d.abs() <= 8.0 * k.tol().max(1e-12), "{q} {label} {v}: {d}");
                }
            }
        }
    }

    #[test]
    fn half_coefficient_vanishes() {
        assert_eq!(weight_coefficient(0.5), 0.0);
    }

    #[test]
    fn incremental_matches_scratch() {
        let k = kernel();
        for s in 0..20u64 {
            let q = 0.2 + 0.04 * s as f64;
            let n = 1 + (s % 3) as usize;
            let gen = ConfigGenerator::new(ConfigKind::IudFour, s);
            let env = gen.build().unwrap();
            let mut engine = FrozenEngine::new(FrozenParams::new(n, 1_000, 20.0)).unwrap();
            let mut tracker = MartingaleTracker::new(k, q).unwrap();
            let mech = LocalMechanism::hv(q).unwrap();
            engine.run(&env, &mech, &mut seed::rng(s), &mut tracker).unwrap();
            let st = engine.state();
            let scratch =
                martingale_from_scratch(k, q, &st.positions, st.departures, &st.field.entries(), &env).unwrap();
            assert!((scratch - tracker.value()).abs() < 1e-9, "{scratch} vs {}", tracker.value());
        }
    }

    #[test]
    fn initial_value_zero() {
        let t = MartingaleTracker::new(kernel(), 0.7).unwrap();
        assert_eq!(t.value(), 0.0);
        assert!(MartingaleTracker::new(kernel(), 0.0).is_err());
    }

    #[test]
    fn path_stays_bounded() {
        let k = kernel();
        let cell = Cell { q: 0.3, n: 2, k: 4, r: 15 };
        let recs = run_cell(k, &ConfigGenerator::new(ConfigKind::IudFour, 2), cell, 300, 5).unwrap();
        let b = path_bound(k, cell.q, cell.n, cell.k, cell.r).unwrap();
        assert!(recs.iter().all(|r| r.max_abs_m <= b));
    }

    #[test]
    fn records_in_trial_order() {
        let k = kernel();
        let cell = Cell { q: 1.0, n: 1, k: 1, r: 10 };
        let recs = run_cell(k, &ConfigGenerator::new(ConfigKind::IudHv, 3), cell, 64, 1).unwrap();
        assert!(recs.iter().enumerate().all(|(i, r)| r.trial == i as u64));
    }
}
