//! Spectral gap of the transverse-field interpolation
//! `H(s) = (A(s)/2)·(-Σ σx) + (B(s)/2)·H_f`.
//!
//! `E1` is the lowest level belonging to a state that ends, at `s = 1`, more
//! than `epsilon` GHz above the classical ground energy. With the default
//! [`DistinctRule::LevelCount`], the `d` basis states whose final energies lie
//! within `epsilon` of the minimum form the ground band and `E1` is the
//! eigenvalue with index `d`.

mod eigen;
mod operator;
mod schedule;

use thiserror::Error;

use crate::qubo::IsingModel;

pub use eigen::{dense_eigenpairs, lowest_eigenpairs, Eigenpairs, KrylovOptions};
pub use operator::TransverseIsingOperator;
pub use schedule::AnnealSchedule;

/// Spin budget above which spectra are not attempted.
pub const DEFAULT_MAX_SPINS: usize = 20;
/// Largest spin count diagonalized densely.
pub const DEFAULT_DENSE_MAX_SPINS: usize = 8;
/// Evaluations made by an unflagged [`min_gap`] run.
pub const MIN_GAP_EVALUATIONS: usize = 44;

const COARSE_POINTS: usize = 10;
const FINE_STEPS: usize = 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("{spins} spins exceed the budget of {budget}")]
    SpinBudget { spins: usize, budget: usize },
    #[error("no excited state is distinct from the ground level")]
    NoDistinctState,
    #[error("eigensolver stopped with relative residual {residual:e}")]
    NotConverged { residual: f64 },
    #[error("dominant-amplitude matching needs every eigenvector; {spins} spins exceed the dense limit {limit}")]
    DenseRequired { spins: usize, limit: usize },
    #[error("epsilon must be finite and nonnegative, got {0}")]
    InvalidEpsilon(f64),
}

/// How an eigenstate is judged distinct from the ground level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistinctRule {
    /// Count basis states near the classical minimum and skip that many levels.
    #[default]
    LevelCount,
    /// Match each eigenvector to its largest-amplitude basis state (ties to the
    /// lower index) and compare that state's final energy.
    DominantAmplitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapOptions {
    /// Distinctness threshold in GHz.
    pub epsilon: f64,
    pub rule: DistinctRule,
    pub max_spins: usize,
    pub dense_max_spins: usize,
    pub krylov: KrylovOptions,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            rule: DistinctRule::LevelCount,
            max_spins: DEFAULT_MAX_SPINS,
            dense_max_spins: DEFAULT_DENSE_MAX_SPINS,
            krylov: KrylovOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
}

impl GapSample {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResult {
    pub delta_min: f64,
    pub s_star: f64,
    pub evaluations: usize,
    /// Samples sorted by `s`.
    pub trace: Vec<GapSample>,
    /// Set when the coarse scan found no interior maximum of `E0` and the fine
    /// scan was centered on the smallest coarse gap instead.
    pub fallback: bool,
}

/// `H(s)` for an Ising problem.
pub fn hamiltonian(
    ising: &IsingModel,
    schedule: &AnnealSchedule,
    s: f64,
    max_spins: usize,
) -> Result<TransverseIsingOperator, SpectrumError> {
    check_budget(ising.num_spins(), max_spins)?;
    let (a, b) = schedule.at(s);
    Ok(TransverseIsingOperator::new(&ising.basis_energies(), a, b))
}

/// `(E0, E1)` of `H(s)`.
pub fn lowest_two_distinct(
    ising: &IsingModel,
    schedule: &AnnealSchedule,
    s: f64,
    opts: &GapOptions,
) -> Result<(f64, f64), SpectrumError> {
    let tracker = GapTracker::new(ising, schedule, opts)?;
    let sample = tracker.evaluate(s, &mut Vec::new())?;
    Ok((sample.e0, sample.e1))
}

/// Two-stage minimum-gap search.
///
/// Ten equally spaced points locate the coarse triple whose middle `E0` is a
/// local maximum (the highest such if several); each half of that triple is
/// then resolved with 17 further interior points. All 44 samples contribute to
/// `delta_min`.
pub fn min_gap(ising: &IsingModel, schedule: &AnnealSchedule, opts: &GapOptions) -> Result<GapResult, SpectrumError> {
    let tracker = GapTracker::new(ising, schedule, opts)?;
    let mut warm = Vec::new();
    let mut trace = Vec::with_capacity(MIN_GAP_EVALUATIONS);
    for i in 0..COARSE_POINTS {
        trace.push(tracker.evaluate(i as f64 / (COARSE_POINTS - 1) as f64, &mut warm)?);
    }

    let mut peak: Option<usize> = None;
    for b in 1..COARSE_POINTS - 1 {
        let e = trace[b].e0;
        if e > trace[b - 1].e0 && e > trace[b + 1].e0 && peak.is_none_or(|p| e > trace[p].e0) {
            peak = Some(b);
        }
    }
    let fallback = peak.is_none();
    let center = peak.unwrap_or_else(|| {
        let mut best = 0;
        for (i, t) in trace.iter().enumerate() {
            if t.gap() < trace[best].gap() {
                best = i;
            }
        }
        best.clamp(1, COARSE_POINTS - 2)
    });

    for (lo, hi) in [(trace[center - 1].s, trace[center].s), (trace[center].s, trace[center + 1].s)] {
        for j in 1..FINE_STEPS {
            let s = lo + (hi - lo) * j as f64 / FINE_STEPS as f64;
            trace.push(tracker.evaluate(s, &mut warm)?);
        }
    }

    let evaluations = trace.len();
    trace.sort_by(|a, b| a.s.total_cmp(&b.s));
    let star = trace.iter().fold(trace[0], |best, t| if t.gap() < best.gap() { *t } else { best });
    Ok(GapResult { delta_min: star.gap(), s_star: star.s, evaluations, trace, fallback })
}

fn check_budget(spins: usize, budget: usize) -> Result<(), SpectrumError> {
    if spins > budget {
        Err(SpectrumError::SpinBudget { spins, budget })
    } else {
        Ok(())
    }
}

/// Per-problem state shared by every sample of one search.
struct GapTracker<'a> {
    problem: Vec<f64>,
    /// `(B(1)/2)·H_f`, the energies distinctness is judged by.
    final_energies: Vec<f64>,
    ground: f64,
    band: usize,
    schedule: &'a AnnealSchedule,
    opts: &'a GapOptions,
}

impl<'a> GapTracker<'a> {
    fn new(ising: &IsingModel, schedule: &'a AnnealSchedule, opts: &'a GapOptions) -> Result<Self, SpectrumError> {
        if !(opts.epsilon.is_finite() && opts.epsilon >= 0.0) {
            return Err(SpectrumError::InvalidEpsilon(opts.epsilon));
        }
        let spins = ising.num_spins();
        check_budget(spins, opts.max_spins)?;
        if opts.rule == DistinctRule::DominantAmplitude && spins > opts.dense_max_spins {
            return Err(SpectrumError::DenseRequired { spins, limit: opts.dense_max_spins });
        }
        let problem = ising.basis_energies();
        let half_b = 0.5 * schedule.at(1.0).1;
        let final_energies: Vec<f64> = problem.iter().map(|e| half_b * e).collect();
        let ground = final_energies.iter().copied().fold(f64::INFINITY, f64::min);
        let band = final_energies.iter().filter(|&&e| e - ground <= opts.epsilon).count();
        if band == final_energies.len() {
            return Err(SpectrumError::NoDistinctState);
        }
        Ok(Self { problem, final_energies, ground, band, schedule, opts })
    }

    fn evaluate(&self, s: f64, warm: &mut Vec<Vec<f64>>) -> Result<GapSample, SpectrumError> {
        let (a, b) = self.schedule.at(s);
        let op = TransverseIsingOperator::new(&self.problem, a, b);
        let dense = op.num_spins() <= self.opts.dense_max_spins;
        match self.opts.rule {
            DistinctRule::LevelCount => {
                let pairs = if dense {
                    let all = dense_eigenpairs(&op);
                    Eigenpairs { values: all.values, vectors: Vec::new() }
                } else {
                    let pairs = lowest_eigenpairs(&op, self.band + 1, &self.opts.krylov, warm)?;
                    *warm = pairs.vectors.clone();
                    pairs
                };
                Ok(GapSample { s, e0: pairs.values[0], e1: pairs.values[self.band] })
            }
            DistinctRule::DominantAmplitude => {
                let all = dense_eigenpairs(&op);
                let dominant = |v: &[f64]| {
                    let mut best = 0;
                    for (i, x) in v.iter().enumerate() {
                        if x.abs() > v[best].abs() {
                            best = i;
                        }
                    }
                    best
                };
                let e1 = all
                    .vectors
                    .iter()
                    .zip(&all.values)
                    .skip(1)
                    .find(|(v, _)| self.final_energies[dominant(v)] - self.ground > self.opts.epsilon)
                    .map(|(_, &e)| e)
                    .ok_or(SpectrumError::NoDistinctState)?;
                Ok(GapSample { s, e0: all.values[0], e1 })
            }
        }
    }
}
