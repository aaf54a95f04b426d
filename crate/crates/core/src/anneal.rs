//! Metropolis simulated annealing as a classical stand-in for annealer reads,
//! plus success-probability and time-to-solution estimates.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qubo::{QuboModel, Sense};
use crate::seeds;

/// Default annealing time of one read, in microseconds.
pub const DEFAULT_T_RUN_US: f64 = 20.0;
pub const DEFAULT_ALPHA: f64 = 0.95;
pub const DEFAULT_SUCCESS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("no samples to estimate from")]
    EmptySamples,
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub num_reads: usize,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { num_reads: 1000, sweeps: 100, beta_start: 0.1, beta_end: 10.0, seed: 0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), AnnealError> {
        let bad = |msg: String| Err(AnnealError::InvalidConfig(msg));
        if self.num_reads == 0 {
            return bad("num_reads must be at least 1".into());
        }
        if self.sweeps == 0 {
            return bad("sweeps must be at least 1".into());
        }
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start && self.beta_end.is_finite()) {
            return bad(format!("need 0 < beta_start <= beta_end, got {} and {}", self.beta_start, self.beta_end));
        }
        Ok(())
    }

    /// Inverse temperature of each sweep, geometric from `beta_start` to `beta_end`.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = self.beta_end / self.beta_start;
        (0..self.sweeps)
            .map(|i| self.beta_start * ratio.powf(i as f64 / (self.sweeps - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub value: f64,
}

/// `num_reads` independent annealing runs, returned in read order.
///
/// Each read starts from a uniformly random vector and performs single-bit
/// Metropolis sweeps in variable order, minimizing `-f` for maximize-sense
/// models and `f` otherwise.
pub fn sample(m: &QuboModel, cfg: &SamplerConfig) -> Result<Vec<Sample>, AnnealError> {
    cfg.validate()?;
    let betas = cfg.betas();
    let adjacency = m.adjacency();
    let sign = match m.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    Ok((0..cfg.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, &[read as u64]));
            let bits = anneal_once(m, &adjacency, sign, &betas, &mut rng);
            let value = m.evaluate(&bits).expect("sampled vector has the model's length");
            Sample { bits, value }
        })
        .collect())
}

fn anneal_once(
    m: &QuboModel,
    adjacency: &[Vec<(usize, f64)>],
    sign: f64,
    betas: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<bool> {
    let n = m.num_vars();
    let mut bits: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
    // field[v] = a_v + Σ_u b_uv x_u, so flipping v changes f by ±field[v].
    let mut field = m.linear.clone();
    for (v, nbrs) in adjacency.iter().enumerate() {
        for &(u, b) in nbrs {
            if bits[u] {
                field[v] += b;
            }
        }
    }
    for &beta in betas {
        for v in 0..n {
            let delta = sign * if bits[v] { -field[v] } else { field[v] };
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                bits[v] = !bits[v];
                let step = if bits[v] { 1.0 } else { -1.0 };
                for &(u, b) in &adjacency[v] {
                    field[u] += step * b;
                }
            }
        }
    }
    bits
}

/// Fraction of samples whose value is within `tol` of `ground_value`.
pub fn estimate_success(samples: &[Sample], ground_value: f64, tol: f64) -> Result<f64, AnnealError> {
    if samples.is_empty() {
        return Err(AnnealError::EmptySamples);
    }
    let hits = samples.iter().filter(|s| (s.value - ground_value).abs() <= tol).count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Expected time to see the optimum at least once with confidence `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tts {
    Finite(f64),
    Unbounded,
}

impl Tts {
    pub fn value(&self) -> Option<f64> {
        match self {
            Tts::Finite(t) => Some(*t),
            Tts::Unbounded => None,
        }
    }
}

impl fmt::Display for Tts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tts::Finite(t) => write!(f, "{t}"),
            Tts::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// `t_run · ln(1 - alpha) / ln(1 - p)`, never below a single run: a success
/// probability at or above `alpha` gives `t_run`, and `p = 0` is unbounded.
pub fn tts(p_hat: f64, t_run_us: f64, alpha: f64) -> Result<Tts, AnnealError> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(AnnealError::OutOfRange { name: "p_hat", value: p_hat });
    }
    if !(t_run_us > 0.0 && t_run_us.is_finite()) {
        return Err(AnnealError::OutOfRange { name: "t_run", value: t_run_us });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnnealError::OutOfRange { name: "alpha", value: alpha });
    }
    if p_hat == 0.0 {
        return Ok(Tts::Unbounded);
    }
    if p_hat >= alpha {
        return Ok(Tts::Finite(t_run_us));
    }
    Ok(Tts::Finite(t_run_us * ((1.0 - alpha).ln() / (1.0 - p_hat).ln())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtsEstimate {
    pub p_hat: f64,
    pub tts: Tts,
    pub t_run: f64,
    pub alpha: f64,
    pub ground_value: f64,
}

/// Success rate of `samples` against `ground_value`, turned into a TTS.
pub fn estimate_tts(
    samples: &[Sample],
    ground_value: f64,
    tol: f64,
    t_run_us: f64,
    alpha: f64,
) -> Result<TtsEstimate, AnnealError> {
    let p_hat = estimate_success(samples, ground_value, tol)?;
    Ok(TtsEstimate { p_hat, tts: tts(p_hat, t_run_us, alpha)?, t_run: t_run_us, alpha, ground_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::mkcs::MkcsInstance;
    use crate::qubo::build_nonlinear;

    #[test]
    fn empty_model_returns_offset() {
        let mut m = QuboModel::new(0, Sense::Maximize);
        m.offset = 2.5;
        let out = sample(&m, &SamplerConfig { num_reads: 5, ..Default::default() }).unwrap();
        assert!(out.iter().all(|s| s.value == 2.5 && s.bits.is_empty()));
    }

    #[test]
    fn single_variable_is_set() {
        let mut m = QuboModel::new(1, Sense::Maximize);
        m.add_linear(0, 1.0);
        let out = sample(&m, &SamplerConfig::default()).unwrap();
        assert!(out.iter().all(|s| s.bits == vec![true]));
    }

    #[test]
    fn triangle_reads_hit_the_optimum() {
        let inst = MkcsInstance::new(Graph::complete(3), 1).unwrap();
        let m = build_nonlinear(&inst, 2.0, 1.0).unwrap();
        let best = m.solve_bruteforce().unwrap().value;
        assert_eq!(best, 1.0);
        let out = sample(&m, &SamplerConfig { seed: 11, ..Default::default() }).unwrap();
        assert!(estimate_success(&out, best, DEFAULT_SUCCESS_TOL).unwrap() >= 0.99);
    }

    #[test]
    fn deterministic_per_seed() {
        let inst = MkcsInstance::new(Graph::complete(4), 2).unwrap();
        let m = build_nonlinear(&inst, 1.5, 1.5).unwrap();
        let cfg = SamplerConfig { num_reads: 50, sweeps: 10, seed: 3, ..Default::default() };
        assert_eq!(sample(&m, &cfg).unwrap(), sample(&m, &cfg).unwrap());
        let other = SamplerConfig { seed: 4, ..cfg.clone() };
        assert_ne!(sample(&m, &cfg).unwrap(), sample(&m, &other).unwrap());
    }

    #[test]
    fn config_validation() {
        let base = SamplerConfig::default();
        assert!(SamplerConfig { num_reads: 0, ..base.clone() }.validate().is_err());
        assert!(SamplerConfig { sweeps: 0, ..base.clone() }.validate().is_err());
        assert!(SamplerConfig { beta_start: 0.0, ..base.clone() }.validate().is_err());
        assert!(SamplerConfig { beta_start: 2.0, beta_end: 1.0, ..base.clone() }.validate().is_err());
        let betas = base.betas();
        assert_eq!(betas.len(), 100);
        assert!((betas[0] - 0.1).abs() < 1e-15 && (betas[99] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn success_counting() {
        let mk = |v: f64| Sample { bits: vec![], value: v };
        let mut samples: Vec<Sample> = (0..500).map(|_| mk(3.0)).collect();
        samples.extend((0..500).map(|_| mk(2.0)));
        assert_eq!(estimate_success(&samples, 3.0, 1e-9).unwrap(), 0.5);
        assert_eq!(estimate_success(&samples[..500], 3.0, 1e-9).unwrap(), 1.0);
        assert_eq!(estimate_success(&samples[500..], 3.0, 1e-9).unwrap(), 0.0);
        assert_eq!(estimate_success(&[], 3.0, 1e-9), Err(AnnealError::EmptySamples));
    }

    #[test]
    fn tts_values() {
        assert_eq!(tts(0.95, 20.0, 0.95).unwrap(), Tts::Finite(20.0));
        let expected = 20.0 * 0.05f64.ln() / 0.5f64.ln();
        assert!((tts(0.5, 20.0, 0.95).unwrap().value().unwrap() - expected).abs() < 1e-9);
        assert!((expected - 86.4386).abs() < 1e-4);
        assert_eq!(tts(0.0, 20.0, 0.95).unwrap(), Tts::Unbounded);
        assert_eq!(tts(1.0, 20.0, 0.95).unwrap(), Tts::Finite(20.0));
        assert!(tts(1.5, 20.0, 0.95).is_err());
        assert!(tts(0.5, 0.0, 0.95).is_err());
        assert!(tts(0.5, 20.0, 1.0).is_err());
        assert_eq!(Tts::Unbounded.to_string(), "unbounded");
    }
}
