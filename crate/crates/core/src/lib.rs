//! Maximum k-colorable subgraph (MkCS) as a QUBO.
//!
//! The crate builds the slack-based and slack-free QUBO reformulations of
//! MkCS, checks them against exhaustive oracles, computes adiabatic minimum
//! gaps by diagonalizing the transverse-field interpolation, and estimates
//! time-to-solution from a simulated-annealing sampler.

pub mod graph;
pub mod mkcs;
pub mod qubo;
pub mod spectrum;
pub mod anneal;
pub mod experiments;
pub mod seeds;
