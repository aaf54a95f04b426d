//! The maximum k-colorable subgraph problem: assignments, feasibility,
//! the exhaustive α_k oracle and the greedy feasibility repair.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;

/// Default cap on `n * k` for exhaustive enumeration (2^24 assignments).
pub const DEFAULT_ENUMERATION_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MkcsError {
    #[error("the number of colors must be at least 1")]
    NoColors,
    #[error("assignment is {got_n}x{got_k} but the instance needs {n}x{k}")]
    DimensionMismatch { n: usize, k: usize, got_n: usize, got_k: usize },
    #[error("{bits} enumeration bits exceed the budget of {budget}")]
    BudgetExceeded { bits: usize, budget: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// An MkCS instance: a graph and a number of colors `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MkcsInstance {
    graph: Graph,
    k: usize,
}

impl MkcsInstance {
    pub fn new(graph: Graph, k: usize) -> Result<Self, MkcsError> {
        if k == 0 {
            return Err(MkcsError::NoColors);
        }
        Ok(Self { graph, k })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn check(&self, a: &Assignment) -> Result<(), MkcsError> {
        if a.n != self.n() || a.k != self.k {
            return Err(MkcsError::DimensionMismatch { n: self.n(), k: self.k, got_n: a.n, got_k: a.k });
        }
        Ok(())
    }
}

/// Binary vertex-color matrix: `get(i, r)` is true when vertex `i` carries color `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    n: usize,
    k: usize,
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { n, k, bits: vec![false; n * k] }
    }

    pub fn ones(n: usize, k: usize) -> Self {
        Self { n, k, bits: vec![true; n * k] }
    }

    /// Row-major bits, `bits[i * k + r]`.
    pub fn from_bits(n: usize, k: usize, bits: Vec<bool>) -> Result<Self, MkcsError> {
        if bits.len() != n * k {
            return Err(MkcsError::DimensionMismatch { n, k, got_n: bits.len() / k.max(1), got_k: k });
        }
        Ok(Self { n, k, bits })
    }

    /// Decodes the low `n * k` bits of `mask`, bit `i * k + r` being `x[i][r]`.
    pub fn from_mask(n: usize, k: usize, mask: u64) -> Self {
        let bits = (0..n * k).map(|b| mask >> b & 1 == 1).collect();
        Self { n, k, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, r: usize) -> bool {
        self.bits[i * self.k + r]
    }

    pub fn set(&mut self, i: usize, r: usize, value: bool) {
        self.bits[i * self.k + r] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Colors held by vertex `i`.
    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.k..(i + 1) * self.k]
    }
}

/// One line per vertex, `k` space-separated bits.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<&str> = self.row(i).iter().map(|&b| if b { "1" } else { "0" }).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = MkcsError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut k = None;
        let mut bits = Vec::new();
        let mut n = 0;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| match tok {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(MkcsError::Parse { line: idx + 1, reason: format!("expected 0 or 1, got {other:?}") }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            match k {
                None => k = Some(row.len()),
                Some(expected) if expected != row.len() => {
                    return Err(MkcsError::Parse {
                        line: idx + 1,
                        reason: format!("expected {expected} bits, got {}", row.len()),
                    })
                }
                _ => {}
            }
            bits.extend(row);
            n += 1;
        }
        let k = k.ok_or(MkcsError::Parse { line: 0, reason: "empty assignment".into() })?;
        Assignment::from_bits(n, k, bits)
    }
}

/// True iff no edge has both ends in the same color and no vertex holds two colors.
pub fn is_feasible(inst: &MkcsInstance, a: &Assignment) -> Result<bool, MkcsError> {
    inst.check(a)?;
    let k = inst.k();
    let edge_ok = inst.graph().edges().iter().all(|&(i, j)| (0..k).all(|r| !(a.get(i, r) && a.get(j, r))));
    let vertex_ok = (0..inst.n()).all(|i| a.row(i).iter().filter(|&&b| b).count() <= 1);
    Ok(edge_ok && vertex_ok)
}

/// Number of (vertex, color) pairs switched on.
pub fn objective(a: &Assignment) -> usize {
    a.bits.iter().filter(|&&b| b).count()
}

/// Exact α_k(G) with the witness of smallest mask (bit `i * k + r`).
pub fn alpha_bruteforce(inst: &MkcsInstance) -> Result<(usize, Assignment), MkcsError> {
    alpha_bruteforce_with_budget(inst, DEFAULT_ENUMERATION_BITS)
}

pub fn alpha_bruteforce_with_budget(inst: &MkcsInstance, budget: usize) -> Result<(usize, Assignment), MkcsError> {
    let (n, k) = (inst.n(), inst.k());
    let bits = n * k;
    if bits > budget || bits > 40 {
        return Err(MkcsError::BudgetExceeded { bits, budget: budget.min(40) });
    }
    let row_mask = (1u64 << k) - 1;
    let edges: Vec<(u32, u32)> = inst.graph().edges().iter().map(|&(i, j)| ((i * k) as u32, (j * k) as u32)).collect();
    let feasible = |mask: u64| {
        (0..n).all(|i| (mask >> (i * k) & row_mask).count_ones() <= 1)
            && edges.iter().all(|&(si, sj)| (mask >> si) & (mask >> sj) & row_mask == 0)
    };

    let high = bits.saturating_sub(12);
    let low = bits - high;
    let best = (0u64..1 << high)
        .into_par_iter()
        .map(|chunk| {
            let mut best: Option<(u32, u64)> = None;
            for lowbits in 0u64..1 << low {
                let mask = chunk << low | lowbits;
                let value = mask.count_ones();
                if best.is_some_and(|(v, _)| v >= value) {
                    continue;
                }
                if feasible(mask) {
                    best = Some((value, mask));
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(u32, u64)>, cand| match acc {
            Some((v, _)) if v >= cand.0 => acc,
            _ => Some(cand),
        })
        .unwrap_or((0, 0));
    Ok((best.0 as usize, Assignment::from_mask(n, k, best.1)))
}

/// Greedy feasibility repair.
///
/// Pass one visits vertices `i` ascending, then every neighbor `j` of `i`
/// ascending (each edge is seen from both ends), then colors `r` ascending,
/// dropping `x[i][r]` whenever `x[i][r] + x[j][r] > 1`. Pass two visits `(i, r)`
/// ascending and drops `x[i][r]` when it is set and vertex `i` still holds another
/// color. Both conditions read the assignment as it is being mutated.
pub fn repair(inst: &MkcsInstance, a: &Assignment) -> Result<Assignment, MkcsError> {
    inst.check(a)?;
    let mut x = a.clone();
    let k = inst.k();
    for i in 0..inst.n() {
        for &j in inst.graph().neighbors(i) {
            for r in 0..k {
                if x.get(i, r) && x.get(j, r) {
                    x.set(i, r, false);
                }
            }
        }
    }
    for i in 0..inst.n() {
        for r in 0..k {
            if x.get(i, r) && (0..k).any(|p| p != r && x.get(i, p)) {
                x.set(i, r, false);
            }
        }
    }
    Ok(x)
}
