//! QUBO models for MkCS: the slack-based (linear) and slack-free (nonlinear)
//! reformulations, exact evaluation, exhaustive solving, spin conversion and
//! the text exchange format.
//!
//! Variable layout is fixed for both builders. `X(i, r)` sits at `i * k + r`.
//! The linear model appends `S(e, r)` at `n * k + e * k + r` (where `e` is the
//! position of the edge in [`Graph::edges`]) and then `T(i)` at
//! `n * k + |E| * k + i`, so it has `n * k + |E| * k + n` variables.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::mkcs::{Assignment, MkcsError, MkcsInstance, DEFAULT_ENUMERATION_BITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("penalty {name} = {value} must be positive and finite")]
    InvalidPenalty { name: &'static str, value: f64 },
    #[error("stable-set penalty must be at least 1, got {0}")]
    StableSetPenalty(f64),
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{vars} variables exceed the enumeration budget of {budget}")]
    BudgetExceeded { vars: usize, budget: usize },
    #[error("index out of range: {0}")]
    InvalidIndex(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Mkcs(#[from] MkcsError),
}

/// Label of a QUBO variable. Vertices and colors are 0-based here and
/// printed 1-based (`x:3:2`, `s:1:4:2`, `t:5`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarIndex {
    X { vertex: usize, color: usize },
    S { u: usize, v: usize, color: usize },
    T { vertex: usize },
}

impl fmt::Display for VarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarIndex::X { vertex, color } => write!(f, "x:{}:{}", vertex + 1, color + 1),
            VarIndex::S { u, v, color } => write!(f, "s:{}:{}:{}", u + 1, v + 1, color + 1),
            VarIndex::T { vertex } => write!(f, "t:{}", vertex + 1),
        }
    }
}

impl FromStr for VarIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<usize, String> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(format!("bad index {t:?} in {s:?}")),
            }
        };
        match parts.as_slice() {
            ["x", i, r] => Ok(VarIndex::X { vertex: num(i)?, color: num(r)? }),
            ["s", i, j, r] => Ok(VarIndex::S { u: num(i)?, v: num(j)?, color: num(r)? }),
            ["t", i] => Ok(VarIndex::T { vertex: num(i)? }),
            _ => Err(format!("unrecognized variable label {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    LinearBased,
    NonlinearBased,
    StableSet,
    External,
}

/// Quadratic pseudo-Boolean objective `offset + Σ a_v x_v + Σ_{u<v} b_uv x_u x_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    pub labels: Option<Vec<VarIndex>>,
    pub linear: Vec<f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub sense: Sense,
    pub provenance: Provenance,
    pub penalties: Option<(f64, f64)>,
}

impl QuboModel {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            labels: None,
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            sense,
            provenance: Provenance::External,
            penalties: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn add_linear(&mut self, v: usize, coeff: f64) {
        self.linear[v] += coeff;
    }

    /// Adds `coeff * x_u * x_v`; a diagonal pair folds into the linear term.
    pub fn add_quadratic(&mut self, u: usize, v: usize, coeff: f64) {
        if u == v {
            self.linear[u] += coeff;
        } else {
            *self.quadratic.entry((u.min(v), u.max(v))).or_insert(0.0) += coeff;
        }
    }

    /// Adds `weight * (constant + Σ c_v x_v)^2`, expanded with `x^2 = x`.
    fn add_squared(&mut self, terms: &[(usize, f64)], constant: f64, weight: f64) {
        self.offset += weight * constant * constant;
        for (a, &(u, cu)) in terms.iter().enumerate() {
            self.linear[u] += weight * (cu * cu + 2.0 * constant * cu);
            for &(v, cv) in &terms[a + 1..] {
                self.add_quadratic(u, v, 2.0 * weight * cu * cv);
            }
        }
    }

    pub fn evaluate(&self, bits: &[bool]) -> Result<f64, QuboError> {
        if bits.len() != self.num_vars() {
            return Err(QuboError::LengthMismatch { expected: self.num_vars(), got: bits.len() });
        }
        let mut value = self.offset;
        for (v, &a) in self.linear.iter().enumerate() {
            if bits[v] {
                value += a;
            }
        }
        for (&(u, v), &b) in &self.quadratic {
            if bits[u] && bits[v] {
                value += b;
            }
        }
        Ok(value)
    }

    fn evaluate_mask(&self, mask: u64) -> f64 {
        let bit = |v: usize| mask >> v & 1 == 1;
        let mut value = self.offset;
        for (v, &a) in self.linear.iter().enumerate() {
            if bit(v) {
                value += a;
            }
        }
        for (&(u, v), &b) in &self.quadratic {
            if bit(u) && bit(v) {
                value += b;
            }
        }
        value
    }

    /// Neighbor lists `(other, b_uv)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (&(u, v), &b) in &self.quadratic {
            adj[u].push((v, b));
            adj[v].push((u, b));
        }
        adj
    }

    /// True when `a` beats `b` under this model's sense by more than `tol`.
    pub fn better(&self, a: f64, b: f64, tol: f64) -> bool {
        match self.sense {
            Sense::Maximize => a > b + tol,
            Sense::Minimize => a < b - tol,
        }
    }

    pub fn solve_bruteforce(&self) -> Result<BruteForceSolution, QuboError> {
        self.solve_bruteforce_with_budget(DEFAULT_ENUMERATION_BITS)
    }

    /// Exhaustive optimum over all `2^num_vars` vectors.
    ///
    /// The search is split on the high variables into chunks, each walked in
    /// Gray-code order with incremental updates. Values within `1e-9` (relative
    /// to the optimum's magnitude) count as ties; the returned vector is the tied
    /// optimum with the smallest integer encoding (variable `v` is bit `v`), and
    /// its value is recomputed exactly.
    pub fn solve_bruteforce_with_budget(&self, budget: usize) -> Result<BruteForceSolution, QuboError> {
        let nv = self.num_vars();
        if nv > budget || nv > 40 {
            return Err(QuboError::BudgetExceeded { vars: nv, budget: budget.min(40) });
        }
        let adj = self.adjacency();
        let low = nv.min(16);
        let high = nv - low;
        let chunks: Vec<ChunkBest> = (0u64..1 << high).into_par_iter().map(|c| self.scan_chunk(c << low, low, &adj)).collect();
        let mut acc = chunks[0];
        for cand in &chunks[1..] {
            let tol = tie_tolerance(acc.value);
            if self.better(cand.value, acc.value, tol) {
                acc = *cand;
            } else if !self.better(acc.value, cand.value, tol) {
                acc.count += cand.count;
                acc.mask = acc.mask.min(cand.mask);
            }
        }
        let bits: Vec<bool> = (0..nv).map(|v| acc.mask >> v & 1 == 1).collect();
        Ok(BruteForceSolution { value: self.evaluate_mask(acc.mask), bits, num_optima: acc.count })
    }

    fn scan_chunk(&self, base: u64, low: usize, adj: &[Vec<(usize, f64)>]) -> ChunkBest {
        let mut mask = base;
        let mut value = self.evaluate_mask(mask);
        let mut field: Vec<f64> = (0..low)
            .map(|v| self.linear[v] + adj[v].iter().filter(|(u, _)| mask >> u & 1 == 1).map(|(_, b)| b).sum::<f64>())
            .collect();
        let mut best = ChunkBest { value, mask, count: 1 };
        for step in 1u64..1 << low {
            let v = step.trailing_zeros() as usize;
            let on = mask >> v & 1 == 0;
            let sign = if on { 1.0 } else { -1.0 };
            value += sign * field[v];
            mask ^= 1 << v;
            for &(u, b) in &adj[v] {
                if u < low {
                    field[u] += sign * b;
                }
            }
            let tol = tie_tolerance(best.value);
            if self.better(value, best.value, tol) {
                best = ChunkBest { value, mask, count: 1 };
            } else if !self.better(best.value, value, tol) {
                best.count += 1;
                best.mask = best.mask.min(mask);
            }
        }
        best
    }

    /// Spin form with `x = (1 + σ) / 2`; maximize-sense models are negated so
    /// the Ising ground state is the QUBO optimum.
    pub fn to_ising(&self) -> IsingModel {
        let sign = match self.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut h: Vec<f64> = self.linear.iter().map(|a| a / 2.0).collect();
        let mut offset = self.offset + self.linear.iter().sum::<f64>() / 2.0;
        let mut couplings = BTreeMap::new();
        for (&(u, v), &b) in &self.quadratic {
            h[u] += b / 4.0;
            h[v] += b / 4.0;
            offset += b / 4.0;
            couplings.insert((u, v), sign * b / 4.0);
        }
        for x in &mut h {
            *x *= sign;
        }
        offset *= sign;
        IsingModel { h, couplings, offset }
    }
}

fn tie_tolerance(reference: f64) -> f64 {
    1e-9 * reference.abs().max(1.0)
}

#[derive(Debug, Clone, Copy)]
struct ChunkBest {
    value: f64,
    mask: u64,
    count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSolution {
    pub value: f64,
    pub bits: Vec<bool>,
    pub num_optima: u64,
}

/// Spin energy `offset + Σ h_v σ_v + Σ_{u<v} J_uv σ_u σ_v`, `σ ∈ {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for (v, &hv) in self.h.iter().enumerate() {
            e += hv * f64::from(spins[v]);
        }
        for (&(u, v), &j) in &self.couplings {
            e += j * f64::from(spins[u] * spins[v]);
        }
        e
    }

    /// Energy of every computational basis state; bit `v` of the index set
    /// means `σ_v = +1`.
    pub fn basis_energies(&self) -> Vec<f64> {
        let nq = self.num_spins();
        let mut out = vec![self.offset; 1 << nq];
        for (b, e) in out.iter_mut().enumerate() {
            let s = |v: usize| if b >> v & 1 == 1 { 1.0 } else { -1.0 };
            for (v, &hv) in self.h.iter().enumerate() {
                *e += hv * s(v);
            }
            for (&(u, v), &j) in &self.couplings {
                *e += j * s(u) * s(v);
            }
        }
        out
    }
}

fn check_penalty(name: &'static str, value: f64) -> Result<(), QuboError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(QuboError::InvalidPenalty { name, value })
    }
}

/// Slack-free model `H0 - c1·H1 - c2·H2` over the `n·k` color variables.
///
/// `H1` charges `x_ir x_jr` per edge and color; `H2` charges `x_ir x_ip` once per
/// vertex and unordered color pair, so a vertex holding two colors costs `c2`.
pub fn build_nonlinear(inst: &MkcsInstance, c1: f64, c2: f64) -> Result<QuboModel, QuboError> {
    check_penalty("c1", c1)?;
    check_penalty("c2", c2)?;
    let (n, k) = (inst.n(), inst.k());
    let mut m = QuboModel::new(n * k, Sense::Maximize);
    let x = |i: usize, r: usize| i * k + r;
    for i in 0..n {
        for r in 0..k {
            m.add_linear(x(i, r), 1.0);
        }
    }
    for &(i, j) in inst.graph().edges() {
        for r in 0..k {
            m.add_quadratic(x(i, r), x(j, r), -c1);
        }
    }
    for i in 0..n {
        for r in 0..k {
            for p in r + 1..k {
                m.add_quadratic(x(i, r), x(i, p), -c2);
            }
        }
    }
    m.labels = Some(variable_labels(inst, false));
    m.provenance = Provenance::NonlinearBased;
    m.penalties = Some((c1, c2));
    Ok(m)
}

/// Slack-based model `H0 - c1·Σ(x_ir + x_jr + s_ijr - 1)^2 - c2·Σ(Σ_r x_ir + t_i - 1)^2`.
pub fn build_linear(inst: &MkcsInstance, c1: f64, c2: f64) -> Result<QuboModel, QuboError> {
    check_penalty("c1", c1)?;
    check_penalty("c2", c2)?;
    let layout = LinearLayout::new(inst);
    let (n, k) = (inst.n(), inst.k());
    let mut m = QuboModel::new(layout.num_vars(), Sense::Maximize);
    for i in 0..n {
        for r in 0..k {
            m.add_linear(layout.x(i, r), 1.0);
        }
    }
    for (e, &(i, j)) in inst.graph().edges().iter().enumerate() {
        for r in 0..k {
            let terms = [(layout.x(i, r), 1.0), (layout.x(j, r), 1.0), (layout.s(e, r), 1.0)];
            m.add_squared(&terms, -1.0, -c1);
        }
    }
    for i in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..k).map(|r| (layout.x(i, r), 1.0)).collect();
        terms.push((layout.t(i), 1.0));
        m.add_squared(&terms, -1.0, -c2);
    }
    m.labels = Some(variable_labels(inst, true));
    m.provenance = Provenance::LinearBased;
    m.penalties = Some((c1, c2));
    Ok(m)
}

/// Stable-set QUBO `Σ x_i - c1·Σ_{(i,j)∈E} x_i x_j`, the `k = 1` nonlinear model.
pub fn build_stable_set(g: &Graph, c1: f64) -> Result<QuboModel, QuboError> {
    if !(c1 >= 1.0 && c1.is_finite()) {
        return Err(QuboError::StableSetPenalty(c1));
    }
    let inst = MkcsInstance::new(g.clone(), 1)?;
    // H2 is empty for a single color, so c2 only fills the record.
    let mut m = build_nonlinear(&inst, c1, 1.0)?;
    m.provenance = Provenance::StableSet;
    m.penalties = Some((c1, 0.0));
    Ok(m)
}

/// Which reformulation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Form {
    Linear,
    Nonlinear,
}

impl Form {
    pub fn build(self, inst: &MkcsInstance, c1: f64, c2: f64) -> Result<QuboModel, QuboError> {
        match self {
            Form::Linear => build_linear(inst, c1, c2),
            Form::Nonlinear => build_nonlinear(inst, c1, c2),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Linear => "linear",
            Form::Nonlinear => "nonlinear",
        })
    }
}

impl FromStr for Form {
    type Err = QuboError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "linear" | "L" | "l" => Ok(Form::Linear),
            "nonlinear" | "N" | "n" => Ok(Form::Nonlinear),
            other => Err(QuboError::Parse { line: 0, reason: format!("unknown form {other:?}") }),
        }
    }
}

/// Index arithmetic for the fixed variable layout.
#[derive(Debug, Clone, Copy)]
pub struct LinearLayout {
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

impl LinearLayout {
    pub fn new(inst: &MkcsInstance) -> Self {
        Self { n: inst.n(), k: inst.k(), m: inst.graph().num_edges() }
    }

    pub fn x(&self, i: usize, r: usize) -> usize {
        i * self.k + r
    }

    pub fn s(&self, e: usize, r: usize) -> usize {
        self.n * self.k + e * self.k + r
    }

    pub fn t(&self, i: usize) -> usize {
        self.n * self.k + self.m * self.k + i
    }

    /// `n·k + |E|·k + n`.
    pub fn num_vars(&self) -> usize {
        self.n * self.k + self.m * self.k + self.n
    }
}

fn labels_for(n: usize, k: usize, edges: Option<&[(usize, usize)]>) -> Vec<VarIndex> {
    let mut out: Vec<VarIndex> =
        (0..n).flat_map(|i| (0..k).map(move |r| VarIndex::X { vertex: i, color: r })).collect();
    if let Some(edges) = edges {
        out.extend(edges.iter().flat_map(|&(u, v)| (0..k).map(move |r| VarIndex::S { u, v, color: r })));
        out.extend((0..n).map(|i| VarIndex::T { vertex: i }));
    }
    out
}

/// Labels for a model built from `inst` (`with_slacks` selects the linear layout).
pub fn variable_labels(inst: &MkcsInstance, with_slacks: bool) -> Vec<VarIndex> {
    labels_for(inst.n(), inst.k(), with_slacks.then(|| inst.graph().edges()))
}

/// The color part of a model's bit vector (the first `n·k` variables).
pub fn decode_assignment(inst: &MkcsInstance, bits: &[bool]) -> Result<Assignment, QuboError> {
    let nk = inst.n() * inst.k();
    if bits.len() < nk {
        return Err(QuboError::LengthMismatch { expected: nk, got: bits.len() });
    }
    Ok(Assignment::from_bits(inst.n(), inst.k(), bits[..nk].to_vec())?)
}

/// Slack variables of the linear model: `s[e * k + r]` and `t[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slacks {
    pub k: usize,
    pub s: Vec<bool>,
    pub t: Vec<bool>,
}

impl Slacks {
    pub fn zeros(inst: &MkcsInstance) -> Self {
        Self { k: inst.k(), s: vec![false; inst.graph().num_edges() * inst.k()], t: vec![false; inst.n()] }
    }

    /// Slacks that make every penalty term of a feasible `x` vanish:
    /// `s_ijr = 1 - x_ir - x_jr`, `t_i = 1 - Σ_r x_ir`.
    pub fn tight(inst: &MkcsInstance, x: &Assignment) -> Result<Self, QuboError> {
        if !crate::mkcs::is_feasible(inst, x)? {
            return Err(QuboError::InvalidIndex("tight slacks need a feasible assignment".into()));
        }
        let k = inst.k();
        let s = inst
            .graph()
            .edges()
            .iter()
            .flat_map(|&(i, j)| (0..k).map(move |r| (i, j, r)))
            .map(|(i, j, r)| !x.get(i, r) && !x.get(j, r))
            .collect();
        let t = (0..inst.n()).map(|i| x.row(i).iter().all(|&b| !b)).collect();
        Ok(Self { k, s, t })
    }
}

/// Concatenates `x`, `s`, `t` into the linear model's bit vector.
pub fn linear_bits(x: &Assignment, slacks: &Slacks) -> Vec<bool> {
    x.bits().iter().chain(&slacks.s).chain(&slacks.t).copied().collect()
}

/// Drops color `r` from vertex `i`.
pub fn apply_mapping_x(a: &Assignment, i: usize, r: usize) -> Result<Assignment, QuboError> {
    if i >= a.n() || r >= a.k() {
        return Err(QuboError::InvalidIndex(format!("x[{i}][{r}] outside {}x{}", a.n(), a.k())));
    }
    let mut out = a.clone();
    out.set(i, r, false);
    Ok(out)
}

/// Slack companion of [`apply_mapping_x`]: for every edge at `i` other than
/// `{i, j}`, `s[·, r]` is complemented; `s` on `{i, j}` (color `r`) becomes
/// `(1 - s) · p`; `t_i` becomes `1 - p`. Pass `j = None` when no edge is singled
/// out (the `p = 1` use, where both branches agree).
pub fn apply_mapping_m(
    g: &Graph,
    slacks: &Slacks,
    i: usize,
    j: Option<usize>,
    r: usize,
    p: bool,
) -> Result<Slacks, QuboError> {
    let k = slacks.k;
    if i >= g.n() || r >= k || slacks.t.len() != g.n() || slacks.s.len() != g.num_edges() * k {
        return Err(QuboError::InvalidIndex(format!("mapping at vertex {i}, color {r}")));
    }
    let special = match j {
        Some(j) => Some(g.edge_index(i, j).ok_or_else(|| QuboError::InvalidIndex(format!("({i}, {j}) is not an edge")))?),
        None => None,
    };
    let mut out = slacks.clone();
    for &other in g.neighbors(i) {
        let e = g.edge_index(i, other).expect("neighbor edge");
        let flipped = !slacks.s[e * k + r];
        out.s[e * k + r] = if Some(e) == special { flipped && p } else { flipped };
    }
    out.t[i] = !p;
    Ok(out)
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

/// QUBO exchange text: `nvars <N> sense <max|min> offset <real>`, then
/// `l <v> <coeff>` for nonzero linear terms and `q <u> <v> <coeff>` (u < v).
pub fn write_qubo(m: &QuboModel) -> String {
    let sense = match m.sense {
        Sense::Maximize => "max",
        Sense::Minimize => "min",
    };
    let mut out = format!("nvars {} sense {} offset {}\n", m.num_vars(), sense, fmt_real(m.offset));
    for (v, &a) in m.linear.iter().enumerate() {
        if a != 0.0 {
            let _ = writeln!(out, "l {v} {}", fmt_real(a));
        }
    }
    for (&(u, v), &b) in &m.quadratic {
        if b != 0.0 {
            let _ = writeln!(out, "q {u} {v} {}", fmt_real(b));
        }
    }
    out
}

/// Sidecar map: one `<index> <label>` line per variable.
pub fn write_var_map(labels: &[VarIndex]) -> String {
    labels.iter().enumerate().map(|(v, l)| format!("{v} {l}\n")).collect()
}

pub fn read_var_map(text: &str) -> Result<Vec<VarIndex>, QuboError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let err = |reason: String| QuboError::Parse { line: idx + 1, reason };
        let mut it = line.split_whitespace();
        let (Some(v), Some(label), None) = (it.next(), it.next(), it.next()) else {
            return Err(err(format!("expected `<index> <label>`, got {line:?}")));
        };
        let v: usize = v.parse().map_err(|_| err(format!("bad index {v:?}")))?;
        if v != out.len() {
            return Err(err(format!("expected index {}, got {v}", out.len())));
        }
        out.push(label.parse().map_err(err)?);
    }
    Ok(out)
}

/// Parses [`write_qubo`] output; the result has [`Provenance::External`].
pub fn read_qubo(text: &str, var_map: Option<&str>) -> Result<QuboModel, QuboError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(QuboError::Parse { line: 1, reason: "empty model".into() })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let header_err = || QuboError::Parse { line: 1, reason: format!("bad header {header:?}") };
    let ["nvars", nv, "sense", sense, "offset", offset] = tokens.as_slice() else {
        return Err(header_err());
    };
    let nv: usize = nv.parse().map_err(|_| header_err())?;
    let sense = match *sense {
        "max" => Sense::Maximize,
        "min" => Sense::Minimize,
        _ => return Err(header_err()),
    };
    let mut m = QuboModel::new(nv, sense);
    m.offset = offset.parse().map_err(|_| header_err())?;
    for (idx, line) in lines {
        let err = |reason: &str| QuboError::Parse { line: idx + 1, reason: format!("{reason}: {line:?}") };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let var = |t: &str| -> Result<usize, QuboError> {
            let v: usize = t.parse().map_err(|_| err("bad variable"))?;
            if v < nv {
                Ok(v)
            } else {
                Err(err("variable out of range"))
            }
        };
        let coeff = |t: &str| -> Result<f64, QuboError> {
            let c: f64 = t.parse().map_err(|_| err("bad coefficient"))?;
            if c.is_finite() {
                Ok(c)
            } else {
                Err(err("non-finite coefficient"))
            }
        };
        match tokens.as_slice() {
            ["l", v, c] => m.add_linear(var(v)?, coeff(c)?),
            ["q", u, v, c] => {
                let (u, v) = (var(u)?, var(v)?);
                if u == v {
                    return Err(err("diagonal quadratic term"));
                }
                m.add_quadratic(u, v, coeff(c)?);
            }
            _ => return Err(err("unrecognized line")),
        }
    }
    if let Some(map) = var_map {
        let labels = read_var_map(map)?;
        if labels.len() != nv {
            return Err(QuboError::LengthMismatch { expected: nv, got: labels.len() });
        }
        m.labels = Some(labels);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique_counterexample, Graph};

    fn inst(g: Graph, k: usize) -> MkcsInstance {
        MkcsInstance::new(g, k).unwrap()
    }

    #[test]
    fn nonlinear_shape() {
        let i = inst(Graph::complete(4), 3);
        let m = build_nonlinear(&i, 2.0, 3.0).unwrap();
        assert_eq!(m.num_vars(), 12);
        assert!(m.linear.iter().all(|&a| a == 1.0));
        // 6 edges * 3 colors + 4 vertices * 3 color pairs
        assert_eq!(m.quadratic.len(), 18 + 12);
        assert_eq!(m.quadratic[&(0, 3)], -2.0);
        assert_eq!(m.quadratic[&(0, 1)], -3.0);
        assert_eq!(m.evaluate(&[false; 12]).unwrap(), 0.0);
    }

    #[test]
    fn clique_witness_value() {
        for k in 1..=4 {
            let g = clique_counterexample(k);
            let i = inst(g, k);
            let mut a = Assignment::zeros(k + 1, k);
            for v in 0..k {
                a.set(v, v, true);
            }
            a.set(k, k - 1, true);
            let m = build_nonlinear(&i, 0.3, 7.0).unwrap();
            assert_eq!(m.evaluate(a.bits()).unwrap(), (k + 1) as f64 - 0.3);
        }
    }

    #[test]
    fn nonlinear_k3_single_color() {
        let m = build_nonlinear(&inst(Graph::complete(3), 1), 2.0, 1.0).unwrap();
        assert_eq!(m.evaluate(&[true, true, false]).unwrap(), 0.0);
        let sol = m.solve_bruteforce().unwrap();
        assert_eq!(sol.value, 1.0);
        assert_eq!(sol.num_optima, 3);
        assert_eq!(sol.bits, vec![true, false, false]);
    }

    #[test]
    fn linear_shape_and_zero_point() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let i = inst(g, 2);
        let (c1, c2) = (1.5, 2.5);
        let m = build_linear(&i, c1, c2).unwrap();
        assert_eq!(m.num_vars(), 4 * 2 + 3 * 2 + 4);
        let zero = m.evaluate(&vec![false; m.num_vars()]).unwrap();
        assert_eq!(zero, -c1 * 3.0 * 2.0 - c2 * 4.0);
        assert_eq!(m.labels.as_ref().unwrap()[8], VarIndex::S { u: 0, v: 1, color: 0 });
        assert_eq!(m.labels.as_ref().unwrap()[17], VarIndex::T { vertex: 3 });
    }

    #[test]
    fn linear_tight_slacks_give_objective() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let i = inst(g, 2);
        let m = build_linear(&i, 0.7, 0.4).unwrap();
        let x = Assignment::from_bits(3, 2, vec![true, false, false, true, true, false]).unwrap();
        let slacks = Slacks::tight(&i, &x).unwrap();
        assert!((m.evaluate(&linear_bits(&x, &slacks)).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_k2_optimum() {
        let m = build_linear(&inst(Graph::complete(2), 1), 2.0, 2.0).unwrap();
        assert_eq!(m.num_vars(), 5);
        assert_eq!(m.solve_bruteforce().unwrap().value, 1.0);
    }

    #[test]
    fn stable_set_model() {
        let m = build_stable_set(&Graph::complete(2), 1.0).unwrap();
        assert_eq!(m.solve_bruteforce().unwrap().value, 1.0);
        let e = build_stable_set(&Graph::empty(4), 1.0).unwrap();
        let sol = e.solve_bruteforce().unwrap();
        assert_eq!(sol.value, 4.0);
        assert_eq!(sol.bits, vec![true; 4]);
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let a = build_stable_set(&g, 1.5).unwrap();
        let b = build_nonlinear(&inst(g, 1), 1.5, 3.0).unwrap();
        assert_eq!((a.linear, a.quadratic, a.offset), (b.linear, b.quadratic, b.offset));
        assert!(build_stable_set(&Graph::empty(2), 0.9).is_err());
    }

    #[test]
    fn penalties_validated() {
        let i = inst(Graph::complete(2), 1);
        assert!(build_nonlinear(&i, 0.0, 1.0).is_err());
        assert!(build_nonlinear(&i, 1.0, -1.0).is_err());
        assert!(build_linear(&i, f64::NAN, 1.0).is_err());
        assert!(build_linear(&i, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn evaluate_basics() {
        let mut m = QuboModel::new(1, Sense::Maximize);
        m.add_linear(0, 3.0);
        assert_eq!(m.evaluate(&[true]).unwrap(), 3.0);
        m.offset = 1.25;
        assert_eq!(m.evaluate(&[false]).unwrap(), 1.25);
        assert!(matches!(m.evaluate(&[true, true]), Err(QuboError::LengthMismatch { expected: 1, got: 2 })));
    }

    #[test]
    fn bruteforce_budget_and_minimize() {
        let m = QuboModel::new(25, Sense::Maximize);
        assert!(matches!(m.solve_bruteforce(), Err(QuboError::BudgetExceeded { vars: 25, .. })));
        let mut m = QuboModel::new(3, Sense::Minimize);
        m.add_linear(0, 1.0);
        m.add_linear(1, -2.0);
        m.add_quadratic(1, 2, -1.0);
        m.add_linear(2, 0.5);
        let sol = m.solve_bruteforce().unwrap();
        assert_eq!(sol.value, -2.5);
        assert_eq!(sol.bits, vec![false, true, true]);
        assert_eq!(sol.num_optima, 1);
    }

    #[test]
    fn ising_single_variable() {
        let mut m = QuboModel::new(1, Sense::Maximize);
        m.add_linear(0, 1.0);
        let ising = m.to_ising();
        assert_eq!(ising.h, vec![-0.5]);
        assert_eq!(ising.offset, -0.5);
        assert_eq!(ising.energy(&[1]), -1.0);
        assert_eq!(ising.energy(&[-1]), 0.0);
        let empty = QuboModel { offset: 2.0, ..QuboModel::new(0, Sense::Minimize) };
        let e = empty.to_ising();
        assert!(e.h.is_empty() && e.couplings.is_empty());
        assert_eq!(e.offset, 2.0);
    }

    #[test]
    fn mappings() {
        let a = Assignment::ones(2, 2);
        let once = apply_mapping_x(&a, 1, 0).unwrap();
        assert!(!once.get(1, 0));
        assert_eq!(objective_of(&once), 3);
        assert_eq!(apply_mapping_x(&once, 1, 0).unwrap(), once);
        assert!(apply_mapping_x(&a, 2, 0).is_err());

        let g = Graph::new(3, [(0, 1), (0, 2)]).unwrap();
        let i = inst(g.clone(), 1);
        let slacks = Slacks { k: 1, s: vec![true, false], t: vec![false, true, false] };
        let m0 = apply_mapping_m(&g, &slacks, 0, Some(1), 0, false).unwrap();
        assert_eq!(m0.s, vec![false, true]);
        assert!(m0.t[0]);
        let m1 = apply_mapping_m(&g, &slacks, 0, Some(1), 0, true).unwrap();
        assert_eq!(m1.s, vec![false, true]);
        assert!(!m1.t[0]);
        assert_eq!(m1.t[1..], slacks.t[1..]);
        assert!(apply_mapping_m(&g, &slacks, 1, Some(2), 0, false).is_err());
        assert_eq!(Slacks::zeros(&i).s.len(), 2);
    }

    fn objective_of(a: &Assignment) -> usize {
        crate::mkcs::objective(a)
    }

    #[test]
    fn file_round_trip() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let i = inst(g, 2);
        let m = build_linear(&i, 1.5, 0.1).unwrap();
        let labels = m.labels.clone().unwrap();
        let back = read_qubo(&write_qubo(&m), Some(&write_var_map(&labels))).unwrap();
        assert_eq!(back.linear, m.linear);
        assert_eq!(back.offset, m.offset);
        assert_eq!(back.labels, m.labels);
        assert_eq!(back.provenance, Provenance::External);
        for (key, b) in &m.quadratic {
            assert_eq!(back.quadratic.get(key).copied().unwrap_or(0.0), *b);
        }
        assert!(read_qubo("nvars 2 sense max offset 0\nq 0 0 1\n", None).is_err());
        assert!(read_qubo("nvars 2 sense max offset 0\nl 2 1\n", None).is_err());
        assert!(read_qubo("nvars 2 sense up offset 0\n", None).is_err());
        assert!(read_qubo("nvars 1 sense min offset 0\nl 0 inf\n", None).is_err());
    }

    #[test]
    fn var_labels_parse() {
        for text in ["x:3:2", "s:1:4:2", "t:5"] {
            assert_eq!(text.parse::<VarIndex>().unwrap().to_string(), text);
        }
        assert!("x:0:1".parse::<VarIndex>().is_err());
        assert!("y:1".parse::<VarIndex>().is_err());
    }
}
