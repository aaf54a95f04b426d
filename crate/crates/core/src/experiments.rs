//! Batch runs over seeded random graphs: per-cell summaries, the one-sided
//! linear-vs-nonlinear comparison, and tidy CSV output.
//!
//! A sweep crosses every `(n, p)` graph cell with every `k`, form and penalty
//! pair. The `g`-th graph of a graph cell is shared by all of those, so forms
//! and penalties are compared on identical instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::anneal::{self, SamplerConfig, Tts};
use crate::graph::{er_generate, Probability};
use crate::mkcs::{MkcsInstance, DEFAULT_ENUMERATION_BITS};
use crate::qubo::{Form, QuboError};
use crate::seeds;
use crate::spectrum::{self, AnnealSchedule, GapOptions, SpectrumError};

/// Spin budget for spectral sweeps unless the config says otherwise.
pub const DEFAULT_SWEEP_MAX_SPINS: usize = 14;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("each sample set needs at least two values (got {0} and {1})")]
    TooFewSamples(usize, usize),
    #[error("both sample sets have zero variance")]
    ZeroVariance,
    #[error("reference mean must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("confidence must lie in (0, 1), got {0}")]
    Confidence(f64),
    #[error("nothing to write")]
    EmptyTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    MinGap,
    Tts,
    QuboValue,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::MinGap => "min_gap",
            Metric::Tts => "tts",
            Metric::QuboValue => "qubo_value",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_gap" => Ok(Metric::MinGap),
            "tts" => Ok(Metric::Tts),
            "qubo_value" => Ok(Metric::QuboValue),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub k: Vec<usize>,
    pub forms: Vec<Form>,
    pub penalties: Vec<(f64, f64)>,
    pub graphs_per_cell: usize,
    pub seed: u64,
    pub metric: Metric,
    pub schedule: AnnealSchedule,
    pub gap: GapOptions,
    pub sampler: SamplerConfig,
    pub t_run: f64,
    pub alpha: f64,
    pub success_tol: f64,
    pub enumeration_bits: usize,
}

impl SweepConfig {
    /// Defaults for everything but the grid itself.
    pub fn new(n: Vec<usize>, p: Vec<f64>, k: Vec<usize>, forms: Vec<Form>, penalties: Vec<(f64, f64)>, metric: Metric) -> Self {
        Self {
            n,
            p,
            k,
            forms,
            penalties,
            graphs_per_cell: 100,
            seed: 0,
            metric,
            schedule: AnnealSchedule::default(),
            gap: GapOptions { max_spins: DEFAULT_SWEEP_MAX_SPINS, ..GapOptions::default() },
            sampler: SamplerConfig::default(),
            t_run: anneal::DEFAULT_T_RUN_US,
            alpha: anneal::DEFAULT_ALPHA,
            success_tol: anneal::DEFAULT_SUCCESS_TOL,
            enumeration_bits: DEFAULT_ENUMERATION_BITS,
        }
    }

    /// Reads a config file; a `schedule` path is resolved against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text, path.parent())
    }

    /// Parses `key = value` lines. Lists are comma separated, penalties are
    /// written `c1:c2`, `#` starts a comment.
    ///
    /// Required keys: `n`, `p`, `k`, `form` (`linear`, `nonlinear` or `both`),
    /// `penalties`, `metric` (`min_gap`, `tts` or `qubo_value`). Optional:
    /// `graphs_per_cell`, `seed`, `epsilon`, `max_spins`, `schedule`, `reads`,
    /// `sweeps`, `beta_start`, `beta_end`, `t_run`, `alpha`, `success_tol`,
    /// `enumeration_bits`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ExperimentError> {
        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ExperimentError::Config { line: idx + 1, reason };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim().to_string();
            if fields.insert(key.clone(), (idx + 1, value.trim().to_string())).is_some() {
                return Err(err(format!("duplicate key {key:?}")));
            }
        }

        let mut take = |key: &str| fields.remove(key);
        fn list<T: FromStr>(line: usize, value: &str) -> Result<Vec<T>, ExperimentError> {
            value
                .split(',')
                .map(|v| {
                    v.trim().parse::<T>().map_err(|_| ExperimentError::Config { line, reason: format!("bad list item {v:?}") })
                })
                .collect()
        }
        fn one<T: FromStr>(line: usize, value: &str) -> Result<T, ExperimentError> {
            value.trim().parse::<T>().map_err(|_| ExperimentError::Config { line, reason: format!("bad value {value:?}") })
        }
        let required = |entry: Option<(usize, String)>, key: &str| {
            entry.ok_or_else(|| ExperimentError::Config { line: 0, reason: format!("missing key {key:?}") })
        };

        let (l, v) = required(take("n"), "n")?;
        let n: Vec<usize> = list(l, &v)?;
        let (l, v) = required(take("p"), "p")?;
        let p: Vec<f64> = list(l, &v)?;
        if let Some(bad) = p.iter().find(|&&x| Probability::new(x).is_err()) {
            return Err(ExperimentError::Config { line: l, reason: format!("probability {bad} outside [0, 1]") });
        }
        let (l, v) = required(take("k"), "k")?;
        let k: Vec<usize> = list(l, &v)?;
        if k.contains(&0) {
            return Err(ExperimentError::Config { line: l, reason: "k must be positive".into() });
        }
        let (l, v) = required(take("form"), "form")?;
        let forms = match v.as_str() {
            "both" => vec![Form::Linear, Form::Nonlinear],
            other => vec![other.parse::<Form>().map_err(|e| ExperimentError::Config { line: l, reason: e.to_string() })?],
        };
        let (l, v) = required(take("penalties"), "penalties")?;
        let penalties = v
            .split(',')
            .map(|pair| {
                let (a, b) = pair.split_once(':').ok_or_else(|| ExperimentError::Config {
                    line: l,
                    reason: format!("penalty {pair:?} is not `c1:c2`"),
                })?;
                Ok((one::<f64>(l, a)?, one::<f64>(l, b)?))
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        let (l, v) = required(take("metric"), "metric")?;
        let metric = v.parse::<Metric>().map_err(|reason| ExperimentError::Config { line: l, reason })?;

        let mut cfg = SweepConfig::new(n, p, k, forms, penalties, metric);
        if let Some((l, v)) = take("graphs_per_cell") {
            cfg.graphs_per_cell = one(l, &v)?;
        }
        if let Some((l, v)) = take("seed") {
            cfg.seed = one(l, &v)?;
        }
        if let Some((l, v)) = take("epsilon") {
            cfg.gap.epsilon = one(l, &v)?;
        }
        if let Some((l, v)) = take("max_spins") {
            cfg.gap.max_spins = one(l, &v)?;
        }
        if let Some((l, v)) = take("schedule") {
            let path = base.map_or_else(|| PathBuf::from(&v), |b| b.join(&v));
            let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
            cfg.schedule =
                AnnealSchedule::from_csv(&text).map_err(|e| ExperimentError::Config { line: l, reason: e.to_string() })?;
        }
        if let Some((l, v)) = take("reads") {
            cfg.sampler.num_reads = one(l, &v)?;
        }
        if let Some((l, v)) = take("sweeps") {
            cfg.sampler.sweeps = one(l, &v)?;
        }
        if let Some((l, v)) = take("beta_start") {
            cfg.sampler.beta_start = one(l, &v)?;
        }
        if let Some((l, v)) = take("beta_end") {
            cfg.sampler.beta_end = one(l, &v)?;
        }
        if let Some((l, v)) = take("t_run") {
            cfg.t_run = one(l, &v)?;
        }
        if let Some((l, v)) = take("alpha") {
            cfg.alpha = one(l, &v)?;
        }
        if let Some((l, v)) = take("success_tol") {
            cfg.success_tol = one(l, &v)?;
        }
        if let Some((l, v)) = take("enumeration_bits") {
            cfg.enumeration_bits = one(l, &v)?;
        }
        if let Some((key, (line, _))) = fields.into_iter().next() {
            return Err(ExperimentError::Config { line, reason: format!("unknown key {key:?}") });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |reason: &str| Err(ExperimentError::Config { line: 0, reason: reason.into() });
        if self.n.is_empty() || self.p.is_empty() || self.k.is_empty() || self.forms.is_empty() || self.penalties.is_empty()
        {
            return bad("every list must be nonempty");
        }
        if self.graphs_per_cell == 0 {
            return bad("graphs_per_cell must be at least 1");
        }
        self.sampler.validate().map_err(|e| ExperimentError::Config { line: 0, reason: e.to_string() })
    }

    /// Seed of the `g`-th graph in graph cell `(n, p)` at position `cell`.
    pub fn graph_seed(&self, n: usize, p: f64, cell: usize, g: usize) -> u64 {
        seeds::derive(self.seed, &[n as u64, p.to_bits(), cell as u64, g as u64])
    }
}

fn io_error(path: &Path, e: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Key of one cell. Penalties compare by bit pattern so keys are totally ordered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub form: Form,
    pub c1: f64,
    pub c2: f64,
}

impl CellKey {
    fn order(&self) -> (usize, u64, usize, Form, u64, u64) {
        (self.n, self.p.to_bits(), self.k, self.form, self.c1.to_bits(), self.c2.to_bits())
    }

    fn csv_prefix(&self) -> String {
        format!("{},{},{},{},{},{}", self.n, self.p, self.k, self.form, self.c1, self.c2)
    }
}

/// Descriptive statistics of one cell. Quantiles interpolate linearly between
/// order statistics; `std` is the sample (n - 1) deviation, 0 for one value.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub q0: f64,
    pub q25: f64,
    pub q75: f64,
    pub q100: f64,
    pub std: f64,
}

impl CellSummary {
    /// `None` for an empty sample.
    pub fn from_samples(samples: Vec<f64>) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let len = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / len;
        let std = if samples.len() > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            median: quantile(&sorted, 0.5),
            q0: sorted[0],
            q25: quantile(&sorted, 0.25),
            q75: quantile(&sorted, 0.75),
            q100: sorted[sorted.len() - 1],
            std,
            samples,
        })
    }
}

/// Linear interpolation at position `q (len - 1)` of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    if lo == hi || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    /// `(graph_id, value)` for every graph that produced a value.
    pub values: Vec<(usize, f64)>,
    /// Graphs left out because their model exceeded the budget.
    pub skipped: usize,
    pub errors: Vec<String>,
    pub summary: Option<CellSummary>,
}

impl CellResult {
    /// A cell errs when anything other than a budget skip failed, or when no
    /// graph fit at all.
    pub fn errored(&self) -> bool {
        !self.errors.is_empty() || self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metric: Metric,
    pub cells: Vec<CellResult>,
}

impl SweepTable {
    pub fn any_errors(&self) -> bool {
        self.cells.iter().any(CellResult::errored)
    }

    pub fn cell(&self, n: usize, p: f64, k: usize, form: Form, c1: f64, c2: f64) -> Option<&CellResult> {
        let key = CellKey { n, p, k, form, c1, c2 };
        self.cells.iter().find(|c| c.key.order() == key.order())
    }
}

enum Outcome {
    Value(f64),
    OverBudget,
    Failed(String),
}

/// Runs every `(cell, graph)` job in parallel and gathers them by key.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable, ExperimentError> {
    cfg.validate()?;
    let mut keys = Vec::new();
    let mut jobs = Vec::new();
    let mut graph_cell = 0;
    for &n in &cfg.n {
        for &p in &cfg.p {
            for &k in &cfg.k {
                for &form in &cfg.forms {
                    for &(c1, c2) in &cfg.penalties {
                        let idx = keys.len();
                        keys.push(CellKey { n, p, k, form, c1, c2 });
                        jobs.extend((0..cfg.graphs_per_cell).map(|g| (idx, graph_cell, g)));
                    }
                }
            }
            graph_cell += 1;
        }
    }

    let outcomes: Vec<Outcome> = jobs.par_iter().map(|&(idx, cell, g)| run_job(cfg, &keys[idx], cell, g)).collect();

    let mut cells: Vec<CellResult> = keys
        .iter()
        .map(|&key| CellResult { key, values: Vec::new(), skipped: 0, errors: Vec::new(), summary: None })
        .collect();
    for (&(idx, _, g), outcome) in jobs.iter().zip(outcomes) {
        let cell = &mut cells[idx];
        match outcome {
            Outcome::Value(v) => cell.values.push((g, v)),
            Outcome::OverBudget => cell.skipped += 1,
            Outcome::Failed(msg) => cell.errors.push(format!("graph {g}: {msg}")),
        }
    }
    for cell in &mut cells {
        cell.summary = CellSummary::from_samples(cell.values.iter().map(|&(_, v)| v).collect());
    }
    cells.sort_by_key(|c| c.key.order());
    Ok(SweepTable { metric: cfg.metric, cells })
}

fn run_job(cfg: &SweepConfig, key: &CellKey, graph_cell: usize, g: usize) -> Outcome {
    let seed = cfg.graph_seed(key.n, key.p, graph_cell, g);
    let p = match Probability::new(key.p) {
        Ok(p) => p,
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    let inst = match MkcsInstance::new(er_generate(key.n, p, seed), key.k) {
        Ok(inst) => inst,
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    let model = match key.form.build(&inst, key.c1, key.c2) {
        Ok(m) => m,
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    let exact = |model: &crate::qubo::QuboModel| match model.solve_bruteforce_with_budget(cfg.enumeration_bits) {
        Ok(sol) => Ok(sol.value),
        Err(QuboError::BudgetExceeded { .. }) => Err(Outcome::OverBudget),
        Err(e) => Err(Outcome::Failed(e.to_string())),
    };
    match cfg.metric {
        Metric::QuboValue => exact(&model).map_or_else(|o| o, Outcome::Value),
        Metric::MinGap => match spectrum::min_gap(&model.to_ising(), &cfg.schedule, &cfg.gap) {
            Ok(res) => Outcome::Value(res.delta_min),
            Err(SpectrumError::SpinBudget { .. }) => Outcome::OverBudget,
            Err(e) => Outcome::Failed(e.to_string()),
        },
        Metric::Tts => {
            let ground = match exact(&model) {
                Ok(v) => v,
                Err(o) => return o,
            };
            let sampler = SamplerConfig { seed: seeds::derive(seed, &[key.c1.to_bits(), key.c2.to_bits()]), ..cfg.sampler.clone() };
            let estimate = anneal::sample(&model, &sampler)
                .and_then(|s| anneal::estimate_tts(&s, ground, cfg.success_tol, cfg.t_run, cfg.alpha));
            match estimate {
                Ok(est) => Outcome::Value(match est.tts {
                    Tts::Finite(t) => t,
                    Tts::Unbounded => f64::INFINITY,
                }),
                Err(e) => Outcome::Failed(e.to_string()),
            }
        }
    }
}

/// Outcome of the one-sided test of `H0: mean(a) >= (1 - delta) mean(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisResult {
    pub reject: bool,
    /// Largest `delta` at which `H0` is still rejected; negative when even
    /// `delta = 0` is not rejected.
    pub min_delta_reject: f64,
    pub t_statistic: f64,
    pub df: f64,
    pub critical: f64,
}

/// Welch two-sample test with the shift `delta · mean(b)` treated as a
/// constant. Rejection means the sample means support
/// `mean(a) < (1 - delta) mean(b)` at the given confidence.
pub fn hypothesis_test(a: &[f64], b: &[f64], delta: f64, confidence: f64) -> Result<HypothesisResult, ExperimentError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(ExperimentError::TooFewSamples(a.len(), b.len()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ExperimentError::Confidence(confidence));
    }
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (n, mean, var)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    if va == 0.0 && vb == 0.0 {
        return Err(ExperimentError::ZeroVariance);
    }
    if mb <= 0.0 {
        return Err(ExperimentError::NonPositiveReference(mb));
    }
    let (sa, sb) = (va / na, vb / nb);
    let se = (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(confidence);
    let t_statistic = (ma - (1.0 - delta) * mb) / se;
    Ok(HypothesisResult {
        reject: t_statistic < -critical,
        min_delta_reject: (mb - ma - critical * se) / mb,
        t_statistic,
        df,
        critical,
    })
}

/// Pairs the linear and nonlinear cells of each `(n, p, k, c1, c2)` on the
/// graphs both produced, returning `(linear, nonlinear)` values.
pub fn paired_forms(table: &SweepTable) -> Vec<(CellKey, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for lin in table.cells.iter().filter(|c| c.key.form == Form::Linear) {
        let k = lin.key;
        let Some(non) = table.cell(k.n, k.p, k.k, Form::Nonlinear, k.c1, k.c2) else { continue };
        let non_values: BTreeMap<usize, f64> = non.values.iter().copied().collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &(g, v) in &lin.values {
            if let Some(&w) = non_values.get(&g) {
                a.push(v);
                b.push(w);
            }
        }
        out.push((k, a, b));
    }
    out
}

pub const DATA_HEADER: &str = "n,p,k,form,c1,c2,graph_id,value";
pub const SUMMARY_HEADER: &str = "n,p,k,form,c1,c2,count,skipped,errors,mean,median,q0,q25,q75,q100,std";
pub const HYPOTHESIS_HEADER: &str = "n,p,k,c1,c2,count,mean_linear,mean_nonlinear,t_statistic,df,reject_at_0,min_delta_reject";

/// CSV texts keyed by file name: `<metric>.csv`, `summary.csv`, and
/// `hypothesis.csv` when both forms were run.
pub fn plot_data(table: &SweepTable) -> Result<Vec<(String, String)>, ExperimentError> {
    if table.cells.is_empty() {
        return Err(ExperimentError::EmptyTable);
    }
    let mut data = format!("{DATA_HEADER}\n");
    let mut summary = format!("{SUMMARY_HEADER}\n");
    for cell in &table.cells {
        let prefix = cell.key.csv_prefix();
        for &(g, v) in &cell.values {
            let _ = writeln!(data, "{prefix},{g},{v}");
        }
        let _ = write!(summary, "{prefix},{},{},{}", cell.values.len(), cell.skipped, cell.errors.len());
        match &cell.summary {
            Some(s) => {
                let _ = writeln!(summary, ",{},{},{},{},{},{},{}", s.mean, s.median, s.q0, s.q25, s.q75, s.q100, s.std);
            }
            None => summary.push_str(",,,,,,,\n"),
        }
    }
    let mut files = vec![(format!("{}.csv", table.metric), data), ("summary.csv".to_string(), summary)];

    let forms: BTreeSet<Form> = table.cells.iter().map(|c| c.key.form).collect();
    if forms.len() == 2 {
        let mut hyp = format!("{HYPOTHESIS_HEADER}\n");
        for (k, a, b) in paired_forms(table) {
            let _ = write!(hyp, "{},{},{},{},{},{}", k.n, k.p, k.k, k.c1, k.c2, a.len());
            let mean = |x: &[f64]| if x.is_empty() { f64::NAN } else { x.iter().sum::<f64>() / x.len() as f64 };
            let _ = write!(hyp, ",{},{}", mean(&a), mean(&b));
            match hypothesis_test(&a, &b, 0.0, 0.95) {
                Ok(h) => {
                    let _ = writeln!(hyp, ",{},{},{},{}", h.t_statistic, h.df, h.reject, h.min_delta_reject);
                }
                Err(_) => hyp.push_str(",,,,\n"),
            }
        }
        files.push(("hypothesis.csv".to_string(), hyp));
    }
    Ok(files)
}

/// Writes [`plot_data`] into `dir`, creating it if needed. Returns the paths.
pub fn emit_plot_data(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let files = plot_data(table)?;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_config() {
        let text = "# demo\nn = 4, 5\np = 0.25,0.75\nk = 1\nform = both\npenalties = 1:1, 2:1.5\ngraphs_per_cell = 3\nseed = 9\nmetric = min_gap\nepsilon = 0.5\nmax_spins = 12\nreads = 10\nsweeps = 5\n";
        let cfg = SweepConfig::parse(text, None).unwrap();
        assert_eq!(cfg.n, vec![4, 5]);
        assert_eq!(cfg.p, vec![0.25, 0.75]);
        assert_eq!(cfg.forms, vec![Form::Linear, Form::Nonlinear]);
        assert_eq!(cfg.penalties, vec![(1.0, 1.0), (2.0, 1.5)]);
        assert_eq!((cfg.graphs_per_cell, cfg.seed, cfg.metric), (3, 9, Metric::MinGap));
        assert_eq!((cfg.gap.epsilon, cfg.gap.max_spins), (0.5, 12));
        assert_eq!((cfg.sampler.num_reads, cfg.sampler.sweeps), (10, 5));
    }

    #[test]
    fn parse_errors() {
        let ok = "n=3\np=0.5\nk=1\nform=linear\npenalties=1:1\nmetric=qubo_value\n";
        assert!(SweepConfig::parse(ok, None).is_ok());
        for bad in [
            ok.replace("n=3", ""),
            ok.replace("p=0.5", "p=1.5"),
            ok.replace("k=1", "k=0"),
            ok.replace("form=linear", "form=cubic"),
            ok.replace("penalties=1:1", "penalties=1"),
            ok.replace("metric=qubo_value", "metric=speed"),
            format!("{ok}color=red\n"),
            format!("{ok}n=4\n"),
            format!("{ok}graphs_per_cell=0\n"),
            format!("{ok}just words\n"),
        ] {
            assert!(SweepConfig::parse(&bad, None).is_err(), "{bad}");
        }
    }

    #[test]
    fn summary_statistics() {
        let s = CellSummary::from_samples(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!((s.q0, s.q25, s.q75, s.q100), (1.0, 1.75, 3.25, 4.0));
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let one = CellSummary::from_samples(vec![7.0]).unwrap();
        assert_eq!((one.median, one.q25, one.std), (7.0, 7.0, 0.0));
        assert!(CellSummary::from_samples(vec![]).is_none());
    }

    #[test]
    fn hypothesis_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let same = hypothesis_test(&a, &a, 0.0, 0.95).unwrap();
        assert!(!same.reject && same.min_delta_reject < 0.0);

        let a: Vec<f64> = (0..30).map(|i| 1.0 + 1e-4 * (i % 3) as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x * 1.02).collect();
        let res = hypothesis_test(&a, &b, 0.01, 0.95).unwrap();
        assert!(res.reject);
        assert!(res.min_delta_reject > 0.01 && res.min_delta_reject < 0.02);

        assert!(matches!(hypothesis_test(&[1.0, 1.0], &[2.0, 2.0], 0.0, 0.95), Err(ExperimentError::ZeroVariance)));
        assert!(matches!(hypothesis_test(&[1.0], &[2.0, 3.0], 0.0, 0.95), Err(ExperimentError::TooFewSamples(1, 2))));
    }

    #[test]
    fn welch_critical_value_matches_tables() {
        // Equal sizes and variances give df = 2n - 2; t_0.95 at 18 df is 1.734.
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..10).map(|i| i as f64 + 100.0).collect();
        let res = hypothesis_test(&a, &b, 0.0, 0.95).unwrap();
        assert!((res.df - 18.0).abs() < 1e-12);
        assert!((res.critical - 1.734).abs() < 1e-3);
    }
}
