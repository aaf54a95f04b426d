use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mkcs_core::anneal::{self, SamplerConfig};
use mkcs_core::experiments::{self, SweepConfig};
use mkcs_core::graph::{er_generate, read_graph, write_graph, Probability};
use mkcs_core::mkcs::{alpha_bruteforce, MkcsInstance};
use mkcs_core::qubo::{read_qubo, write_qubo, write_var_map, Form, QuboModel};
use mkcs_core::spectrum::{self, AnnealSchedule, GapOptions};

#[derive(Parser)]
#[command(name = "mkcs", version, about = "Maximum k-colorable subgraph QUBO toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a G(n, p) graph and print it as a DIMACS edge list.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact α_k by enumeration, with a witness coloring.
    SolveExact {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Write the QUBO of an instance plus a `.vars` label file next to it.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force optimum of a QUBO file.
    SolveQubo {
        #[arg(long)]
        qubo: PathBuf,
        /// Label file; defaults to `<qubo>.vars` when that exists.
        #[arg(long)]
        vars: Option<PathBuf>,
    },
    /// Minimum spectral gap along the annealing path.
    MinGap {
        #[command(flatten)]
        model: ModelArgs,
        /// CSV with header `s,A_GHz,B_GHz`; linear 10 GHz ramps when omitted.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = spectrum::DEFAULT_MAX_SPINS)]
        max_spins: usize,
    },
    /// Success probability and time-to-solution from simulated annealing.
    Tts {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        #[arg(long, default_value_t = 100)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        beta_start: f64,
        #[arg(long, default_value_t = 10.0)]
        beta_end: f64,
        /// Duration of one read in microseconds.
        #[arg(long, default_value_t = anneal::DEFAULT_T_RUN_US)]
        t_run: f64,
        #[arg(long, default_value_t = anneal::DEFAULT_ALPHA)]
        alpha: f64,
        /// A read counts as optimal when within this distance of the optimum.
        #[arg(long, default_value_t = anneal::DEFAULT_SUCCESS_TOL)]
        tol: f64,
    },
    /// Run a batch experiment and write tidy CSVs into a directory.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// `linear` (with slacks) or `nonlinear`.
    #[arg(long)]
    form: Form,
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    #[arg(long, default_value_t = 2.0)]
    c2: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<QuboModel> {
        let graph = load_graph(&self.graph)?;
        let inst = MkcsInstance::new(graph, self.k)?;
        Ok(self.form.build(&inst, self.c1, self.c2)?)
    }
}

fn load_graph(path: &Path) -> Result<mkcs_core::graph::Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn vars_path(qubo: &Path) -> PathBuf {
    let mut name = qubo.as_os_str().to_owned();
    name.push(".vars");
    PathBuf::from(name)
}

fn run(cli: Cli, out: &mut impl Write) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { n, p, seed, out: path } => {
            let text = write_graph(&er_generate(n, Probability::new(p)?, seed));
            match path {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::SolveExact { graph, k } => {
            let inst = MkcsInstance::new(load_graph(&graph)?, k)?;
            let (alpha, witness) = alpha_bruteforce(&inst)?;
            writeln!(out, "alpha\n{alpha}")?;
            write!(out, "{witness}")?;
        }
        Command::Build { model, out: path } => {
            let m = model.build()?;
            fs::write(&path, write_qubo(&m)).with_context(|| format!("writing {}", path.display()))?;
            if let Some(labels) = &m.labels {
                let vars = vars_path(&path);
                fs::write(&vars, write_var_map(labels)).with_context(|| format!("writing {}", vars.display()))?;
            }
        }
        Command::SolveQubo { qubo, vars } => {
            let text = fs::read_to_string(&qubo).with_context(|| format!("reading {}", qubo.display()))?;
            let vars = vars.or_else(|| Some(vars_path(&qubo)).filter(|p| p.exists()));
            let map = vars
                .map(|p| fs::read_to_string(&p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let m = read_qubo(&text, map.as_deref())?;
            let sol = m.solve_bruteforce()?;
            writeln!(out, "value,num_optima,bits")?;
            writeln!(out, "{},{},{}", sol.value, sol.num_optima, bit_string(&sol.bits))?;
            if let Some(labels) = &m.labels {
                let on: Vec<String> =
                    labels.iter().zip(&sol.bits).filter(|(_, &b)| b).map(|(l, _)| l.to_string()).collect();
                writeln!(out, "# set: {}", on.join(" "))?;
            }
        }
        Command::MinGap { model, schedule, epsilon, max_spins } => {
            let m = model.build()?;
            let schedule = match schedule {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    AnnealSchedule::from_csv(&text)?
                }
                None => AnnealSchedule::default(),
            };
            let opts = GapOptions { epsilon, max_spins, ..GapOptions::default() };
            let res = spectrum::min_gap(&m.to_ising(), &schedule, &opts)?;
            writeln!(out, "delta_min,s_star,evaluations,fallback")?;
            writeln!(out, "{},{},{},{}", res.delta_min, res.s_star, res.evaluations, res.fallback)?;
            writeln!(out, "s,E0,E1")?;
            for t in &res.trace {
                writeln!(out, "{},{},{}", t.s, t.e0, t.e1)?;
            }
        }
        Command::Tts { model, reads, sweeps, seed, beta_start, beta_end, t_run, alpha, tol } => {
            let m = model.build()?;
            let ground = m.solve_bruteforce()?.value;
            let cfg = SamplerConfig { num_reads: reads, sweeps, beta_start, beta_end, seed };
            let samples = anneal::sample(&m, &cfg)?;
            let est = anneal::estimate_tts(&samples, ground, tol, t_run, alpha)?;
            writeln!(out, "p_hat,tts_us,t_run_us,alpha,ground_value")?;
            writeln!(out, "{},{},{},{},{}", est.p_hat, est.tts, est.t_run, est.alpha, est.ground_value)?;
        }
        Command::Sweep { config, out: dir } => {
            let cfg = SweepConfig::load(&config)?;
            let table = experiments::run_sweep(&cfg)?;
            experiments::emit_plot_data(&table, &dir)?;
            let mut failed = false;
            for cell in table.cells.iter().filter(|c| c.errored()) {
                failed = true;
                let k = &cell.key;
                eprintln!(
                    "cell n={} p={} k={} form={} c1={} c2={}: {} values, {} over budget, errors: {}",
                    k.n,
                    k.p,
                    k.k,
                    k.form,
                    k.c1,
                    k.c2,
                    cell.values.len(),
                    cell.skipped,
                    cell.errors.join("; ")
                );
            }
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
