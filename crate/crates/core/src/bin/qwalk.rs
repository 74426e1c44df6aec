//! Command-line front end. Prints JSON to stdout.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qwalk::cg_prime::{run_cg_prime_with, DEFAULT_C};
use qwalk::chain::{ensure_lazy, StochasticChain};
use qwalk::graphs::{generate, FamilySpec};
use qwalk::harness::{fit_csv, resolve_workers, run_sweep, SweepConfig};
use qwalk::hitting::hitting_report;
use qwalk::interpolated::{run_phase_random, Mode, PhaseRandomConfig};
use qwalk::{Error, Result};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Quantum walk search on reversible Markov chains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a chain from a graph family and write it as JSON.
    Gen(GenArgs),
    /// Classical hitting times of a chain file.
    HittingTime {
        #[arg(long)]
        chain: PathBuf,
        /// Override the marked set (comma separated, 0-based).
        #[arg(long, value_delimiter = ',')]
        marked: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9")]
        s_grid: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Quantum search algorithms.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Run a parameter sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the output path in the config.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Log-log least-squares fit of two CSV columns.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Edge-walk search with the decoupled marked edge state.
    CgPrime {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        marked: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
    },
    /// Phase-randomised search on the interpolated chain.
    Interpolated {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, value_delimiter = ',')]
        marked: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evolution horizon; derived from epsilon when absent.
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Complete,
    Cycle,
    Torus,
    Hypercube,
    Rook,
    WeightedRook,
    RandomReversible,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    /// Keep the plain random walk instead of the lazy version.
    #[arg(long)]
    no_lazy: bool,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    marked: Vec<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::BadParams(format!("--{name} is required for this family")))
}

fn family_spec(a: &GenArgs) -> Result<FamilySpec> {
    Ok(match a.family {
        FamilyArg::Complete => FamilySpec::Complete { n: need(a.n, "n")? },
        FamilyArg::Cycle => FamilySpec::Cycle { n: need(a.n, "n")? },
        FamilyArg::Torus => FamilySpec::Torus { d: a.d.unwrap_or(2), side: need(a.side, "side")? },
        FamilyArg::Hypercube => FamilySpec::Hypercube { d: need(a.d, "d")? },
        FamilyArg::Rook => FamilySpec::Rook { n1: need(a.n1, "n1")?, n2: need(a.n2, "n2")? },
        FamilyArg::WeightedRook => {
            FamilySpec::WeightedRook { n1: need(a.n1, "n1")?, n2: need(a.n2, "n2")?, p: need(a.p, "p")? }
        }
        FamilyArg::RandomReversible => {
            FamilySpec::RandomReversible { n: need(a.n, "n")?, seed: a.seed, edge_prob: a.edge_prob }
        }
    })
}

fn load(path: &PathBuf, marked: Option<&[usize]>) -> Result<StochasticChain> {
    let chain = StochasticChain::load_json(path)?;
    match marked {
        Some(m) => chain.with_marked(m),
        None => Ok(chain),
    }
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen(a) => {
            let mut chain = generate(&family_spec(&a)?)?;
            if !a.no_lazy {
                chain = ensure_lazy(&chain);
            }
            let chain = chain.with_marked(&a.marked)?;
            match a.output {
                Some(path) => chain.save_json(path),
                None => print(&chain.to_file()),
            }
        }
        Cmd::HittingTime { chain, marked, s_grid, mc_samples, seed } => {
            let chain = load(&chain, marked.as_deref())?;
            let mc = (mc_samples > 0).then_some((mc_samples, seed));
            print(&hitting_report(&chain, &s_grid, mc)?)
        }
        Cmd::Search(SearchCmd::CgPrime { chain, marked, c }) => {
            let chain = load(&chain, marked.map(|w| vec![w]).as_deref())?;
            let w = match chain.marked() {
                [w] => *w,
                m => return Err(Error::UnsupportedMultiMarked(m.len())),
            };
            print(&run_cg_prime_with(&chain, w, c)?)
        }
        Cmd::Search(SearchCmd::Interpolated { chain, marked, epsilon, mode, samples, seed, t }) => {
            let chain = load(&chain, marked.as_deref())?;
            let mode = match mode {
                ModeArg::Exact => Mode::ExactAverage,
                ModeArg::Sampled => Mode::Sampled,
            };
            let cfg = PhaseRandomConfig { epsilon_precision: epsilon, t, mode, samples, seed };
            print(&run_phase_random(&chain, &cfg)?)
        }
        Cmd::Sweep { config, workers, output } => {
            let mut cfg = SweepConfig::load(config)?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            if output.is_some() {
                cfg.output = output;
            }
            print(&run_sweep(&cfg)?)
        }
        Cmd::Fit { csv, x, y } => print(&fit_csv(csv, &x, &y)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = resolve_workers(None) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
