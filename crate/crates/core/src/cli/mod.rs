//! Batch front end: `hecke-walk <subcommand> [flags]`, optionally seeded
//! from a JSON [`RunConfig`]. Flags override the config file.
//!
//! Exit codes: 0 ok, 1 I/O, parse or budget error, 2 precondition violated,
//! 3 check failed.

mod commands;
mod config;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser};

use crate::algebra::Mode;
use crate::error::{Error, Result};

pub use commands::{execute, parse_measure};
pub use config::{Budgets, ContextConfig, Format, Inputs, Output, RunConfig, Subcommand};
pub use report::{emit, error_exit_code, render, write_atomic, Outcome, Status, SCHEMA_VERSION};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HECKE_WALK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hecke-walk", version, about = "Random walks on Hecke pairs ΞΛ ⋊ ⟨ϖ⟩: measures, boundaries, entropy")]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// JSON run configuration; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `e-lamp`, `e-bs`, `file:<path>` or `(x | n)@w, …`.
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub op: Option<String>,
    /// `geometric:a=<rat>,rho=<rat>`, `list:<rat>,…` or `file:<path>`.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Comma-separated indices for `spectrum`.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
    #[arg(long)]
    pub h_sigma_o: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long)]
    pub t_minus: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// `haar`, `sample` or a ball-measure CSV.
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z2: Option<String>,
    /// Half-open range `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub m_range: Option<String>,
    /// Exponent `−(N+1)` in `λ(x) = λ'(x ϖ^{shift})`.
    #[arg(long, allow_hyphen_values = true)]
    pub char_shift: Option<i64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Ball window `lo,M`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub float: bool,
    /// Truncation level N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub reps_per_m: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
}

fn parse_pair(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected lo,hi, got {s:?}")))?;
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{x:?}: {e}")));
    Ok((p(a)?, p(b)?))
}

/// Merges the optional config file with the command-line flags.
pub fn build_config(cli: &Cli) -> Result<RunConfig> {
    let f = &cli.flags;
    let mut c = match &f.config {
        Some(p) => {
            let mut c = RunConfig::read(p)?;
            c.subcommand = cli.subcommand;
            c
        }
        None => RunConfig::new(cli.subcommand),
    };
    if f.q.is_some() || f.mode.is_some() {
        let base = c.context.unwrap_or(ContextConfig { q: 2, mode: Mode::Carry });
        c.context = Some(ContextConfig { q: f.q.unwrap_or(base.q), mode: f.mode.unwrap_or(base.mode) });
    }
    macro_rules! set {
        ($($src:ident => $dst:expr),* $(,)?) => { $( if let Some(v) = &f.$src { $dst = Some(v.clone()); } )* };
    }
    set!(
        measure => c.inputs.measure, op => c.inputs.op, beta => c.inputs.beta, target => c.inputs.target,
        subset => c.inputs.subset, h_sigma_o => c.inputs.h_sigma_o, kappa => c.inputs.kappa,
        t_minus => c.inputs.t_minus, delta => c.inputs.delta, nu => c.inputs.nu, level => c.inputs.level,
        z1 => c.inputs.z1, z2 => c.inputs.z2, char_shift => c.inputs.char_shift, out => c.output.dir,
        tolerance => c.budgets.tolerance,
    );
    if let Some(r) = &f.m_range {
        c.inputs.m_range = Some(parse_pair(r)?);
    }
    if let Some(w) = &f.window {
        c.budgets.window = parse_pair(w)?;
    }
    let b = &mut c.budgets;
    if let Some(v) = f.steps { b.steps = v; }
    if let Some(v) = f.samples { b.samples = v; }
    if let Some(v) = f.n { b.truncation = v; }
    if let Some(v) = f.n_max { b.n_max = v; }
    if let Some(v) = f.trials { b.trials = v; }
    if let Some(v) = f.k { b.k = v; }
    if let Some(v) = f.reps_per_m { b.reps_per_m = v; }
    if let Some(v) = f.max_steps { b.guard.max_steps = v; }
    if f.float { b.exact = false; }
    if let Some(v) = f.seed { c.seed = v; }
    if let Some(v) = f.format { c.output.format = v; }
    c.validate()?;
    Ok(c)
}

/// Runs one configuration and writes its report; returns the exit code.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config).and_then(|outcome| {
        match &config.output.dir {
            Some(dir) => {
                emit(dir, config, &outcome)?;
            }
            None => print!("{}", render(config, &outcome)?),
        }
        Ok(outcome.status)
    }) {
        Ok(status) => {
            if status != Status::Ok {
                eprintln!("hecke-walk {}: {}", config.subcommand.name(), status.name());
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("hecke-walk {}: {e}", config.subcommand.name());
            error_exit_code(&e)
        }
    }
}

/// Entry point of the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hecke-walk: {e}");
            return error_exit_code(&e);
        }
    };
    match thread_pool() {
        Ok(Some(pool)) => pool.install(|| run(&config)),
        Ok(None) => run(&config),
        Err(e) => {
            eprintln!("hecke-walk: {e}");
            1
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map(Some)
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}
