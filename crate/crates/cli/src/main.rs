//! `jspec`: runs one experiment on a matrix-set file and writes CSV/JSON
//! artifacts plus a `manifest.json` that is enough to replay the run.

mod commands;
mod error;
mod output;
mod params;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use joint_spectrum::spectrum::MatrixSet;
use serde::{Deserialize, Serialize};

use crate::commands::Resolved;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::params::Params;

#[derive(Parser)]
#[command(name = "jspec", version, about = "Joint spectra and random matrix products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint-spectrum approximants for word lengths 1..=n.
    Spectrum(Params),
    /// Joint-spectral-radius bracket of the k-th exterior power.
    Jsr(Params),
    /// Weight maxima over the spectrum against JSR brackets, per k.
    Bergerwang(Params),
    /// Lyapunov vector of the uniform (or weighted) random walk.
    Lyapunov(Params),
    /// Empirical rate function on a grid.
    Rate(Params),
    /// Log-moment generating function and its Legendre transform.
    Mgf(Params),
    /// Exponential decay of deviations from the Lyapunov vector.
    Decay(Params),
    /// Proximality diagnostics of generators or of length-n products.
    Proximal(Params),
    /// Additivity defect of κ on random pairs of words.
    Defect(Params),
    /// Search for words that no short proximal word makes loxodromic.
    Ams(Params),
    /// Limit-cone comparison after appending a word to the generators.
    Cone(Params),
    /// Rerun the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Output directory for the rerun.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    command: String,
    version: String,
    status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    seed: u64,
    params: Params,
    resolved: Resolved,
    input_path: PathBuf,
    /// Input file contents, verbatim.
    input: String,
    outputs: Vec<String>,
    started_unix_seconds: u64,
    wall_clock_seconds: f64,
}

type Runner = fn(&MatrixSet, &Params, &mut OutputDir) -> CliResult<Resolved>;

fn runner(name: &str) -> CliResult<Runner> {
    Ok(match name {
        "spectrum" => commands::spectrum,
        "jsr" => commands::jsr,
        "bergerwang" => commands::bergerwang,
        "lyapunov" => commands::lyapunov,
        "rate" => commands::rate,
        "mgf" => commands::mgf,
        "decay" => commands::decay,
        "proximal" => commands::proximal,
        "defect" => commands::defect,
        "ams" => commands::ams,
        "cone" => commands::cone,
        other => return Err(CliError::invalid(format!("unknown command {other:?}"))),
    })
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

fn execute(name: &str, params: Params, input: Option<String>) -> CliResult<()> {
    let run = runner(name)?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();

    let text = match input {
        Some(t) => t,
        None => read_input(&params.input)?,
    };
    let set = MatrixSet::from_json_str(&text)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = params.workers {
        if w == 0 {
            return Err(CliError::invalid("--workers must be at least 1"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;

    let mut out = OutputDir::create(&params.out)?;
    let result = pool.install(|| run(&set, &params, &mut out));

    let (status, error, resolved) = match &result {
        Ok(r) => ("ok", None, r.clone()),
        Err(e) => ("failed", Some(e.to_string()), Resolved::new()),
    };
    let manifest = Manifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.to_string(),
        error,
        seed: params.seed(),
        resolved,
        input_path: params.input.clone(),
        input: text,
        outputs: out.written().to_vec(),
        params,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    };
    out.write_json("manifest.json", &manifest)?;
    result.map(|_| ())
}

fn replay(path: &Path, out: PathBuf, workers: Option<usize>) -> CliResult<()> {
    let text = read_input(path)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut params = manifest.params;
    params.out = out;
    if workers.is_some() {
        params.workers = workers;
    }
    execute(&manifest.command, params, Some(manifest.input))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(p) => execute("spectrum", p, None),
        Command::Jsr(p) => execute("jsr", p, None),
        Command::Bergerwang(p) => execute("bergerwang", p, None),
        Command::Lyapunov(p) => execute("lyapunov", p, None),
        Command::Rate(p) => execute("rate", p, None),
        Command::Mgf(p) => execute("mgf", p, None),
        Command::Decay(p) => execute("decay", p, None),
        Command::Proximal(p) => execute("proximal", p, None),
        Command::Defect(p) => execute("defect", p, None),
        Command::Ams(p) => execute("ams", p, None),
        Command::Cone(p) => execute("cone", p, None),
        Command::Replay {
            manifest,
            out,
            workers,
        } => replay(&manifest, out, workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
