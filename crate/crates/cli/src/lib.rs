//! Experiment harness around `ovskale-core`: JSON configs, CSV/JSON outputs,
//! run manifests and the `ovskale` command line.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod plotdata;
pub mod schema;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;
use experiments::RunContext;
use manifest::{sha256_hex, Manifest};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "OVSKALE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ovskale", version, about = "Run correlation-hierarchy experiments from a JSON config")]
pub struct Cli {
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a config without computing anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the JSON Schema of the config format.
    Schema,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(CliError::config)
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// SHA-256 of the effective config (seed override applied) with the output
/// directory left out, so relocated reruns hash the same.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output.dir = PathBuf::new();
    sha256_hex(c.to_json().as_bytes())
}

/// Runs one experiment and writes its manifest; returns the exit code.
pub fn run_experiment(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>, verbose: bool) -> Result<i32, CliError> {
    let start = Instant::now();
    let mut cfg = load(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output.dir = o;
    }
    let out_dir = cfg.output.dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let pool = thread_pool()?;
    let ctx = RunContext {
        config: &cfg,
        base_dir: config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        out_dir: out_dir.clone(),
        seed: cfg.seed,
        verbose,
    };
    let result = pool.install(|| experiments::run(&ctx));
    let (result, error) = match result {
        Ok(r) => (r, None),
        Err(e @ CliError::Numerical(_)) => (experiments::RunOutput::default(), Some(e)),
        Err(e) => return Err(e),
    };
    let passed = error.is_none() && result.assertions.iter().all(|a| a.passed);
    let exit_code = match &error {
        Some(e) => e.exit_code(),
        None if passed => 0,
        None => 1,
    };
    for a in &result.assertions {
        if verbose || !a.passed {
            eprintln!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
        }
    }
    let manifest = Manifest {
        tool: "ovskale",
        version: env!("CARGO_PKG_VERSION"),
        core_version: ovskale_core::VERSION,
        experiment: cfg.experiment.name().to_string(),
        seed: cfg.seed,
        config_sha256: config_hash(&cfg),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: result.files,
        assertions: result.assertions,
        passed,
        exit_code,
        error: error.as_ref().map(ToString::to_string),
    };
    io::write_json(&out_dir.join("manifest.json"), &manifest)?;
    match error {
        Some(e) => Err(e),
        None => Ok(exit_code),
    }
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out, seed } => run_experiment(&config, out, seed, cli.verbose),
        Command::Validate { config } => load(&config).map(|c| {
            println!("config ok: experiment {}", c.experiment.name());
            0
        }),
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema::config_schema()).expect("schema serializes"));
            Ok(0)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
