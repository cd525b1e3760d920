//! sfkit: batch runner for the spectral flow toolkit.
//!
//! `sfkit run <scenario>` executes a JSON scenario and writes result.json
//! (plus CSV artifacts) into the output directory. `sfkit report
//! conventions` emits the formula/oracle ratio table. Outputs are
//! deterministic for a fixed scenario and seed, independent of the thread
//! count.

mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use scenario::{RunConfig, ScenarioFile};
use sfkit_core::error::SfError;

#[derive(Parser)]
#[command(name = "sfkit", about = "Spectral flow toolkit batch runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for result.json and CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads (requires the parallel build; ignored otherwise).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override numeric tolerances (quadrature and kernel/rank cutoffs).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (path, or a name resolved in ./scenarios).
    Run { scenario: String },
    /// Emit a named report.
    Report {
        #[command(subcommand)]
        which: ReportKind,
    },
}

#[derive(Subcommand)]
enum ReportKind {
    /// Formula-vs-oracle convention ratios as CSV.
    Conventions,
}

fn resolve_scenario(arg: &str) -> Result<PathBuf, SfError> {
    let direct = Path::new(arg);
    if direct.is_file() {
        return Ok(direct.to_path_buf());
    }
    for candidate in [
        PathBuf::from(format!("{arg}.json")),
        PathBuf::from("scenarios").join(arg),
        PathBuf::from("scenarios").join(format!("{arg}.json")),
    ] {
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(SfError::structural(format!(
        "scenario '{arg}' not found (tried the path itself and ./scenarios)"
    )))
}

fn setup_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

fn run(cli: &Cli) -> Result<(), SfError> {
    setup_threads(cli.threads);
    let cfg = RunConfig {
        seed_override: cli.seed,
        tol_override: cli.tol,
    };
    let output = match &cli.command {
        Command::Run { scenario } => {
            let path = resolve_scenario(scenario)?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| SfError::structural(format!("cannot read {path:?}: {e}")))?;
            let parsed: ScenarioFile = serde_json::from_str(&text)
                .map_err(|e| SfError::structural(format!("invalid scenario JSON: {e}")))?;
            scenario::run_scenario(&parsed, &cfg)?
        }
        Command::Report {
            which: ReportKind::Conventions,
        } => report::run_conventions(&cfg)?,
    };

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| SfError::structural(format!("cannot create output directory: {e}")))?;
    let result_path = cli.out.join("result.json");
    let pretty = serde_json::to_string_pretty(&output.result)
        .map_err(|e| SfError::structural(e.to_string()))?;
    std::fs::write(&result_path, format!("{pretty}\n"))
        .map_err(|e| SfError::structural(format!("cannot write {result_path:?}: {e}")))?;
    for artifact in &output.artifacts {
        let p = cli.out.join(&artifact.name);
        std::fs::write(&p, &artifact.content)
            .map_err(|e| SfError::structural(format!("cannot write {p:?}: {e}")))?;
    }
    println!("{pretty}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = json!({
                "error": {
                    "kind": err.kind(),
                    "message": err.to_string(),
                }
            });
            eprintln!("{payload}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
