use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use optoscatter::config::{Job, RunConfig};
use optoscatter::export::{write_json, SCHEMA_VERSION};
use optoscatter::run::{run, sweep, ErrorReport};
use optoscatter::{presets, Error, Execution, Result};

#[derive(Parser, Debug)]
#[command(name = "optoscatter", version, about = "Two-photon scattering spectra of a mixed optomechanical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Start from a preset (fig2a … fig5c).
    #[arg(long, global = true, value_name = "ID")]
    preset: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Sets every Fock cutoff (j, s, s', l) to N.
    #[arg(long, global = true, value_name = "N")]
    trunc: Option<usize>,
    /// Truncation convergence tolerance (relative).
    #[arg(long, global = true, value_name = "X")]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// 2D joint spectra on the configured grids.
    Spectrum,
    /// Spectrum along Δp = Δq.
    Diagonal,
    /// Predicted resonance lines as JSON.
    Resonances,
    /// Franck–Condon table as CSV.
    FcTable,
    /// Time-domain oracle against the analytic spectrum.
    OracleCompare,
    /// Everything a preset produces.
    Preset {
        /// Preset id; alternatively use --preset.
        id: Option<String>,
    },
    /// Every job declared in the configuration.
    Run,
    /// One run per value of a scalar parameter.
    Sweep {
        /// g1, g2, gamma_c, omega_m, delta1, delta2 or epsilon.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
}

fn base_config(common: &Common, preset: Option<&str>) -> Result<RunConfig> {
    let mut cfg = match (&common.config, preset) {
        (Some(_), Some(_)) => {
            return Err(Error::Validation {
                field: "preset".into(),
                message: "give either --config or --preset, not both".into(),
            })
        }
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(id)) => presets::config(id)?,
        (None, None) => RunConfig::default(),
    };
    if let Some(n) = common.trunc {
        cfg.truncation.j_max = n;
        cfg.truncation.s_max = n;
    }
    if let Some(tol) = common.tolerance {
        cfg.truncation.tolerance = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => Err(Error::Validation {
            field: "threads".into(),
            message: "must be >= 1".into(),
        }),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Validation {
                    field: "threads".into(),
                    message: e.to_string(),
                })?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::warn!("built without the `parallel` feature; running sequentially");
            Ok(Execution::Sequential)
        }
        None => Ok(Execution::default()),
    }
}

fn output_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_outputs(paths: &[PathBuf]) {
    let list: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    println!("{}", json!({ "schema_version": SCHEMA_VERSION, "outputs": list }));
}

fn execute(cli: &Cli) -> Result<Option<PathBuf>> {
    let exec = execution(cli.common.threads)?;
    let single = |job: Job| -> Result<Option<PathBuf>> {
        let mut cfg = base_config(&cli.common, cli.common.preset.as_deref())?;
        cfg.jobs = vec![job];
        run_all(&cli.common, &cfg, exec)
    };
    match &cli.command {
        Command::Spectrum => single(Job::Spectrum),
        Command::Diagonal => single(Job::Diagonal),
        Command::Resonances => single(Job::Resonances),
        Command::FcTable => single(Job::FcTable),
        Command::OracleCompare => single(Job::OracleCompare),
        Command::Preset { id } => {
            let id = id.as_deref().or(cli.common.preset.as_deref()).ok_or_else(|| Error::Validation {
                field: "preset".into(),
                message: "missing preset id".into(),
            })?;
            let cfg = base_config(&cli.common, Some(id))?;
            run_all(&cli.common, &cfg, exec)
        }
        Command::Run => {
            let cfg = base_config(&cli.common, cli.common.preset.as_deref())?;
            run_all(&cli.common, &cfg, exec)
        }
        Command::Sweep { param, values } => {
            let cfg = base_config(&cli.common, cli.common.preset.as_deref())?;
            let out = output_dir(&cli.common, &cfg);
            let manifest = sweep(&cfg, param, values, &out, exec)?;
            println!(
                "{}",
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "manifest": out.join(optoscatter::run::MANIFEST_NAME).display().to_string(),
                    "runs": manifest.runs.len(),
                    "failed": manifest.failed,
                })
            );
            Ok(Some(out))
        }
    }
}

fn run_all(common: &Common, cfg: &RunConfig, exec: Execution) -> Result<Option<PathBuf>> {
    let out = output_dir(common, cfg);
    match run(cfg, &out, exec) {
        Ok(o) => {
            print_outputs(&o.outputs);
            Ok(Some(out))
        }
        Err(e) => {
            write_error(&out, &e);
            Err(e)
        }
    }
}

fn write_error(out: &Path, e: &Error) {
    if out.is_dir() {
        if let Err(w) = write_json(&out.join("error.json"), &ErrorReport::from(e)) {
            log::warn!("could not write error report: {w}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport::from(&e);
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
