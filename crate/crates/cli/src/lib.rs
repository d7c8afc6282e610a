//! Command-line front end: configuration loading, the subcommand pipelines,
//! and CSV plus manifest output.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;
use zeno_trap::RunConfig;

pub use args::{Cli, Command, GlobalArgs, Mode, Window};
pub use error::CliError;
use output::RunManifest;

pub fn load_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    Ok(match &global.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    })
}

fn worker_count(global: &GlobalArgs) -> Result<usize, CliError> {
    match global.workers {
        Some(0) => Err(CliError::Config("--workers must be >= 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs one subcommand on a dedicated worker pool and writes its outputs and
/// manifest to `--out-dir`.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let global = &cli.global;
    let cfg = load_config(global)?;
    let workers = worker_count(global)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))?;

    let omegas = if global.omega_uev.is_empty() {
        match cli.command {
            Command::Sweep => commands::DEFAULT_SWEEP_OMEGAS.to_vec(),
            _ => vec![cfg.omega_uev],
        }
    } else {
        global.omega_uev.clone()
    };

    let out = pool.install(|| match &cli.command {
        Command::Rates { omega_points, omega_max_uev } => {
            commands::cmd_rates(&cfg, &global.omega_uev, *omega_points, *omega_max_uev)
        }
        Command::Dynamics => commands::cmd_dynamics(&cfg, &omegas),
        Command::Spectrum { mode, window } => commands::cmd_spectrum(&cfg, &omegas, *mode, *window),
        Command::Sweep => commands::cmd_sweep(&cfg, &omegas),
        Command::Toy { omega_pe_per_ps, omega_eg_per_ps, t_end_ps, points } => {
            commands::cmd_toy(*omega_pe_per_ps, *omega_eg_per_ps, *t_end_ps, *points)
        }
    })?;

    let mut resolved = cfg.clone();
    resolved.omega_c_mev = Some(cfg.omega_c_mev.unwrap_or(cfg.delta_mev));
    let manifest = RunManifest {
        tool: "zeno-trap",
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        command: cli.command.name().to_string(),
        parameters: json!({ "config": resolved, "omega_uev": omegas }),
        grids: out.grids,
        files: Vec::new(),
        diagnostics: out.diagnostics,
    };
    let manifest = output::write_outputs(&global.out_dir, &out.files, manifest)?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}
