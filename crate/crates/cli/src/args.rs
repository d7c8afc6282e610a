use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "zeno-trap", version, about = "Driven three-level emitter in a structured photonic reservoir")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving the CSV files and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Drive strength Ω in μeV; repeatable. Overrides `omega_uev`.
    #[arg(long = "omega-uev", global = true)]
    pub omega_uev: Vec<f64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "ZENO_TRAP_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Spectral density Γ(ω) around the cavity and the decay rate Γ_pe(Ω).
    Rates {
        /// Points of the generated Ω grid (ignored when --omega-uev is given).
        #[arg(long, default_value_t = 201)]
        omega_points: usize,
        #[arg(long, default_value_t = 500.0)]
        omega_max_uev: f64,
    },
    /// Density-matrix trajectory from |p⟩⟨p|.
    Dynamics,
    /// Time-dependent or time-integrated emission spectrum.
    Spectrum {
        #[arg(long, value_enum, default_value_t = Mode::Integrated)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Window::Both)]
        window: Window,
    },
    /// Doublet linewidth, separation and emission delay versus Ω.
    Sweep,
    /// Closed-form toy models against direct Schrödinger integration.
    Toy {
        #[arg(long, default_value_t = 0.01)]
        omega_pe_per_ps: f64,
        #[arg(long, default_value_t = 0.1)]
        omega_eg_per_ps: f64,
        #[arg(long, default_value_t = 1000.0)]
        t_end_ps: f64,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Td,
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Window {
    Eg,
    Pe,
    Both,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rates { .. } => "rates",
            Command::Dynamics => "dynamics",
            Command::Spectrum { .. } => "spectrum",
            Command::Sweep => "sweep",
            Command::Toy { .. } => "toy",
        }
    }
}
