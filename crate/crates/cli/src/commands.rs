//! Subcommand pipelines. Each returns its output files in memory; writing is
//! left to a single writer in [`crate::run`].

use rayon::prelude::*;
use serde_json::{Value, json};

use zeno_trap::analysis::{SweepResult, SweepSettings, linewidth_sweep};
use zeno_trap::grid::linspace;
use zeno_trap::spectra::{FrequencyWindow, SpectrumKind};
use zeno_trap::spectral_density::{gamma_cav, gamma_total, pe_decay_rate};
use zeno_trap::toymodels::{schrodinger_oracle, three_level_survival};
use zeno_trap::units::{angular_to_energy, energy_to_angular};
use zeno_trap::{Pipeline, RunConfig, TimeGrid, WindowId};

use crate::args::{Mode, Window};
use crate::error::CliError;
use crate::output::{Csv, Diagnostics, OutputFile, num, opt};

/// Sweep grid used when no `--omega-uev` is given.
pub const DEFAULT_SWEEP_OMEGAS: [f64; 7] = [0.0, 10.0, 20.0, 50.0, 100.0, 140.0, 170.0];

/// Points in the spectral-density window of `rates`.
const DENSITY_POINTS: usize = 2001;

#[derive(Debug)]
pub struct CommandOutput {
    pub files: Vec<OutputFile>,
    pub grids: Value,
    pub diagnostics: Option<Diagnostics>,
    /// Set when outputs were produced but the command as a whole failed.
    pub failure: Option<CliError>,
}

impl CommandOutput {
    fn new(files: Vec<OutputFile>, grids: Value, diagnostics: Option<Diagnostics>) -> Self {
        CommandOutput { files, grids, diagnostics, failure: None }
    }
}

fn checked(cfg: &RunConfig) -> Result<RunConfig, CliError> {
    Ok(cfg.clone().checked()?)
}

/// File-name tag for a drive strength.
fn omega_tag(omega_uev: f64) -> String {
    format!("omega_{}uev", num(omega_uev))
}

pub fn cmd_rates(
    cfg: &RunConfig,
    explicit: &[f64],
    omega_points: usize,
    omega_max_uev: f64,
) -> Result<CommandOutput, CliError> {
    let cfg = checked(cfg)?;
    let omegas = if !explicit.is_empty() {
        explicit.to_vec()
    } else {
        match omega_points {
            0 => return Err(CliError::Config("empty Ω grid (--omega-points 0)".into())),
            1 => vec![0.0],
            n => {
                if !(omega_max_uev > 0.0 && omega_max_uev.is_finite()) {
                    return Err(CliError::Config(format!("--omega-max-uev must be > 0, got {omega_max_uev}")));
                }
                linspace(0.0, omega_max_uev, n)
            }
        }
    };
    if let Some(bad) = omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(CliError::Config(format!("Ω must be finite and >= 0, got {bad}")));
    }

    let sd = cfg.spectral_density();
    let delta = cfg.system_params().delta;
    let lo = sd.omega_c_rel - sd.xi;
    let hi = sd.omega_c_rel + sd.xi;
    let mut density = Csv::new(&["domega_uev", "gamma_per_ps", "gamma_cav_per_ps"]);
    for w in linspace(lo, hi, DENSITY_POINTS) {
        density.nums(&[angular_to_energy(w), gamma_total(&sd, w), gamma_cav(&sd, w)]);
    }

    let gamma0 = pe_decay_rate(&sd, delta, 0.0);
    let mut rates = Csv::new(&["omega_uev", "gamma_pe_per_ps", "ratio_to_undriven"]);
    for &w in &omegas {
        let g = pe_decay_rate(&sd, delta, energy_to_angular(w));
        rates.nums(&[w, g, g / gamma0]);
    }
    let grids = json!({
        "density_window_uev": [angular_to_energy(lo), angular_to_energy(hi)],
        "density_points": DENSITY_POINTS,
        "omega_uev": omegas,
    });
    Ok(CommandOutput::new(
        vec![density.into_file("rates_density.csv"), rates.into_file("rates_gamma_pe.csv")],
        grids,
        None,
    ))
}

pub fn cmd_dynamics(cfg: &RunConfig, omegas: &[f64]) -> Result<CommandOutput, CliError> {
    let grid = TimeGrid::new(0.0, cfg.t_end_ps, cfg.n_time)?;
    let results: Vec<Result<(OutputFile, Diagnostics), CliError>> = omegas
        .par_iter()
        .map(|&w| {
            let c = checked(&cfg.with_omega_uev(w))?;
            let p = Pipeline::from_config(&c)?;
            log::info!("dynamics: Ω = {w} μeV");
            let traj = p.trajectory(&grid)?;
            let mut diag = Diagnostics::default();
            diag.record(&traj, p.liouvillian.eigen_condition);
            let mut csv = Csv::new(&[
                "t_ps", "rho_gg", "rho_ee", "rho_pp", "re_rho_eg", "im_rho_eg", "re_rho_pe", "im_rho_pe",
                "re_rho_pg", "im_rho_pg", "trace_err", "min_eig",
            ]);
            use zeno_trap::linalg::{E, G, P};
            for (i, rho) in traj.states.iter().enumerate() {
                let (eg, pe, pg) = (rho.element(E, G), rho.element(P, E), rho.element(P, G));
                let d = &traj.diagnostics[i];
                csv.nums(&[
                    grid.at(i),
                    rho.population(G),
                    rho.population(E),
                    rho.population(P),
                    eg.re,
                    eg.im,
                    pe.re,
                    pe.im,
                    pg.re,
                    pg.im,
                    d.trace_error,
                    d.min_eigenvalue,
                ]);
            }
            Ok((csv.into_file(format!("dynamics_{}.csv", omega_tag(w))), diag))
        })
        .collect();
    let mut files = Vec::new();
    let mut diag = Diagnostics::default();
    for r in results {
        let (f, d) = r?;
        files.push(f);
        diag.max_trace_error = diag.max_trace_error.max(d.max_trace_error);
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(d.max_hermiticity_error);
        diag.min_eigenvalue = diag.min_eigenvalue.min(d.min_eigenvalue);
        diag.max_eigen_condition = diag.max_eigen_condition.max(d.max_eigen_condition);
    }
    let grids = json!({ "t_ps": [grid.t_start, grid.t_end], "n_time": grid.n_points, "omega_uev": omegas });
    Ok(CommandOutput::new(files, grids, Some(diag)))
}

fn window_json(w: &FrequencyWindow) -> Value {
    json!({
        "id": w.id.as_str(),
        "domega_uev": [angular_to_energy(w.lo), angular_to_energy(w.hi)],
        "points": w.n_points,
    })
}

pub fn cmd_spectrum(cfg: &RunConfig, omegas: &[f64], mode: Mode, window: Window) -> Result<CommandOutput, CliError> {
    let ids: &[WindowId] = match window {
        Window::Eg => &[WindowId::Eg],
        Window::Pe => &[WindowId::Pe],
        Window::Both => &[WindowId::Eg, WindowId::Pe],
    };
    let with_id = ids.len() > 1;
    let mut files = Vec::new();
    let mut diag = Diagnostics::default();
    let mut grid_info = Vec::new();
    for &w in omegas {
        let c = checked(&cfg.with_omega_uev(w))?;
        let p = Pipeline::from_config(&c)?;
        log::info!("spectrum: Ω = {w} μeV, mode {mode:?}");
        let (run, name) = match mode {
            Mode::Integrated => {
                let nu = c.nu_integrated();
                let windows: Vec<_> = ids.iter().map(|&id| p.window(id, nu, zeno_trap::pipeline::WINDOW_POINTS)).collect();
                grid_info.push(json!({
                    "omega_uev": w,
                    "nu_uev": angular_to_energy(nu),
                    "integration_T_ps": c.integration_t_ps,
                    "windows": windows.iter().map(window_json).collect::<Vec<_>>(),
                }));
                (p.integrated_spectra(nu, c.integration_t_ps, &windows)?, "integrated")
            }
            Mode::Td => {
                let nu = c.nu_time_dependent();
                let grid = TimeGrid::new(0.0, c.t_end_ps, c.n_time)?;
                let windows: Vec<_> = ids.iter().map(|&id| p.window(id, nu, zeno_trap::pipeline::WINDOW_POINTS)).collect();
                grid_info.push(json!({
                    "omega_uev": w,
                    "nu_uev": angular_to_energy(nu),
                    "t_ps": [grid.t_start, grid.t_end],
                    "n_time": grid.n_points,
                    "windows": windows.iter().map(window_json).collect::<Vec<_>>(),
                }));
                (p.time_dependent_spectra(nu, &grid, &windows)?, "td")
            }
        };
        diag.record(&run.trajectory, p.liouvillian.eigen_condition);
        let mut header = Vec::new();
        if with_id {
            header.push("window");
        }
        match mode {
            Mode::Integrated => header.extend(["domega_uev", "S"]),
            Mode::Td => header.extend(["t_ps", "domega_uev", "R"]),
        }
        let mut csv = Csv::new(&header);
        for s in &run.spectra {
            let id = s.window.map(|w| w.as_str()).unwrap_or("");
            let dw: Vec<String> = s.domega.iter().map(|&x| num(angular_to_energy(x))).collect();
            match &s.kind {
                SpectrumKind::Integrated { .. } => {
                    for (x, v) in dw.iter().zip(&s.values) {
                        let v = num(*v);
                        if with_id { csv.row([id, x, &v]) } else { csv.row([x.as_str(), &v]) }
                    }
                }
                SpectrumKind::TimeDependent { times } => {
                    for (i, t) in times.iter().enumerate() {
                        let t = num(*t);
                        for (x, v) in dw.iter().zip(s.row(i)) {
                            let v = num(*v);
                            if with_id { csv.row([id, &t, x, &v]) } else { csv.row([t.as_str(), x, &v]) }
                        }
                    }
                }
            }
        }
        files.push(csv.into_file(format!("spectrum_{name}_{}.csv", omega_tag(w))));
    }
    Ok(CommandOutput::new(files, Value::Array(grid_info), Some(diag)))
}

pub fn sweep_csv(result: &SweepResult) -> OutputFile {
    let mut csv = Csv::new(&[
        "omega_uev", "gamma_pe_per_ps", "fwhm_lower_uev", "fwhm_upper_uev", "separation_uev", "delay_ps", "status",
    ]);
    for p in &result.points {
        csv.row([
            num(p.omega_uev),
            num(p.gamma_pe_per_ps),
            num(p.fwhm_lower_uev),
            num(p.fwhm_upper_uev),
            num(p.separation_uev),
            opt(p.delay_ps),
            p.status.replace(',', ";"),
        ]);
    }
    csv.into_file("sweep.csv")
}

pub fn cmd_sweep(cfg: &RunConfig, omegas: &[f64]) -> Result<CommandOutput, CliError> {
    let mut base_check = cfg.clone();
    if let Some(&w) = omegas.first() {
        base_check.omega_uev = w;
    }
    let errors: Vec<_> = base_check
        .validate()
        .into_iter()
        .filter(|v| v.parameter != "omega_drive")
        .collect();
    if !errors.is_empty() {
        return Err(zeno_trap::Error::InvalidParams(errors).into());
    }
    let mut settings = SweepSettings::new(cfg.clone());
    settings.with_delay = true;
    let result = linewidth_sweep(omegas, &settings);
    for p in &result.points {
        log::info!("sweep: Ω = {} μeV -> {}", p.omega_uev, p.status);
    }
    let ok: Vec<_> = result.points.iter().filter(|p| p.ok()).collect();
    let diag = (!ok.is_empty()).then(|| Diagnostics {
        max_trace_error: ok.iter().map(|p| p.max_trace_error).fold(0.0, f64::max),
        max_hermiticity_error: ok.iter().map(|p| p.max_hermiticity_error).fold(0.0, f64::max),
        min_eigenvalue: ok.iter().map(|p| p.min_eigenvalue).fold(f64::INFINITY, f64::min),
        max_eigen_condition: ok.iter().map(|p| p.eigen_condition).fold(0.0, f64::max),
    });
    let grids = json!({
        "omega_uev": result.omega_values(),
        "window_points": settings.window_points,
        "integration_T_ps": cfg.integration_t_ps,
        "t_ps": [0.0, cfg.t_end_ps],
        "n_time": cfg.n_time,
    });
    let mut out = CommandOutput::new(vec![sweep_csv(&result)], grids, diag);
    if !result.any_ok() {
        out.failure = Some(CliError::Numerical("no sweep point succeeded".into()));
    }
    Ok(out)
}

pub fn cmd_toy(omega_pe: f64, omega_eg: f64, t_end: f64, points: usize) -> Result<CommandOutput, CliError> {
    for (name, v) in [("--omega-pe-per-ps", omega_pe), ("--omega-eg-per-ps", omega_eg)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::Config(format!("{name} must be >= 0, got {v}")));
        }
    }
    let grid = TimeGrid::new(0.0, t_end, points)?;
    let t = grid.times();
    let oracle = schrodinger_oracle(omega_pe, omega_eg, &t)?;
    let mut csv = Csv::new(&["t_ps", "survival_closed_form", "survival_oracle", "abs_diff"]);
    for (ti, o) in t.iter().zip(&oracle) {
        let closed = three_level_survival(omega_pe, omega_eg, *ti);
        csv.nums(&[*ti, closed, *o, (closed - o).abs()]);
    }
    let grids = json!({
        "t_ps": [grid.t_start, grid.t_end],
        "points": points,
        "omega_pe_per_ps": omega_pe,
        "omega_eg_per_ps": omega_eg,
    });
    Ok(CommandOutput::new(vec![csv.into_file("toy.csv")], grids, None))
}
