//! End-to-end runs for one parameter set: generator, trajectory, correlation
//! kernel and windowed spectra.

use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::liouvillian::{Liouvillian, Trajectory, build_liouvillian};
use crate::params::SystemParams;
use crate::spectra::{
    CorrelationKernel, DetectionOperator, FrequencyWindow, SpectrumGrid, WindowId, g1_kernel,
    time_dependent_spectra, time_integrated_spectrum,
};
use crate::spectral_density::SpectralDensityParams;
use crate::units::angular_to_energy;

/// Largest s-grid spacing used for integrated spectra (ps).
pub const INTEGRATED_MAX_STEP_PS: f64 = 0.1;

/// Default number of points per frequency window.
pub const WINDOW_POINTS: usize = 2001;

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: SystemParams,
    pub sd: SpectralDensityParams,
    pub liouvillian: Liouvillian,
}

#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub trajectory: Trajectory,
    pub kernel: CorrelationKernel,
    pub spectra: Vec<SpectrumGrid>,
}

impl Pipeline {
    /// Validates the parameters and builds the generator.
    pub fn new(params: SystemParams, sd: SpectralDensityParams) -> Result<Self> {
        let liouvillian = build_liouvillian(&params, &sd)?;
        Ok(Pipeline { params, sd, liouvillian })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Self::new(cfg.system_params(), cfg.spectral_density())
    }

    pub fn gamma_pe(&self) -> f64 {
        self.liouvillian.gamma_pe
    }

    pub fn detection(&self) -> DetectionOperator {
        DetectionOperator::new(self.params.collection_alpha, self.params.collection_beta)
    }

    /// Default Δω window. Its margin scales with a linewidth estimate built
    /// from the decay and dephasing rates, and its half-width is capped at Δ/2
    /// so the eg and pe windows never overlap.
    pub fn window(&self, id: WindowId, nu: f64, n_points: usize) -> FrequencyWindow {
        let gamma = self.liouvillian.dephasing_rate;
        let gb = self.sd.gamma_b;
        let omega = self.params.omega_drive;
        let (center, linewidth) = match id {
            WindowId::Eg => (0.0, 3.0 * gb + gamma),
            WindowId::Pe => (self.params.delta, self.gamma_pe() + 2.0 * gb + gamma),
        };
        let w = FrequencyWindow::around(id, center, omega, nu, linewidth, n_points);
        let cap = 0.5 * self.params.delta;
        FrequencyWindow { lo: w.lo.max(center - cap), hi: w.hi.min(center + cap), ..w }
    }

    pub fn trajectory(&self, grid: &TimeGrid) -> Result<Trajectory> {
        self.liouvillian.propagate(&self.params.initial_state, grid)
    }

    pub fn kernel(&self, grid: &TimeGrid, det: &DetectionOperator) -> Result<(Trajectory, CorrelationKernel)> {
        let traj = self.trajectory(grid)?;
        let kernel = g1_kernel(&self.liouvillian, &traj, det)?;
        Ok((traj, kernel))
    }

    /// `S(Δω)` over `[0, t_end]` in each requested window.
    pub fn integrated_spectra(
        &self,
        nu: f64,
        t_end: f64,
        windows: &[FrequencyWindow],
    ) -> Result<SpectrumRun> {
        let step = INTEGRATED_MAX_STEP_PS.min(1.0 / (10.0 * nu));
        let grid = TimeGrid::with_max_step(t_end, step)?;
        let (trajectory, kernel) = self.kernel(&grid, &self.detection())?;
        let spectra = windows
            .iter()
            .map(|w| {
                let mut s = time_integrated_spectrum(&kernel, nu, &w.grid())?;
                s.window = Some(w.id);
                s.metadata = self.metadata(nu);
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumRun { trajectory, kernel, spectra })
    }

    /// `R(Δω, t)` on `grid` in each requested window.
    pub fn time_dependent_spectra(
        &self,
        nu: f64,
        grid: &TimeGrid,
        windows: &[FrequencyWindow],
    ) -> Result<SpectrumRun> {
        let (trajectory, kernel) = self.kernel(grid, &self.detection())?;
        let spectra = windows
            .iter()
            .map(|w| {
                let mut s = time_dependent_spectra(&kernel, nu, &w.grid())?;
                s.window = Some(w.id);
                s.metadata = self.metadata(nu);
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumRun { trajectory, kernel, spectra })
    }

    pub fn metadata(&self, nu: f64) -> BTreeMap<String, String> {
        let p = &self.params;
        let sd = &self.sd;
        [
            ("delta_per_ps", p.delta),
            ("omega_per_ps", p.omega_drive),
            ("omega_uev", angular_to_energy(p.omega_drive)),
            ("dephasing_per_ps", self.liouvillian.dephasing_rate),
            ("gamma_pe_per_ps", self.gamma_pe()),
            ("g_per_ps", sd.g),
            ("kappa_per_ps", sd.kappa),
            ("omega_c_per_ps", sd.omega_c_rel),
            ("gamma_b_per_ps", sd.gamma_b),
            ("xi_per_ps", sd.xi),
            ("nu_per_ps", nu),
            ("eigen_condition", self.liouvillian.eigen_condition),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), format!("{v}")))
        .chain([
            ("alpha".to_string(), format!("{}", p.collection_alpha)),
            ("beta".to_string(), format!("{}", p.collection_beta)),
        ])
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::energy_to_angular;

    #[test]
    fn windows_contain_expected_features() {
        let p = Pipeline::new(SystemParams::default(), SpectralDensityParams::default()).unwrap();
        let nu = energy_to_angular(0.3);
        let eg = p.window(WindowId::Eg, nu, WINDOW_POINTS);
        let pe = p.window(WindowId::Pe, nu, WINDOW_POINTS);
        let omega = p.params.omega_drive;
        assert!(eg.lo < -omega && eg.hi > omega);
        assert!(pe.lo < p.params.delta - omega / 2.0 && pe.hi > p.params.delta + omega / 2.0);
        assert_eq!(eg.grid().len(), WINDOW_POINTS);
        assert!((eg.lo + eg.hi).abs() < 1e-15);
        let wide = p.window(WindowId::Eg, 0.5, WINDOW_POINTS);
        assert!(wide.hi <= p.window(WindowId::Pe, 0.5, WINDOW_POINTS).lo);
    }

    #[test]
    fn integrated_run_is_sane() {
        let params = SystemParams::default();
        let p = Pipeline::new(params, SpectralDensityParams::default()).unwrap();
        let nu = 0.02;
        let w = p.window(WindowId::Pe, nu, 201);
        let run = p.integrated_spectra(nu, 300.0, &[w]).unwrap();
        assert!(run.trajectory.is_sane());
        assert_eq!(run.spectra[0].window, Some(WindowId::Pe));
        assert!(run.spectra[0].is_nonnegative());
        assert_eq!(run.spectra[0].metadata["nu_per_ps"], "0.02");
    }
}
