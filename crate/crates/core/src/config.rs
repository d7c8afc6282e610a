//! Flat TOML run configuration. Every key is optional; unknown keys are
//! rejected. Energies are in meV/μeV and times in ps here; [`RunConfig`]
//! converts to the internal ps⁻¹ units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::params::{DephasingModel, SystemParams, Violation, validate};
use crate::spectral_density::{SpectralDensityParams, coupling_from_peak_time};
use crate::units::{energy_to_angular, mev_to_angular};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DephasingMode {
    #[default]
    None,
    Fixed,
    Phonon,
}

/// A collection weight given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Real(f64),
    Complex([f64; 2]),
}

impl Weight {
    pub fn value(&self) -> C64 {
        match *self {
            Weight::Real(re) => C64::new(re, 0.0),
            Weight::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub delta_mev: f64,
    pub omega_uev: f64,
    pub kappa_mev: f64,
    /// Background lifetime Γ_B⁻¹.
    pub gamma_b_inv_ps: f64,
    /// Cavity Purcell time `(4g²/κ)⁻¹`.
    pub cavity_peak_inv_ps: f64,
    pub xi_mev: f64,
    /// Cavity center; defaults to `delta_mev` (resonant cavity).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c_mev: Option<f64>,
    pub dephasing_mode: DephasingMode,
    /// Fixed dephasing rate ħγ.
    pub gamma_uev: f64,
    pub alpha_ph_ps2: f64,
    pub temperature_k: f64,
    pub alpha_col: Weight,
    pub beta_col: Weight,
    /// Span and sampling of dynamics and time-dependent spectra.
    pub t_end_ps: f64,
    pub n_time: usize,
    /// Spectrometer half-width for integrated spectra.
    pub spectrometer_nu_uev: f64,
    #[serde(rename = "integration_T_ps")]
    pub integration_t_ps: f64,
    /// Spectrometer response time ν⁻¹ for time-dependent spectra.
    pub td_nu_inv_ps: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            delta_mev: 10.0,
            omega_uev: 100.0,
            kappa_mev: 0.1,
            gamma_b_inv_ps: 500.0,
            cavity_peak_inv_ps: 20.0,
            xi_mev: 2.0,
            omega_c_mev: None,
            dephasing_mode: DephasingMode::None,
            gamma_uev: 1.0,
            alpha_ph_ps2: 0.03,
            temperature_k: 4.0,
            alpha_col: Weight::Real(1.0),
            beta_col: Weight::Real(1.0),
            t_end_ps: 100.0,
            n_time: 1001,
            spectrometer_nu_uev: 0.3,
            integration_t_ps: 3000.0,
            td_nu_inv_ps: 2.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_omega_uev(&self, omega_uev: f64) -> Self {
        RunConfig { omega_uev, ..self.clone() }
    }

    pub fn dephasing(&self) -> DephasingModel {
        match self.dephasing_mode {
            DephasingMode::None => DephasingModel::None,
            DephasingMode::Fixed => DephasingModel::Fixed { gamma: energy_to_angular(self.gamma_uev) },
            DephasingMode::Phonon => {
                DephasingModel::Phonon { alpha_ph: self.alpha_ph_ps2, temperature: self.temperature_k }
            }
        }
    }

    pub fn system_params(&self) -> SystemParams {
        SystemParams {
            delta: mev_to_angular(self.delta_mev),
            omega_drive: energy_to_angular(self.omega_uev),
            dephasing: self.dephasing(),
            collection_alpha: self.alpha_col.value(),
            collection_beta: self.beta_col.value(),
            ..SystemParams::default()
        }
    }

    pub fn spectral_density(&self) -> SpectralDensityParams {
        let kappa = mev_to_angular(self.kappa_mev);
        SpectralDensityParams {
            g: coupling_from_peak_time(kappa, self.cavity_peak_inv_ps),
            kappa,
            omega_c_rel: mev_to_angular(self.omega_c_mev.unwrap_or(self.delta_mev)),
            gamma_b: 1.0 / self.gamma_b_inv_ps,
            xi: mev_to_angular(self.xi_mev),
        }
    }

    /// Spectrometer half-width ν (ps⁻¹) for integrated spectra.
    pub fn nu_integrated(&self) -> f64 {
        energy_to_angular(self.spectrometer_nu_uev)
    }

    /// Spectrometer half-width ν (ps⁻¹) for time-dependent spectra.
    pub fn nu_time_dependent(&self) -> f64 {
        1.0 / self.td_nu_inv_ps
    }

    /// Physical parameter violations plus the numerical settings.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let positive = [
            ("cavity_peak_inv_ps", self.cavity_peak_inv_ps),
            ("gamma_b_inv_ps", self.gamma_b_inv_ps),
            ("t_end_ps", self.t_end_ps),
            ("spectrometer_nu_uev", self.spectrometer_nu_uev),
            ("integration_T_ps", self.integration_t_ps),
            ("td_nu_inv_ps", self.td_nu_inv_ps),
        ];
        for (name, val) in positive {
            if !(val.is_finite() && val > 0.0) {
                v.push(Violation { parameter: name, message: format!("must be > 0, got {val}") });
            }
        }
        if self.n_time < 2 {
            v.push(Violation { parameter: "n_time", message: format!("must be >= 2, got {}", self.n_time) });
        }
        v.extend(validate(&self.system_params(), &self.spectral_density()));
        v
    }

    /// Returns `self` if valid, otherwise an [`Error::InvalidParams`].
    pub fn checked(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() { Ok(self) } else { Err(Error::InvalidParams(v)) }
    }
}
