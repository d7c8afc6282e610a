//! Validated simulation parameters. All frequencies and rates are stored as
//! angular frequencies in ps⁻¹ relative to the laser (= |e⟩→|g⟩) frequency.

use std::fmt;

use serde::Serialize;

use crate::linalg::{C64, Mat3, P, ket_bra};
use crate::spectral_density::SpectralDensityParams;
use crate::state::DensityMatrix;
use crate::units::{energy_to_angular, mev_to_angular, thermal_angular};

/// Pure dephasing of |e⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DephasingModel {
    None,
    /// Constant rate γ in ps⁻¹.
    Fixed { gamma: f64 },
    /// Excitation-induced phonon dephasing γ = π α k_B T Ω², with the
    /// coupling `alpha_ph` in ps² and the temperature in K.
    Phonon { alpha_ph: f64, temperature: f64 },
}

impl DephasingModel {
    /// Dephasing rate in ps⁻¹ at drive strength `omega_drive` (ps⁻¹).
    pub fn rate(&self, omega_drive: f64) -> f64 {
        match *self {
            DephasingModel::None => 0.0,
            DephasingModel::Fixed { gamma } => gamma,
            DephasingModel::Phonon { alpha_ph, temperature } => {
                std::f64::consts::PI * alpha_ph * thermal_angular(temperature) * omega_drive * omega_drive
            }
        }
    }
}

/// Dephasing rate (ps⁻¹) of `model` at drive strength `omega_drive` (ps⁻¹).
pub fn dephasing_rate(model: &DephasingModel, omega_drive: f64) -> f64 {
    model.rate(omega_drive)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    /// Level-spacing asymmetry Δ = ω_p − 2ω_e (ps⁻¹).
    pub delta: f64,
    /// Rabi frequency Ω of the g–e drive (ps⁻¹).
    pub omega_drive: f64,
    pub dephasing: DephasingModel,
    /// Weight of σ_eg in the detected field.
    pub collection_alpha: C64,
    /// Weight of σ_pe in the detected field.
    pub collection_beta: C64,
    #[serde(skip)]
    pub initial_state: DensityMatrix,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            delta: mev_to_angular(10.0),
            omega_drive: energy_to_angular(100.0),
            dephasing: DephasingModel::None,
            collection_alpha: C64::new(1.0, 0.0),
            collection_beta: C64::new(1.0, 0.0),
            initial_state: DensityMatrix::pure_basis(P),
        }
    }
}

impl SystemParams {
    pub fn with_omega(&self, omega_drive: f64) -> Self {
        SystemParams { omega_drive, ..self.clone() }
    }

    pub fn dephasing_rate(&self) -> f64 {
        self.dephasing.rate(self.omega_drive)
    }

    /// |p⟩⟨p| projector, the default initial state.
    pub fn upper_projector() -> Mat3 {
        ket_bra(P, P)
    }
}

/// A violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub parameter: &'static str,
    pub message: String,
}

impl Violation {
    fn new(parameter: &'static str, message: impl Into<String>) -> Self {
        Violation { parameter, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.parameter, self.message)
    }
}

/// Checks every parameter invariant plus the regime constraints of the
/// model. Returns all violations found; an empty list means the parameter set
/// is usable.
pub fn validate(params: &SystemParams, sd: &SpectralDensityParams) -> Vec<Violation> {
    let mut v = Vec::new();
    let finite = |x: f64| x.is_finite();

    if !finite(params.delta) || params.delta <= 0.0 {
        v.push(Violation::new("delta", format!("must be > 0, got {}", params.delta)));
    }
    if !finite(params.omega_drive) || params.omega_drive < 0.0 {
        v.push(Violation::new("omega_drive", format!("must be >= 0, got {}", params.omega_drive)));
    }
    match params.dephasing {
        DephasingModel::None => {}
        DephasingModel::Fixed { gamma } => {
            if !finite(gamma) || gamma < 0.0 {
                v.push(Violation::new("gamma", format!("must be >= 0, got {gamma}")));
            }
        }
        DephasingModel::Phonon { alpha_ph, temperature } => {
            if !finite(alpha_ph) || alpha_ph < 0.0 {
                v.push(Violation::new("alpha_ph", format!("must be >= 0, got {alpha_ph}")));
            }
            if !finite(temperature) || temperature <= 0.0 {
                v.push(Violation::new("temperature", format!("must be > 0, got {temperature}")));
            }
        }
    }
    let weight = params.collection_alpha.norm_sqr() + params.collection_beta.norm_sqr();
    if !(weight > 0.0) || !weight.is_finite() {
        v.push(Violation::new("collection_alpha/collection_beta", "|alpha|^2 + |beta|^2 must be > 0"));
    }
    let rho = &params.initial_state;
    if let Err(msg) = rho.check(1e-10, 1e-12, 1e-8) {
        v.push(Violation::new("initial_state", msg));
    }

    for (name, val) in [
        ("g", sd.g),
        ("kappa", sd.kappa),
        ("omega_c_rel", sd.omega_c_rel),
        ("gamma_b", sd.gamma_b),
        ("xi", sd.xi),
    ] {
        if !finite(val) || val <= 0.0 {
            v.push(Violation::new(name, format!("must be > 0, got {val}")));
        }
    }
    if sd.kappa >= sd.xi {
        v.push(Violation::new("kappa", format!("cavity width {} must be below gap width {}", sd.kappa, sd.xi)));
    }

    // Regime constraints.
    if params.omega_drive >= sd.xi {
        v.push(Violation::new(
            "omega_drive",
            format!("drive exceeds gap: omega {} >= xi {}", params.omega_drive, sd.xi),
        ));
    }
    if !(params.delta > 0.5 * sd.xi) {
        v.push(Violation::new(
            "delta",
            format!("subsystems spectrally overlap: delta {} <= xi/2 {}", params.delta, 0.5 * sd.xi),
        ));
    }
    // With a detuned cavity the eg frequencies {0, ±Ω} and the dressed pe
    // frequencies Δ ± Ω/2 must still sit on the intended branches.
    let half_gap = 0.5 * sd.xi;
    let omega = params.omega_drive;
    if [0.0, omega, -omega].iter().any(|&eta| (eta - sd.omega_c_rel).abs() <= half_gap) {
        v.push(Violation::new(
            "omega_drive",
            "eg transition frequencies fall inside the band-gap window",
        ));
    }
    if [params.delta + 0.5 * omega, params.delta - 0.5 * omega]
        .iter()
        .any(|&eta| (eta - sd.omega_c_rel).abs() > half_gap)
    {
        v.push(Violation::new(
            "omega_c_rel",
            "dressed pe transition frequencies fall outside the band-gap window",
        ));
    }
    v
}
