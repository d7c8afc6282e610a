//! Shared fixtures for the benchmarks.

use zeno_trap::units::energy_to_angular;
use zeno_trap::{Pipeline, SpectralDensityParams, SystemParams};

/// Default parameters at drive strength `omega_uev`.
pub fn pipeline(omega_uev: f64) -> Pipeline {
    let params = SystemParams::default().with_omega(energy_to_angular(omega_uev));
    Pipeline::new(params, SpectralDensityParams::default()).expect("default parameters are valid")
}
