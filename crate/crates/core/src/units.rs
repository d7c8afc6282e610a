//! Physical constants and conversions between the I/O units (μeV, meV, K)
//! and the internal unit system (angular frequency in ps⁻¹, time in ps).

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Reduced Planck constant in μeV·ps.
pub const HBAR_UEV_PS: f64 = HBAR_MEV_PS * 1.0e3;

/// Boltzmann constant in meV/K.
pub const K_B_MEV_PER_K: f64 = 0.08617333262;

/// Fixed physical constants, bundled for code that wants to carry them around
/// (manifests, reports).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar_mev_ps: f64,
    pub k_b_mev_per_k: f64,
}

impl Constants {
    pub const CODATA: Constants = Constants {
        hbar_mev_ps: HBAR_MEV_PS,
        k_b_mev_per_k: K_B_MEV_PER_K,
    };
}

/// Energy in μeV to angular frequency in ps⁻¹.
#[inline]
pub fn energy_to_angular(e_uev: f64) -> f64 {
    e_uev / HBAR_UEV_PS
}

/// Angular frequency in ps⁻¹ to energy in μeV.
#[inline]
pub fn angular_to_energy(w: f64) -> f64 {
    w * HBAR_UEV_PS
}

#[inline]
pub fn mev_to_angular(e_mev: f64) -> f64 {
    e_mev / HBAR_MEV_PS
}

#[inline]
pub fn angular_to_mev(w: f64) -> f64 {
    w * HBAR_MEV_PS
}

/// Thermal energy k_B·T expressed as an angular frequency in ps⁻¹.
#[inline]
pub fn thermal_angular(temperature_k: f64) -> f64 {
    K_B_MEV_PER_K * temperature_k / HBAR_MEV_PS
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_inverse_picosecond() {
        assert!((energy_to_angular(658.2119569) - 1.0).abs() < 1e-15);
        assert_eq!(energy_to_angular(0.0), 0.0);
        assert!((energy_to_angular(100.0) - 0.151926).abs() < 1e-6);
    }

    #[test]
    fn mev_and_uev_agree() {
        assert!((mev_to_angular(0.1) - energy_to_angular(100.0)).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn round_trip(e in -1.0e6f64..1.0e6) {
            let back = angular_to_energy(energy_to_angular(e));
            prop_assert!((back - e).abs() <= 1e-14 * e.abs().max(f64::MIN_POSITIVE));
        }
    }
}
