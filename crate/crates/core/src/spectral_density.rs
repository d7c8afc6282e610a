//! Frequency-dependent emission rate of the structured reservoir: a
//! Lorentzian cavity resonance inside a photonic band gap, flat background
//! outside it. Frequencies are relative to the laser frequency (ps⁻¹).

use serde::Serialize;

use crate::units::mev_to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralDensityParams {
    /// Emitter–cavity coupling (ps⁻¹).
    pub g: f64,
    /// Cavity linewidth κ (ps⁻¹).
    pub kappa: f64,
    /// Cavity center relative to the laser frequency (ps⁻¹).
    pub omega_c_rel: f64,
    /// Background emission rate outside the gap (ps⁻¹).
    pub gamma_b: f64,
    /// Band-gap width ξ (ps⁻¹).
    pub xi: f64,
}

impl Default for SpectralDensityParams {
    fn default() -> Self {
        let kappa = mev_to_angular(0.1);
        SpectralDensityParams {
            g: coupling_from_peak_time(kappa, 20.0),
            kappa,
            omega_c_rel: mev_to_angular(10.0),
            gamma_b: 1.0 / 500.0,
            xi: mev_to_angular(2.0),
        }
    }
}

/// Coupling `g` such that `(4 g²/κ)⁻¹ = peak_time_ps`.
pub fn coupling_from_peak_time(kappa: f64, peak_time_ps: f64) -> f64 {
    (kappa / (4.0 * peak_time_ps)).sqrt()
}

/// Anything that can serve as the emission rate Γ(ω).
pub trait EmissionRate: Sync {
    fn rate(&self, omega_rel: f64) -> f64;
}

impl EmissionRate for SpectralDensityParams {
    fn rate(&self, omega_rel: f64) -> f64 {
        gamma_total(self, omega_rel)
    }
}

/// Frequency-independent emission rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatDensity(pub f64);

impl EmissionRate for FlatDensity {
    fn rate(&self, _omega_rel: f64) -> f64 {
        self.0
    }
}

/// Lorentzian cavity contribution `g² (κ/2) / ((ω − ω_c)² + (κ/2)²)`.
pub fn gamma_cav(sd: &SpectralDensityParams, omega_rel: f64) -> f64 {
    let half = 0.5 * sd.kappa;
    let d = omega_rel - sd.omega_c_rel;
    sd.g * sd.g * half / (d * d + half * half)
}

/// Composite rate: cavity branch for `|ω − ω_c| ≤ ξ/2` (boundary included),
/// background elsewhere.
pub fn gamma_total(sd: &SpectralDensityParams, omega_rel: f64) -> f64 {
    if (omega_rel - sd.omega_c_rel).abs() <= 0.5 * sd.xi {
        gamma_cav(sd, omega_rel)
    } else {
        sd.gamma_b
    }
}

/// Decay rate of the |p⟩ population, `Γ(Δ + Ω/2) + Γ(Δ − Ω/2)`.
pub fn pe_decay_rate(rates: &dyn EmissionRate, delta: f64, omega_drive: f64) -> f64 {
    rates.rate(delta + 0.5 * omega_drive) + rates.rate(delta - 0.5 * omega_drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::energy_to_angular;

    fn sd() -> SpectralDensityParams {
        SpectralDensityParams::default()
    }

    #[test]
    fn cavity_peak_from_caption_values() {
        let sd = sd();
        assert!((gamma_cav(&sd, sd.omega_c_rel) - 0.025).abs() < 1e-15);
        assert!((2.0 * sd.g * sd.g / sd.kappa - 0.025).abs() < 1e-15);
        for s in [-1.0, 1.0] {
            let v = gamma_cav(&sd, sd.omega_c_rel + s * 0.5 * sd.kappa);
            assert!((v - 0.0125).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_scales_quadratically() {
        let a = sd();
        let b = SpectralDensityParams { g: 2.0 * a.g, ..a };
        for k in 0..20 {
            let w = a.omega_c_rel + (k as f64 - 10.0) * 0.03;
            assert!((gamma_cav(&b, w) - 4.0 * gamma_cav(&a, w)).abs() < 1e-15);
        }
    }

    #[test]
    fn composite_branches() {
        let sd = sd();
        assert_eq!(gamma_total(&sd, 0.0), 0.002);
        assert!((gamma_total(&sd, sd.omega_c_rel) - 0.025).abs() < 1e-15);
        let edge = sd.omega_c_rel + 0.5 * sd.xi;
        assert_eq!(gamma_total(&sd, edge), gamma_cav(&sd, edge));
        assert_eq!(gamma_total(&sd, edge + 1e-9), 0.002);
    }

    #[test]
    fn pe_rate_examples() {
        let sd = sd();
        let delta = sd.omega_c_rel;
        let g0 = pe_decay_rate(&sd, delta, 0.0);
        assert!((g0 - 0.05).abs() < 1e-12);
        assert!((g0 - 2.0 * gamma_total(&sd, delta)).abs() < 1e-15);
        let gk = pe_decay_rate(&sd, delta, energy_to_angular(100.0));
        assert!((gk / g0 - 0.5).abs() < 1e-12);
        assert!((gk - 0.025).abs() < 1e-12);
        let wide = pe_decay_rate(&sd, delta, 1.5 * sd.xi);
        assert_eq!(wide, 2.0 * sd.gamma_b);
    }

    #[test]
    fn pe_rate_non_increasing_inside_gap() {
        let sd = sd();
        let n = 4000;
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let w = (sd.xi - 1e-9) * i as f64 / (n - 1) as f64;
            let r = pe_decay_rate(&sd, sd.omega_c_rel, w);
            assert!(r <= prev + 1e-18, "increase at Ω = {w}");
            prev = r;
        }
    }

    #[test]
    fn positive_everywhere() {
        let sd = sd();
        for i in 0..10_000 {
            let w = -40.0 + i as f64 * 0.008;
            assert!(gamma_total(&sd, w) > 0.0);
        }
    }
}
