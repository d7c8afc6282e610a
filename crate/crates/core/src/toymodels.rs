//! Reference models of population transfer out of |p⟩: coherent two- and
//! three-level Rabi dynamics, incoherent exponential decay, and a chain of
//! projective measurements on a decaying level.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{C64, E, G, P, ZERO};
use crate::ode::Dopri5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    /// p–e coupling (ps⁻¹).
    pub omega_pe: f64,
    /// e–g coupling (ps⁻¹).
    pub omega_eg: f64,
    /// Decay rate for the incoherent models (ps⁻¹).
    pub gamma_pe_fixed: f64,
    pub n_measurements: u64,
    pub t: f64,
}

/// `cos²(Ω_pe t/2)`.
pub fn two_level_survival(omega_pe: f64, t: f64) -> f64 {
    (0.5 * omega_pe * t).cos().powi(2)
}

/// `[(Ω_eg² + Ω_pe² cos(Ω_R t/2)) / Ω_R²]²` with `Ω_R² = Ω_pe² + Ω_eg²`.
pub fn three_level_survival(omega_pe: f64, omega_eg: f64, t: f64) -> f64 {
    let r2 = omega_pe * omega_pe + omega_eg * omega_eg;
    if r2 == 0.0 {
        return 1.0;
    }
    let amp = (omega_eg * omega_eg + omega_pe * omega_pe * (0.5 * r2.sqrt() * t).cos()) / r2;
    amp * amp
}

/// `e^{−Γt}`, whatever drives the lower transition.
pub fn incoherent_survival(gamma: f64, t: f64) -> f64 {
    (-gamma * t).exp()
}

/// Survival after `n` equally spaced projective measurements during decay:
/// `(e^{−Γt/n})ⁿ`, formed by `n` explicit multiplications. The running product
/// is kept in double-double arithmetic so the result is accurate to a few ulp
/// for any `n`.
pub fn zeno_measurement_chain(gamma: f64, t: f64, n: u64) -> f64 {
    assert!(n >= 1, "at least one measurement");
    // 1 + expm1(x) split exactly into hi + lo
    let m = (-gamma * t / n as f64).exp_m1();
    let factor = two_sum(1.0, m);
    let mut acc = (1.0, 0.0);
    for _ in 0..n {
        acc = dd_mul(acc, factor);
    }
    acc.0 + acc.1
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn dd_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let p = x.0 * y.0;
    let e = x.0.mul_add(y.0, -p) + (x.0 * y.1 + x.1 * y.0);
    let s = p + e;
    (s, e - (s - p))
}

fn toy_hamiltonian(omega_pe: f64, omega_eg: f64) -> Matrix3<C64> {
    let mut h = Matrix3::from_element(ZERO);
    h[(P, E)] = C64::new(0.5 * omega_pe, 0.0);
    h[(E, P)] = h[(P, E)];
    h[(E, G)] = C64::new(0.5 * omega_eg, 0.0);
    h[(G, E)] = h[(E, G)];
    h
}

/// Integrates `iψ' = Hψ` from `ψ(t_grid[0]) = |p⟩` and returns the state at
/// every grid time.
pub fn schrodinger_states(omega_pe: f64, omega_eg: f64, t_grid: &[f64]) -> Result<Vec<Vector3<C64>>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let h = toy_hamiltonian(omega_pe, omega_eg) * C64::new(0.0, -1.0);
    let mut psi0 = Vector3::from_element(ZERO);
    psi0[P] = C64::new(1.0, 0.0);
    Dopri5::new(1e-12, 1e-14)
        .integrate(|_, psi: &Vector3<C64>| h * psi, psi0, t_grid)
        .map_err(|e| Error::Integration(e.to_string()))
}

/// `|⟨p|ψ(t)⟩|²` by direct integration of the Schrödinger equation.
pub fn schrodinger_oracle(omega_pe: f64, omega_eg: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    Ok(schrodinger_states(omega_pe, omega_eg, t_grid)?.iter().map(|psi| psi[P].norm_sqr()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use std::f64::consts::PI;

    #[test]
    fn two_level_examples() {
        let w = 0.3;
        assert_eq!(two_level_survival(w, 0.0), 1.0);
        assert!(two_level_survival(w, PI / w).abs() < 1e-30);
        assert!((two_level_survival(w, 2.0 * PI / w) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_level_examples() {
        assert_eq!(three_level_survival(0.2, 0.7, 0.0), 1.0);
        let (pe, eg) = (0.01f64, 0.1f64);
        let floor = ((eg * eg - pe * pe) / (eg * eg + pe * pe)).powi(2);
        for t in linspace(0.0, 2000.0, 4001) {
            assert!(three_level_survival(pe, eg, t) >= floor - 1e-15);
        }
        let r = (pe * pe + eg * eg).sqrt();
        assert!((three_level_survival(pe, eg, 2.0 * PI / r) - floor).abs() < 1e-14);
    }

    #[test]
    fn strong_lower_drive_traps_population() {
        let (pe, eg) = (0.001f64, 0.1f64);
        let r = (pe * pe + eg * eg).sqrt();
        let min = linspace(0.0, 4.0 * PI / r, 2001)
            .into_iter()
            .map(|t| three_level_survival(pe, eg, t))
            .fold(1.0, f64::min);
        assert!(min >= 0.9996);
    }

    #[test]
    fn closed_form_matches_oracle() {
        let t = linspace(0.0, 1000.0, 2001);
        let oracle = schrodinger_oracle(0.01, 0.1, &t).unwrap();
        for (ti, o) in t.iter().zip(&oracle) {
            assert!((three_level_survival(0.01, 0.1, *ti) - o).abs() < 1e-8);
        }
        let two = schrodinger_oracle(0.05, 0.0, &t).unwrap();
        for (ti, o) in t.iter().zip(&two) {
            assert!((two_level_survival(0.05, *ti) - o).abs() < 1e-10);
            assert!((three_level_survival(0.05, 0.0, *ti) - o).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_is_unitary() {
        let t = linspace(0.0, 500.0, 501);
        for psi in schrodinger_states(0.03, 0.2, &t).unwrap() {
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn incoherent_examples() {
        assert_eq!(incoherent_survival(0.05, 0.0), 1.0);
        assert!((incoherent_survival(0.5, 2.0) - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn measurement_chain_is_transparent() {
        let exact = (-1.0f64).exp();
        assert_eq!(zeno_measurement_chain(0.05, 20.0, 1), (-0.05f64 * 20.0).exp());
        assert!((zeno_measurement_chain(0.05, 20.0, 1_000_000) - exact).abs() < 1e-12);
        assert!((zeno_measurement_chain(1.0, 1.0, 12345) - exact).abs() < 1e-15);
        assert_eq!(zeno_measurement_chain(0.0, 5.0, 1000), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn survivals_are_probabilities(pe in 0.0..1.0f64, eg in 0.0..1.0f64, t in 0.0..1e3f64) {
                for p in [two_level_survival(pe, t), three_level_survival(pe, eg, t), incoherent_survival(pe, t)] {
                    prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
                }
            }

            #[test]
            fn chain_independent_of_n(gt in 0.0..5.0f64, n in 1u64..5000) {
                prop_assert!((zeno_measurement_chain(gt, 1.0, n) - (-gt).exp()).abs() < 1e-14);
            }
        }
    }
}
