//! Master-equation generator as a 9×9 superoperator and propagation of the
//! reduced state.
//!
//! The generator is
//! `L ρ = −i[H_S, ρ] + D_pe[ρ] + D_eg[ρ] + 2γ(|e⟩⟨e|ρ|e⟩⟨e| − ½{|e⟩⟨e|, ρ})`
//! with each dissipator of the frequency-resolved, non-secular form
//! `D[ρ] = Σ_η Γ(η)([σ, ρA†(η)] − [σ†, A(η)ρ])`.
//! Outer operators are the bare transition operator σ, inner ones the
//! frequency components A(η). Positivity is monitored, never enforced.

use log::warn;

use crate::dressing::{self, JumpComponent, SystemHamiltonian};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{self, E, EigenSystem, I, Mat3, Mat9, P, Vec9, c, ket_bra};
use crate::ode::Dopri5;
use crate::params::{SystemParams, validate};
use crate::spectral_density::{EmissionRate, SpectralDensityParams, pe_decay_rate};
use crate::state::DensityMatrix;

/// Eigenbases with a larger condition number are not used for modal
/// expansions; propagation falls back to the adaptive integrator.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

/// Monitor tolerances for propagated states.
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: Mat9,
    /// Cached eigensystem; `None` when the decomposition failed or is too
    /// ill-conditioned to use.
    pub eigen: Option<EigenSystem>,
    /// Condition number of the eigenvector matrix (∞ if the decomposition failed).
    pub eigen_condition: f64,
    pub hamiltonian: SystemHamiltonian,
    pub pe_components: Vec<JumpComponent>,
    pub eg_components: Vec<JumpComponent>,
    pub dephasing_rate: f64,
    /// Decay rate of the |p⟩ population, Γ(Δ+Ω/2) + Γ(Δ−Ω/2).
    pub gamma_pe: f64,
}

/// Superoperator of `ρ ↦ Σ_j Γ_j ([σ, ρ A_j†] − [σ†, A_j ρ])`.
pub fn build_dissipator(sigma: &Mat3, components: &[JumpComponent]) -> Result<Mat9> {
    let sigma_dag = sigma.adjoint();
    let mut out = Mat9::zeros();
    for j in components {
        if !j.rate.is_finite() || j.rate < 0.0 {
            return Err(Error::Config(format!(
                "emission rate at eta = {} must be finite and >= 0, got {}",
                j.eta_rel, j.rate
            )));
        }
        if j.rate == 0.0 {
            continue;
        }
        let a = &j.a_op;
        let a_dag = a.adjoint();
        // σ ρ A† − ρ A† σ − σ† A ρ + A ρ σ†
        let term = linalg::sandwich(sigma, &a_dag) - linalg::right(&(a_dag * sigma))
            - linalg::left(&(sigma_dag * a))
            + linalg::sandwich(a, &sigma_dag);
        out += term * c(j.rate);
    }
    Ok(out)
}

/// Superoperator of `ρ ↦ −i[H, ρ]`.
pub fn coherent_part(h: &Mat3) -> Mat9 {
    (linalg::left(h) - linalg::right(h)) * (-I)
}

/// Superoperator of the pure-dephasing term on |e⟩ at rate γ.
pub fn dephasing_part(gamma: f64) -> Mat9 {
    let pe = ket_bra(E, E);
    (linalg::sandwich(&pe, &pe) - (linalg::left(&pe) + linalg::right(&pe)) * c(0.5)) * c(2.0 * gamma)
}

/// Validates the parameters and assembles the generator with the structured
/// spectral density.
pub fn build_liouvillian(params: &SystemParams, sd: &SpectralDensityParams) -> Result<Liouvillian> {
    let violations = validate(params, sd);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    Liouvillian::from_rates(params, sd)
}

impl Liouvillian {
    /// Assembles the generator for an arbitrary emission-rate function
    /// without regime validation.
    pub fn from_rates(params: &SystemParams, rates: &dyn EmissionRate) -> Result<Self> {
        let hamiltonian = dressing::build_hs(params.delta, params.omega_drive);
        let mut pe_components = dressing::decompose(&linalg::sigma_pe(), &hamiltonian)?;
        let mut eg_components = dressing::decompose(&linalg::sigma_eg(), &hamiltonian)?;
        dressing::assign_rates(&mut pe_components, rates);
        dressing::assign_rates(&mut eg_components, rates);
        let dephasing_rate = params.dephasing_rate();

        let matrix = coherent_part(&hamiltonian.matrix)
            + build_dissipator(&linalg::sigma_pe(), &pe_components)?
            + build_dissipator(&linalg::sigma_eg(), &eg_components)?
            + dephasing_part(dephasing_rate);

        let (eigen, eigen_condition) = match EigenSystem::new(&matrix) {
            Ok(es) if es.condition <= EIGEN_CONDITION_LIMIT && es.condition.is_finite() => {
                let cond = es.condition;
                (Some(es), cond)
            }
            Ok(es) => {
                warn!("Liouvillian eigenbasis condition {:.3e}; using ODE propagation", es.condition);
                (None, es.condition)
            }
            Err(e) => {
                warn!("Liouvillian eigen-decomposition failed ({e}); using ODE propagation");
                (None, f64::INFINITY)
            }
        };

        Ok(Liouvillian {
            matrix,
            eigen,
            eigen_condition,
            hamiltonian,
            pe_components,
            eg_components,
            dephasing_rate,
            gamma_pe: pe_decay_rate(rates, params.delta, params.omega_drive),
        })
    }

    /// `‖vec(I)† L‖`, zero for a trace-preserving generator.
    pub fn trace_preservation_error(&self) -> f64 {
        let id = linalg::vec_op(&Mat3::identity());
        (id.adjoint() * self.matrix).norm()
    }

    /// Largest real part among the eigenvalues (∞ if no cache).
    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigen
            .as_ref()
            .map(|es| es.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or(f64::INFINITY)
    }

    pub fn apply(&self, v: &Vec9) -> Vec9 {
        self.matrix * v
    }

    /// Normalized steady state from the eigenvalue closest to zero.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        let es = self.eigen.as_ref().ok_or(Error::IllConditioned { condition: self.eigen_condition })?;
        let k = (0..9)
            .min_by(|&a, &b| es.values[a].norm().total_cmp(&es.values[b].norm()))
            .unwrap();
        let m = linalg::unvec(&es.right.column(k).into_owned());
        let tr = m.trace();
        Ok(DensityMatrix(m / tr))
    }

    /// Propagates with the cached eigensystem when available, otherwise with
    /// the adaptive integrator.
    pub fn propagate(&self, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
        if self.eigen.is_some() {
            self.propagate_eigen(rho0, grid)
        } else {
            self.propagate_ode(rho0, grid)
        }
    }

    pub fn propagate_eigen(&self, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
        grid.check()?;
        let es = self.eigen.as_ref().ok_or(Error::IllConditioned { condition: self.eigen_condition })?;
        let coeff = es.coefficients(&rho0.to_vec());
        let mut vecs = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let t = grid.at(i) - grid.t_start;
            if t == 0.0 {
                vecs.push(rho0.to_vec());
                continue;
            }
            let mut weighted = Vec9::zeros();
            for k in 0..9 {
                weighted[k] = coeff[k] * (es.values[k] * t).exp();
            }
            vecs.push(es.right * weighted);
        }
        self.finish(grid, vecs, PropagationPath::Eigen)
    }

    pub fn propagate_ode(&self, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
        grid.check()?;
        let vecs = self.evolve_ode(&rho0.to_vec(), &grid.times())?;
        self.finish(grid, vecs, PropagationPath::Ode)
    }

    /// Integrates `v' = L v` through `times` (first entry is the start time).
    pub fn evolve_ode(&self, v0: &Vec9, times: &[f64]) -> Result<Vec<Vec9>> {
        self.evolve_ode_with(&Dopri5::new(1e-10, 1e-12), v0, times)
    }

    pub fn evolve_ode_with(&self, solver: &Dopri5, v0: &Vec9, times: &[f64]) -> Result<Vec<Vec9>> {
        let m = self.matrix;
        solver.integrate(|_, v: &Vec9| m * v, *v0, times).map_err(|e| Error::Numerical {
            step: 0,
            t: times.first().copied().unwrap_or(0.0),
            condition: self.eigen_condition,
            reason: e.to_string(),
        })
    }

    fn finish(&self, grid: &TimeGrid, vecs: Vec<Vec9>, path: PropagationPath) -> Result<Trajectory> {
        let mut states = Vec::with_capacity(vecs.len());
        let mut diagnostics = Vec::with_capacity(vecs.len());
        for (step, v) in vecs.iter().enumerate() {
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Numerical {
                    step,
                    t: grid.at(step),
                    condition: self.eigen_condition,
                    reason: "non-finite state".into(),
                });
            }
            let rho = DensityMatrix::from_vec(v);
            diagnostics.push(StepDiagnostics {
                trace_error: rho.trace_error(),
                hermiticity_error: rho.hermiticity_error(),
                min_eigenvalue: rho.min_eigenvalue(),
            });
            states.push(rho);
        }
        let traj = Trajectory { grid: *grid, states, diagnostics, path };
        let worst = traj.min_eigenvalue();
        if worst < -POSITIVITY_TOLERANCE {
            warn!("state positivity violated: min eigenvalue {worst:.3e}");
        }
        Ok(traj)
    }
}

/// `e^{−Γ_pe t}` for an initial |p⟩⟨p|.
pub fn analytic_population(rates: &dyn EmissionRate, params: &SystemParams, t: f64) -> f64 {
    (-pe_decay_rate(rates, params.delta, params.omega_drive) * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationPath {
    Eigen,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub path: PropagationPath,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn populations(&self, level: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(level)).collect()
    }

    pub fn upper_population(&self) -> Vec<f64> {
        self.populations(P)
    }

    pub fn max_trace_error(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_error).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.hermiticity_error).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// Number of states whose smallest eigenvalue is below `−POSITIVITY_TOLERANCE`.
    pub fn positivity_violations(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.min_eigenvalue < -POSITIVITY_TOLERANCE).count()
    }

    /// True when every state satisfies the monitored invariants.
    pub fn is_sane(&self) -> bool {
        self.max_trace_error() < TRACE_TOLERANCE
            && self.max_hermiticity_error() < HERMITICITY_TOLERANCE
            && self.min_eigenvalue() > -POSITIVITY_TOLERANCE
    }

    /// Largest Frobenius distance between matching states of two trajectories.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a.0 - b.0).norm())
            .fold(0.0, f64::max)
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Liouvillian>();
    check::<Trajectory>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressing::decompose;
    use crate::linalg::{G, sigma_pe};
    use crate::params::DephasingModel;
    use crate::spectral_density::FlatDensity;
    use crate::units::energy_to_angular;

    fn defaults(omega_uev: f64) -> (SystemParams, SpectralDensityParams) {
        (
            SystemParams::default().with_omega(energy_to_angular(omega_uev)),
            SpectralDensityParams::default(),
        )
    }

    #[test]
    fn zero_rates_give_zero_dissipator() {
        let hs = dressing::build_hs(15.0, 0.2);
        let comps = decompose(&sigma_pe(), &hs).unwrap();
        assert_eq!(build_dissipator(&sigma_pe(), &comps).unwrap(), Mat9::zeros());
    }

    #[test]
    fn negative_rate_rejected() {
        let hs = dressing::build_hs(15.0, 0.2);
        let mut comps = decompose(&sigma_pe(), &hs).unwrap();
        comps[0].rate = -1.0;
        assert!(build_dissipator(&sigma_pe(), &comps).is_err());
    }

    #[test]
    fn flat_rates_reduce_to_lindblad() {
        let gamma = 0.37;
        let hs = dressing::build_hs(15.0, 0.2);
        for sigma in [linalg::sigma_pe(), linalg::sigma_eg()] {
            let mut comps = decompose(&sigma, &hs).unwrap();
            dressing::assign_rates(&mut comps, &FlatDensity(gamma));
            let d = build_dissipator(&sigma, &comps).unwrap();
            let sd = sigma.adjoint() * sigma;
            let lindblad = (linalg::sandwich(&sigma, &sigma.adjoint()) * c(2.0)
                - linalg::left(&sd)
                - linalg::right(&sd))
                * c(gamma);
            assert!((d - lindblad).norm() < 1e-12);
        }
    }

    #[test]
    fn undriven_population_rate() {
        let (p, sd) = defaults(0.0);
        let l = build_liouvillian(&p, &sd).unwrap();
        let rho = DensityMatrix::pure_basis(P);
        let drho = linalg::unvec(&l.apply(&rho.to_vec()));
        assert!((drho[(P, P)].re + 0.05).abs() < 1e-12);
        assert!((l.gamma_pe - 0.05).abs() < 1e-12);
    }

    #[test]
    fn generator_invariants() {
        for omega in [0.0, 10.0, 100.0, 170.0] {
            let (p, sd) = defaults(omega);
            let l = build_liouvillian(&p, &sd).unwrap();
            assert!(l.trace_preservation_error() < 1e-12);
            let es = l.eigen.as_ref().expect("eigen cache");
            assert!(es.biorthogonality_error() < 1e-10);
            assert!(l.max_real_eigenvalue() <= 1e-10);
            assert!(es.values.iter().any(|z| z.norm() < 1e-10), "no zero eigenvalue at Ω={omega}");
        }
    }

    #[test]
    fn undriven_decay_eigenvalue() {
        let (p, sd) = defaults(0.0);
        let l = build_liouvillian(&p, &sd).unwrap();
        let es = l.eigen.as_ref().unwrap();
        let k = (0..9)
            .min_by(|&a, &b| (es.values[a] - c(-0.05)).norm().total_cmp(&(es.values[b] - c(-0.05)).norm()))
            .unwrap();
        assert!((es.values[k] - c(-0.05)).norm() < 1e-12);
        // the mode carries the |p⟩ population
        let r = linalg::unvec(&es.right.column(k).into_owned());
        assert!(r[(P, P)].norm() > 0.1);
    }

    #[test]
    fn dephasing_leaves_population_columns_alone() {
        let (p, sd) = defaults(100.0);
        let l0 = build_liouvillian(&p, &sd).unwrap();
        let pf = SystemParams { dephasing: DephasingModel::Fixed { gamma: 0.01 }, ..p };
        let l1 = build_liouvillian(&pf, &sd).unwrap();
        for lvl in [G, E, P] {
            let col = 4 * lvl; // vec index of |lvl⟩⟨lvl|
            assert!((l0.matrix.column(col) - l1.matrix.column(col)).norm() < 1e-15);
        }
        assert!((l0.matrix - l1.matrix).norm() > 1e-3);
    }

    #[test]
    fn invalid_params_propagate() {
        let (p, sd) = defaults(100.0);
        let bad = SystemParams { delta: 0.0, ..p };
        assert!(matches!(build_liouvillian(&bad, &sd), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn population_law_at_twenty_ps() {
        let (p, sd) = defaults(0.0);
        let l = build_liouvillian(&p, &sd).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 11).unwrap();
        let traj = l.propagate(&DensityMatrix::pure_basis(P), &grid).unwrap();
        let last = traj.states.last().unwrap().population(P);
        assert!((last - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(traj.states[0], DensityMatrix::pure_basis(P));
        assert!((analytic_population(&sd, &p, 20.0) - (-1.0f64).exp()).abs() < 1e-12);
        let pk = p.with_omega(energy_to_angular(100.0));
        assert!((analytic_population(&sd, &pk, 40.0) - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(analytic_population(&sd, &pk, 0.0), 1.0);
    }

    #[test]
    fn steady_state_is_stationary() {
        let (p, sd) = defaults(100.0);
        let l = build_liouvillian(&p, &sd).unwrap();
        let ss = l.steady_state().unwrap();
        let grid = TimeGrid::new(0.0, 500.0, 51).unwrap();
        let traj = l.propagate(&ss, &grid).unwrap();
        for s in &traj.states {
            assert!((s.0 - ss.0).norm() < 1e-10);
        }
    }

    #[test]
    fn eigen_and_ode_paths_agree() {
        let (p, sd) = defaults(100.0);
        let l = build_liouvillian(&p, &sd).unwrap();
        let grid = TimeGrid::new(0.0, 100.0, 1001).unwrap();
        let a = l.propagate_eigen(&DensityMatrix::pure_basis(P), &grid).unwrap();
        let b = l.propagate_ode(&DensityMatrix::pure_basis(P), &grid).unwrap();
        assert!(a.max_distance(&b) < 1e-8, "{}", a.max_distance(&b));
        assert!(a.is_sane() && b.is_sane());
    }
}
