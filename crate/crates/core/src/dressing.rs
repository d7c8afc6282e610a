//! Dressed-state structure of the rotating-frame Hamiltonian
//! `H_S = Δ|p⟩⟨p| + (Ω/2)(|e⟩⟨g| + |g⟩⟨e|)` and the frequency-resolved pieces
//! of the transition operators.
//!
//! A transition operator σ splits into components `A(η) = Σ P_a σ P_b` over
//! eigenprojector pairs with `λ_b − λ_a = η`, so that
//! `U_S(s) σ U_S†(s) = Σ_η e^{iηs} A(η)` with `U_S(s) = e^{−i H_S s}` and
//! `Σ_η A(η) = σ`.

use crate::error::{Error, Result};
use crate::linalg::{C64, E, G, Mat3, P, c};
use crate::spectral_density::EmissionRate;

/// Frequencies closer than this are the same transition (ps⁻¹).
pub const MERGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemHamiltonian {
    pub matrix: Mat3,
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: Mat3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpComponent {
    /// Transition frequency relative to the laser (ps⁻¹).
    pub eta_rel: f64,
    pub a_op: Mat3,
    /// Γ(η) in ps⁻¹; zero until assigned.
    pub rate: f64,
}

pub fn build_hs(delta: f64, omega_drive: f64) -> SystemHamiltonian {
    let mut h = Mat3::zeros();
    h[(P, P)] = c(delta);
    h[(E, G)] = c(0.5 * omega_drive);
    h[(G, E)] = c(0.5 * omega_drive);

    let eig = h.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = [0.0; 3];
    let mut eigenvectors = Mat3::zeros();
    for (slot, &k) in order.iter().enumerate() {
        eigenvalues[slot] = eig.eigenvalues[k];
        eigenvectors.set_column(slot, &eig.eigenvectors.column(k));
    }
    SystemHamiltonian { matrix: h, eigenvalues, eigenvectors }
}

impl SystemHamiltonian {
    /// Eigenvalues grouped into degenerate clusters with their projectors.
    pub fn eigenprojectors(&self) -> Result<Vec<(f64, Mat3)>> {
        if self.eigenvalues.iter().any(|x| !x.is_finite())
            || self.eigenvectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Eigen("non-finite Hamiltonian eigen-decomposition".into()));
        }
        let mut clusters: Vec<(Vec<f64>, Mat3)> = Vec::new();
        for k in 0..3 {
            let v = self.eigenvectors.column(k);
            let proj = v * v.adjoint();
            let lam = self.eigenvalues[k];
            match clusters.iter_mut().find(|(ls, _)| (ls[0] - lam).abs() < MERGE_TOLERANCE) {
                Some((ls, p)) => {
                    ls.push(lam);
                    *p += proj;
                }
                None => clusters.push((vec![lam], proj)),
            }
        }
        Ok(clusters
            .into_iter()
            .map(|(ls, p)| (ls.iter().sum::<f64>() / ls.len() as f64, p))
            .collect())
    }

    /// `e^{−i H_S s}` from the eigen-decomposition.
    pub fn propagator(&self, s: f64) -> Mat3 {
        let mut d = Mat3::zeros();
        for k in 0..3 {
            d[(k, k)] = C64::new(0.0, -self.eigenvalues[k] * s).exp();
        }
        self.eigenvectors * d * self.eigenvectors.adjoint()
    }
}

/// Frequency-resolved components of `sigma`, sorted by frequency, with
/// coincident frequencies merged and vanishing pieces dropped.
pub fn decompose(sigma: &Mat3, hs: &SystemHamiltonian) -> Result<Vec<JumpComponent>> {
    let projectors = hs.eigenprojectors()?;
    let drop_below = 1e-14 * sigma.norm().max(1.0);
    let mut out: Vec<JumpComponent> = Vec::new();
    for (lam_a, pa) in &projectors {
        for (lam_b, pb) in &projectors {
            let a_op = pa * sigma * pb;
            if a_op.norm() <= drop_below {
                continue;
            }
            let eta = lam_b - lam_a;
            match out.iter_mut().find(|j| (j.eta_rel - eta).abs() < MERGE_TOLERANCE) {
                Some(j) => j.a_op += a_op,
                None => out.push(JumpComponent { eta_rel: eta, a_op, rate: 0.0 }),
            }
        }
    }
    out.sort_by(|a, b| a.eta_rel.total_cmp(&b.eta_rel));
    Ok(out)
}

/// Fills in each component's rate from the spectral density.
pub fn assign_rates(components: &mut [JumpComponent], rates: &dyn EmissionRate) {
    for j in components {
        j.rate = rates.rate(j.eta_rel);
    }
}
