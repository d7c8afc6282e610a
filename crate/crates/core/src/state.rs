use crate::linalg::{self, C64, Mat3, Vec9, ket_bra};

/// Reduced state of the emitter in the basis order (g, e, p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Mat3);

impl DensityMatrix {
    /// |i⟩⟨i|
    pub fn pure_basis(i: usize) -> Self {
        DensityMatrix(ket_bra(i, i))
    }

    pub fn from_vec(v: &Vec9) -> Self {
        DensityMatrix(linalg::unvec(v))
    }

    pub fn to_vec(&self) -> Vec9 {
        linalg::vec_op(&self.0)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0)[0]
    }

    /// Checks the state invariants; the error names the first one violated.
    pub fn check(&self, trace_tol: f64, herm_tol: f64, eig_tol: f64) -> Result<(), String> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err("non-finite entries".into());
        }
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(format!("not Hermitian (error {herm:.3e})"));
        }
        let tr = self.trace_error();
        if tr > trace_tol {
            return Err(format!("trace differs from 1 by {tr:.3e}"));
        }
        let min = self.min_eigenvalue();
        if min < -eig_tol {
            return Err(format!("negative eigenvalue {min:.3e}"));
        }
        Ok(())
    }
}

impl Default for DensityMatrix {
    fn default() -> Self {
        DensityMatrix::pure_basis(linalg::P)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{E, G, P};

    #[test]
    fn basis_states_are_valid() {
        for i in [G, E, P] {
            let rho = DensityMatrix::pure_basis(i);
            assert!(rho.check(1e-10, 1e-12, 1e-8).is_ok());
            assert_eq!(rho.population(i), 1.0);
        }
    }

    #[test]
    fn invalid_states_reported() {
        let mut m = Mat3::zeros();
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        let rho = DensityMatrix(m);
        assert!(rho.check(1e-10, 1e-12, 1e-8).unwrap_err().contains("negative eigenvalue"));
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix(m).check(1e-10, 1e-12, 1e-8).unwrap_err().contains("Hermitian"));
        assert!(DensityMatrix(Mat3::zeros()).check(1e-10, 1e-12, 1e-8).unwrap_err().contains("trace"));
    }

    #[test]
    fn vec_round_trip() {
        let rho = DensityMatrix::pure_basis(P);
        assert_eq!(DensityMatrix::from_vec(&rho.to_vec()), rho);
    }
}
