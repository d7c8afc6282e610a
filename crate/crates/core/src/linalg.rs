//! Small fixed-size complex linear algebra: 3×3 operators, 9×9 superoperators
//! in the column-stacking convention, and a biorthogonal eigensystem for
//! non-normal generators.
//!
//! Column stacking: `vec(X)[3*col + row] = X[(row, col)]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;
pub type Mat9 = SMatrix<C64, 9, 9>;
pub type Vec9 = SVector<C64, 9>;

/// Basis index of |g⟩.
pub const G: usize = 0;
/// Basis index of |e⟩.
pub const E: usize = 1;
/// Basis index of |p⟩.
pub const P: usize = 2;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// |i⟩⟨j|
pub fn ket_bra(i: usize, j: usize) -> Mat3 {
    let mut m = Mat3::zeros();
    m[(i, j)] = ONE;
    m
}

/// σ_eg = |g⟩⟨e|
pub fn sigma_eg() -> Mat3 {
    ket_bra(G, E)
}

/// σ_pe = |e⟩⟨p|
pub fn sigma_pe() -> Mat3 {
    ket_bra(E, P)
}

pub fn vec_op(m: &Mat3) -> Vec9 {
    Vec9::from_iterator(m.iter().copied())
}

pub fn unvec(v: &Vec9) -> Mat3 {
    Mat3::from_iterator(v.iter().copied())
}

pub fn kron(a: &Mat3, b: &Mat3) -> Mat9 {
    let mut out = Mat9::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..3 {
                for l in 0..3 {
                    out[(3 * i + k, 3 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Superoperator of `X ↦ A X B`.
pub fn sandwich(a: &Mat3, b: &Mat3) -> Mat9 {
    kron(&b.transpose(), a)
}

/// Superoperator of `X ↦ A X`.
pub fn left(a: &Mat3) -> Mat9 {
    sandwich(a, &Mat3::identity())
}

/// Superoperator of `X ↦ X B`.
pub fn right(b: &Mat3) -> Mat9 {
    sandwich(&Mat3::identity(), b)
}

/// Frobenius norm of `m − m†`.
pub fn hermiticity_error(m: &Mat3) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Mat3) -> [f64; 3] {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigenvalues();
    let mut v = [eig[0], eig[1], eig[2]];
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Right/left eigenvectors of a diagonalizable 9×9 generator.
///
/// `right` holds unit-norm right eigenvectors as columns; `left_dual` is its
/// inverse, so row `k` of `left_dual` is `l_k†` and `⟨l_k, r_j⟩ = δ_kj`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: [C64; 9],
    pub right: Mat9,
    pub left_dual: Mat9,
    /// 2-norm condition number of `right`.
    pub condition: f64,
}

impl EigenSystem {
    /// Decomposition via complex Schur form and triangular back-substitution.
    pub fn new(m: &Mat9) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Eigen("non-finite matrix entries".into()));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let schur = m
            .try_schur(1e-15 * scale, 10_000)
            .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();

        let tiny = 1e-13 * scale;
        let mut values = [ZERO; 9];
        let mut right = Mat9::zeros();
        for k in 0..9 {
            let lambda = t[(k, k)];
            values[k] = lambda;
            let mut y = Vec9::zeros();
            y[k] = ONE;
            for j in (0..k).rev() {
                let mut s = ZERO;
                for m_ in (j + 1)..=k {
                    s += t[(j, m_)] * y[m_];
                }
                let mut d = t[(j, j)] - lambda;
                if d.norm() < tiny {
                    // Repeated eigenvalue: a vanishing numerator means the
                    // block is not defective and this component is free.
                    if s.norm() < 1e-10 * scale {
                        y[j] = ZERO;
                        continue;
                    }
                    d = c(tiny);
                }
                y[j] = -s / d;
            }
            let v = q * y;
            let n = v.norm();
            right.set_column(k, &(v / c(n)));
        }

        let svd = right.svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let left_dual = right
            .try_inverse()
            .ok_or_else(|| Error::Eigen("eigenvector matrix is singular".into()))?;

        Ok(EigenSystem { values, right, left_dual, condition })
    }

    /// `⟨l_k, v⟩` for all k.
    pub fn coefficients(&self, v: &Vec9) -> Vec9 {
        self.left_dual * v
    }

    /// `Σ_k e^{λ_k t} ⟨l_k, v⟩ r_k`.
    pub fn evolve(&self, v: &Vec9, t: f64) -> Vec9 {
        let coeff = self.coefficients(v);
        let mut out = Vec9::zeros();
        for k in 0..9 {
            let a = coeff[k] * (self.values[k] * t).exp();
            out += self.right.column(k) * a;
        }
        out
    }

    /// Max over k, j of `|⟨l_k, r_j⟩ − δ_kj|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let p = self.left_dual * self.right;
        let mut err: f64 = 0.0;
        for k in 0..9 {
            for j in 0..9 {
                let target = if k == j { ONE } else { ZERO };
                err = err.max((p[(k, j)] - target).norm());
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_convention_is_column_stacking() {
        let m = ket_bra(G, E); // row 0, col 1
        let v = vec_op(&m);
        assert_eq!(v[3], ONE);
        assert_eq!(unvec(&v), m);
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let a = Mat3::from_fn(|i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = Mat3::from_fn(|i, j| C64::new((i * j) as f64, 1.0 + i as f64));
        let x = Mat3::from_fn(|i, j| C64::new(j as f64, -(i as f64)));
        let lhs = sandwich(&a, &b) * vec_op(&x);
        let rhs = vec_op(&(a * x * b));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((left(&a) * vec_op(&x) - vec_op(&(a * x))).norm() < 1e-12);
        assert!((right(&b) * vec_op(&x) - vec_op(&(x * b))).norm() < 1e-12);
    }

    #[test]
    fn eigensystem_of_defective_free_matrix() {
        let mut m = Mat9::zeros();
        for k in 0..9 {
            m[(k, k)] = C64::new(-(k as f64) * 0.1, k as f64 * 0.7);
            if k + 1 < 9 {
                m[(k, k + 1)] = C64::new(0.3, -0.2);
            }
        }
        let es = EigenSystem::new(&m).unwrap();
        assert!(es.biorthogonality_error() < 1e-10);
        for k in 0..9 {
            let r = es.right.column(k).into_owned();
            let res = m * r - r * es.values[k];
            assert!(res.norm() < 1e-10, "residual {}", res.norm());
        }
    }

    #[test]
    fn eigensystem_with_exact_degeneracy() {
        let mut m = Mat9::zeros();
        m[(0, 0)] = c(-1.0);
        m[(1, 1)] = c(-1.0);
        m[(2, 2)] = c(-2.0);
        m[(3, 2)] = c(0.5);
        let es = EigenSystem::new(&m).unwrap();
        assert!(es.condition < 1e3);
        assert!(es.biorthogonality_error() < 1e-10);
    }
}
