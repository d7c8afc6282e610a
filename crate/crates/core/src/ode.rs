//! Adaptive Dormand–Prince 5(4) integrator for linear and nonlinear complex
//! systems `y' = f(t, y)`, stepping exactly onto requested output times.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-10, atol: 1e-12, max_steps: 10_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Dopri5 { rtol, atol, ..Default::default() }
    }

    /// Integrates from `t_out[0]` (where `y = y0`) through every time in
    /// `t_out`, which must be non-decreasing. Returns one state per output time.
    pub fn integrate<const N: usize, F>(
        &self,
        mut f: F,
        y0: SVector<C64, N>,
        t_out: &[f64],
    ) -> Result<Vec<SVector<C64, N>>>
    where
        F: FnMut(f64, &SVector<C64, N>) -> SVector<C64, N>,
    {
        let mut out = Vec::with_capacity(t_out.len());
        let Some(&t0) = t_out.first() else {
            return Ok(out);
        };
        let mut t = t0;
        let mut y = y0;
        out.push(y);
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&mut f, t, &y, &k1, t_out);
        let mut steps = 0usize;

        for &target in &t_out[1..] {
            if target < t {
                return Err(Error::Integration(format!("output times not sorted at t = {target}")));
            }
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
                }
                let remaining = target - t;
                let last = h >= remaining;
                let hs = if last { remaining } else { h };

                let k2 = f(t + C2 * hs, &stage(&y, hs, &[(A21, &k1)]));
                let k3 = f(t + C3 * hs, &stage(&y, hs, &[(A31, &k1), (A32, &k2)]));
                let k4 = f(t + C4 * hs, &stage(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
                let k5 = f(
                    t + C5 * hs,
                    &stage(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                );
                let k6 = f(
                    t + hs,
                    &stage(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                );
                let y_new = stage(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let k7 = f(t + hs, &y_new);
                let err_vec = stage(
                    &SVector::zeros(),
                    hs,
                    &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                );

                let err = self.error_norm(&err_vec, &y, &y_new);
                steps += 1;
                if !err.is_finite() {
                    return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
                }
                if err <= 1.0 {
                    t = if last { target } else { t + hs };
                    y = y_new;
                    k1 = k7;
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    // A step shortened to land on the output time says nothing
                    // about the step size the dynamics allows.
                    if !last || hs >= h {
                        h = hs * fac;
                    }
                } else {
                    h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Integration(format!("step size underflow at t = {t}")));
                    }
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    fn error_norm<const N: usize>(
        &self,
        err: &SVector<C64, N>,
        y: &SVector<C64, N>,
        y_new: &SVector<C64, N>,
    ) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
            let r = err[i].norm() / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &SVector<C64, N>,
        k1: &SVector<C64, N>,
        t_out: &[f64],
    ) -> f64
    where
        F: FnMut(f64, &SVector<C64, N>) -> SVector<C64, N>,
    {
        let span = t_out.last().map(|&e| e - t).unwrap_or(0.0).abs();
        let scale = |v: &SVector<C64, N>| {
            let mut acc = 0.0;
            for i in 0..N {
                let sc = self.atol + self.rtol * y[i].norm();
                acc += (v[i].norm() / sc).powi(2);
            }
            (acc / N as f64).sqrt()
        };
        let d0 = scale(y);
        let d1 = scale(k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.max(1e-12));
        let y1 = y + k1 * c(h0);
        let k2 = f(t + h0, &y1);
        let d2 = scale(&(k2 - k1)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.max(1e-12))
    }
}

#[inline]
fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `base + h Σ a_i k_i`
#[inline]
fn stage<const N: usize>(base: &SVector<C64, N>, h: f64, terms: &[(f64, &SVector<C64, N>)]) -> SVector<C64, N> {
    let mut out = *base;
    for &(a, k) in terms {
        out.axpy(c(a * h), k, ONE);
    }
    out
}

const ONE: C64 = C64::new(1.0, 0.0);

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn exponential_decay_with_rotation() {
        let lambda = C64::new(-0.3, 2.0);
        let solver = Dopri5::new(1e-11, 1e-13);
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let ys = solver
            .integrate(|_, y: &SVector<C64, 1>| y * lambda, SVector::<C64, 1>::new(C64::new(1.0, 0.0)), &times)
            .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = (lambda * *t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_conserves_norm() {
        let solver = Dopri5::new(1e-12, 1e-14);
        let times: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let ys = solver
            .integrate(
                |_, y: &Vector2<C64>| Vector2::new(y[1] * C64::new(0.0, -0.5), y[0] * C64::new(0.0, -0.5)),
                Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
                &times,
            )
            .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y.norm() - 1.0).abs() < 1e-10);
            assert!((y[0].norm() - (0.5 * t).cos().abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_output_times_allowed() {
        let solver = Dopri5::default();
        let ys = solver
            .integrate(|_, y: &SVector<C64, 1>| -y, SVector::<C64, 1>::new(C64::new(1.0, 0.0)), &[0.0, 0.0, 1.0])
            .unwrap();
        assert_eq!(ys.len(), 3);
        assert_eq!(ys[1][0], C64::new(1.0, 0.0));
    }
}
