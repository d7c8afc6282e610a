//! Two-time field correlations via the quantum regression theorem and the
//! time-dependent (spectrometer-filtered) physical spectrum
//!
//! ```text
//! R(Δω, t) = Re ∫₀ᵗ ds ∫₀^{t−s} dτ g(s, τ) e^{(ν − iΔω)τ} e^{−2ν(t−s)}
//! S(Δω)    = ∫₀ᵀ dt R(Δω, t)
//! ```
//!
//! with the normally ordered correlator
//! `g(s, τ) = ⟨E⁽⁻⁾(s+τ) E⁽⁺⁾(s)⟩ = Tr[e_raise · e^{Lτ}(e_lower ρ(s))]`,
//! `e_lower = α σ_eg + β σ_pe`. At τ = 0 it is the detected intensity
//! `|α|² ρ_ee + |β|² ρ_pp`, and emission at a positive rotating-frame
//! frequency shows up at positive Δω.
//!
//! The kernel is a sum of modes `Σ_k w_k(s) e^{λ_k τ}` over the eigenvalues of
//! the generator, so the τ integral is done in closed form. The s integral
//! (and, for S, the t integral) reduces to convolutions of `w_k` with
//! exponentials, evaluated recursively along the s grid with `w_k` linearly
//! interpolated between nodes and the exponential weights exact. For a zero
//! exponent this is the trapezoid rule.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{TimeGrid, linspace};
use crate::linalg::{self, C64, Mat3, ONE, Vec9, ZERO, c};
use crate::liouvillian::{Liouvillian, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOperator {
    pub e_lower: Mat3,
    pub e_raise: Mat3,
}

impl DetectionOperator {
    pub fn new(alpha: C64, beta: C64) -> Self {
        let e_lower = linalg::sigma_eg() * alpha + linalg::sigma_pe() * beta;
        DetectionOperator { e_raise: e_lower.adjoint(), e_lower }
    }

    /// `Tr[e_raise · e^{Lτ}(X)]` readout of a propagated operator.
    fn readout(&self, x: &Mat3) -> C64 {
        (self.e_raise * x).trace()
    }
}

/// Modal expansion `g(s, τ) = Σ_k w_k(s) e^{λ_k τ}` sampled on `s_grid`.
#[derive(Debug, Clone)]
pub struct CorrelationKernel {
    pub s_grid: TimeGrid,
    pub modes: Vec<KernelMode>,
}

#[derive(Debug, Clone)]
pub struct KernelMode {
    pub lambda: C64,
    pub weights: Vec<C64>,
}

impl CorrelationKernel {
    /// `g(s_i, τ)` for the s-grid index `i`.
    pub fn g1(&self, s_index: usize, tau: f64) -> C64 {
        self.modes
            .iter()
            .map(|m| m.weights[s_index] * (m.lambda * tau).exp())
            .fold(ZERO, |a, b| a + b)
    }

    /// `g(s_i, 0)`.
    pub fn intensity(&self, s_index: usize) -> C64 {
        self.modes.iter().map(|m| m.weights[s_index]).fold(ZERO, |a, b| a + b)
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the modal correlation kernel from the cached eigensystem.
pub fn g1_kernel(l: &Liouvillian, traj: &Trajectory, det: &DetectionOperator) -> Result<CorrelationKernel> {
    let es = l
        .eigen
        .as_ref()
        .ok_or(Error::IllConditioned { condition: l.eigen_condition })?;
    let readout: Vec<C64> = (0..9)
        .map(|k| det.readout(&linalg::unvec(&es.right.column(k).into_owned())))
        .collect();

    let mut weights = vec![Vec::with_capacity(traj.states.len()); 9];
    for rho in &traj.states {
        let x = linalg::vec_op(&(det.e_lower * rho.0));
        let coeff = es.coefficients(&x);
        for k in 0..9 {
            weights[k].push(readout[k] * coeff[k]);
        }
    }

    let scale = weights
        .iter()
        .flat_map(|w| w.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let modes = weights
        .into_iter()
        .enumerate()
        .filter(|(_, w)| w.iter().any(|z| z.norm() > 1e-15 * scale))
        .map(|(k, w)| KernelMode { lambda: es.values[k], weights: w })
        .collect();
    Ok(CorrelationKernel { s_grid: traj.grid, modes })
}

/// Correlation at a fixed `s` on the trajectory grid by integrating the
/// conditional operator `e_lower ρ(s)` with the adaptive integrator.
pub fn g1_direct(
    l: &Liouvillian,
    traj: &Trajectory,
    det: &DetectionOperator,
    s: f64,
    tau_grid: &[f64],
) -> Result<Vec<C64>> {
    let idx = traj
        .grid
        .index_of(s)
        .ok_or_else(|| Error::Grid(format!("s = {s} ps is not on the trajectory grid")))?;
    let x0: Vec9 = linalg::vec_op(&(det.e_lower * traj.states[idx].0));
    let starts_at_zero = tau_grid.first() == Some(&0.0);
    let mut times = Vec::with_capacity(tau_grid.len() + 1);
    if !starts_at_zero {
        times.push(0.0);
    }
    times.extend_from_slice(tau_grid);
    let xs = l.evolve_ode(&x0, &times)?;
    let skip = usize::from(!starts_at_zero);
    Ok(xs[skip..].iter().map(|x| det.readout(&linalg::unvec(x))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowId {
    /// Around Δω = 0 (lower g–e subsystem).
    Eg,
    /// Around Δω = Δ (upper p–e transition).
    Pe,
}

impl WindowId {
    pub fn as_str(&self) -> &'static str {
        match self {
            WindowId::Eg => "eg",
            WindowId::Pe => "pe",
        }
    }
}

/// Uniform Δω window (ps⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyWindow {
    pub id: WindowId,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl FrequencyWindow {
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n_points.max(2) - 1) as f64
    }

    /// Default window for a drive `omega`, spectrometer half-width `nu`, and
    /// the estimated intrinsic linewidth of the lines it should contain.
    ///
    /// eg: `±(3Ω + 20ν + margin)`, pe: `Δ ± (Ω + 20ν + margin)`; the margin is
    /// four estimated linewidths so that half-maximum crossings stay inside.
    pub fn around(id: WindowId, center: f64, omega: f64, nu: f64, linewidth: f64, n_points: usize) -> Self {
        let reach = match id {
            WindowId::Eg => 3.0 * omega,
            WindowId::Pe => omega,
        };
        let half = reach + 20.0 * nu + 4.0 * (linewidth + 2.0 * nu);
        FrequencyWindow { id, lo: center - half, hi: center + half, n_points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `values[i * n_domega + j] = R(domega[j], times[i])`
    TimeDependent { times: Vec<f64> },
    /// `values[j] = S(domega[j])` for integration time `t_end`.
    Integrated { t_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGrid {
    /// Δω relative to the laser (ps⁻¹), strictly increasing.
    pub domega: Vec<f64>,
    pub kind: SpectrumKind,
    pub values: Vec<f64>,
    /// Spectrometer half-width ν (ps⁻¹).
    pub nu: f64,
    pub window: Option<WindowId>,
    pub metadata: BTreeMap<String, String>,
}

impl SpectrumGrid {
    pub fn n_domega(&self) -> usize {
        self.domega.len()
    }

    /// Row of the time-dependent spectrum at time index `i`, or the whole
    /// integrated spectrum for `i = 0`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_domega();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn times(&self) -> Option<&[f64]> {
        match &self.kind {
            SpectrumKind::TimeDependent { times } => Some(times),
            SpectrumKind::Integrated { .. } => None,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when no value is below `−1e-12 · max`.
    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= -1e-12 * self.max_value().max(0.0)
    }
}

/// `φ₁(z) = (e^z − 1)/z` and `φ₂(z) = (e^z − 1 − z)/z²`.
fn phi12(z: C64) -> (C64, C64) {
    if z.norm() < 0.5 {
        // Σ z^k/(k+1)!, Σ z^k/(k+2)!
        let mut p1 = ZERO;
        let mut p2 = ZERO;
        let mut term = ONE; // z^k / k!
        for k in 0..20 {
            p1 += term / c((k + 1) as f64);
            p2 += term / c(((k + 1) * (k + 2)) as f64);
            term = term * z / c((k + 1) as f64);
        }
        (p1, p2)
    } else {
        let ez = z.exp();
        ((ez - ONE) / z, (ez - ONE - z) / (z * z))
    }
}

/// Running values `I(t_n) = ∫₀^{t_n} w(s) e^{z (t_n − s)} ds` on a uniform
/// grid of spacing `h`, with `w` linear between nodes.
fn exp_convolution(w: &[C64], h: f64, z: C64, out: &mut Vec<C64>) {
    out.clear();
    if w.is_empty() {
        return;
    }
    let zh = z * h;
    let decay = zh.exp();
    let (p1, p2) = phi12(zh);
    let w_old = (p1 - p2) * h;
    let w_new = p2 * h;
    let mut acc = ZERO;
    out.push(acc);
    for pair in w.windows(2) {
        acc = decay * acc + w_old * pair[0] + w_new * pair[1];
        out.push(acc);
    }
}

/// Final value of [`exp_convolution`].
fn exp_convolution_end(w: &[C64], h: f64, z: C64) -> C64 {
    if w.len() < 2 {
        return ZERO;
    }
    let zh = z * h;
    let decay = zh.exp();
    let (p1, p2) = phi12(zh);
    let w_old = (p1 - p2) * h;
    let w_new = p2 * h;
    let mut acc = ZERO;
    for pair in w.windows(2) {
        acc = decay * acc + w_old * pair[0] + w_new * pair[1];
    }
    acc
}

// 8-point Gauss–Legendre on [0, 1].
const GL_X: [f64; 8] = [
    0.019855071751231856,
    0.10166676129318664,
    0.2372337950418355,
    0.4082826787521751,
    0.5917173212478249,
    0.7627662049581645,
    0.8983332387068134,
    0.9801449282487681,
];
const GL_W: [f64; 8] = [
    0.05061426814518813,
    0.11119051722668724,
    0.15685332293894363,
    0.18134189168918100,
    0.18134189168918100,
    0.15685332293894363,
    0.11119051722668724,
    0.05061426814518813,
];

/// Running values of `∫₀^{t_n} w(s) K(t_n − s) ds` for the resonant-limit
/// kernel `K(u) = e^{bu}(u + c u²/2)` (real `b`), used when `|c|·t` is too small
/// for the difference quotient `(e^{cu} − 1)/c` to be evaluated accurately.
fn resonant_convolution(w: &[C64], h: f64, b: f64, cc: C64, out: &mut Vec<C64>) {
    out.clear();
    if w.is_empty() {
        return;
    }
    // Moments M_m(t) = ∫ w(s) (t−s)^m e^{b(t−s)} ds for m = 0, 1, 2.
    let eb = (b * h).exp();
    let mut seg = [[0.0f64; 2]; 3];
    for (x, wt) in GL_X.iter().zip(GL_W) {
        let u = x * h; // u = t_{n+1} − s
        let e = (b * u).exp() * wt * h;
        for (m, s) in seg.iter_mut().enumerate() {
            let um = u.powi(m as i32) * e;
            s[0] += um * (u / h); // weight of w_n
            s[1] += um * (1.0 - u / h); // weight of w_{n+1}
        }
    }
    let mut m = [ZERO; 3];
    out.push(ZERO);
    for pair in w.windows(2) {
        let (m0, m1, m2) = (m[0], m[1], m[2]);
        m[0] = c(eb) * m0;
        m[1] = c(eb) * (m1 + m0 * h);
        m[2] = c(eb) * (m2 + m1 * (2.0 * h) + m0 * (h * h));
        for (k, s) in seg.iter().enumerate() {
            m[k] += pair[0] * s[0] + pair[1] * s[1];
        }
        out.push(m[1] + cc * m[2] * 0.5);
    }
}

const RESONANT_LIMIT: f64 = 1e-6;

/// Per-mode contribution to `R` at every s-grid time for one Δω.
fn td_row_for_frequency(kernel: &CorrelationKernel, nu: f64, domega: f64, i_b: &[Vec<C64>]) -> Vec<f64> {
    let h = kernel.s_grid.step();
    let n = kernel.s_grid.len();
    let span = kernel.s_grid.t_end - kernel.s_grid.t_start;
    let mut total = vec![ZERO; n];
    let mut buf = Vec::with_capacity(n);
    for (mode, ib) in kernel.modes.iter().zip(i_b) {
        let cc = C64::new(nu, -domega) + mode.lambda;
        if cc.norm() * span < RESONANT_LIMIT {
            resonant_convolution(&mode.weights, h, -2.0 * nu, cc, &mut buf);
            for (t, v) in total.iter_mut().zip(&buf) {
                *t += v;
            }
        } else {
            exp_convolution(&mode.weights, h, cc - 2.0 * nu, &mut buf);
            let inv = ONE / cc;
            for ((t, a), b) in total.iter_mut().zip(&buf).zip(ib) {
                *t += (a - b) * inv;
            }
        }
    }
    total.into_iter().map(|z| z.re).collect()
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Config(format!("spectrometer half-width must be > 0, got {nu}")));
    }
    Ok(())
}

fn check_domega(domega: &[f64]) -> Result<()> {
    if domega.is_empty() || domega.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Grid("frequency grid must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

/// `R(Δω, t)` at every time of the kernel's s grid.
pub fn time_dependent_spectra(kernel: &CorrelationKernel, nu: f64, domega: &[f64]) -> Result<SpectrumGrid> {
    check_nu(nu)?;
    check_domega(domega)?;
    let h = kernel.s_grid.step();
    let n_t = kernel.s_grid.len();
    let i_b: Vec<Vec<C64>> = kernel
        .modes
        .iter()
        .map(|m| {
            let mut out = Vec::with_capacity(n_t);
            exp_convolution(&m.weights, h, c(-2.0 * nu), &mut out);
            out
        })
        .collect();
    let columns: Vec<Vec<f64>> = domega
        .par_iter()
        .map(|&dw| td_row_for_frequency(kernel, nu, dw, &i_b))
        .collect();
    let n_w = domega.len();
    let mut values = vec![0.0; n_t * n_w];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * n_w + j] = *v;
        }
    }
    Ok(SpectrumGrid {
        domega: domega.to_vec(),
        kind: SpectrumKind::TimeDependent { times: kernel.s_grid.times() },
        values,
        nu,
        window: None,
        metadata: BTreeMap::new(),
    })
}

/// `R(Δω, t)` at a single time `t` on the kernel's s grid.
pub fn time_dependent_spectrum(kernel: &CorrelationKernel, nu: f64, domega: &[f64], t: f64) -> Result<SpectrumGrid> {
    check_nu(nu)?;
    check_domega(domega)?;
    let idx = kernel
        .s_grid
        .index_of(t)
        .ok_or_else(|| Error::Grid(format!("t = {t} ps is not on the kernel grid")))?;
    let truncated = truncate_kernel(kernel, idx)?;
    let mut full = time_dependent_spectra(&truncated, nu, domega)?;
    let n_w = domega.len();
    let last = full.values.split_off(idx * n_w);
    Ok(SpectrumGrid {
        kind: SpectrumKind::TimeDependent { times: vec![kernel.s_grid.at(idx)] },
        values: last,
        ..full
    })
}

fn truncate_kernel(kernel: &CorrelationKernel, idx: usize) -> Result<CorrelationKernel> {
    let g = &kernel.s_grid;
    let s_grid = if idx == 0 {
        TimeGrid { t_start: g.t_start, t_end: g.t_start, n_points: 1 }
    } else {
        TimeGrid::new(g.t_start, g.at(idx), idx + 1)?
    };
    Ok(CorrelationKernel {
        s_grid,
        modes: kernel
            .modes
            .iter()
            .map(|m| KernelMode { lambda: m.lambda, weights: m.weights[..=idx].to_vec() })
            .collect(),
    })
}

/// `S(Δω) = ∫₀ᵀ R(Δω, t) dt` with `T` the end of the kernel grid.
///
/// The t integral is done exactly by swapping the order of integration:
/// `S = Re Σ_k ∫₀ᵀ w_k(s) K_k(T − s) ds` with
/// `K(v) = ∫₀^v e^{−2νu} (e^{cu} − 1)/c du`, `c = ν − iΔω + λ_k`.
pub fn time_integrated_spectrum(kernel: &CorrelationKernel, nu: f64, domega: &[f64]) -> Result<SpectrumGrid> {
    check_nu(nu)?;
    check_domega(domega)?;
    let t_end = kernel.s_grid.t_end - kernel.s_grid.t_start;
    if t_end * nu < 10.0 {
        warn!("integration time T·ν = {:.3} is not much larger than 1", t_end * nu);
    }
    let h = kernel.s_grid.step();
    let b = -2.0 * nu;
    // Δω-independent pieces per mode: ∫ w, ∫ w e^{b(T−s)}.
    let per_mode: Vec<(C64, C64)> = kernel
        .modes
        .iter()
        .map(|m| (exp_convolution_end(&m.weights, h, ZERO), exp_convolution_end(&m.weights, h, c(b))))
        .collect();

    let values: Vec<f64> = domega
        .par_iter()
        .map(|&dw| {
            let mut total = ZERO;
            for (mode, &(w_int, e_b)) in kernel.modes.iter().zip(&per_mode) {
                let cc = C64::new(nu, -dw) + mode.lambda;
                if cc.norm() * t_end < RESONANT_LIMIT {
                    total += resonant_integrated(&mode.weights, h, b, cc);
                } else {
                    let a = cc + b;
                    let e_a = exp_convolution_end(&mode.weights, h, a);
                    // (1/c)[(E_a − W)/a − (E_b − W)/b]
                    total += ((e_a - w_int) / a - (e_b - w_int) / b) / cc;
                }
            }
            total.re
        })
        .collect();

    Ok(SpectrumGrid {
        domega: domega.to_vec(),
        kind: SpectrumKind::Integrated { t_end },
        values,
        nu,
        window: None,
        metadata: BTreeMap::new(),
    })
}

/// Resonant-limit version of the integrated kernel: `∫₀ᵀ dt` of the running
/// values of [`resonant_convolution`], by trapezoid (the integrand is smooth
/// and non-oscillatory in this limit).
fn resonant_integrated(w: &[C64], h: f64, b: f64, cc: C64) -> C64 {
    let mut buf = Vec::with_capacity(w.len());
    resonant_convolution(w, h, b, cc, &mut buf);
    let inner: C64 = buf.windows(2).map(|p| (p[0] + p[1]) * (0.5 * h)).fold(ZERO, |a, b| a + b);
    inner
}
