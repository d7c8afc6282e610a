//! Peak detection, half-maximum linewidths, the linewidth-versus-drive sweep
//! and the emission-delay metric.
//!
//! Spectra come in on Δω grids in ps⁻¹; reported centers and widths are in μeV.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::RunConfig;
use crate::grid::{TimeGrid, trapezoid};
use crate::pipeline::{Pipeline, WINDOW_POINTS};
use crate::spectra::{SpectrumGrid, WindowId};
use crate::units::angular_to_energy;

pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// Minimum number of window points accepted by [`find_peaks`].
pub const MIN_WINDOW_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("window has {0} points, need at least {MIN_WINDOW_POINTS}")]
    TooFewPoints(usize),
    #[error("grid and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("prominence fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("no peak clears the prominence threshold")]
    NoPeak,
    #[error("half-maximum crossing lies outside the window")]
    OutsideWindow,
    #[error("peak is not resolved from its neighbour at half maximum")]
    Unresolved,
    #[error("expected a time-dependent spectrum")]
    NotTimeDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Parabolically refined center (μeV).
    pub center: f64,
    pub height: f64,
    /// Half-maximum width (μeV) by walking outward until the signal drops
    /// below half height; NaN if that leaves the window.
    pub fwhm: f64,
    pub prominence: f64,
    /// Grid index of the sampled maximum.
    pub index: usize,
}

fn check_window(domega: &[f64], values: &[f64]) -> Result<(), AnalysisError> {
    if domega.len() != values.len() {
        return Err(AnalysisError::LengthMismatch(domega.len(), values.len()));
    }
    if domega.len() < MIN_WINDOW_POINTS {
        return Err(AnalysisError::TooFewPoints(domega.len()));
    }
    Ok(())
}

fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < y.len() {
        if y[i] > y[i - 1] {
            // extend over a plateau
            let mut j = i;
            while j + 1 < y.len() && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < y.len() && y[j + 1] < y[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let base = |range: &mut dyn Iterator<Item = usize>| {
        let mut m = h;
        for j in range {
            if y[j] > h {
                break;
            }
            m = m.min(y[j]);
        }
        m
    };
    let left = base(&mut (0..i).rev());
    let right = base(&mut (i + 1..y.len()));
    h - left.max(right)
}

/// Sub-grid center and height from a parabola through three samples.
fn refine(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (x[i], b);
    }
    let d = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    let h = if d >= 0.0 { x[i + 1] - x[i] } else { x[i] - x[i - 1] };
    (x[i] + d * h, b - 0.25 * (a - c) * d)
}

/// Local maxima with prominence at least `min_prominence_fraction · max`,
/// sorted by height, highest first.
pub fn find_peaks(domega: &[f64], values: &[f64], min_prominence_fraction: f64) -> Result<Vec<Peak>, AnalysisError> {
    check_window(domega, values)?;
    if !(min_prominence_fraction > 0.0 && min_prominence_fraction < 1.0) {
        return Err(AnalysisError::BadFraction(min_prominence_fraction));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Ok(Vec::new());
    }
    let mut peaks: Vec<Peak> = local_maxima(values)
        .into_iter()
        .filter_map(|i| {
            let prom = prominence(values, i);
            if prom < min_prominence_fraction * max || values[i] <= 0.0 {
                return None;
            }
            let (center, height) = refine(domega, values, i);
            let mut peak = Peak { center: angular_to_energy(center), height, fwhm: f64::NAN, prominence: prom, index: i };
            if let Ok((l, r)) = half_widths(domega, values, &peak, false) {
                peak.fwhm = angular_to_energy(l + r);
            }
            Some(peak)
        })
        .collect();
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));
    Ok(peaks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Distance (ps⁻¹) from the refined center to the half-maximum crossing on
/// one side. With `strict`, a rise on the way down (another peak) is an error.
fn half_width(domega: &[f64], values: &[f64], peak: &Peak, side: Side, strict: bool) -> Result<f64, AnalysisError> {
    let half = 0.5 * peak.height;
    let center = crate::units::energy_to_angular(peak.center);
    let tol = 1e-9 * peak.height;
    let mut running_min = values[peak.index];
    let mut prev = peak.index;
    loop {
        let j = match side {
            Side::Left if prev == 0 => return Err(AnalysisError::OutsideWindow),
            Side::Left => prev - 1,
            Side::Right if prev + 1 == values.len() => return Err(AnalysisError::OutsideWindow),
            Side::Right => prev + 1,
        };
        if values[j] <= half {
            let (xa, ya, xb, yb) = (domega[prev], values[prev], domega[j], values[j]);
            let x = if ya == yb { xb } else { xa + (half - ya) * (xb - xa) / (yb - ya) };
            return Ok((x - center).abs());
        }
        if strict && values[j] > running_min + tol {
            return Err(AnalysisError::Unresolved);
        }
        running_min = running_min.min(values[j]);
        prev = j;
    }
}

fn half_widths(domega: &[f64], values: &[f64], peak: &Peak, strict: bool) -> Result<(f64, f64), AnalysisError> {
    Ok((
        half_width(domega, values, peak, Side::Left, strict)?,
        half_width(domega, values, peak, Side::Right, strict)?,
    ))
}

/// Full width at half maximum (μeV) from linearly interpolated crossings on
/// both sides of `peak`. Fails if a crossing is outside the window or if the
/// signal rises again (a neighbouring peak) before reaching half maximum.
pub fn fwhm(domega: &[f64], values: &[f64], peak: &Peak) -> Result<f64, AnalysisError> {
    check_window(domega, values)?;
    let (l, r) = half_widths(domega, values, peak, true)?;
    Ok(angular_to_energy(l + r))
}

/// Line readout of a window expected to hold the |p⟩ doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubletReadout {
    pub lower_fwhm: f64,
    pub upper_fwhm: f64,
    /// Center separation (μeV); NaN when only one line is resolved.
    pub separation: f64,
    pub lower_center: f64,
    pub upper_center: f64,
    pub resolved: bool,
}

impl DoubletReadout {
    pub fn mean_fwhm(&self) -> f64 {
        0.5 * (self.lower_fwhm + self.upper_fwhm)
    }
}

/// Widths and separation of the two strongest lines. If the lines overlap
/// above half maximum, each width is twice its outer half width; if only one
/// line is found, both widths are that line's full width.
pub fn doublet_readout(domega: &[f64], values: &[f64], min_prominence_fraction: f64) -> Result<DoubletReadout, AnalysisError> {
    let peaks = find_peaks(domega, values, min_prominence_fraction)?;
    match peaks.len() {
        0 => Err(AnalysisError::NoPeak),
        1 => {
            let p = &peaks[0];
            let w = match fwhm(domega, values, p) {
                Err(AnalysisError::Unresolved) => {
                    let (l, r) = half_widths(domega, values, p, false)?;
                    angular_to_energy(l + r)
                }
                other => other?,
            };
            Ok(DoubletReadout {
                lower_fwhm: w,
                upper_fwhm: w,
                separation: f64::NAN,
                lower_center: p.center,
                upper_center: p.center,
                resolved: false,
            })
        }
        _ => {
            let (lo, hi) = if peaks[0].center < peaks[1].center { (peaks[0], peaks[1]) } else { (peaks[1], peaks[0]) };
            let width = |p: &Peak, outer: Side| match fwhm(domega, values, p) {
                Err(AnalysisError::Unresolved) => {
                    half_width(domega, values, p, outer, true).map(|h| angular_to_energy(2.0 * h))
                }
                other => other,
            };
            Ok(DoubletReadout {
                lower_fwhm: width(&lo, Side::Left)?,
                upper_fwhm: width(&hi, Side::Right)?,
                separation: hi.center - lo.center,
                lower_center: lo.center,
                upper_center: hi.center,
                resolved: true,
            })
        }
    }
}

/// First time at which `signal` reaches half of its final value, linearly
/// interpolated. `None` if the final value is below `1e-12 · max`.
pub fn half_rise_time(times: &[f64], signal: &[f64]) -> Option<f64> {
    let last = *signal.last()?;
    let max = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(last > 1e-12 * max) || !(max > 0.0) {
        return None;
    }
    let target = 0.5 * last;
    if signal[0] >= target {
        return Some(times[0]);
    }
    signal.windows(2).position(|p| p[1] >= target).map(|i| {
        let (ya, yb) = (signal[i], signal[i + 1]);
        times[i] + (target - ya) / (yb - ya) * (times[i + 1] - times[i])
    })
}

/// Window-integrated `∫ R(Δω, t) dΔω` for each time of a time-dependent spectrum.
pub fn window_signal(spec: &SpectrumGrid) -> Result<Vec<f64>, AnalysisError> {
    let times = spec.times().ok_or(AnalysisError::NotTimeDependent)?;
    Ok((0..times.len()).map(|i| trapezoid(&spec.domega, spec.row(i))).collect())
}

/// Emission delay (ps): half-rise time of the window-integrated signal of a
/// time-dependent spectrum (normally the Δω ≈ 0 window).
pub fn delay_metric(spec: &SpectrumGrid) -> Result<Option<f64>, AnalysisError> {
    let signal = window_signal(spec)?;
    Ok(half_rise_time(spec.times().unwrap_or_default(), &signal))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega_uev: f64,
    pub gamma_pe_per_ps: f64,
    pub fwhm_lower_uev: f64,
    pub fwhm_upper_uev: f64,
    pub fwhm_mean_uev: f64,
    pub separation_uev: f64,
    pub delay_ps: Option<f64>,
    /// `"ok"` or a short failure description.
    pub status: String,
    /// State diagnostics over every trajectory computed for this point.
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub eigen_condition: f64,
}

impl SweepPoint {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn omega_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega_uev).collect()
    }

    pub fn mean_fwhm(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.fwhm_mean_uev).collect()
    }

    pub fn any_ok(&self) -> bool {
        self.points.iter().any(SweepPoint::ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub base: RunConfig,
    pub window_points: usize,
    pub prominence: f64,
    /// Also compute the emission delay from time-dependent spectra.
    pub with_delay: bool,
}

impl SweepSettings {
    pub fn new(base: RunConfig) -> Self {
        SweepSettings { base, window_points: WINDOW_POINTS, prominence: DEFAULT_PROMINENCE, with_delay: false }
    }
}

/// Full pipeline per drive strength: generator, integrated spectrum in the
/// Δ window, doublet readout, and optionally the delay. Points run in
/// parallel on the current rayon pool; failures are recorded per point.
/// Points are returned sorted by Ω.
pub fn linewidth_sweep(omegas_uev: &[f64], settings: &SweepSettings) -> SweepResult {
    let mut omegas = omegas_uev.to_vec();
    omegas.sort_by(f64::total_cmp);
    let points = omegas.par_iter().map(|&w| sweep_point(w, settings)).collect();
    SweepResult { points }
}

fn sweep_point(omega_uev: f64, settings: &SweepSettings) -> SweepPoint {
    let mut point = SweepPoint {
        omega_uev,
        gamma_pe_per_ps: f64::NAN,
        fwhm_lower_uev: f64::NAN,
        fwhm_upper_uev: f64::NAN,
        fwhm_mean_uev: f64::NAN,
        separation_uev: f64::NAN,
        delay_ps: None,
        status: "ok".into(),
        max_trace_error: f64::NAN,
        max_hermiticity_error: f64::NAN,
        min_eigenvalue: f64::NAN,
        eigen_condition: f64::NAN,
    };
    let cfg = settings.base.with_omega_uev(omega_uev);
    let pipeline = match cfg.clone().checked().and_then(|c| Pipeline::from_config(&c)) {
        Ok(p) => p,
        Err(e) => {
            point.status = format!("invalid: {e}");
            return point;
        }
    };
    point.gamma_pe_per_ps = pipeline.gamma_pe();
    point.eigen_condition = pipeline.liouvillian.eigen_condition;
    let record = |traj: &crate::liouvillian::Trajectory, p: &mut SweepPoint| {
        p.max_trace_error = p.max_trace_error.max(traj.max_trace_error());
        p.max_hermiticity_error = p.max_hermiticity_error.max(traj.max_hermiticity_error());
        p.min_eigenvalue = p.min_eigenvalue.min(traj.min_eigenvalue());
    };

    let nu = cfg.nu_integrated();
    let window = pipeline.window(WindowId::Pe, nu, settings.window_points);
    let readout = pipeline
        .integrated_spectra(nu, cfg.integration_t_ps, &[window])
        .map_err(|e| e.to_string())
        .and_then(|run| {
            record(&run.trajectory, &mut point);
            let s = &run.spectra[0];
            doublet_readout(&s.domega, &s.values, settings.prominence).map_err(|e| e.to_string())
        });
    match readout {
        Ok(r) => {
            point.fwhm_lower_uev = r.lower_fwhm;
            point.fwhm_upper_uev = r.upper_fwhm;
            point.fwhm_mean_uev = r.mean_fwhm();
            point.separation_uev = r.separation;
        }
        Err(e) => point.status = format!("spectrum: {e}"),
    }

    if settings.with_delay {
        let nu_td = cfg.nu_time_dependent();
        let delay = TimeGrid::new(0.0, cfg.t_end_ps, cfg.n_time)
            .and_then(|grid| {
                let w = pipeline.window(WindowId::Eg, nu_td, settings.window_points);
                pipeline.time_dependent_spectra(nu_td, &grid, &[w])
            })
            .map_err(|e| e.to_string())
            .and_then(|run| {
                record(&run.trajectory, &mut point);
                delay_metric(&run.spectra[0]).map_err(|e| e.to_string())
            });
        match delay {
            Ok(d) => point.delay_ps = d,
            Err(e) if point.ok() => point.status = format!("delay: {e}"),
            Err(_) => {}
        }
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use crate::units::energy_to_angular;

    /// Lorentzian in μeV coordinates sampled on a ps⁻¹ grid.
    fn lorentz(x_uev: f64, center: f64, fwhm: f64) -> f64 {
        let hw = 0.5 * fwhm;
        hw * hw / (hw * hw + (x_uev - center).powi(2))
    }

    fn grid_uev(lo: f64, hi: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
        let n = ((hi - lo) / step).round() as usize + 1;
        let uev = linspace(lo, hi, n);
        let ang = uev.iter().map(|&e| energy_to_angular(e)).collect();
        (uev, ang)
    }

    #[test]
    fn single_lorentzian() {
        let (x, w) = grid_uev(-50.0, 50.0, 0.1);
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, 1.234, 5.0)).collect();
        let peaks = find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].center - 1.234).abs() < 0.05);
        let f = fwhm(&w, &y, &peaks[0]).unwrap();
        assert!((f - 5.0).abs() < 0.2, "{f}");
        assert!((peaks[0].fwhm - f).abs() < 1e-12);
    }

    #[test]
    fn separated_pair() {
        let (x, w) = grid_uev(-150.0, 150.0, 0.5);
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, -50.0, 10.0) + 0.7 * lorentz(e, 50.0, 10.0)).collect();
        let peaks = find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!(peaks[0].height > peaks[1].height);
        assert!(((peaks[1].center - peaks[0].center) - 100.0).abs() < 0.5);
        let d = doublet_readout(&w, &y, DEFAULT_PROMINENCE).unwrap();
        assert!(d.resolved);
        assert!((d.separation - 100.0).abs() < 0.5);
        assert!((d.lower_fwhm - 10.0).abs() < 1.0 && (d.upper_fwhm - 10.0).abs() < 1.0);
    }

    #[test]
    fn flat_and_empty() {
        let w = linspace(0.0, 1.0, 32);
        assert!(find_peaks(&w, &[1.0; 32], 0.05).unwrap().is_empty());
        assert!(find_peaks(&w, &[0.0; 32], 0.05).unwrap().is_empty());
        assert_eq!(find_peaks(&w[..8], &[0.0; 8], 0.05), Err(AnalysisError::TooFewPoints(8)));
        assert_eq!(find_peaks(&w, &[0.0; 32], 1.5), Err(AnalysisError::BadFraction(1.5)));
        assert_eq!(doublet_readout(&w, &[1.0; 32], 0.05), Err(AnalysisError::NoPeak));
    }

    #[test]
    fn small_ripple_is_not_a_peak() {
        let (x, w) = grid_uev(-50.0, 50.0, 0.5);
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, 0.0, 10.0) + 0.01 * lorentz(e, 30.0, 1.0)).collect();
        assert_eq!(find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap().len(), 1);
    }

    #[test]
    fn crossing_outside_window() {
        let (x, w) = grid_uev(-3.0, 3.0, 0.1);
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, 0.0, 20.0)).collect();
        let peaks = find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap();
        assert!(peaks[0].fwhm.is_nan());
        assert_eq!(fwhm(&w, &y, &peaks[0]), Err(AnalysisError::OutsideWindow));
    }

    #[test]
    fn overlapping_doublet_is_flagged() {
        let (x, w) = grid_uev(-100.0, 100.0, 0.1);
        // separation 12, widths 10: two maxima with a shallow dip above half height
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, -6.0, 10.0) + lorentz(e, 6.0, 10.0)).collect();
        let peaks = find_peaks(&w, &y, 0.001).unwrap();
        assert_eq!(peaks.len(), 2);
        assert_eq!(fwhm(&w, &y, &peaks[0]), Err(AnalysisError::Unresolved));
        // merged into one maximum
        let y: Vec<f64> = x.iter().map(|&e| lorentz(e, -2.0, 10.0) + lorentz(e, 2.0, 10.0)).collect();
        let d = doublet_readout(&w, &y, DEFAULT_PROMINENCE).unwrap();
        assert!(!d.resolved && d.separation.is_nan());
        assert!(d.lower_fwhm > 10.0);
    }

    #[test]
    fn convolved_lorentzians_add_widths() {
        // Numerical convolution of a Lorentzian of FWHM Γ with a normalised
        // Lorentzian of half-width ν is a Lorentzian of FWHM Γ + 2ν.
        let (gamma, nu) = (8.0, 1.5);
        let (x, w) = grid_uev(-80.0, 80.0, 0.1);
        let kernel_x = linspace(-4000.0, 4000.0, 400_001);
        let dk = kernel_x[1] - kernel_x[0];
        let y: Vec<f64> = x
            .iter()
            .map(|&e| {
                kernel_x
                    .iter()
                    .map(|&u| lorentz(e - u, 0.0, gamma) * (nu / std::f64::consts::PI) / (nu * nu + u * u))
                    .sum::<f64>()
                    * dk
            })
            .collect();
        let peaks = find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap();
        let f = fwhm(&w, &y, &peaks[0]).unwrap();
        assert!((f - (gamma + 2.0 * nu)).abs() < 0.2, "{f}");
    }

    #[test]
    fn half_rise_of_step_and_ramp() {
        let t = linspace(0.0, 10.0, 1001);
        let step: Vec<f64> = t.iter().map(|&x| if x < 3.0 { 0.0 } else { 1.0 }).collect();
        assert!((half_rise_time(&t, &step).unwrap() - 3.0).abs() <= 0.01);
        let ramp: Vec<f64> = t.iter().map(|&x| x).collect();
        assert!((half_rise_time(&t, &ramp).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(half_rise_time(&t, &vec![0.0; t.len()]), None);
        let dying: Vec<f64> = t.iter().map(|&x| if x < 1.0 { 1.0 } else { 0.0 }).collect();
        assert_eq!(half_rise_time(&t, &dying), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn recovers_lorentzian_width(width in 1.0..50.0f64, center in -5.0..5.0f64) {
                let step = 0.1;
                let (x, w) = grid_uev(center - 6.0 * width - 1.0, center + 6.0 * width + 1.0, step);
                let y: Vec<f64> = x.iter().map(|&e| lorentz(e, center, width)).collect();
                let peaks = find_peaks(&w, &y, DEFAULT_PROMINENCE).unwrap();
                prop_assert_eq!(peaks.len(), 1);
                let f = fwhm(&w, &y, &peaks[0]).unwrap();
                prop_assert!((f - width).abs() <= 2.0 * step);
            }
        }
    }
}
