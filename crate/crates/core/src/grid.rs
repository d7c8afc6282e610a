use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_start, t_start + h, ..., t_end` (ps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        let grid = TimeGrid { t_start, t_end, n_points };
        grid.check()?;
        Ok(grid)
    }

    /// Grid starting at zero whose spacing does not exceed `max_step`.
    pub fn with_max_step(t_end: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) || !max_step.is_finite() {
            return Err(Error::Grid(format!("step must be positive, got {max_step}")));
        }
        let intervals = (t_end / max_step).ceil().max(1.0) as usize;
        TimeGrid::new(0.0, t_end, intervals + 1)
    }

    pub fn check(&self) -> Result<()> {
        if !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::Grid("time bounds must be finite".into()));
        }
        if self.n_points == 1 {
            return Ok(());
        }
        if self.n_points == 0 {
            return Err(Error::Grid("time grid needs at least one point".into()));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::Grid(format!(
                "time grid must be strictly increasing: t_start={} t_end={}",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn step(&self) -> f64 {
        if self.n_points < 2 {
            0.0
        } else {
            (self.t_end - self.t_start) / (self.n_points - 1) as f64
        }
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.at(i)).collect()
    }

    /// Index of the grid point equal to `t` within a small fraction of a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let h = self.step();
        if h == 0.0 {
            return (t == self.t_start).then_some(0);
        }
        let x = (t - self.t_start) / h;
        let i = x.round();
        if i < 0.0 || i as usize >= self.n_points || (x - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }
}

/// Uniform frequency grid helper: `n` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
                .collect()
        }
    }
}

/// Composite trapezoid on an arbitrary (sorted) abscissa.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "trapezoid: unequal lengths");
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = TimeGrid::new(0.0, 3000.0, 30001).unwrap();
        assert_eq!(g.at(0), 0.0);
        assert_eq!(g.at(30000), 3000.0);
        assert!((g.step() - 0.1).abs() < 1e-15);
        assert_eq!(g.index_of(20.0), Some(200));
        assert_eq!(g.index_of(20.05), None);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 3).is_err());
    }

    #[test]
    fn max_step_respected() {
        let g = TimeGrid::with_max_step(100.0, 0.3).unwrap();
        assert!(g.step() <= 0.3);
        assert_eq!(g.t_end, 100.0);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let x = linspace(0.0, 2.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((trapezoid(&x, &y) - 8.0).abs() < 1e-14);
    }
}
