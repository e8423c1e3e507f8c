//! Uniform sampling axes for the time and frequency domains.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniformly spaced time axis, t_j = delta * (origin_index + j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    delta_fs: f64,
    count: usize,
    origin_index: i64,
}

impl TimeGrid {
    pub fn new(delta_fs: f64, count: usize) -> Result<Self> {
        Self::with_origin(delta_fs, count, 0)
    }

    pub fn with_origin(delta_fs: f64, count: usize, origin_index: i64) -> Result<Self> {
        if !(delta_fs.is_finite() && delta_fs > 0.0) {
            return Err(Error::invalid(format!(
                "time step must be finite and positive, got {delta_fs}"
            )));
        }
        if count < 1 {
            return Err(Error::invalid("time grid needs at least one sample"));
        }
        Ok(TimeGrid {
            delta_fs,
            count,
            origin_index,
        })
    }

    pub fn delta_fs(&self) -> f64 {
        self.delta_fs
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn origin_index(&self) -> i64 {
        self.origin_index
    }

    pub fn time(&self, j: usize) -> f64 {
        self.delta_fs * (self.origin_index as f64 + j as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.time(j))
    }

    /// Half the sampled band: pi / delta, in rad/fs.
    pub fn nyquist(&self) -> f64 {
        PI / self.delta_fs
    }
}

/// Whether the positive band edge +pi/delta is itself a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endpoint {
    /// Standard DFT bin layout: min = -pi/delta, spacing = 2*pi/(delta*n),
    /// so the top bin stops one spacing short of +pi/delta. Avoids the
    /// aliased duplicate of the -pi/delta bin.
    #[default]
    Exclusive,
    /// min = -pi/delta, max = +pi/delta, spacing = 2*pi/(delta*(n-1)).
    Inclusive,
}

/// Uniformly spaced frequency axis, omega_j = min + j * spacing, in rad/fs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    min: f64,
    spacing: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(min: f64, spacing: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("frequency grid needs at least two points"));
        }
        if !(min.is_finite() && spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!(
                "frequency grid needs finite min and positive spacing, got min={min}, spacing={spacing}"
            )));
        }
        Ok(FrequencyGrid {
            min,
            spacing,
            count,
        })
    }

    /// Frequency axis covering the band sampled by `time_grid`.
    pub fn for_time_grid(time_grid: &TimeGrid, n_omega: usize, endpoint: Endpoint) -> Result<Self> {
        if n_omega < 2 {
            return Err(Error::invalid("n_omega must be at least 2"));
        }
        let nyq = time_grid.nyquist();
        let spacing = match endpoint {
            Endpoint::Exclusive => 2.0 * nyq / n_omega as f64,
            Endpoint::Inclusive => 2.0 * nyq / (n_omega - 1) as f64,
        };
        FrequencyGrid::new(-nyq, spacing, n_omega)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.frequency(self.count - 1)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.frequency(j))
    }

    /// Index of the grid point closest to `omega` (clamped to the grid).
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let j = ((omega - self.min) / self.spacing).round();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.count - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_grid_covers_nyquist_band() {
        // 1000 points between -pi/26.687 and +pi/26.687
        let tg = TimeGrid::new(26.687, 50).unwrap();
        let fg = FrequencyGrid::for_time_grid(&tg, 1000, Endpoint::Exclusive).unwrap();
        let nyq = PI / 26.687;
        assert!((nyq - 0.11772).abs() < 1e-5);
        assert_eq!(fg.count(), 1000);
        assert!((fg.min() + nyq).abs() < 1e-15);
        let expect_max = nyq * (1.0 - 2.0 / 1000.0);
        assert!((fg.max() - expect_max).abs() < 1e-12);
    }

    #[test]
    fn two_point_inclusive_grid_hits_both_edges() {
        let tg = TimeGrid::new(1.0, 4).unwrap();
        let fg = FrequencyGrid::for_time_grid(&tg, 2, Endpoint::Inclusive).unwrap();
        assert!((fg.frequency(0) + PI).abs() < 1e-15);
        assert!((fg.frequency(1) - PI).abs() < 1e-15);
    }

    #[test]
    fn inclusive_spacing_by_hand() {
        // delta=2, n=5 inclusive: (pi/2 - (-pi/2)) / 4 = pi/4
        let tg = TimeGrid::new(2.0, 4).unwrap();
        let fg = FrequencyGrid::for_time_grid(&tg, 5, Endpoint::Inclusive).unwrap();
        assert!((fg.spacing() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        let tg = TimeGrid::new(1.0, 4).unwrap();
        assert!(FrequencyGrid::for_time_grid(&tg, 1, Endpoint::Exclusive).is_err());
    }

    #[test]
    fn frequencies_reconstruct_bit_identically() {
        let fg = FrequencyGrid::new(-0.117, 2.354e-4, 1000).unwrap();
        let stored: Vec<f64> = fg.frequencies().collect();
        for (j, &w) in stored.iter().enumerate() {
            assert_eq!(w.to_bits(), (fg.min() + j as f64 * fg.spacing()).to_bits());
        }
    }

    #[test]
    fn nearest_bin_clamps() {
        let fg = FrequencyGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(fg.nearest_bin(-10.0), 0);
        assert_eq!(fg.nearest_bin(10.0), 3);
        assert_eq!(fg.nearest_bin(1.4), 1);
        assert_eq!(fg.nearest_bin(1.6), 2);
    }

    #[test]
    fn time_origin_shifts_samples() {
        let tg = TimeGrid::with_origin(0.5, 3, 1).unwrap();
        let ts: Vec<f64> = tg.times().collect();
        assert_eq!(ts, vec![0.5, 1.0, 1.5]);
    }
}
