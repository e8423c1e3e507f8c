//! Time- and frequency-domain data containers.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, TimeGrid};

/// Which fluorescence-detected channel a signal belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalLabel {
    /// Nonrephasing channel.
    Sum,
    /// Rephasing channel.
    Diff,
}

impl SignalLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignalLabel::Sum => "sum",
            SignalLabel::Diff => "diff",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sum" => Some(SignalLabel::Sum),
            "diff" => Some(SignalLabel::Diff),
            _ => None,
        }
    }
}

fn check_finite(values: &Array2<C64>) -> Result<()> {
    for v in values.iter() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::invalid("non-finite value in grid data"));
        }
    }
    Ok(())
}

/// Time-domain data S(tau, T, t) for one population time T.
/// Rows index tau, columns index t.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGrid2D {
    pub tau_grid: TimeGrid,
    pub t_grid: TimeGrid,
    pub population_time_fs: f64,
    pub label: SignalLabel,
    values: Array2<C64>,
}

impl SignalGrid2D {
    pub fn new(
        tau_grid: TimeGrid,
        t_grid: TimeGrid,
        population_time_fs: f64,
        label: SignalLabel,
        values: Array2<C64>,
    ) -> Result<Self> {
        if values.nrows() != tau_grid.count() || values.ncols() != t_grid.count() {
            return Err(Error::invalid(format!(
                "signal shape {}x{} does not match grids {}x{}",
                values.nrows(),
                values.ncols(),
                tau_grid.count(),
                t_grid.count()
            )));
        }
        check_finite(&values)?;
        Ok(SignalGrid2D {
            tau_grid,
            t_grid,
            population_time_fs,
            label,
            values,
        })
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    /// Same data with the roles of tau and t swapped.
    pub fn transposed(&self) -> SignalGrid2D {
        SignalGrid2D {
            tau_grid: self.t_grid,
            t_grid: self.tau_grid,
            population_time_fs: self.population_time_fs,
            label: self.label,
            values: self.values.t().to_owned(),
        }
    }
}

/// Which transform produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Ft,
    Cs,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Ft => "ft",
            Provenance::Cs => "cs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ft" => Some(Provenance::Ft),
            "cs" => Some(Provenance::Cs),
            _ => None,
        }
    }
}

/// Frequency-domain data S(omega_tau, T, omega_t).
/// Rows index omega_tau, columns index omega_t.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub omega_tau_grid: FrequencyGrid,
    pub omega_t_grid: FrequencyGrid,
    pub population_time_fs: f64,
    pub provenance: Provenance,
    values: Array2<C64>,
}

impl Spectrum2D {
    pub fn new(
        omega_tau_grid: FrequencyGrid,
        omega_t_grid: FrequencyGrid,
        population_time_fs: f64,
        provenance: Provenance,
        values: Array2<C64>,
    ) -> Result<Self> {
        if values.nrows() != omega_tau_grid.count() || values.ncols() != omega_t_grid.count() {
            return Err(Error::invalid(format!(
                "spectrum shape {}x{} does not match grids {}x{}",
                values.nrows(),
                values.ncols(),
                omega_tau_grid.count(),
                omega_t_grid.count()
            )));
        }
        check_finite(&values)?;
        Ok(Spectrum2D {
            omega_tau_grid,
            omega_t_grid,
            population_time_fs,
            provenance,
            values,
        })
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    /// Same data with the two frequency axes swapped.
    pub fn transposed(&self) -> Spectrum2D {
        Spectrum2D {
            omega_tau_grid: self.omega_t_grid,
            omega_t_grid: self.omega_tau_grid,
            population_time_fs: self.population_time_fs,
            provenance: self.provenance,
            values: self.values.t().to_owned(),
        }
    }
}

/// Intermediate of the two-pass procedure: S(tau, T, omega_t).
/// Rows index tau, columns index omega_t.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfTransformed2D {
    pub tau_grid: TimeGrid,
    pub omega_t_grid: FrequencyGrid,
    pub population_time_fs: f64,
    values: Array2<C64>,
}

impl HalfTransformed2D {
    pub fn new(
        tau_grid: TimeGrid,
        omega_t_grid: FrequencyGrid,
        population_time_fs: f64,
        values: Array2<C64>,
    ) -> Result<Self> {
        if values.nrows() != tau_grid.count() || values.ncols() != omega_t_grid.count() {
            return Err(Error::invalid(format!(
                "half-transform shape {}x{} does not match grids {}x{}",
                values.nrows(),
                values.ncols(),
                tau_grid.count(),
                omega_t_grid.count()
            )));
        }
        check_finite(&values)?;
        Ok(HalfTransformed2D {
            tau_grid,
            omega_t_grid,
            population_time_fs,
            values,
        })
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }
}
