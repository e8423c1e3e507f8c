//! The two-pass 2D compressed-sensing procedure and the 2D discrete FT
//! baseline. Pass 1 runs one BPDN solve per tau row (t -> omega_t); pass 2
//! runs one per omega_t column (tau -> omega_tau). Solves are independent
//! and dispatched through an order-preserving parallel map, so output is
//! bit-identical for any worker count.

use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bpdn::{solve_bpdn_normalized, BpdnConfig, BpdnResult, BpdnStatus};
use crate::data::{HalfTransformed2D, Provenance, SignalGrid2D, Spectrum2D};
use crate::error::{Error, Result};
use crate::fourier::{dft, SensingOperator};
use crate::grid::{Endpoint, FrequencyGrid};

/// Outcome of one 1D solve within a pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub index: usize,
    pub status: BpdnStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub residual_norm: f64,
}

impl SolveRecord {
    fn from_result(index: usize, r: &BpdnResult) -> Self {
        SolveRecord {
            index,
            status: r.status,
            outer_iterations: r.outer_iterations,
            inner_iterations: r.inner_iterations,
            residual_norm: r.residual_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassReport {
    pub records: Vec<SolveRecord>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub eta: f64,
    pub pass_t: PassReport,
    pub pass_tau: PassReport,
}

/// Which axis is compressed first. The default matches the two-step
/// procedure (t first); the roles may be interchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisOrder {
    #[default]
    TFirst,
    TauFirst,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cs2dConfig {
    pub bpdn: BpdnConfig,
    /// 0 means use all available processors.
    pub workers: usize,
    pub axis_order: AxisOrder,
    pub endpoint: Endpoint,
}

/// Order-preserving parallel map: results land in their input slots, so
/// the assembled output is independent of scheduling.
fn parallel_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let run = || {
        (0..count)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    };
    if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?;
        pool.install(run)
    }
}

fn solve_series(
    op: &SensingOperator,
    series: &[C64],
    config: &BpdnConfig,
    pass: &'static str,
    index: usize,
) -> Result<(Vec<C64>, SolveRecord)> {
    let result = solve_bpdn_normalized(op, series, config).map_err(|e| Error::RowSolve {
        pass,
        index,
        source: Box::new(e),
    })?;
    if result
        .coefficients
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::RowSolve {
            pass,
            index,
            source: Box::new(Error::NumericalFailure("non-finite coefficients".into())),
        });
    }
    let record = SolveRecord::from_result(index, &result);
    Ok((result.coefficients, record))
}

/// Step 1: one normalized BPDN solve per tau row, t -> omega_t.
pub fn cs_pass_t(
    signal: &SignalGrid2D,
    freq_grid_t: &FrequencyGrid,
    config: &BpdnConfig,
    workers: usize,
) -> Result<(HalfTransformed2D, PassReport)> {
    let start = Instant::now();
    let op = SensingOperator::new(signal.t_grid, *freq_grid_t, true);
    let n_tau = signal.tau_grid.count();
    let rows = parallel_map(workers, n_tau, |i| {
        let series: Vec<C64> = signal.values().row(i).to_vec();
        solve_series(&op, &series, config, "t", i)
    })?;

    let mut values = Array2::from_elem((n_tau, freq_grid_t.count()), C64::new(0.0, 0.0));
    let mut records = Vec::with_capacity(n_tau);
    for (i, (coeffs, record)) in rows.into_iter().enumerate() {
        for (j, v) in coeffs.into_iter().enumerate() {
            values[(i, j)] = v;
        }
        records.push(record);
    }
    let half = HalfTransformed2D::new(
        signal.tau_grid,
        *freq_grid_t,
        signal.population_time_fs,
        values,
    )?;
    Ok((
        half,
        PassReport {
            records,
            wall_time: start.elapsed(),
        },
    ))
}

/// Step 2: one normalized BPDN solve per omega_t column, tau -> omega_tau.
pub fn cs_pass_tau(
    half: &HalfTransformed2D,
    freq_grid_tau: &FrequencyGrid,
    config: &BpdnConfig,
    workers: usize,
) -> Result<(Spectrum2D, PassReport)> {
    let start = Instant::now();
    let op = SensingOperator::new(half.tau_grid, *freq_grid_tau, true);
    let n_cols = half.omega_t_grid.count();
    let cols = parallel_map(workers, n_cols, |j| {
        let series: Vec<C64> = half.values().column(j).to_vec();
        solve_series(&op, &series, config, "tau", j)
    })?;

    let mut values = Array2::from_elem((freq_grid_tau.count(), n_cols), C64::new(0.0, 0.0));
    let mut records = Vec::with_capacity(n_cols);
    for (j, (coeffs, record)) in cols.into_iter().enumerate() {
        for (i, v) in coeffs.into_iter().enumerate() {
            values[(i, j)] = v;
        }
        records.push(record);
    }
    let spectrum = Spectrum2D::new(
        *freq_grid_tau,
        half.omega_t_grid,
        half.population_time_fs,
        Provenance::Cs,
        values,
    )?;
    Ok((
        spectrum,
        PassReport {
            records,
            wall_time: start.elapsed(),
        },
    ))
}

/// Full 2D compressed sensing: both passes composed, with frequency grids
/// derived from the signal's time grids.
pub fn cs2d(
    signal: &SignalGrid2D,
    n_omega_tau: usize,
    n_omega_t: usize,
    config: &Cs2dConfig,
) -> Result<(Spectrum2D, PipelineReport)> {
    match config.axis_order {
        AxisOrder::TFirst => cs2d_t_first(signal, n_omega_tau, n_omega_t, config),
        AxisOrder::TauFirst => {
            let swapped = signal.transposed();
            let (spectrum, report) = cs2d_t_first(&swapped, n_omega_t, n_omega_tau, config)?;
            Ok((spectrum.transposed(), report))
        }
    }
}

fn cs2d_t_first(
    signal: &SignalGrid2D,
    n_omega_tau: usize,
    n_omega_t: usize,
    config: &Cs2dConfig,
) -> Result<(Spectrum2D, PipelineReport)> {
    let freq_t = FrequencyGrid::for_time_grid(&signal.t_grid, n_omega_t, config.endpoint)?;
    let freq_tau = FrequencyGrid::for_time_grid(&signal.tau_grid, n_omega_tau, config.endpoint)?;
    let (half, report_t) = cs_pass_t(signal, &freq_t, &config.bpdn, config.workers)?;
    let (spectrum, report_tau) = cs_pass_tau(&half, &freq_tau, &config.bpdn, config.workers)?;
    Ok((
        spectrum,
        PipelineReport {
            eta: config.bpdn.eta,
            pass_t: report_t,
            pass_tau: report_tau,
        },
    ))
}

/// Baseline 2D discrete Fourier transform on the same frequency grids as
/// `cs2d`: direct evaluation along t for every row, then along tau for
/// every column.
pub fn ft2d(
    signal: &SignalGrid2D,
    n_omega_tau: usize,
    n_omega_t: usize,
    endpoint: Endpoint,
) -> Result<Spectrum2D> {
    let freq_t = FrequencyGrid::for_time_grid(&signal.t_grid, n_omega_t, endpoint)?;
    let freq_tau = FrequencyGrid::for_time_grid(&signal.tau_grid, n_omega_tau, endpoint)?;

    let n_tau = signal.tau_grid.count();
    let mut half = Array2::from_elem((n_tau, freq_t.count()), C64::new(0.0, 0.0));
    for i in 0..n_tau {
        let row: Vec<C64> = signal.values().row(i).to_vec();
        let g = dft(&row, &signal.t_grid, &freq_t)?;
        for (j, v) in g.into_iter().enumerate() {
            half[(i, j)] = v;
        }
    }

    let mut values = Array2::from_elem((freq_tau.count(), freq_t.count()), C64::new(0.0, 0.0));
    for j in 0..freq_t.count() {
        let col: Vec<C64> = half.column(j).to_vec();
        let g = dft(&col, &signal.tau_grid, &freq_tau)?;
        for (i, v) in g.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }

    Spectrum2D::new(
        freq_tau,
        freq_t,
        signal.population_time_fs,
        Provenance::Ft,
        values,
    )
}
