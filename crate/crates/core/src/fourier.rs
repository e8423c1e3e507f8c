//! Direct-summation Fourier transforms between nonmatching time and
//! frequency grids, and the sensing operator used by the sparse solver.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, TimeGrid};

// Phasor recurrences drift one ulp per multiply; re-anchor with an exact
// exponential periodically to keep 1e-12 accuracy on long grids.
const ANCHOR_STRIDE: usize = 64;

fn check_len(len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::LengthMismatch { expected, got: len });
    }
    Ok(())
}

/// Forward transform g_k = sum_j dt * exp(+i w_k t_j) * h_j,
/// evaluated by direct summation at every frequency of `freq_grid`.
pub fn dft(h: &[C64], time_grid: &TimeGrid, freq_grid: &FrequencyGrid) -> Result<Vec<C64>> {
    check_len(h.len(), time_grid.count())?;
    let dt = time_grid.delta_fs();
    let mut g = Vec::with_capacity(freq_grid.count());
    for k in 0..freq_grid.count() {
        let w = freq_grid.frequency(k);
        // phase advances by w*dt from sample to sample
        let step = C64::from_polar(1.0, w * dt);
        let mut phase = C64::from_polar(1.0, w * time_grid.time(0));
        let mut acc = C64::new(0.0, 0.0);
        for (j, &hj) in h.iter().enumerate() {
            if j > 0 && j % ANCHOR_STRIDE == 0 {
                phase = C64::from_polar(1.0, w * time_grid.time(j));
            }
            acc += phase * hj;
            phase *= step;
        }
        g.push(acc * dt);
    }
    Ok(g)
}

/// The frequency-to-time map of the sparse-recovery problem:
/// (F g)_k = prefactor * sum_j exp(-i w_j t_k) g_j, with
/// prefactor = (2/pi)*dw, or 1 when `normalized`.
///
/// The phase kernel is precomputed once per grid pair; applications are
/// plain row sums over it, so repeated solves on the same grids stay cheap.
pub struct SensingOperator {
    time_grid: TimeGrid,
    freq_grid: FrequencyGrid,
    normalized: bool,
    /// Row-major N_t x N_omega table of exp(-i w_j t_k), stored as
    /// separate real and imaginary planes so the row sums vectorize.
    kernel_re: Vec<f64>,
    kernel_im: Vec<f64>,
}

impl SensingOperator {
    pub fn new(time_grid: TimeGrid, freq_grid: FrequencyGrid, normalized: bool) -> Self {
        let n_t = time_grid.count();
        let n_w = freq_grid.count();
        let mut kernel_re = Vec::with_capacity(n_t * n_w);
        let mut kernel_im = Vec::with_capacity(n_t * n_w);
        for k in 0..n_t {
            let t = time_grid.time(k);
            let step = C64::from_polar(1.0, -freq_grid.spacing() * t);
            let mut phase = C64::from_polar(1.0, -freq_grid.min() * t);
            for j in 0..n_w {
                if j > 0 && j % ANCHOR_STRIDE == 0 {
                    phase = C64::from_polar(1.0, -freq_grid.frequency(j) * t);
                }
                kernel_re.push(phase.re);
                kernel_im.push(phase.im);
                phase *= step;
            }
        }
        SensingOperator {
            time_grid,
            freq_grid,
            normalized,
            kernel_re,
            kernel_im,
        }
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn freq_grid(&self) -> &FrequencyGrid {
        &self.freq_grid
    }

    pub fn n_time(&self) -> usize {
        self.time_grid.count()
    }

    pub fn n_freq(&self) -> usize {
        self.freq_grid.count()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// (2/pi)*dw — the factor dropped under the normalized convention.
    pub fn physical_prefactor(&self) -> f64 {
        FRAC_2_PI * self.freq_grid.spacing()
    }

    fn prefactor(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.physical_prefactor()
        }
    }

    /// F g: frequency coefficients to a time-domain reconstruction.
    pub fn apply(&self, g: &[C64]) -> Result<Vec<C64>> {
        check_len(g.len(), self.n_freq())?;
        Ok(self.apply_raw(g, self.prefactor()))
    }

    /// F^H r: time-domain residual to frequency space.
    pub fn adjoint(&self, r: &[C64]) -> Result<Vec<C64>> {
        check_len(r.len(), self.n_time())?;
        Ok(self.adjoint_raw(r, self.prefactor()))
    }

    pub(crate) fn apply_raw(&self, g: &[C64], prefactor: f64) -> Vec<C64> {
        let n_w = self.n_freq();
        let g_re: Vec<f64> = g.iter().map(|v| v.re).collect();
        let g_im: Vec<f64> = g.iter().map(|v| v.im).collect();
        let mut out = Vec::with_capacity(self.n_time());
        for (row_re, row_im) in self
            .kernel_re
            .chunks_exact(n_w)
            .zip(self.kernel_im.chunks_exact(n_w))
        {
            // independent partial sums keep the reduction off the
            // floating-point latency chain
            let mut acc_re = [0.0f64; 4];
            let mut acc_im = [0.0f64; 4];
            let chunks = n_w / 4 * 4;
            let mut j = 0;
            while j < chunks {
                for lane in 0..4 {
                    let (kr, ki) = (row_re[j + lane], row_im[j + lane]);
                    let (vr, vi) = (g_re[j + lane], g_im[j + lane]);
                    acc_re[lane] += kr * vr - ki * vi;
                    acc_im[lane] += kr * vi + ki * vr;
                }
                j += 4;
            }
            let mut re = (acc_re[0] + acc_re[1]) + (acc_re[2] + acc_re[3]);
            let mut im = (acc_im[0] + acc_im[1]) + (acc_im[2] + acc_im[3]);
            while j < n_w {
                let (kr, ki) = (row_re[j], row_im[j]);
                let (vr, vi) = (g_re[j], g_im[j]);
                re += kr * vr - ki * vi;
                im += kr * vi + ki * vr;
                j += 1;
            }
            out.push(C64::new(re * prefactor, im * prefactor));
        }
        out
    }

    pub(crate) fn adjoint_raw(&self, r: &[C64], prefactor: f64) -> Vec<C64> {
        let n_w = self.n_freq();
        let mut out_re = vec![0.0f64; n_w];
        let mut out_im = vec![0.0f64; n_w];
        // accumulate conj(row_k) * r_k row by row; rows are contiguous
        for ((row_re, row_im), rk) in self
            .kernel_re
            .chunks_exact(n_w)
            .zip(self.kernel_im.chunks_exact(n_w))
            .zip(r.iter())
        {
            let (rr, ri) = (rk.re, rk.im);
            for j in 0..n_w {
                let (kr, ki) = (row_re[j], row_im[j]);
                out_re[j] += kr * rr + ki * ri;
                out_im[j] += kr * ri - ki * rr;
            }
        }
        out_re
            .into_iter()
            .zip(out_im)
            .map(|(re, im)| C64::new(re * prefactor, im * prefactor))
            .collect()
    }
}
