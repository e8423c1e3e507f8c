//! Synthetic time-domain 2D signals: sums of damped complex exponentials,
//! with a preset mimicking the two Rb D-line transitions in a rotating
//! frame. Stands in for experimental data in recovery and resolution tests.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::data::{SignalGrid2D, SignalLabel};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Rb D-line transition frequencies, rad/fs (lab frame).
pub const RB_LINE_LOW: f64 = 2.370;
pub const RB_LINE_HIGH: f64 = 2.414;

/// Default rotating-frame reference frequency, rad/fs.
pub const DEFAULT_FRAME_FREQUENCY: f64 = 2.340;

/// Default damping rate, 1/fs. The physical Rb linewidths are orders of
/// magnitude below what 50 samples can resolve; a mild damping keeps the
/// surrogate generic without hiding the resolution comparison.
pub const DEFAULT_DAMPING: f64 = 1.0 / 2000.0;

/// One term A * exp((i*w_tau - g_tau)*tau) * exp((i*w_t - g_t)*t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialMode {
    pub omega_tau: f64,
    pub omega_t: f64,
    pub amplitude: C64,
    pub gamma_tau: f64,
    pub gamma_t: f64,
}

/// Additive circularly-symmetric complex Gaussian noise,
/// E|z|^2 = sigma^2 per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            sigma: 0.0,
            seed: 0,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn unit_open(bits: u64) -> f64 {
    // uniform in (0, 1]
    ((bits >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
}

/// Counter-based noise draw: a pure function of (seed, sample index), so
/// output is independent of evaluation order.
fn noise_sample(seed: u64, index: u64, sigma: f64) -> C64 {
    let mut state = seed ^ index.wrapping_mul(0xd6e8feb86659fd93);
    let _ = splitmix64(&mut state); // decorrelate nearby counters
    let u1 = unit_open(splitmix64(&mut state));
    let u2 = unit_open(splitmix64(&mut state));
    let radius = sigma * (-u1.ln()).sqrt();
    C64::from_polar(radius, TAU * u2)
}

/// Evaluate the mode sum plus noise on the given grids.
///
/// Every mode frequency must lie strictly inside the Nyquist band of its
/// axis; damping rates must be nonnegative.
pub fn synthesize(
    modes: &[ExponentialMode],
    tau_grid: &TimeGrid,
    t_grid: &TimeGrid,
    population_time_fs: f64,
    label: SignalLabel,
    noise: &NoiseSpec,
) -> Result<SignalGrid2D> {
    let nyq_tau = tau_grid.nyquist();
    let nyq_t = t_grid.nyquist();
    for (i, m) in modes.iter().enumerate() {
        if m.omega_tau.abs() >= nyq_tau || m.omega_t.abs() >= nyq_t {
            return Err(Error::invalid(format!(
                "mode {i} at ({}, {}) rad/fs is outside the Nyquist band (|w_tau| < {nyq_tau}, |w_t| < {nyq_t})",
                m.omega_tau, m.omega_t
            )));
        }
        if m.gamma_tau < 0.0 || m.gamma_t < 0.0 {
            return Err(Error::invalid(format!("mode {i} has negative damping")));
        }
        if !m.amplitude.re.is_finite() || !m.amplitude.im.is_finite() {
            return Err(Error::invalid(format!("mode {i} has non-finite amplitude")));
        }
    }
    if noise.sigma < 0.0 {
        return Err(Error::invalid("noise sigma must be nonnegative"));
    }

    let n_tau = tau_grid.count();
    let n_t = t_grid.count();
    let mut values = Array2::from_elem((n_tau, n_t), C64::new(0.0, 0.0));
    for m in modes {
        let tau_factors: Vec<C64> = tau_grid
            .times()
            .map(|tau| C64::from_polar((-m.gamma_tau * tau).exp(), m.omega_tau * tau))
            .collect();
        let t_factors: Vec<C64> = t_grid
            .times()
            .map(|t| C64::from_polar((-m.gamma_t * t).exp(), m.omega_t * t))
            .collect();
        for a in 0..n_tau {
            let row_factor = m.amplitude * tau_factors[a];
            for b in 0..n_t {
                values[(a, b)] += row_factor * t_factors[b];
            }
        }
    }
    if noise.sigma > 0.0 {
        for a in 0..n_tau {
            for b in 0..n_t {
                let index = (a * n_t + b) as u64;
                values[(a, b)] += noise_sample(noise.seed, index, noise.sigma);
            }
        }
    }
    SignalGrid2D::new(*tau_grid, *t_grid, population_time_fs, label, values)
}

/// The four tensor-product modes of the two Rb lines in a rotating frame:
/// offsets v_i = line_i - frame_frequency combined on both axes. The sum
/// (nonrephasing) channel carries the offsets with the same sign on both
/// axes; the diff (rephasing) channel negates the omega_tau offsets.
pub fn rb_preset(kind: SignalLabel, frame_frequency: f64) -> Vec<ExponentialMode> {
    let offsets = [
        RB_LINE_LOW - frame_frequency,
        RB_LINE_HIGH - frame_frequency,
    ];
    let tau_sign = match kind {
        SignalLabel::Sum => 1.0,
        SignalLabel::Diff => -1.0,
    };
    let mut modes = Vec::with_capacity(4);
    for &wt in &offsets {
        for &wtau in &offsets {
            modes.push(ExponentialMode {
                omega_tau: tau_sign * wtau,
                omega_t: wt,
                amplitude: C64::new(1.0, 0.0),
                gamma_tau: DEFAULT_DAMPING,
                gamma_t: DEFAULT_DAMPING,
            });
        }
    }
    modes
}

/// Where each mode shows up in a spectrum produced by this crate's
/// transforms: the exp(+i*w*t) analysis kernel of the forward transform
/// places a mode oscillating as exp(+i*w0*t) at the bin nearest -w0.
pub fn spectral_positions(modes: &[ExponentialMode]) -> Vec<(f64, f64)> {
    modes.iter().map(|m| (-m.omega_tau, -m.omega_t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> (TimeGrid, TimeGrid) {
        (
            TimeGrid::new(26.687, 6).unwrap(),
            TimeGrid::new(26.687, 5).unwrap(),
        )
    }

    #[test]
    fn empty_mode_list_yields_zero() {
        let (tg, tt) = grids();
        let s = synthesize(&[], &tg, &tt, 140.0, SignalLabel::Sum, &NoiseSpec::none()).unwrap();
        assert!(s.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_undamped_mode_direct_evaluation() {
        let tau = TimeGrid::new(0.7, 3).unwrap();
        let t = TimeGrid::new(0.9, 3).unwrap();
        let mode = ExponentialMode {
            omega_tau: 1.1,
            omega_t: -0.8,
            amplitude: C64::new(1.0, 0.0),
            gamma_tau: 0.0,
            gamma_t: 0.0,
        };
        let s = synthesize(&[mode], &tau, &t, 0.0, SignalLabel::Sum, &NoiseSpec::none()).unwrap();
        let expect = C64::from_polar(1.0, 1.1 * 0.7 + (-0.8) * 0.9);
        assert!((s.values()[(1, 1)] - expect).norm() < 1e-14);
    }

    #[test]
    fn opposite_amplitudes_cancel() {
        let (tg, tt) = grids();
        let m = ExponentialMode {
            omega_tau: 0.03,
            omega_t: 0.07,
            amplitude: C64::new(1.0, 0.5),
            gamma_tau: 1e-3,
            gamma_t: 2e-3,
        };
        let neg = ExponentialMode {
            amplitude: -m.amplitude,
            ..m
        };
        let s = synthesize(
            &[m, neg],
            &tg,
            &tt,
            0.0,
            SignalLabel::Sum,
            &NoiseSpec::none(),
        )
        .unwrap();
        assert!(s.values().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn nyquist_violation_rejected() {
        let (tg, tt) = grids();
        let m = ExponentialMode {
            omega_tau: 0.03,
            omega_t: 2.414, // lab-frame line without a rotating frame
            amplitude: C64::new(1.0, 0.0),
            gamma_tau: 0.0,
            gamma_t: 0.0,
        };
        assert!(synthesize(&[m], &tg, &tt, 0.0, SignalLabel::Sum, &NoiseSpec::none()).is_err());
    }

    #[test]
    fn noise_is_seed_reproducible() {
        let (tg, tt) = grids();
        let noise = NoiseSpec {
            sigma: 0.1,
            seed: 7,
        };
        let modes = rb_preset(SignalLabel::Sum, DEFAULT_FRAME_FREQUENCY);
        let a = synthesize(&modes, &tg, &tt, 140.0, SignalLabel::Sum, &noise).unwrap();
        let b = synthesize(&modes, &tg, &tt, 140.0, SignalLabel::Sum, &noise).unwrap();
        assert_eq!(a, b);
        let c = synthesize(
            &modes,
            &tg,
            &tt,
            140.0,
            SignalLabel::Sum,
            &NoiseSpec {
                sigma: 0.1,
                seed: 8,
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rb_preset_offsets() {
        let modes = rb_preset(SignalLabel::Sum, 2.340);
        let mut pairs: Vec<(f64, f64)> = modes.iter().map(|m| (m.omega_tau, m.omega_t)).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [
            (0.030, 0.030),
            (0.030, 0.074),
            (0.074, 0.030),
            (0.074, 0.074),
        ];
        for ((wt, wtt), (et, ett)) in pairs.iter().zip(expect.iter()) {
            assert!((wt - et).abs() < 1e-12 && (wtt - ett).abs() < 1e-12);
        }
        // both offsets inside the Methods Nyquist band
        let nyq = std::f64::consts::PI / 26.687;
        assert!(0.074 < nyq);
    }

    #[test]
    fn rb_diff_negates_tau_axis() {
        let sum = rb_preset(SignalLabel::Sum, 2.340);
        let diff = rb_preset(SignalLabel::Diff, 2.340);
        for (s, d) in sum.iter().zip(diff.iter()) {
            assert_eq!(s.omega_t, d.omega_t);
            assert_eq!(s.omega_tau, -d.omega_tau);
        }
    }
}
