//! Peak detection, per-axis FWHM measurement, and FT-vs-CS resolution
//! comparison on magnitude spectra.

use ndarray::Array2;

use crate::data::Spectrum2D;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.05;
pub const DEFAULT_MATCHING_RADIUS_BINS: f64 = 3.0;

/// How a width value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthFlag {
    /// Both half-max crossings found by interpolation.
    Measured,
    /// Interpolated width fell below one grid spacing; reported as one
    /// spacing.
    SingleBin,
    /// A crossing ran off the spectrum edge; that side reports the
    /// distance to the edge.
    Truncated,
}

impl WidthFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            WidthFlag::Measured => "measured",
            WidthFlag::SingleBin => "single-bin",
            WidthFlag::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Bin indices on the (omega_tau, omega_t) axes.
    pub row: usize,
    pub col: usize,
    pub omega_tau: f64,
    pub omega_t: f64,
    pub magnitude: f64,
    pub fwhm_tau: f64,
    pub fwhm_t: f64,
    pub flag_tau: WidthFlag,
    pub flag_t: WidthFlag,
}

/// Strict local maxima of |values| above threshold_fraction * global max,
/// sorted by descending magnitude (ties by ascending frequency pair).
pub fn find_peaks(spectrum: &Spectrum2D, threshold_fraction: f64) -> Result<Vec<Peak>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "threshold_fraction must lie in (0,1), got {threshold_fraction}"
        )));
    }
    let mag = magnitude_grid(spectrum);
    let global_max = mag.iter().cloned().fold(0.0, f64::max);
    if global_max == 0.0 {
        return Ok(Vec::new());
    }
    let threshold = threshold_fraction * global_max;
    let (n_rows, n_cols) = mag.dim();

    let mut peaks = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            let v = mag[(i, j)];
            if v <= threshold {
                continue;
            }
            let mut is_max = true;
            'outer: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = i as i64 + di;
                    let nj = j as i64 + dj;
                    if ni < 0 || nj < 0 || ni >= n_rows as i64 || nj >= n_cols as i64 {
                        continue;
                    }
                    if mag[(ni as usize, nj as usize)] >= v {
                        is_max = false;
                        break 'outer;
                    }
                }
            }
            if is_max {
                peaks.push(make_peak(spectrum, &mag, i, j));
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.magnitude
            .partial_cmp(&a.magnitude)
            .unwrap()
            .then(a.omega_tau.partial_cmp(&b.omega_tau).unwrap())
            .then(a.omega_t.partial_cmp(&b.omega_t).unwrap())
    });
    Ok(peaks)
}

fn magnitude_grid(spectrum: &Spectrum2D) -> Array2<f64> {
    spectrum.values().map(|v| v.norm())
}

fn make_peak(spectrum: &Spectrum2D, mag: &Array2<f64>, row: usize, col: usize) -> Peak {
    let ((fwhm_tau, flag_tau), (fwhm_t, flag_t)) = fwhm_at(spectrum, mag, row, col);
    Peak {
        row,
        col,
        omega_tau: spectrum.omega_tau_grid.frequency(row),
        omega_t: spectrum.omega_t_grid.frequency(col),
        magnitude: mag[(row, col)],
        fwhm_tau,
        fwhm_t,
        flag_tau,
        flag_t,
    }
}

/// Per-axis full width at half maximum of |values| through the given peak,
/// by linear interpolation of the half-max crossings outward from the
/// peak bin. Returns ((fwhm_tau, flag), (fwhm_t, flag)).
pub fn measure_fwhm(
    spectrum: &Spectrum2D,
    row: usize,
    col: usize,
) -> ((f64, WidthFlag), (f64, WidthFlag)) {
    let mag = magnitude_grid(spectrum);
    fwhm_at(spectrum, &mag, row, col)
}

fn fwhm_at(
    spectrum: &Spectrum2D,
    mag: &Array2<f64>,
    row: usize,
    col: usize,
) -> ((f64, WidthFlag), (f64, WidthFlag)) {
    let tau_profile: Vec<f64> = mag.column(col).to_vec();
    let t_profile: Vec<f64> = mag.row(row).to_vec();
    let tau = profile_fwhm(&tau_profile, row, spectrum.omega_tau_grid.spacing());
    let t = profile_fwhm(&t_profile, col, spectrum.omega_t_grid.spacing());
    (tau, t)
}

fn profile_fwhm(profile: &[f64], peak: usize, spacing: f64) -> (f64, WidthFlag) {
    let half = profile[peak] / 2.0;

    // distance (in axis units) from the peak to the half-max crossing,
    // walking in the direction given by `step`
    let crossing = |step: i64| -> Option<f64> {
        let mut prev = peak as i64;
        loop {
            let next = prev + step;
            if next < 0 || next >= profile.len() as i64 {
                return None; // edge reached while still above half max
            }
            let a = profile[prev as usize];
            let b = profile[next as usize];
            if b < half {
                let frac = if a > b { (a - half) / (a - b) } else { 1.0 };
                return Some(((prev - peak as i64).abs() as f64 + frac) * spacing);
            }
            prev = next;
        }
    };

    let left = crossing(-1);
    let right = crossing(1);
    let edge_left = peak as f64 * spacing;
    let edge_right = (profile.len() - 1 - peak) as f64 * spacing;
    match (left, right) {
        (Some(l), Some(r)) => {
            let width = l + r;
            if width <= spacing {
                (spacing, WidthFlag::SingleBin)
            } else {
                (width, WidthFlag::Measured)
            }
        }
        (Some(l), None) => (l + edge_right, WidthFlag::Truncated),
        (None, Some(r)) => (edge_left + r, WidthFlag::Truncated),
        (None, None) => (edge_left + edge_right, WidthFlag::Truncated),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub ft: Peak,
    pub cs: Peak,
    /// fwhm_ft / fwhm_cs per axis.
    pub ratio_tau: f64,
    pub ratio_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionComparison {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_ft: Vec<Peak>,
    pub unmatched_cs: Vec<Peak>,
}

/// Pair FT peaks (in descending magnitude) with the nearest unmatched CS
/// peak within `matching_radius` (rad/fs, Euclidean in the frequency
/// plane) and report the per-axis width ratios. Peaks are detected with
/// the default threshold fraction.
pub fn compare_resolution(
    ft: &Spectrum2D,
    cs: &Spectrum2D,
    matching_radius: f64,
) -> Result<ResolutionComparison> {
    if ft.omega_tau_grid != cs.omega_tau_grid || ft.omega_t_grid != cs.omega_t_grid {
        return Err(Error::invalid(
            "resolution comparison requires identical frequency grids",
        ));
    }
    let ft_peaks = find_peaks(ft, DEFAULT_THRESHOLD_FRACTION)?;
    let cs_peaks = find_peaks(cs, DEFAULT_THRESHOLD_FRACTION)?;
    compare_peak_lists(&ft_peaks, &cs_peaks, matching_radius)
}

/// Greedy one-to-one pairing of already-detected peak lists.
pub fn compare_peak_lists(
    ft_peaks: &[Peak],
    cs_peaks: &[Peak],
    matching_radius: f64,
) -> Result<ResolutionComparison> {
    if !(matching_radius.is_finite() && matching_radius > 0.0) {
        return Err(Error::invalid("matching_radius must be positive"));
    }
    let mut taken = vec![false; cs_peaks.len()];
    let mut pairs = Vec::new();
    let mut unmatched_ft = Vec::new();
    for ft_peak in ft_peaks {
        let mut best: Option<(usize, f64)> = None;
        for (k, cs_peak) in cs_peaks.iter().enumerate() {
            if taken[k] {
                continue;
            }
            let d = ((ft_peak.omega_tau - cs_peak.omega_tau).powi(2)
                + (ft_peak.omega_t - cs_peak.omega_t).powi(2))
            .sqrt();
            if d <= matching_radius && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        match best {
            Some((k, _)) => {
                taken[k] = true;
                let cs_peak = cs_peaks[k];
                pairs.push(MatchedPair {
                    ft: *ft_peak,
                    cs: cs_peak,
                    ratio_tau: ft_peak.fwhm_tau / cs_peak.fwhm_tau,
                    ratio_t: ft_peak.fwhm_t / cs_peak.fwhm_t,
                });
            }
            None => unmatched_ft.push(*ft_peak),
        }
    }
    let unmatched_cs = cs_peaks
        .iter()
        .enumerate()
        .filter(|(k, _)| !taken[*k])
        .map(|(_, p)| *p)
        .collect();
    Ok(ResolutionComparison {
        pairs,
        unmatched_ft,
        unmatched_cs,
    })
}
