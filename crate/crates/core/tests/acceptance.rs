//! Acceptance gate. Each test checks one release requirement against a
//! pinned tolerance and prints a single PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;

use cs2dfs::analysis::{compare_resolution, find_peaks, DEFAULT_THRESHOLD_FRACTION};
use cs2dfs::bpdn::{project_l1_ball, solve_bpdn_normalized, BpdnConfig, BpdnStatus};
use cs2dfs::data::{SignalGrid2D, SignalLabel, Spectrum2D};
use cs2dfs::fourier::{dft, SensingOperator};
use cs2dfs::grid::{Endpoint, FrequencyGrid, TimeGrid};
use cs2dfs::pipeline::{cs2d, ft2d, Cs2dConfig, PipelineReport};
use cs2dfs::synth::{rb_preset, spectral_positions, synthesize, NoiseSpec};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {} ... {} ({})",
        name,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "{name}: {detail}");
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn rand_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

// ---- 1. transform oracle equivalence --------------------------------------

/// Dense per-entry kernel built through from_polar only — no shared code
/// with the recurrence-based production path.
struct DenseKernel {
    n_t: usize,
    n_w: usize,
    /// entries[k][j] = exp(-i w_j t_k)
    entries: Vec<Vec<C64>>,
}

impl DenseKernel {
    fn new(tg: &TimeGrid, fg: &FrequencyGrid) -> Self {
        let entries = (0..tg.count())
            .map(|k| {
                (0..fg.count())
                    .map(|j| C64::from_polar(1.0, -fg.frequency(j) * tg.time(k)))
                    .collect()
            })
            .collect();
        DenseKernel {
            n_t: tg.count(),
            n_w: fg.count(),
            entries,
        }
    }

    fn forward(&self, g: &[C64], prefactor: f64) -> Vec<C64> {
        (0..self.n_t)
            .map(|k| {
                self.entries[k]
                    .iter()
                    .zip(g)
                    .map(|(e, v)| e * v)
                    .sum::<C64>()
                    * prefactor
            })
            .collect()
    }

    fn adjoint(&self, r: &[C64], prefactor: f64) -> Vec<C64> {
        (0..self.n_w)
            .map(|j| {
                (0..self.n_t)
                    .map(|k| self.entries[k][j].conj() * r[k])
                    .sum::<C64>()
                    * prefactor
            })
            .collect()
    }

    /// dft oracle: dt * sum_j exp(+i w_k t_j) h_j — the conjugate kernel
    /// with time and frequency roles swapped relative to `entries`.
    fn dft(&self, h: &[C64], dt: f64) -> Vec<C64> {
        (0..self.n_w)
            .map(|j| {
                (0..self.n_t)
                    .map(|k| self.entries[k][j].conj() * h[k])
                    .sum::<C64>()
                    * dt
            })
            .collect()
    }
}

fn rel_err(got: &[C64], want: &[C64]) -> f64 {
    let diff: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff / norm2(want).max(1e-300)
}

#[test]
fn oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n_t = rng.gen_range(2..=64);
        let n_w = rng.gen_range(2..=256);
        let delta = rng.gen_range(0.5..40.0);
        let endpoint = if trial % 2 == 0 {
            Endpoint::Exclusive
        } else {
            Endpoint::Inclusive
        };
        let tg = TimeGrid::new(delta, n_t).unwrap();
        let fg = FrequencyGrid::for_time_grid(&tg, n_w, endpoint).unwrap();
        let dense = DenseKernel::new(&tg, &fg);

        let h: Vec<C64> = (0..n_t).map(|_| rand_c64(&mut rng)).collect();
        let g: Vec<C64> = (0..n_w).map(|_| rand_c64(&mut rng)).collect();

        worst = worst.max(rel_err(&dft(&h, &tg, &fg).unwrap(), &dense.dft(&h, delta)));
        for normalized in [false, true] {
            let op = SensingOperator::new(tg, fg, normalized);
            let pref = if normalized {
                1.0
            } else {
                op.physical_prefactor()
            };
            worst = worst.max(rel_err(&op.apply(&g).unwrap(), &dense.forward(&g, pref)));
            worst = worst.max(rel_err(&op.adjoint(&h).unwrap(), &dense.adjoint(&h, pref)));
        }
    }
    report(
        "1 oracle equivalence (dft/apply/adjoint, 100 instances)",
        worst <= 1e-12,
        &format!("worst relative error {worst:.3e}, tolerance 1e-12"),
    );
}

// ---- 2. l1 projection vs independent oracle --------------------------------

/// Bisection on the soft threshold: find lambda >= 0 with
/// sum_j max(|v_j| - lambda, 0) = radius, then shrink moduli.
fn project_oracle(v: &[C64], radius: f64) -> Vec<C64> {
    let shrunk_sum =
        |lambda: f64| -> f64 { v.iter().map(|z| (z.norm() - lambda).max(0.0)).sum::<f64>() };
    if shrunk_sum(0.0) <= radius {
        return v.to_vec();
    }
    let (mut lo, mut hi) = (0.0, v.iter().map(|z| z.norm()).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shrunk_sum(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter()
        .map(|z| {
            let m = z.norm();
            if m <= lambda {
                C64::new(0.0, 0.0)
            } else {
                z * ((m - lambda) / m)
            }
        })
        .collect()
}

#[test]
fn projection_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        let v: Vec<C64> = (0..n).map(|_| rand_c64(&mut rng)).collect();
        let radius = rng.gen_range(0.0..1.2 * n as f64);
        let got = project_l1_ball(&v, radius).unwrap();
        let want = project_oracle(&v, radius);
        let diff: f64 = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / norm2(&v).max(1.0));
    }
    report(
        "2 l1 projection vs bisection oracle (1000 vectors)",
        worst <= 1e-12,
        &format!("worst deviation {worst:.3e}, tolerance 1e-12"),
    );
}

// ---- 3. 1D exact recovery ---------------------------------------------------

#[test]
fn sparse_recovery_1d() {
    let tg = TimeGrid::new(26.687, 50).unwrap();
    let fg = FrequencyGrid::for_time_grid(&tg, 1000, Endpoint::Exclusive).unwrap();
    let phys = SensingOperator::new(tg, fg, false);
    let op = SensingOperator::new(tg, fg, true);
    // eta = 1e-6 demands near-exact Pareto root finding; give the inner
    // solver enough budget to reach it (the default favors throughput)
    let config = BpdnConfig {
        eta: 1e-6,
        max_inner_iterations: 200_000,
        ..BpdnConfig::default()
    };

    let mut worst_l2 = 0.0f64;
    let mut worst_resid = 0.0f64;
    let mut support_ok = true;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=5);
        // one spike per 20-bin slot keeps every pair >= 20 bins apart
        let mut slots: Vec<usize> = (0..50).collect();
        let mut bins = Vec::with_capacity(k);
        for _ in 0..k {
            let pick = rng.gen_range(0..slots.len());
            bins.push(slots.swap_remove(pick) * 20);
        }
        let mut truth = vec![C64::new(0.0, 0.0); 1000];
        for &b in &bins {
            truth[b] = C64::from_polar(
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
        }
        // the measurement comes from the physical forward model; the
        // normalized solve undoes its own scaling and returns physical units
        let h = phys.apply(&truth).unwrap();
        let result = solve_bpdn_normalized(&op, &h, &config).unwrap();
        assert_eq!(result.status, BpdnStatus::Converged);

        let peak = result
            .coefficients
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let support: Vec<usize> = result
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-2 * peak)
            .map(|(j, _)| j)
            .collect();
        let mut expected = bins.clone();
        expected.sort_unstable();
        support_ok &= support == expected;

        worst_l2 = worst_l2.max(rel_err(&result.coefficients, &truth));
        worst_resid = worst_resid.max(result.residual_norm);
    }
    let bound = 1e-6 * (1.0 + BpdnConfig::default().pareto_tolerance);
    let pass = support_ok && worst_l2 <= 1e-3 && worst_resid <= bound;
    report(
        "3 1D exact recovery (20 seeds, <=5 spikes, eta=1e-6)",
        pass,
        &format!(
            "support exact: {support_ok}, worst rel l2 {worst_l2:.3e} (tol 1e-3), worst residual {worst_resid:.3e} (bound {bound:.3e})"
        ),
    );
}

// ---- 4/5. full-scale 2D run -------------------------------------------------

struct FullRun {
    label: SignalLabel,
    cs: Spectrum2D,
    ft: Spectrum2D,
    report: PipelineReport,
    expected: Vec<(f64, f64)>,
}

fn full_scale_runs() -> &'static Vec<FullRun> {
    static RUNS: OnceLock<Vec<FullRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let tau_grid = TimeGrid::new(26.687, 51).unwrap();
        let t_grid = TimeGrid::new(26.687, 50).unwrap();
        let config = Cs2dConfig::default(); // eta = 1e-5, inside the eta < 1e-4 bound
        [SignalLabel::Sum, SignalLabel::Diff]
            .into_iter()
            .map(|label| {
                let modes = rb_preset(label, 2.340);
                let signal =
                    synthesize(&modes, &tau_grid, &t_grid, 140.0, label, &NoiseSpec::none())
                        .unwrap();
                let (cs, report) = cs2d(&signal, 1000, 1000, &config).unwrap();
                let ft = ft2d(&signal, 1000, 1000, Endpoint::Exclusive).unwrap();
                FullRun {
                    label,
                    cs,
                    ft,
                    report,
                    expected: spectral_positions(&modes),
                }
            })
            .collect()
    })
}

#[test]
fn full_scale_2d_run() {
    let mut pass = true;
    let mut details = Vec::new();
    for run in full_scale_runs() {
        let records = run.report.pass_t.records.len() + run.report.pass_tau.records.len();
        let record_ok =
            run.report.pass_t.records.len() == 51 && run.report.pass_tau.records.len() == 1000;

        let peaks = find_peaks(&run.cs, DEFAULT_THRESHOLD_FRACTION).unwrap();
        let dtau = run.cs.omega_tau_grid.spacing();
        let dt = run.cs.omega_t_grid.spacing();
        // every preset line position must be hit within one bin per axis
        let mut worst_bins = 0.0f64;
        let mut placed = 0;
        for &(wtau, wt) in &run.expected {
            let best = peaks
                .iter()
                .map(|p| {
                    ((p.omega_tau - wtau) / dtau)
                        .abs()
                        .max(((p.omega_t - wt) / dt).abs())
                })
                .fold(f64::INFINITY, f64::min);
            worst_bins = worst_bins.max(best);
            if best <= 1.0 {
                placed += 1;
            }
        }
        let ok = record_ok && placed == 4;
        pass &= ok;
        details.push(format!(
            "{}: records {} (51+1000: {}), peaks within 1 bin {}/4 (worst offset {:.2} bins)",
            run.label.as_str(),
            records,
            record_ok,
            placed,
            worst_bins
        ));
    }
    report(
        "4 full-scale 2D run (51x50 -> 1000x1000)",
        pass,
        &details.join("; "),
    );
}

#[test]
fn resolution_gain() {
    let mut pass = true;
    let mut details = Vec::new();
    for run in full_scale_runs() {
        let radius = 3.0
            * run
                .cs
                .omega_tau_grid
                .spacing()
                .max(run.cs.omega_t_grid.spacing());
        let cmp = compare_resolution(&run.ft, &run.cs, radius).unwrap();
        let matched = cmp.pairs.len();
        let worst = cmp
            .pairs
            .iter()
            .map(|p| p.ratio_tau.min(p.ratio_t))
            .fold(f64::INFINITY, f64::min);
        let ok = matched >= 4 && worst >= 5.0;
        pass &= ok;
        details.push(format!(
            "{}: {} matched pairs, min fwhm ratio {:.1} (>= 5 required)",
            run.label.as_str(),
            matched,
            worst
        ));
    }
    report(
        "5 resolution gain (fwhm_ft/fwhm_cs >= 5 both axes)",
        pass,
        &details.join("; "),
    );
}

// ---- 6. long-sampling consistency -------------------------------------------

#[test]
fn long_sampling_consistency() {
    let tg = TimeGrid::new(20.0, 256).unwrap();
    let fg = FrequencyGrid::for_time_grid(&tg, 256, Endpoint::Exclusive).unwrap();
    let op = SensingOperator::new(tg, fg, true);

    let mut truth = vec![C64::new(0.0, 0.0); 256];
    truth[40] = C64::new(1.0, 0.0);
    truth[130] = C64::new(0.0, -0.8);
    truth[200] = C64::from_polar(0.6, 1.0);
    let h = op.apply(&truth).unwrap();

    let cs = solve_bpdn_normalized(&op, &h, &BpdnConfig::default())
        .unwrap()
        .coefficients;
    let ft = dft(&h, &tg, &fg).unwrap();

    let argmax = |v: &[C64]| {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0
    };
    let support = |v: &[C64]| {
        let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        v.iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.05 * peak)
            .map(|(j, _)| j)
            .collect::<Vec<_>>()
    };
    let same_max = argmax(&cs) == argmax(&ft);
    let (s_cs, s_ft) = (support(&cs), support(&ft));
    let pass = same_max && s_cs == s_ft;
    report(
        "6 long-sampling consistency (N_t = N_omega = 256)",
        pass,
        &format!(
            "argmax match: {same_max} (cs {}, ft {}), 5% supports equal: {} ({} vs {} bins)",
            argmax(&cs),
            argmax(&ft),
            s_cs == s_ft,
            s_cs.len(),
            s_ft.len()
        ),
    );
}

// ---- 7. determinism -----------------------------------------------------------

#[test]
fn determinism() {
    let tau_grid = TimeGrid::new(26.687, 8).unwrap();
    let t_grid = TimeGrid::new(26.687, 10).unwrap();
    let modes = rb_preset(SignalLabel::Sum, 2.340);
    let noise = NoiseSpec {
        sigma: 0.01,
        seed: 99,
    };
    let signal = synthesize(&modes, &tau_grid, &t_grid, 140.0, SignalLabel::Sum, &noise).unwrap();

    let spectra: Vec<Spectrum2D> = [1usize, 4, 0] // 0 = all available workers
        .iter()
        .map(|&workers| {
            let config = Cs2dConfig {
                workers,
                ..Cs2dConfig::default()
            };
            cs2d(&signal, 64, 80, &config).unwrap().0
        })
        .collect();
    let bitwise_equal = |a: &Spectrum2D, b: &Spectrum2D| {
        a.values()
            .iter()
            .zip(b.values().iter())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
    };
    let spectra_ok =
        bitwise_equal(&spectra[0], &spectra[1]) && bitwise_equal(&spectra[0], &spectra[2]);

    let render = |s: &SignalGrid2D| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.sig2d");
        cs2dfs::io::write_signal_grid(s, &path).unwrap();
        std::fs::read(&path).unwrap()
    };
    let again = synthesize(&modes, &tau_grid, &t_grid, 140.0, SignalLabel::Sum, &noise).unwrap();
    let files_ok = render(&signal) == render(&again);

    report(
        "7 determinism (workers 1/4/max bit-identical; seeded synth bit-identical)",
        spectra_ok && files_ok,
        &format!("spectra bit-identical: {spectra_ok}, synth files identical: {files_ok}"),
    );
}

// ---- 8. Pareto behavior ---------------------------------------------------------

#[test]
fn pareto_behavior() {
    let tg = TimeGrid::new(26.687, 50).unwrap();
    let fg = FrequencyGrid::for_time_grid(&tg, 500, Endpoint::Exclusive).unwrap();
    let op = SensingOperator::new(tg, fg, true);
    let config = BpdnConfig::default();
    let slack = 1.0 + 10.0 * config.pareto_tolerance;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut monotone = true;
    let mut feasible = true;
    let mut worst_rise = 0.0f64;
    for trial in 0..6 {
        // mix of sparse and dense right-hand sides
        let h: Vec<C64> = if trial % 2 == 0 {
            let mut g = vec![C64::new(0.0, 0.0); 500];
            for _ in 0..4 {
                g[rng.gen_range(0..500)] = rand_c64(&mut rng);
            }
            op.apply(&g).unwrap()
        } else {
            (0..50).map(|_| rand_c64(&mut rng)).collect()
        };
        let result = solve_bpdn_normalized(&op, &h, &config).unwrap();
        for w in result.residual_history.windows(2) {
            if w[1] > w[0] * slack {
                monotone = false;
            }
            if w[0] > 0.0 {
                worst_rise = worst_rise.max(w[1] / w[0]);
            }
        }
        if result.status == BpdnStatus::Converged {
            feasible &= result.residual_norm <= config.eta * (1.0 + config.pareto_tolerance);
        }
    }
    report(
        "8 Pareto behavior (residual trace monotone, converged feasible)",
        monotone && feasible,
        &format!(
            "max step ratio {worst_rise:.6} (allowed {slack:.6}), converged solves feasible: {feasible}"
        ),
    );
}
