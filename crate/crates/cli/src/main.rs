//! `cs2dfs` — synthesize, transform, and analyze 2D four-wave-mixing
//! signals from the command line.
//!
//! Every subcommand writes a `<output>.meta.json` file recording the
//! parameters of the run, sufficient to reproduce the output bit-exactly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cs2dfs::analysis::{self, WidthFlag};
use cs2dfs::bpdn::BpdnConfig;
use cs2dfs::data::{SignalLabel, Spectrum2D};
use cs2dfs::grid::TimeGrid;
use cs2dfs::io;
use cs2dfs::pipeline::{self, AxisOrder, Cs2dConfig, PipelineReport};
use cs2dfs::synth::{self, NoiseSpec};

const WORKERS_ENV: &str = "CS2DFS_WORKERS";

#[derive(Parser)]
#[command(
    name = "cs2dfs",
    about = "Compressed-sensing spectral estimation for 2D four-wave-mixing data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic time-domain signal file.
    Synth(SynthArgs),
    /// Transform a signal file to a 2D spectrum (discrete FT or CS).
    Transform(TransformArgs),
    /// Detect peaks in a spectrum and write a peak table.
    Analyze(AnalyzeArgs),
    /// Compare peak widths between an FT spectrum and a CS spectrum.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PresetArg {
    RbSum,
    RbDiff,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    /// Mode preset to synthesize.
    #[arg(long, value_enum, default_value = "rb-sum")]
    preset: PresetArg,
    /// Rotating-frame reference frequency, rad/fs.
    #[arg(long, default_value_t = synth::DEFAULT_FRAME_FREQUENCY)]
    frame_frequency: f64,
    /// Time step on both axes, fs.
    #[arg(long, default_value_t = 26.687)]
    delta_fs: f64,
    /// Number of coherence-time samples.
    #[arg(long, default_value_t = 51)]
    n_tau: usize,
    /// Number of waiting-time samples.
    #[arg(long, default_value_t = 50)]
    n_t: usize,
    /// Population time T, fs.
    #[arg(long, default_value_t = 140.0)]
    population_time_fs: f64,
    /// Damping rate applied to every mode on both axes, 1/fs.
    #[arg(long, default_value_t = synth::DEFAULT_DAMPING)]
    gamma: f64,
    /// Additive complex Gaussian noise level per sample.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output signal file (SIG2D format).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TransformKind {
    Ft,
    Cs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AxisOrderArg {
    TFirst,
    TauFirst,
}

#[derive(Args, Serialize)]
struct TransformArgs {
    /// Which transform to run.
    #[arg(long, value_enum)]
    kind: TransformKind,
    /// Input signal file (SIG2D format).
    #[arg(short, long)]
    input: PathBuf,
    /// Output spectrum file (SPEC2D format).
    #[arg(short, long)]
    output: PathBuf,
    /// Frequency points on the omega_tau axis.
    #[arg(long, default_value_t = 1000)]
    n_omega_tau: usize,
    /// Frequency points on the omega_t axis.
    #[arg(long, default_value_t = 1000)]
    n_omega_t: usize,
    /// Residual bound of the normalized BPDN problem.
    #[arg(long, default_value_t = 1e-5)]
    eta: f64,
    /// Pareto (Newton) iteration budget per solve.
    #[arg(long, default_value_t = 100)]
    max_outer: usize,
    /// Projected-gradient iteration budget per LASSO subproblem.
    #[arg(long, default_value_t = 2000)]
    max_inner: usize,
    /// Relative tolerance on the Pareto root.
    #[arg(long, default_value_t = 1e-3)]
    pareto_tolerance: f64,
    /// Worker threads for the CS passes (0 = all processors). The
    /// CS2DFS_WORKERS environment variable overrides this flag.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Which axis the CS procedure compresses first.
    #[arg(long, value_enum, default_value = "t-first")]
    axis_order: AxisOrderArg,
    /// Optional per-solve report table (TSV).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    /// Input spectrum file (SPEC2D format).
    #[arg(short, long)]
    input: PathBuf,
    /// Output peak table (TSV).
    #[arg(short, long)]
    output: PathBuf,
    /// Peaks below this fraction of the global maximum are ignored.
    #[arg(long, default_value_t = analysis::DEFAULT_THRESHOLD_FRACTION)]
    threshold: f64,
    /// Rotating-frame reference frequency; when given, the table also
    /// lists lab-frame positions (frame - offset).
    #[arg(long)]
    frame_frequency: Option<f64>,
}

#[derive(Args, Serialize)]
struct CompareArgs {
    /// FT spectrum file.
    #[arg(long)]
    ft: PathBuf,
    /// CS spectrum file.
    #[arg(long)]
    cs: PathBuf,
    /// Output comparison table (TSV).
    #[arg(short, long)]
    output: PathBuf,
    /// Matching radius in omega_tau-axis bins.
    #[arg(long, default_value_t = analysis::DEFAULT_MATCHING_RADIUS_BINS)]
    radius_bins: f64,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => run_synth(&args),
        Command::Transform(args) => run_transform(&args),
        Command::Analyze(args) => run_analyze(&args),
        Command::Compare(args) => run_compare(&args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

#[derive(Serialize)]
struct Metadata<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    parameters: &'a T,
}

fn write_metadata<T: Serialize>(output: &Path, subcommand: &str, parameters: &T) -> Result<()> {
    let meta = Metadata {
        tool: "cs2dfs",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        parameters,
    };
    let mut path = output.as_os_str().to_owned();
    path.push(".meta.json");
    let text = serde_json::to_string_pretty(&meta)?;
    std::fs::write(&path, text)
        .with_context(|| format!("writing {}", Path::new(&path).display()))?;
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let (label, kind) = match args.preset {
        PresetArg::RbSum => (SignalLabel::Sum, SignalLabel::Sum),
        PresetArg::RbDiff => (SignalLabel::Diff, SignalLabel::Diff),
    };
    let mut modes = synth::rb_preset(kind, args.frame_frequency);
    for m in modes.iter_mut() {
        m.gamma_tau = args.gamma;
        m.gamma_t = args.gamma;
    }
    let tau_grid = TimeGrid::new(args.delta_fs, args.n_tau)?;
    let t_grid = TimeGrid::new(args.delta_fs, args.n_t)?;
    let noise = NoiseSpec {
        sigma: args.sigma,
        seed: args.seed,
    };
    let signal = synth::synthesize(
        &modes,
        &tau_grid,
        &t_grid,
        args.population_time_fs,
        label,
        &noise,
    )?;
    io::write_signal_grid(&signal, &args.output)?;
    write_metadata(&args.output, "synth", args)?;
    println!(
        "wrote {} ({}x{} samples, label={})",
        args.output.display(),
        args.n_tau,
        args.n_t,
        label.as_str()
    );
    Ok(())
}

fn effective_workers(flag: usize) -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => raw
            .parse()
            .with_context(|| format!("invalid {WORKERS_ENV}={raw}")),
        Err(_) => Ok(flag),
    }
}

fn run_transform(args: &TransformArgs) -> Result<()> {
    let signal = io::read_signal_grid(&args.input)?;
    match args.kind {
        TransformKind::Ft => {
            let spectrum = pipeline::ft2d(
                &signal,
                args.n_omega_tau,
                args.n_omega_t,
                Default::default(),
            )?;
            io::write_spectrum(&spectrum, &args.output)?;
            println!("wrote {} (ft)", args.output.display());
        }
        TransformKind::Cs => {
            let config = Cs2dConfig {
                bpdn: BpdnConfig {
                    eta: args.eta,
                    max_outer_iterations: args.max_outer,
                    max_inner_iterations: args.max_inner,
                    pareto_tolerance: args.pareto_tolerance,
                    ..BpdnConfig::default()
                },
                workers: effective_workers(args.workers)?,
                axis_order: match args.axis_order {
                    AxisOrderArg::TFirst => AxisOrder::TFirst,
                    AxisOrderArg::TauFirst => AxisOrder::TauFirst,
                },
                endpoint: Default::default(),
            };
            let (spectrum, report) =
                pipeline::cs2d(&signal, args.n_omega_tau, args.n_omega_t, &config)?;
            io::write_spectrum(&spectrum, &args.output)?;
            if let Some(report_path) = &args.report {
                write_report(&report, report_path)?;
            }
            let exhausted = report
                .pass_t
                .records
                .iter()
                .chain(report.pass_tau.records.iter())
                .filter(|r| r.status != cs2dfs::bpdn::BpdnStatus::Converged)
                .count();
            println!(
                "wrote {} (cs, {} + {} solves, {} non-converged, pass times {:.1}s + {:.1}s)",
                args.output.display(),
                report.pass_t.records.len(),
                report.pass_tau.records.len(),
                exhausted,
                report.pass_t.wall_time.as_secs_f64(),
                report.pass_tau.wall_time.as_secs_f64(),
            );
        }
    }
    write_metadata(&args.output, "transform", args)?;
    Ok(())
}

fn write_report(report: &PipelineReport, path: &Path) -> Result<()> {
    let mut out = String::from("pass\tindex\tstatus\touter\tinner\tresidual_norm\n");
    for (pass, records) in [
        ("t", &report.pass_t.records),
        ("tau", &report.pass_tau.records),
    ] {
        for r in records {
            out.push_str(&format!(
                "{pass}\t{}\t{}\t{}\t{}\t{}\n",
                r.index,
                r.status.as_str(),
                r.outer_iterations,
                r.inner_iterations,
                r.residual_norm
            ));
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn flag_str(f: WidthFlag) -> &'static str {
    f.as_str()
}

fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let spectrum = io::read_spectrum(&args.input)?;
    let peaks = analysis::find_peaks(&spectrum, args.threshold)?;
    let mut out = String::from("omega_tau\tomega_t\tmagnitude\tfwhm_tau\tfwhm_t\tflag_tau\tflag_t");
    if args.frame_frequency.is_some() {
        out.push_str("\tlab_omega_tau\tlab_omega_t");
    }
    out.push('\n');
    for p in &peaks {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.omega_tau,
            p.omega_t,
            p.magnitude,
            p.fwhm_tau,
            p.fwhm_t,
            flag_str(p.flag_tau),
            flag_str(p.flag_t)
        ));
        if let Some(frame) = args.frame_frequency {
            // the analysis kernel places a mode at minus its offset, so
            // the lab-frame line is frame - (plotted position)
            out.push_str(&format!("\t{}\t{}", frame - p.omega_tau, frame - p.omega_t));
        }
        out.push('\n');
    }
    std::fs::write(&args.output, out)
        .with_context(|| format!("writing {}", args.output.display()))?;
    write_metadata(&args.output, "analyze", args)?;
    println!("wrote {} ({} peaks)", args.output.display(), peaks.len());
    Ok(())
}

fn load_pair(args: &CompareArgs) -> Result<(Spectrum2D, Spectrum2D)> {
    let ft = io::read_spectrum(&args.ft)?;
    let cs = io::read_spectrum(&args.cs)?;
    if ft.provenance != cs2dfs::data::Provenance::Ft {
        bail!("--ft file {} has provenance `cs`", args.ft.display());
    }
    if cs.provenance != cs2dfs::data::Provenance::Cs {
        bail!("--cs file {} has provenance `ft`", args.cs.display());
    }
    Ok((ft, cs))
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let (ft, cs) = load_pair(args)?;
    let radius = args.radius_bins * ft.omega_tau_grid.spacing();
    let comparison = analysis::compare_resolution(&ft, &cs, radius)?;
    let mut out = String::from(
        "ft_omega_tau\tft_omega_t\tcs_omega_tau\tcs_omega_t\tft_fwhm_tau\tcs_fwhm_tau\tratio_tau\tft_fwhm_t\tcs_fwhm_t\tratio_t\n",
    );
    for p in &comparison.pairs {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            p.ft.omega_tau,
            p.ft.omega_t,
            p.cs.omega_tau,
            p.cs.omega_t,
            p.ft.fwhm_tau,
            p.cs.fwhm_tau,
            p.ratio_tau,
            p.ft.fwhm_t,
            p.cs.fwhm_t,
            p.ratio_t
        ));
    }
    for p in &comparison.unmatched_ft {
        out.push_str(&format!(
            "{}\t{}\t-\t-\t{}\t-\t-\t{}\t-\t-\n",
            p.omega_tau, p.omega_t, p.fwhm_tau, p.fwhm_t
        ));
    }
    for p in &comparison.unmatched_cs {
        out.push_str(&format!(
            "-\t-\t{}\t{}\t-\t{}\t-\t-\t{}\t-\n",
            p.omega_tau, p.omega_t, p.fwhm_tau, p.fwhm_t
        ));
    }
    std::fs::write(&args.output, out)
        .with_context(|| format!("writing {}", args.output.display()))?;
    write_metadata(&args.output, "compare", args)?;
    println!(
        "wrote {} ({} matched pairs, {} unmatched ft, {} unmatched cs)",
        args.output.display(),
        comparison.pairs.len(),
        comparison.unmatched_ft.len(),
        comparison.unmatched_cs.len()
    );
    Ok(())
}
