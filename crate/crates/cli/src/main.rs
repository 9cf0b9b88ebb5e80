use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use splinedict::CurvatureVariant;

mod run;

#[derive(Parser, Debug)]
#[command(
    name = "splinedict",
    version,
    about = "Adaptive B-spline dictionaries for sparse signal approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Place knots at curvature peaks and subdivide.
    Adapt(AdaptArgs),
    /// Build a dictionary and write its metadata.
    Dict(DictArgs),
    /// Approximate a signal with the basis and with a dictionary.
    Approx(ApproxArgs),
    /// Approximate with a range of subpartition counts.
    Sweep(SweepArgs),
    /// Write a built-in test signal to a text file.
    Gen(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinSignal {
    Chirp,
    PhasedCosine,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    /// `(1 - f'^2)^{3/2}` in the denominator.
    Paper,
    /// `(1 + f'^2)^{3/2}` in the denominator.
    Standard,
}

impl From<Curvature> for CurvatureVariant {
    fn from(c: Curvature) -> Self {
        match c {
            Curvature::Paper => CurvatureVariant::PaperMinus,
            Curvature::Standard => CurvatureVariant::StandardPlus,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SignalArgs {
    /// Built-in signal.
    #[arg(long, value_enum, conflicts_with = "input")]
    pub signal: Option<BuiltinSignal>,
    /// Text file with one sample per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Interval `c,d` of the samples (required with --input).
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: Option<(f64, f64)>,
    /// Number of samples of a built-in signal.
    #[arg(long, default_value_t = 2049)]
    pub samples: usize,
    /// Seed of the random phase.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct PartitionArgs {
    /// Subdivision level.
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    pub level: u64,
    /// Curvature formula used for knot placement.
    #[arg(long, value_enum, default_value_t = Curvature::Paper)]
    pub curvature: Curvature,
    /// Use a saved partition instead of adapting one.
    #[arg(long)]
    pub partition: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AdaptArgs {
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    partition: PartitionArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DictArgs {
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    partition: PartitionArgs,
    /// Spline order (degree + 1).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Number of subpartitions.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    subpartitions: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    partition: PartitionArgs,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    subpartitions: u64,
    /// Residual bound as a fraction of the signal norm.
    #[arg(long, default_value_t = 0.01, value_parser = parse_fraction)]
    tol_fraction: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    partition: PartitionArgs,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Inclusive range `a..b` or a comma list of subpartition counts.
    #[arg(long, default_value = "2..12", value_parser = parse_counts)]
    subpartitions: Counts,
    #[arg(long, default_value_t = 0.01, value_parser = parse_fraction)]
    tol_fraction: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    signal: BuiltinSignal,
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    interval: Option<(f64, f64)>,
    #[arg(long, default_value_t = 2049)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output text file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (c, d) = s.split_once(',').ok_or("expected c,d")?;
    let c: f64 = c.trim().parse().map_err(|e| format!("{c}: {e}"))?;
    let d: f64 = d.trim().parse().map_err(|e| format!("{d}: {e}"))?;
    if !c.is_finite() || !d.is_finite() || c >= d {
        return Err("interval needs finite c < d".into());
    }
    Ok((c, d))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("tolerance fraction must lie in (0, 1)".into())
    }
}

#[derive(Clone, Debug)]
struct Counts(Vec<usize>);

fn parse_counts(s: &str) -> Result<Counts, String> {
    let counts: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|e| format!("{t}: {e}")))
            .collect::<Result<_, _>>()?
    };
    if counts.is_empty() || counts.contains(&0) {
        return Err("subpartition counts must be positive".into());
    }
    Ok(Counts(counts))
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Adapt(a) => {
            let sig = run::load(&a.signal)?;
            run::prepare_out(&a.out)?;
            let p = run::partition(&sig, &a.partition, Some(&a.out))?;
            println!(
                "{} knots ({} interior) on [{}, {}]",
                p.len(),
                p.interior_count(),
                p.start(),
                p.end()
            );
            Ok(true)
        }
        Command::Dict(a) => {
            let sig = run::load(&a.signal)?;
            run::prepare_out(&a.out)?;
            let p = run::partition(&sig, &a.partition, Some(&a.out))?;
            let dict = run::dictionary(&p, a.order as usize, a.subpartitions as usize)?;
            splinedict::signalio::write_json(&dict.metadata(), &a.out.join("dictionary.json"))?;
            println!(
                "{} atoms spanning a space of dimension {}",
                dict.len(),
                dict.space_dimension()
            );
            Ok(true)
        }
        Command::Approx(a) => {
            let sig = run::load(&a.signal)?;
            run::prepare_out(&a.out)?;
            let p = run::partition(&sig, &a.partition, Some(&a.out))?;
            println!("{} knots", p.len());
            run::approx(
                &sig,
                &p,
                a.order as usize,
                &[a.subpartitions as usize],
                a.tol_fraction,
                &a.out,
                false,
            )
        }
        Command::Sweep(a) => {
            let sig = run::load(&a.signal)?;
            run::prepare_out(&a.out)?;
            let p = run::partition(&sig, &a.partition, Some(&a.out))?;
            println!("{} knots", p.len());
            run::approx(
                &sig,
                &p,
                a.order as usize,
                &a.subpartitions.0,
                a.tol_fraction,
                &a.out,
                true,
            )
        }
        Command::Gen(a) => {
            let spec = SignalArgs {
                signal: Some(a.signal),
                input: None,
                interval: a.interval,
                samples: a.samples,
                seed: a.seed,
            };
            let sig = run::load(&spec)?;
            if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
                run::prepare_out(dir)?;
            }
            splinedict::signalio::save_signal(&sig, &a.out)?;
            let (c, d) = sig.interval();
            println!("{} samples on [{c}, {d}] written to {}", sig.len(), a.out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: tolerance not met on every run");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
