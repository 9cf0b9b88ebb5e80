//! Pipeline stages shared by the subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use splinedict::adapt::{adapt_partition_with_report, curvature_profile};
use splinedict::signalio::{self, PiecewiseConstantPhase};
use splinedict::{
    reconstruct, sample, sparse_approximate, CurvatureVariant, Decomposition, Partition, PursuitError, PursuitProblem,
    SampledSignal, SplineDictionary,
};

use crate::{BuiltinSignal, PartitionArgs, SignalArgs};

pub fn load(args: &SignalArgs) -> Result<SampledSignal> {
    if let Some(path) = &args.input {
        let Some((c, d)) = args.interval else {
            bail!("--input needs --interval c,d");
        };
        return signalio::load_signal(path, c, d).with_context(|| format!("loading {}", path.display()));
    }
    let sig = match args.signal {
        Some(BuiltinSignal::Chirp) => {
            if args.interval.is_some_and(|i| i != signalio::CHIRP_INTERVAL) {
                bail!("the chirp is defined on [0, 8]");
            }
            signalio::chirp(args.samples)?
        }
        Some(BuiltinSignal::PhasedCosine) => {
            let (c, d) = args.interval.unwrap_or(signalio::PHASED_COSINE_INTERVAL);
            let phase = PiecewiseConstantPhase::random(c, d, signalio::DEFAULT_PHASE_PIECES, args.seed);
            signalio::phased_cosine(args.samples, c, d, &phase)?
        }
        None => bail!("choose a signal with --signal or --input"),
    };
    Ok(sig)
}

pub fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Loads the partition from file or adapts one to the signal. Adapted
/// partitions are written to `out` with their curvature profile.
pub fn partition(sig: &SampledSignal, args: &PartitionArgs, out: Option<&Path>) -> Result<Partition> {
    if let Some(path) = &args.partition {
        let p = signalio::load_partition(path)?;
        if (p.start(), p.end()) != sig.interval() {
            bail!(
                "partition spans [{}, {}] but the signal lives on {:?}",
                p.start(),
                p.end(),
                sig.interval()
            );
        }
        return Ok(p);
    }
    let variant = CurvatureVariant::from(args.curvature);
    let (p, found) = adapt_partition_with_report(sig, args.level as usize, variant)?;
    if found.nonfinite > 0 {
        eprintln!(
            "warning: {} samples had non-finite curvature and were treated as 0",
            found.nonfinite
        );
    }
    if let Some(dir) = out {
        signalio::save_partition(&p, dir.join("partition.json"))?;
        let csv = dir.join("curvature.csv");
        let file = File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
        let mut w = BufWriter::new(file);
        signalio::write_curvature_csv(&mut w, &curvature_profile(sig, variant))?;
        w.flush()?;
    }
    Ok(p)
}

pub fn dictionary(p: &Partition, order: usize, n: usize) -> Result<SplineDictionary> {
    Ok(SplineDictionary::round_robin(p, n, order)?)
}

struct RunRecord {
    label: String,
    subpartitions: usize,
    size: usize,
    dec: Decomposition,
    tolerance: f64,
    met: bool,
    build_ms: f64,
    pursuit_ms: f64,
}

fn approximate_one(sig: &SampledSignal, dict: &SplineDictionary, tol: f64) -> Result<(Decomposition, bool, f64, f64)> {
    let t = Instant::now();
    let atoms = sample(dict, &sig.grid())?;
    let prob = PursuitProblem::for_signal(&atoms, sig, tol)?;
    let build_ms = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let (dec, met) = match sparse_approximate(&prob) {
        Ok(d) => (d, true),
        Err(PursuitError::Stagnation { decomposition }) => (*decomposition, false),
        Err(e) => return Err(e.into()),
    };
    Ok((dec, met, build_ms, t.elapsed().as_secs_f64() * 1e3))
}

fn write_outputs(sig: &SampledSignal, dict: &SplineDictionary, rec: &RunRecord, dir: &Path) -> Result<()> {
    let meta = match rec.label.as_str() {
        "dict" => "dictionary.json".to_string(),
        label => format!("dictionary_{}.json", label.trim_start_matches("dict_")),
    };
    signalio::write_json(&dict.metadata(), &dir.join(&meta))?;
    signalio::save_decomposition(
        &rec.dec,
        Some(&meta),
        dir.join(format!("decomposition_{}.json", rec.label)),
    )?;
    let grid = sig.grid();
    let approx = reconstruct(&rec.dec, dict, &grid)?;
    let path = dir.join(format!("recon_{}.csv", rec.label));
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    signalio::write_reconstruction_csv(&mut w, &grid, sig.values(), &approx)?;
    w.flush()?;
    Ok(())
}

/// Approximates with the basis and with one dictionary per count in
/// `counts`. Returns whether every run met the tolerance.
pub fn approx(
    sig: &SampledSignal,
    p: &Partition,
    order: usize,
    counts: &[usize],
    tol_fraction: f64,
    dir: &Path,
    sweep: bool,
) -> Result<bool> {
    let tol = tol_fraction * sig.norm();
    let mut records = Vec::new();
    let mut runs = vec![("basis".to_string(), 1)];
    for &n in counts {
        let label = if sweep {
            format!("dict_n{n}")
        } else {
            "dict".to_string()
        };
        runs.push((label, n));
    }
    for (label, n) in runs {
        let dict = dictionary(p, order, n)?;
        let (dec, met, build_ms, pursuit_ms) = approximate_one(sig, &dict, tol)?;
        let rec = RunRecord {
            label,
            subpartitions: n,
            size: dict.len(),
            dec,
            tolerance: tol,
            met,
            build_ms,
            pursuit_ms,
        };
        write_outputs(sig, &dict, &rec, dir)?;
        if !rec.met {
            eprintln!(
                "warning: {} stalled at residual {:.3e} above {:.3e}",
                rec.label, rec.dec.residual_norm, tol
            );
        }
        records.push(rec);
    }
    write_report(&records, &dir.join("report.csv"))?;
    print_summary(&records, sweep);
    Ok(records.iter().all(|r| r.met))
}

fn write_report(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "run,subpartitions,dictionary_size,K,residual_norm,tolerance,tol_met,oomp_atoms,swaps,pruned,build_ms,pursuit_ms")?;
    for r in records {
        let log = &r.dec.stage_log;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3}",
            r.label,
            r.subpartitions,
            r.size,
            r.dec.k(),
            r.dec.residual_norm,
            r.tolerance,
            r.met,
            log.oomp_atoms,
            log.swaps,
            log.pruned,
            r.build_ms,
            r.pursuit_ms
        )?;
    }
    w.flush()?;
    Ok(())
}

fn print_summary(records: &[RunRecord], sweep: bool) {
    let basis_k = records[0].dec.k();
    let best = records[1..].iter().map(|r| r.dec.k()).min();
    println!(
        "{:<12} {:>4} {:>8} {:>6} {:>12} {:>7}",
        "run", "n", "atoms", "K", "residual", "K/K_b"
    );
    for r in records {
        let marker = if sweep && r.subpartitions > 1 && Some(r.dec.k()) == best {
            " <- min K"
        } else {
            ""
        };
        println!(
            "{:<12} {:>4} {:>8} {:>6} {:>12.4e} {:>7.3}{marker}",
            r.label,
            r.subpartitions,
            r.size,
            r.dec.k(),
            r.dec.residual_norm,
            r.dec.k() as f64 / basis_k.max(1) as f64
        );
    }
}
