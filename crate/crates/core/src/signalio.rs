//! Test signals and plain-text / JSON persistence.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapt::{AdaptError, SampledSignal, MIN_SAMPLES};
use crate::partition::Partition;
use crate::pursuit::{Decomposition, StageLog};

/// Interval of the chirp `cos(2πx²)`.
pub const CHIRP_INTERVAL: (f64, f64) = (0.0, 8.0);
/// Default interval of the phased cosine `cos(8πx + φ(x))`.
pub const PHASED_COSINE_INTERVAL: (f64, f64) = (0.0, 4.0);
/// Pieces in a randomly generated phase.
pub const DEFAULT_PHASE_PIECES: usize = 8;

#[derive(Error, Debug)]
pub enum SignalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O failure on {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("malformed JSON in {path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("invalid phase: {0}")]
    BadPhase(String),

    #[error(transparent)]
    Signal(#[from] AdaptError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SignalError + '_ {
    move |source| SignalError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> SignalError + '_ {
    move |source| SignalError::Json {
        path: path.display().to_string(),
        source,
    }
}

/// Piecewise constant phase: `levels[i]` applies on the `i`-th piece
/// delimited by the sorted `breakpoints`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantPhase {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl PiecewiseConstantPhase {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self, SignalError> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(SignalError::BadPhase(format!(
                "{} breakpoints need {} levels, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                levels.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(SignalError::BadPhase(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        Ok(PiecewiseConstantPhase { breakpoints, levels })
    }

    pub fn zero() -> Self {
        PiecewiseConstantPhase {
            breakpoints: Vec::new(),
            levels: vec![0.0],
        }
    }

    /// `pieces` pieces with uniformly random breakpoints in `(c, d)` and
    /// levels uniform in `[0, 2π)`.
    pub fn random(c: f64, d: f64, pieces: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pieces = pieces.max(1);
        let mut breakpoints: Vec<f64> = Vec::with_capacity(pieces - 1);
        while breakpoints.len() < pieces - 1 {
            let t: f64 = rng.gen();
            let x = c + t * (d - c);
            if x > c && x < d && !breakpoints.contains(&x) {
                breakpoints.push(x);
            }
        }
        breakpoints.sort_by(f64::total_cmp);
        let levels = (0..pieces).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        PiecewiseConstantPhase { breakpoints, levels }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn at(&self, x: f64) -> f64 {
        self.levels[self.breakpoints.partition_point(|&b| b <= x)]
    }
}

fn uniform_samples(c: f64, d: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<SampledSignal, SignalError> {
    if len < MIN_SAMPLES {
        return Err(AdaptError::SignalTooShort(len).into());
    }
    let h = (d - c) / (len - 1) as f64;
    let values = (0..len)
        .map(|k| f(if k + 1 == len { d } else { c + k as f64 * h }))
        .collect();
    Ok(SampledSignal::new(values, c, d)?)
}

/// `cos(2πx²)` at `len` equispaced points of `[0, 8]`.
pub fn chirp(len: usize) -> Result<SampledSignal, SignalError> {
    let (c, d) = CHIRP_INTERVAL;
    uniform_samples(c, d, len, |x| (2.0 * PI * x * x).cos())
}

/// `cos(8πx + φ(x))` at `len` equispaced points of `[c, d]`.
pub fn phased_cosine(len: usize, c: f64, d: f64, phase: &PiecewiseConstantPhase) -> Result<SampledSignal, SignalError> {
    uniform_samples(c, d, len, |x| (8.0 * PI * x + phase.at(x)).cos())
}

/// Phased cosine on the default interval. Without an explicit phase a
/// random one is drawn from `seed`.
pub fn default_phased_cosine(
    len: usize,
    phase: Option<&PiecewiseConstantPhase>,
    seed: u64,
) -> Result<(SampledSignal, PiecewiseConstantPhase), SignalError> {
    let (c, d) = PHASED_COSINE_INTERVAL;
    let phase = match phase {
        Some(p) => p.clone(),
        None => PiecewiseConstantPhase::random(c, d, DEFAULT_PHASE_PIECES, seed),
    };
    Ok((phased_cosine(len, c, d, &phase)?, phase))
}

/// Parses one value per line. Blank lines are skipped; a trailing comma
/// (single-column CSV) is tolerated.
pub fn parse_values(text: &str) -> Result<Vec<f64>, SignalError> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.strip_suffix(',').unwrap_or(line).trim();
        let v: f64 = field.parse().map_err(|_| SignalError::Parse {
            line: i + 1,
            message: format!("expected a number, found {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(SignalError::Parse {
                line: i + 1,
                message: "non-finite value".into(),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(SignalError::Parse {
            line: 0,
            message: "no samples".into(),
        });
    }
    Ok(values)
}

/// Loads a uniformly sampled signal on `[c, d]`.
pub fn load_signal(path: impl AsRef<Path>, c: f64, d: f64) -> Result<SampledSignal, SignalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(SampledSignal::new(parse_values(&text)?, c, d)?)
}

pub fn save_signal(sig: &SampledSignal, path: impl AsRef<Path>) -> Result<(), SignalError> {
    let path = path.as_ref();
    let mut out = String::with_capacity(sig.len() * 24);
    for v in sig.values() {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn save_partition(p: &Partition, path: impl AsRef<Path>) -> Result<(), SignalError> {
    write_json(p, path.as_ref())
}

pub fn load_partition(path: impl AsRef<Path>) -> Result<Partition, SignalError> {
    read_json(path.as_ref())
}

/// On-disk form of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub atoms: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub stage_log: StageLog,
    /// Path or name of the dictionary metadata the indices refer to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<String>,
}

impl DecompositionRecord {
    pub fn new(dec: &Decomposition, dictionary: Option<String>) -> Self {
        DecompositionRecord {
            atoms: dec.atoms.clone(),
            coefficients: dec.coefficients.clone(),
            residual_norm: dec.residual_norm,
            k: dec.k(),
            stage_log: dec.stage_log.clone(),
            dictionary,
        }
    }

    pub fn into_decomposition(self) -> Decomposition {
        Decomposition {
            atoms: self.atoms,
            coefficients: self.coefficients,
            residual_norm: self.residual_norm,
            stage_log: self.stage_log,
        }
    }
}

pub fn save_decomposition(
    dec: &Decomposition,
    dictionary: Option<&str>,
    path: impl AsRef<Path>,
) -> Result<(), SignalError> {
    write_json(
        &DecompositionRecord::new(dec, dictionary.map(str::to_owned)),
        path.as_ref(),
    )
}

pub fn load_decomposition(path: impl AsRef<Path>) -> Result<DecompositionRecord, SignalError> {
    read_json(path.as_ref())
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<(), SignalError> {
    let text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SignalError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}

/// Writes `x,signal,approximation,residual` rows.
pub fn write_reconstruction_csv<W: Write>(
    mut out: W,
    grid: &[f64],
    signal: &[f64],
    approximation: &[f64],
) -> io::Result<()> {
    writeln!(out, "x,signal,approximation,residual")?;
    for ((x, f), a) in grid.iter().zip(signal).zip(approximation) {
        writeln!(out, "{x},{f},{a},{}", f - a)?;
    }
    Ok(())
}

/// Writes `x,abs_curvature` rows.
pub fn write_curvature_csv<W: Write>(mut out: W, profile: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "x,abs_curvature")?;
    for (x, k) in profile {
        writeln!(out, "{x},{k}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chirp_samples() {
        let s = chirp(2049).unwrap();
        assert_eq!(s.len(), 2049);
        assert_eq!(s.interval(), (0.0, 8.0));
        assert_eq!(s.values()[0], 1.0);
        assert_eq!(s.abscissa(2048), 8.0);
        assert!((s.values()[2048] - 1.0).abs() < 1e-12);
        // x = √2 is not a grid point; check the closed form directly
        let x = 2f64.sqrt();
        assert!(((2.0 * PI * x * x).cos() - 1.0).abs() < 1e-12);
        assert!(chirp(5).is_err());
    }

    #[test]
    fn phase_lookup() {
        let phase = PiecewiseConstantPhase::new(vec![1.0, 2.0], vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(phase.at(0.5), 0.1);
        assert_eq!(phase.at(1.0), 0.2);
        assert_eq!(phase.at(3.0), 0.3);
        assert!(PiecewiseConstantPhase::new(vec![1.0], vec![0.0]).is_err());
        assert!(PiecewiseConstantPhase::new(vec![2.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn zero_phase_is_plain_cosine() {
        let s = phased_cosine(257, 0.0, 4.0, &PiecewiseConstantPhase::zero()).unwrap();
        for (x, v) in s.grid().iter().zip(s.values()) {
            assert_eq!(*v, (8.0 * PI * x).cos());
        }
    }

    #[test]
    fn half_turn_flips_second_half() {
        let plain = phased_cosine(257, 0.0, 4.0, &PiecewiseConstantPhase::zero()).unwrap();
        let jump = PiecewiseConstantPhase::new(vec![2.0], vec![0.0, PI]).unwrap();
        let flipped = phased_cosine(257, 0.0, 4.0, &jump).unwrap();
        for (k, x) in plain.grid().iter().enumerate() {
            let (a, b) = (plain.values()[k], flipped.values()[k]);
            if *x < 2.0 {
                assert_eq!(a, b);
            } else {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seeded_phase_is_reproducible() {
        let (a, pa) = default_phased_cosine(513, None, 7).unwrap();
        let (b, pb) = default_phased_cosine(513, None, 7).unwrap();
        let (_, pc) = default_phased_cosine(513, None, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(pa, pb);
        assert_ne!(pa, pc);
        assert_eq!(pa.levels().len(), DEFAULT_PHASE_PIECES);
        assert!(pa.levels().iter().all(|l| (0.0..2.0 * PI).contains(l)));
        assert!(pa.breakpoints().iter().all(|b| *b > 0.0 && *b < 4.0));
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_values("1\n2.5,\n\n-3e-2\n").unwrap(), vec![1.0, 2.5, -0.03]);
        match parse_values("1\n2\nabc\n") {
            Err(SignalError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_values(""), Err(SignalError::Parse { .. })));
        assert!(matches!(parse_values("nan\n"), Err(SignalError::Parse { line: 1, .. })));
    }
}
