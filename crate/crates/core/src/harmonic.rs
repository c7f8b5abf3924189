//! Monte-Carlo harmonic measure on Privalov domains.
//!
//! The primary estimator is walk-on-spheres: from `z`, jump to a uniform point
//! on the largest circle about `z` inside the domain, and stop once within
//! `delta` of the boundary. The stopping point is attributed to the nearest
//! boundary piece. A lattice random walk is provided as an independent
//! cross-check.
//!
//! Samples are split over a fixed number of ChaCha streams, one per chunk, so
//! results depend only on `(seed, samples, streams)` and never on scheduling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cone::{ConeError, PieceTag, PrivalovDomain};
use crate::series::CoefficientSeries;

pub const DEFAULT_DELTA: f64 = 1e-5;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
pub const DEFAULT_STREAMS: usize = 64;

/// Value of `log|1 + G|` used where `|1 + G|` underflows.
pub const LOG_FLOOR: f64 = -690.7755278982137;

#[derive(Debug, Error)]
pub enum HmError {
    #[error(transparent)]
    Domain(#[from] ConeError),
    #[error("delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("at least one sample is required")]
    NoSamples,
    #[error(
        "walk did not terminate after {steps} steps (last point {last}, distance {distance:e}); \
         delta may be too small"
    )]
    MaxSteps {
        steps: u64,
        last: Complex64,
        distance: f64,
    },
    #[error("series must be supported on n >= 0")]
    NotAnalytic,
}

/// Sampling parameters shared by all estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalkOptions {
    pub delta: f64,
    pub max_steps: u64,
    pub streams: usize,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            max_steps: DEFAULT_MAX_STEPS,
            streams: DEFAULT_STREAMS,
        }
    }
}

impl WalkOptions {
    pub fn with_delta(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }
}

/// Where a walk stopped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exit {
    pub piece: usize,
    pub point: Complex64,
    pub steps: u64,
}

/// One walk-on-spheres path from `start`.
pub fn wos_sample<R: Rng + ?Sized>(
    domain: &PrivalovDomain,
    start: Complex64,
    delta: f64,
    max_steps: u64,
    rng: &mut R,
) -> Result<Exit, HmError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(HmError::BadDelta(delta));
    }
    if !domain.contains(start) {
        return Err(ConeError::OutsideDomain(start).into());
    }
    let mut z = start;
    let mut steps = 0;
    loop {
        let (piece, dist) = domain.nearest_unchecked(z);
        if dist < delta {
            return Ok(Exit { piece, point: z, steps });
        }
        if steps >= max_steps {
            return Err(HmError::MaxSteps {
                steps,
                last: z,
                distance: dist,
            });
        }
        steps += 1;
        let theta = rng.gen::<f64>() * TAU;
        z += Complex64::from_polar(dist, theta);
    }
}

fn stream_rng(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Sample counts per stream: the first `samples % streams` streams get one extra.
fn stream_counts(samples: usize, streams: usize) -> Vec<usize> {
    let streams = streams.max(1);
    (0..streams)
        .map(|s| samples / streams + usize::from(s < samples % streams))
        .collect()
}

/// All exits, ordered by stream and then by draw.
pub fn sample_exits(
    domain: &PrivalovDomain,
    start: Complex64,
    samples: usize,
    opts: &WalkOptions,
    seed: u64,
) -> Result<Vec<Exit>, HmError> {
    if samples == 0 {
        return Err(HmError::NoSamples);
    }
    if !(opts.delta > 0.0 && opts.delta.is_finite()) {
        return Err(HmError::BadDelta(opts.delta));
    }
    let chunks: Vec<Result<Vec<Exit>, HmError>> = stream_counts(samples, opts.streams)
        .into_par_iter()
        .enumerate()
        .map(|(s, count)| {
            let mut rng = stream_rng(seed, s);
            (0..count)
                .map(|_| wos_sample(domain, start, opts.delta, opts.max_steps, &mut rng))
                .collect()
        })
        .collect();
    let mut exits = Vec::with_capacity(samples);
    for chunk in chunks {
        exits.extend(chunk?);
    }
    Ok(exits)
}

/// Proportion estimate with binomial standard error.
fn proportion(hits: u64, samples: u64) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceEstimate {
    pub id: usize,
    pub tag: PieceTag,
    pub gap: Option<usize>,
    pub hits: u64,
    pub omega: f64,
    pub stderr: f64,
}

/// Harmonic measure of every boundary piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HmEstimate {
    pub pieces: Vec<PieceEstimate>,
    pub samples: u64,
    pub delta: f64,
    pub seed: u64,
}

impl HmEstimate {
    pub fn from_exits(domain: &PrivalovDomain, exits: &[Exit], delta: f64, seed: u64) -> Self {
        let mut hits = vec![0u64; domain.pieces().len()];
        for e in exits {
            hits[e.piece] += 1;
        }
        let samples = exits.len() as u64;
        let pieces = domain
            .pieces()
            .iter()
            .zip(hits)
            .map(|(p, hits)| {
                let (omega, stderr) = proportion(hits, samples);
                PieceEstimate {
                    id: p.id,
                    tag: p.kind.tag(),
                    gap: p.gap,
                    hits,
                    omega,
                    stderr,
                }
            })
            .collect();
        Self {
            pieces,
            samples,
            delta,
            seed,
        }
    }

    /// Hit counts add up to the number of samples.
    pub fn partition_holds(&self) -> bool {
        self.pieces.iter().map(|p| p.hits).sum::<u64>() == self.samples
    }
}

pub fn harmonic_measure(
    domain: &PrivalovDomain,
    start: Complex64,
    samples: usize,
    opts: &WalkOptions,
    seed: u64,
) -> Result<HmEstimate, HmError> {
    let exits = sample_exits(domain, start, samples, opts, seed)?;
    Ok(HmEstimate::from_exits(domain, &exits, opts.delta, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub gap: usize,
    pub len: f64,
    pub hits: u64,
    pub omega: f64,
    pub stderr: f64,
    pub ratio: f64,
}

/// Aggregates segment and inner-arc hits over each gap.
pub fn gap_rows(domain: &PrivalovDomain, hits_per_piece: &[u64], samples: u64) -> Vec<GapRow> {
    domain
        .gaps()
        .iter()
        .map(|g| {
            let hits: u64 = domain
                .pieces()
                .iter()
                .filter(|p| p.gap == Some(g.id))
                .map(|p| hits_per_piece[p.id])
                .sum();
            let (omega, stderr) = proportion(hits, samples);
            GapRow {
                gap: g.id,
                len: g.len,
                hits,
                omega,
                stderr,
                ratio: omega / g.len,
            }
        })
        .collect()
}

impl HmEstimate {
    pub fn gap_table(&self, domain: &PrivalovDomain) -> Vec<GapRow> {
        let hits: Vec<u64> = self.pieces.iter().map(|p| p.hits).collect();
        gap_rows(domain, &hits, self.samples)
    }
}

pub fn omega_gap_table(
    domain: &PrivalovDomain,
    start: Complex64,
    samples: usize,
    opts: &WalkOptions,
    seed: u64,
) -> Result<Vec<GapRow>, HmError> {
    Ok(harmonic_measure(domain, start, samples, opts, seed)?.gap_table(domain))
}

/// Writes a gap table as CSV.
pub fn write_gap_csv<W: std::io::Write>(rows: &[GapRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcBin {
    pub start: f64,
    pub len: f64,
    pub hits: u64,
    pub omega: f64,
    pub stderr: f64,
}

/// Histogram of exit angles over `bins` equal arcs starting at angle 0.
pub fn arc_histogram(exits: &[Exit], bins: usize) -> Vec<ArcBin> {
    let width = TAU / bins as f64;
    let mut hits = vec![0u64; bins];
    for e in exits {
        let k = (e.point.arg().rem_euclid(TAU) / width) as usize;
        hits[k.min(bins - 1)] += 1;
    }
    let n = exits.len() as u64;
    hits.into_iter()
        .enumerate()
        .map(|(k, h)| {
            let (omega, stderr) = proportion(h, n);
            ArcBin {
                start: k as f64 * width,
                len: width,
                hits: h,
                omega,
                stderr,
            }
        })
        .collect()
}

/// Disk-oracle comparison: every bin within `sigmas` binomial standard errors
/// (computed from the exact `len/2pi`) of its analytic value.
pub fn disk_oracle_passes(bins: &[ArcBin], samples: u64, sigmas: f64) -> bool {
    bins.iter().all(|b| {
        let p = b.len / TAU;
        let sd = (p * (1.0 - p) / samples as f64).sqrt();
        (b.omega - p).abs() <= sigmas * sd
    })
}

/// Gap table from a nearest-neighbour random walk on the lattice `start + h Z^2`.
///
/// Membership is tabulated once on the lattice; a walk stops at its first
/// lattice point outside the closed domain, attributed to the nearest piece.
pub fn lattice_walk_gap_table(
    domain: &PrivalovDomain,
    start: Complex64,
    walks: usize,
    h: f64,
    seed: u64,
) -> Result<Vec<GapRow>, HmError> {
    if !(h > 0.0 && h < 0.5) {
        return Err(HmError::BadDelta(h));
    }
    if walks == 0 {
        return Err(HmError::NoSamples);
    }
    if !domain.contains(start) {
        return Err(ConeError::OutsideDomain(start).into());
    }
    // the domain sits in |z - start| <= 1 + |start|, so the table always reaches outside
    let half = ((1.0 + start.norm()) / h).ceil() as i64 + 2;
    let side = (2 * half + 1) as usize;
    let point = |i: i64, j: i64| start + Complex64::new(i as f64 * h, j as f64 * h);
    let inside: Vec<bool> = (0..side * side)
        .into_par_iter()
        .map(|idx| {
            let i = (idx % side) as i64 - half;
            let j = (idx / side) as i64 - half;
            domain.contains(point(i, j))
        })
        .collect();

    let counts = stream_counts(walks, DEFAULT_STREAMS);
    let per_stream: Vec<Vec<u64>> = counts
        .into_par_iter()
        .enumerate()
        .map(|(s, count)| {
            let mut rng = stream_rng(seed, s);
            let mut hits = vec![0u64; domain.pieces().len()];
            for _ in 0..count {
                let (mut i, mut j) = (0i64, 0i64);
                let mut bits = 0u64;
                let mut left = 0;
                loop {
                    if left == 0 {
                        bits = rng.next_u64();
                        left = 32;
                    }
                    match bits & 3 {
                        0 => i += 1,
                        1 => i -= 1,
                        2 => j += 1,
                        _ => j -= 1,
                    }
                    bits >>= 2;
                    left -= 1;
                    let idx = (j + half) as usize * side + (i + half) as usize;
                    if !inside[idx] {
                        hits[domain.nearest_unchecked(point(i, j)).0] += 1;
                        break;
                    }
                }
            }
            hits
        })
        .collect();
    let mut hits = vec![0u64; domain.pieces().len()];
    for s in per_stream {
        for (total, h) in hits.iter_mut().zip(s) {
            *total += h;
        }
    }
    Ok(gap_rows(domain, &hits, walks as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubharmonicReport {
    /// `log|1 + G(start)|`.
    pub center: f64,
    /// Mean of `log|1 + G|` over the stopping points.
    pub estimate: f64,
    pub stderr: f64,
    pub slack: f64,
    /// Stopping points where `|1 + G| < 1e-300`.
    pub floored: u64,
    pub samples: u64,
}

impl SubharmonicReport {
    /// `slack >= -sigmas * stderr`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.slack >= -sigmas * self.stderr
    }
}

fn log_one_plus(g: &CoefficientSeries, z: Complex64) -> (f64, bool) {
    let v = (Complex64::new(1.0, 0.0) + g.power_eval(z)).norm();
    if v < 1e-300 {
        (LOG_FLOOR, true)
    } else {
        (v.ln(), false)
    }
}

/// Compares `log|1 + G|` at `start` with its harmonic-measure average over `∂P`.
pub fn subharmonic_check(
    domain: &PrivalovDomain,
    g: &CoefficientSeries,
    start: Complex64,
    samples: usize,
    opts: &WalkOptions,
    seed: u64,
) -> Result<SubharmonicReport, HmError> {
    if g.n_min().is_some_and(|n| n < 0) {
        return Err(HmError::NotAnalytic);
    }
    let exits = sample_exits(domain, start, samples, opts, seed)?;
    let mut floored = 0;
    let values: Vec<f64> = exits
        .iter()
        .map(|e| {
            let (v, f) = log_one_plus(g, e.point);
            floored += u64::from(f);
            v
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let center = log_one_plus(g, start).0;
    Ok(SubharmonicReport {
        center,
        estimate: mean,
        stderr: (var / n).sqrt(),
        slack: mean - center,
        floored,
        samples: values.len() as u64,
    })
}
