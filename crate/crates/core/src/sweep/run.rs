//! Distance sweeps and zero-crossing summaries.

use rayon::prelude::*;

use super::config::{PathChoice, Protocol, SweepConfig, VaSetting};
use super::optimize::optimize_variance;
use crate::channel::DetectionMode;
use crate::error::{Error, Result};
use crate::keyrate::{secret_key_rate, KeyRateReport, SpectrumPath};

/// Largest closed-form vs matrix discrepancy accepted with [`PathChoice::Both`].
pub const PATH_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub detection: DetectionMode,
    pub length_km: f64,
    pub excess_noise: f64,
    pub va: f64,
    pub path: PathChoice,
    pub report: KeyRateReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub protocol: Protocol,
    pub detection: DetectionMode,
    pub excess_noise: f64,
    pub length_km: f64,
}

/// Grid in emission order: protocol, detection, excess noise, then distance.
pub fn grid(config: &SweepConfig) -> Vec<GridPoint> {
    let lengths = config.distance.points();
    let mut points = vec![];
    for &protocol in &config.protocols {
        for &detection in &config.detections {
            for &excess_noise in &config.excess_noise {
                for &length_km in &lengths {
                    points.push(GridPoint {
                        protocol,
                        detection,
                        excess_noise,
                        length_km,
                    });
                }
            }
        }
    }
    points
}

fn check_agreement(matrix: &KeyRateReport, closed: &KeyRateReport) -> Result<()> {
    let pairs = matrix
        .all_symplectic()
        .into_iter()
        .zip(closed.all_symplectic());
    let worst = pairs.map(|(m, c)| (m - c).abs()).fold(0.0, f64::max);
    if !(worst <= PATH_AGREEMENT_TOL) {
        return Err(Error::PathMismatch(format!(
            "symplectic spectra differ by {worst:e} at L = {} km, ε = {}",
            matrix.link.length_km, matrix.link.excess_noise
        )));
    }
    Ok(())
}

pub fn evaluate_point(config: &SweepConfig, point: &GridPoint) -> Result<SweepRow> {
    let link = config.link(point.length_km, point.excess_noise)?;
    let detector = config.detector(point.detection)?;
    let spectrum_path = match config.path {
        PathChoice::ClosedForm => SpectrumPath::ClosedForm,
        PathChoice::Matrix | PathChoice::Both => SpectrumPath::Matrix,
    };
    let va = match config.va {
        VaSetting::Fixed(va) => va,
        VaSetting::Optimize => {
            optimize_variance(point.protocol, &link, &detector, config.beta, spectrum_path)?.x
        }
    };
    let scheme = point.protocol.scheme(va)?;
    let report = secret_key_rate(&scheme, &link, &detector, config.beta, spectrum_path)?;
    if config.path == PathChoice::Both {
        let closed = secret_key_rate(
            &scheme,
            &link,
            &detector,
            config.beta,
            SpectrumPath::ClosedForm,
        )?;
        check_agreement(&report, &closed)?;
    }
    Ok(SweepRow {
        protocol: point.protocol,
        detection: point.detection,
        length_km: point.length_km,
        excess_noise: point.excess_noise,
        va,
        path: config.path,
        report,
    })
}

/// Rows for every grid point, in grid order. Points are evaluated in
/// parallel on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    grid(config)
        .par_iter()
        .map(|p| evaluate_point(config, p))
        .collect()
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_sweep(config))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingStatus {
    Crossed,
    /// Positive at the last grid point; `l_max_km` is a lower bound.
    PositiveThroughout,
    NeverPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub protocol: Protocol,
    pub detection: DetectionMode,
    pub excess_noise: f64,
    pub l_max_km: Option<f64>,
    pub status: CrossingStatus,
}

/// Largest distance with a positive rate, interpolated linearly between the
/// last positive grid point and its successor.
pub fn zero_crossing(lengths: &[f64], rates: &[f64]) -> (Option<f64>, CrossingStatus) {
    match rates.iter().rposition(|&r| r > 0.0) {
        None => (None, CrossingStatus::NeverPositive),
        Some(i) if i + 1 == rates.len() => (Some(lengths[i]), CrossingStatus::PositiveThroughout),
        Some(i) => {
            let (l0, l1) = (lengths[i], lengths[i + 1]);
            let (r0, r1) = (rates[i], rates[i + 1]);
            (
                Some(l0 + (l1 - l0) * r0 / (r0 - r1)),
                CrossingStatus::Crossed,
            )
        }
    }
}

/// One summary per (protocol, detection, excess noise) group of `rows`.
pub fn zero_crossings(rows: &[SweepRow]) -> Vec<Crossing> {
    let same_group = |a: &SweepRow, b: &SweepRow| {
        a.protocol == b.protocol && a.detection == b.detection && a.excess_noise == b.excess_noise
    };
    rows.chunk_by(same_group)
        .map(|group| {
            let lengths: Vec<f64> = group.iter().map(|r| r.length_km).collect();
            let rates: Vec<f64> = group.iter().map(|r| r.report.delta_i).collect();
            let (l_max_km, status) = zero_crossing(&lengths, &rates);
            Crossing {
                protocol: group[0].protocol,
                detection: group[0].detection,
                excess_noise: group[0].excess_noise,
                l_max_km,
                status,
            }
        })
        .collect()
}
