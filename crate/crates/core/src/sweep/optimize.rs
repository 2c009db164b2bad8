//! One-dimensional maximisation of `ΔI` over the modulation variance.

use super::config::Protocol;
use crate::channel::{DetectorParams, LinkParams};
use crate::error::Result;
use crate::keyrate::{secret_key_rate, SpectrumPath};

pub const VA_MIN: f64 = 0.05;
pub const VA_MAX: f64 = 2.0;
/// Final bracket width of the golden-section search, and grid spacing of
/// the fallback scan.
pub const VA_TOL: f64 = 1e-3;
/// Points of the coarse scan used to seed the search and detect
/// non-unimodal profiles.
pub const COARSE_POINTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    GoldenSection,
    GridScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub x: f64,
    pub value: f64,
    pub method: SearchMethod,
    pub evaluations: usize,
}

/// Sign changes of the discrete gradient, ignoring flat steps.
fn gradient_sign_changes(values: &[f64]) -> usize {
    let signs: Vec<f64> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|s| s[0] != s[1]).count()
}

/// Maximises `f` on `[lo, hi]`.
///
/// A coarse scan decides the method: golden-section search down to a bracket
/// of `tol` when the sampled profile has at most one turning point, a scan
/// with spacing `tol` otherwise. The best point seen is returned, so the
/// result never falls below the coarse scan.
pub fn maximize(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Optimum> {
    let mut evaluations = 0;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut eval = |x: f64, best: &mut (f64, f64)| -> Result<f64> {
        let y = f(x)?;
        evaluations += 1;
        if y > best.1 {
            *best = (x, y);
        }
        Ok(y)
    };

    let h = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let coarse = (0..COARSE_POINTS)
        .map(|i| eval(lo + i as f64 * h, &mut best))
        .collect::<Result<Vec<_>>>()?;

    let method = if gradient_sign_changes(&coarse) <= 1 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = eval(c, &mut best)?;
        let mut fd = eval(d, &mut best)?;
        while b - a > tol {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c, &mut best)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d, &mut best)?;
            }
        }
        SearchMethod::GoldenSection
    } else {
        let n = ((hi - lo) / tol).ceil() as usize;
        for i in 0..=n {
            eval((lo + i as f64 * tol).min(hi), &mut best)?;
        }
        SearchMethod::GridScan
    };
    Ok(Optimum {
        x: best.0,
        value: best.1,
        method,
        evaluations,
    })
}

/// Best modulation variance `V_A* ∈ [VA_MIN, VA_MAX]` and its rate. A
/// non-positive `value` means no positive key exists on the range.
pub fn optimize_variance(
    protocol: Protocol,
    link: &LinkParams,
    detector: &DetectorParams,
    beta: f64,
    path: SpectrumPath,
) -> Result<Optimum> {
    maximize(
        |va| Ok(secret_key_rate(&protocol.scheme(va)?, link, detector, beta, path)?.delta_i),
        VA_MIN,
        VA_MAX,
        VA_TOL,
    )
}
