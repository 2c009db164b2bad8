//! Cross-checks between independent computations: series vs closed form vs
//! Fock space for the source, closed form vs matrix conditioning for the
//! attack, simulation vs prediction for the channel.

use nalgebra::DMatrix;

use crate::channel::{
    noise_budget, predicted_variances, simulate_quadratures, DetectionMode, DetectorParams,
    LinkParams,
};
use crate::error::Result;
use crate::fock::{
    class_eigenvalues, mixture_density, numeric_correlation, psi_measurement_states, purification,
    C64,
};
use crate::keyrate::{
    conditional_spectrum_closed, conditional_spectrum_matrix, secret_key_rate, SpectrumPath,
};
use crate::modulation::{
    correlation_z, gaussian_correlation, psk8_eigenvalues_closed, psk_eigenvalues,
    source_covariance, ModulationScheme,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation against the tolerance, or a short note.
    pub detail: String,
}

fn bound(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("max deviation {worst:.3e} (tol {tol:.0e})"),
    }
}

pub const FOCK_CUTOFF: usize = 64;
const ALPHA2: [f64; 4] = [0.125, 0.5, 1.0, 2.0];

fn spectrum_check() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for a2 in ALPHA2 {
        let alpha = a2.sqrt();
        let series = psk_eigenvalues(8, alpha)?;
        let closed = psk8_eigenvalues_closed(alpha)?;
        let fock = class_eigenvalues(8, alpha, FOCK_CUTOFF)?;
        for k in 0..8 {
            worst = worst
                .max((series.lambdas[k] - closed.lambdas[k]).abs())
                .max((series.lambdas[k] - fock[k]).abs());
        }
    }
    Ok(bound(
        "eight-state spectrum: closed form, series and Fock",
        worst,
        1e-10,
    ))
}

fn purification_checks() -> Result<Vec<Check>> {
    let (mut trace_err, mut gram_err, mut prob_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for a2 in ALPHA2 {
        let alpha = a2.sqrt();
        let psi = purification(8, alpha, FOCK_CUTOFF)?;
        let rho = mixture_density(8, alpha, FOCK_CUTOFF)?;
        trace_err = trace_err.max((psi.reduced_second().entries - rho.entries).norm());

        let basis = psi_measurement_states(8, alpha, FOCK_CUTOFF)?;
        let gram = DMatrix::from_fn(8, 8, |i, j| basis[i].inner(&basis[j]));
        gram_err = gram_err.max((gram - DMatrix::<C64>::identity(8, 8)).norm());
        for state in &basis {
            let p = psi.project_first(state).norm().powi(2);
            prob_err = prob_err.max((p - 0.125).abs());
        }
    }
    Ok(vec![
        bound(
            "purification: reduced state equals the mixture",
            trace_err,
            1e-10,
        ),
        bound(
            "measurement basis: Gram matrix is the identity",
            gram_err,
            1e-10,
        ),
        bound(
            "measurement basis: outcome probabilities 1/8",
            prob_err,
            1e-10,
        ),
    ])
}

fn correlation_checks() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for n in [4, 8] {
        for a2 in ALPHA2 {
            let alpha = a2.sqrt();
            let numeric = numeric_correlation(&purification(n, alpha, FOCK_CUTOFF)?);
            worst = worst.max((numeric - correlation_z(n, alpha)?).abs());
        }
    }
    let mut ordered = true;
    for va in [0.1, 0.25, 0.5, 1.0, 2.0, 3.0] {
        let alpha = (va / 2.0f64).sqrt();
        let z4 = correlation_z(4, alpha)?;
        let z8 = correlation_z(8, alpha)?;
        ordered &= z4 < z8 && z8 < gaussian_correlation(va);
    }
    Ok(vec![
        bound("correlation: Fock expectation vs series", worst, 1e-9),
        Check {
            name: "correlation: Z4 < Z8 < ZG",
            passed: ordered,
            detail: "V_A in {0.1, 0.25, 0.5, 1, 2, 3}".into(),
        },
    ])
}

fn path_checks() -> Result<Vec<Check>> {
    let (mut hom, mut het, mut unit, mut min_nu) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let schemes = [
        ModulationScheme::psk_with_variance(4, 1.0)?,
        ModulationScheme::psk_with_variance(8, 1.0)?,
        ModulationScheme::gaussian(1.0)?,
    ];
    for scheme in &schemes {
        let src = source_covariance(scheme)?;
        for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
            let det = DetectorParams::new(mode, 0.6, 0.05)?;
            for eps in [0.005, 0.01, 0.02] {
                for l in (0..=150).step_by(5) {
                    let link = LinkParams::new(l as f64, 0.2, eps)?;
                    let budget = noise_budget(&link, &det)?;
                    let closed = conditional_spectrum_closed(&src, &budget)?;
                    let matrix = conditional_spectrum_matrix(&src, &budget)?;
                    let diff = closed
                        .iter()
                        .zip(&matrix)
                        .map(|(c, m)| (c - m).abs())
                        .fold(0.0, f64::max);
                    match mode {
                        DetectionMode::Homodyne => hom = hom.max(diff),
                        DetectionMode::Heterodyne => het = het.max(diff),
                    }
                    unit = unit.max((matrix[2] - 1.0).abs());
                    let report = secret_key_rate(scheme, &link, &det, 0.8, SpectrumPath::Matrix)?;
                    min_nu = report.all_symplectic().into_iter().fold(min_nu, f64::min);
                }
            }
        }
    }
    Ok(vec![
        bound("homodyne: closed form vs matrix conditioning", hom, 1e-8),
        bound("heterodyne: closed form vs matrix conditioning", het, 1e-8),
        bound("conditional spectrum: smallest value is 1", unit, 1e-6),
        Check {
            name: "physicality: symplectic eigenvalues >= 1",
            passed: min_nu >= 1.0 - 1e-9,
            detail: format!("smallest {min_nu:.12}"),
        },
    ])
}

/// Gaussian modulation through a lossless, noiseless link and ideal
/// detector: the EPR source stays pure, so every symplectic value is 1.
fn pure_limit_check() -> Result<Check> {
    let mut worst: f64 = 0.0;
    let scheme = ModulationScheme::gaussian(1.0)?;
    let link = LinkParams::new(0.0, 0.2, 0.0)?;
    for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
        let det = DetectorParams::ideal(mode);
        for path in [SpectrumPath::ClosedForm, SpectrumPath::Matrix] {
            let r = secret_key_rate(&scheme, &link, &det, 0.8, path)?;
            for nu in r.all_symplectic() {
                worst = worst.max((nu - 1.0).abs());
            }
        }
    }
    Ok(bound("pure-state limit: unit spectra", worst, 1e-6))
}

fn monte_carlo_check(seed: u64) -> Result<Check> {
    let mut worst_sigma: f64 = 0.0;
    let points = [
        (ModulationScheme::psk_with_variance(4, 1.0)?, 0.0, 0.005),
        (ModulationScheme::psk_with_variance(8, 1.0)?, 20.0, 0.005),
        (ModulationScheme::psk_with_variance(8, 0.5)?, 50.0, 0.01),
        (ModulationScheme::gaussian(1.0)?, 10.0, 0.02),
        (ModulationScheme::gaussian(2.0)?, 100.0, 0.005),
        (ModulationScheme::psk_with_variance(4, 2.0)?, 150.0, 0.02),
    ];
    for (i, (scheme, l, eps)) in points.iter().enumerate() {
        let link = LinkParams::new(*l, 0.2, *eps)?;
        let det = DetectorParams::new(DetectionMode::Homodyne, 0.6, 0.05)?;
        let stats =
            simulate_quadratures(scheme, &link, &det, 100_000, seed.wrapping_add(i as u64))?;
        let (v_b, v_b_a) = predicted_variances(scheme, &noise_budget(&link, &det)?);
        worst_sigma = worst_sigma
            .max((stats.v_b - v_b).abs() / stats.v_b_stderr)
            .max((stats.v_b_given_a - v_b_a).abs() / stats.v_b_given_a_stderr);
    }
    Ok(Check {
        name: "Monte-Carlo variances vs prediction",
        passed: worst_sigma <= 5.0,
        detail: format!("worst {worst_sigma:.2} standard errors (tol 5)"),
    })
}

/// All cross-checks; `seed` drives the Monte-Carlo run.
pub fn run_validation(seed: u64) -> Result<Vec<Check>> {
    let mut checks = vec![spectrum_check()?];
    checks.extend(purification_checks()?);
    checks.extend(correlation_checks()?);
    checks.extend(path_checks()?);
    checks.push(pure_limit_check()?);
    checks.push(monte_carlo_check(seed)?);
    Ok(checks)
}
