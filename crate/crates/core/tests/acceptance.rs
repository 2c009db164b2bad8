//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;

use cvqkd::channel::{
    noise_budget, predicted_variances, simulate_quadratures, DetectionMode, DetectorParams,
    LinkParams,
};
use cvqkd::fock::{
    class_eigenvalues, mixture_density, numeric_correlation, psi_measurement_states, purification,
    C64,
};
use cvqkd::keyrate::{
    conditional_spectrum_closed, conditional_spectrum_matrix, secret_key_rate, SpectrumPath,
};
use cvqkd::modulation::{
    correlation_z, gaussian_correlation, psk8_eigenvalues_closed, psk_eigenvalues,
    source_covariance, ModulationScheme,
};
use cvqkd::sweep::config::DistanceGrid;
use cvqkd::sweep::run::{zero_crossing, CrossingStatus};
use cvqkd::sweep::{run_sweep_with_threads, sweep_csv, PathChoice, Protocol, SweepConfig};

const ALPHA2: [f64; 4] = [0.125, 0.5, 1.0, 2.0];
const N_MAX: usize = 64;
const MODES: [DetectionMode; 2] = [DetectionMode::Homodyne, DetectionMode::Heterodyne];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn nominal_detector(mode: DetectionMode) -> DetectorParams {
    DetectorParams::new(mode, 0.6, 0.05).unwrap()
}

fn nominal_schemes() -> [ModulationScheme; 3] {
    [
        ModulationScheme::psk_with_variance(4, 1.0).unwrap(),
        ModulationScheme::psk_with_variance(8, 1.0).unwrap(),
        ModulationScheme::gaussian(1.0).unwrap(),
    ]
}

/// Every `(ε, L)` point of the default sweep.
fn nominal_links() -> Vec<LinkParams> {
    let mut links = vec![];
    for eps in [0.005, 0.01, 0.02] {
        for l in 0..=150 {
            links.push(LinkParams::new(l as f64, 0.2, eps).unwrap());
        }
    }
    links
}

fn spectrum_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for a2 in ALPHA2 {
        let alpha = a2.sqrt();
        let series = psk_eigenvalues(8, alpha).unwrap();
        let closed = psk8_eigenvalues_closed(alpha).unwrap();
        let fock = class_eigenvalues(8, alpha, N_MAX).unwrap();
        for k in 0..8 {
            worst = worst
                .max((closed.lambdas[k] - series.lambdas[k]).abs())
                .max((fock[k] - series.lambdas[k]).abs())
                .max((fock[k] - closed.lambdas[k]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 5.0,
        format!("max |Δλ| = {worst:.2e} (< 1e-10), {secs:.2} s (< 5 s), n_max = {N_MAX}"),
    )
}

fn purification_checks() -> Outcome {
    let (mut trace, mut gram, mut prob): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for a2 in ALPHA2 {
        let alpha = a2.sqrt();
        let psi = purification(8, alpha, N_MAX).unwrap();
        let rho = mixture_density(8, alpha, N_MAX).unwrap();
        trace = trace.max((psi.reduced_second().entries - &rho.entries).norm());
        trace = trace.max((psi.reduced_first().entries - &rho.entries).norm());
        let basis = psi_measurement_states(8, alpha, N_MAX).unwrap();
        let g = DMatrix::from_fn(8, 8, |i, j| basis[i].inner(&basis[j]));
        gram = gram.max(
            (g - DMatrix::<C64>::identity(8, 8))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
        for state in &basis {
            prob = prob.max((psi.project_first(state).norm().powi(2) - 0.125).abs());
        }
    }
    outcome(
        trace < 1e-10 && gram < 1e-10 && prob < 1e-10,
        format!("‖Tr Ψ − ρ‖_F = {trace:.2e}, max |G − I| = {gram:.2e}, max |p − 1/8| = {prob:.2e}"),
    )
}

fn correlation_checks() -> Outcome {
    let mut numeric_err: f64 = 0.0;
    for a2 in ALPHA2 {
        let alpha = a2.sqrt();
        let numeric = numeric_correlation(&purification(8, alpha, N_MAX).unwrap());
        numeric_err = numeric_err.max((numeric - correlation_z(8, alpha).unwrap()).abs());
    }
    let mut ordered = true;
    for va in [0.1, 0.25, 0.5, 1.0, 2.0, 3.0] {
        let alpha = (va / 2.0f64).sqrt();
        let z4 = correlation_z(4, alpha).unwrap();
        let z8 = correlation_z(8, alpha).unwrap();
        ordered &= z4 < z8 && z8 < gaussian_correlation(va);
    }
    let mut min_ratio = f64::INFINITY;
    let mut at = 0.0;
    for va in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let ratio = correlation_z(8, (va / 2.0f64).sqrt()).unwrap() / gaussian_correlation(va);
        if ratio < min_ratio {
            min_ratio = ratio;
            at = va;
        }
    }
    outcome(
        numeric_err < 1e-9 && ordered && min_ratio > 0.98,
        format!(
            "|Z_num − Z₈| = {numeric_err:.2e}, Z₄ < Z₈ < Z_G: {ordered}, \
             min Z₈/Z_G on V_A ≤ 1 = {min_ratio:.5} at V_A = {at} (need > 0.98)"
        ),
    )
}

fn path_equivalence() -> Outcome {
    let (mut worst, mut unit): (f64, f64) = (0.0, 0.0);
    let det = nominal_detector(DetectionMode::Homodyne);
    for scheme in nominal_schemes() {
        let src = source_covariance(&scheme).unwrap();
        for link in nominal_links() {
            let budget = noise_budget(&link, &det).unwrap();
            let closed = conditional_spectrum_closed(&src, &budget).unwrap();
            let matrix = conditional_spectrum_matrix(&src, &budget).unwrap();
            worst = worst
                .max((closed[0] - matrix[0]).abs())
                .max((closed[1] - matrix[1]).abs());
            let min = matrix.iter().copied().fold(f64::INFINITY, f64::min);
            unit = unit.max((min - 1.0).abs());
        }
    }
    outcome(
        worst < 1e-8 && unit < 1e-6,
        format!("max |Δλ₃,₄| = {worst:.2e} (< 1e-8), max |min λ − 1| = {unit:.2e} (< 1e-6)"),
    )
}

fn physicality() -> Outcome {
    let mut min_nu = f64::INFINITY;
    for scheme in nominal_schemes() {
        for mode in MODES {
            for link in nominal_links() {
                for path in [SpectrumPath::ClosedForm, SpectrumPath::Matrix] {
                    let r = secret_key_rate(&scheme, &link, &nominal_detector(mode), 0.8, path)
                        .unwrap();
                    min_nu = r.all_symplectic().into_iter().fold(min_nu, f64::min);
                }
            }
        }
    }
    let mut pure_err: f64 = 0.0;
    let lossless = LinkParams::new(0.0, 0.2, 0.0).unwrap();
    for va in [0.1, 1.0, 3.0] {
        let scheme = ModulationScheme::gaussian(va).unwrap();
        for mode in MODES {
            for path in [SpectrumPath::ClosedForm, SpectrumPath::Matrix] {
                let r =
                    secret_key_rate(&scheme, &lossless, &DetectorParams::ideal(mode), 0.8, path)
                        .unwrap();
                pure_err = r
                    .all_symplectic()
                    .into_iter()
                    .fold(pure_err, |m, nu| m.max((nu - 1.0).abs()));
            }
        }
    }
    outcome(
        min_nu >= 1.0 - 1e-9 && pure_err < 1e-6,
        format!("min ν = {min_nu:.12} (≥ 1 − 1e-9), pure-limit max |ν − 1| = {pure_err:.2e}"),
    )
}

fn default_config(protocols: Vec<Protocol>, modes: Vec<DetectionMode>) -> SweepConfig {
    SweepConfig {
        protocols,
        detections: modes,
        ..SweepConfig::default()
    }
}

fn distance_claims() -> Outcome {
    let rate_at_100 = secret_key_rate(
        &ModulationScheme::psk_with_variance(8, 1.0).unwrap(),
        &LinkParams::new(100.0, 0.2, 0.005).unwrap(),
        &nominal_detector(DetectionMode::Homodyne),
        0.8,
        SpectrumPath::ClosedForm,
    )
    .unwrap()
    .delta_i;

    let start = Instant::now();
    let mut config = default_config(
        vec![Protocol::Psk4, Protocol::Psk8, Protocol::Gaussian],
        MODES.to_vec(),
    );
    config.path = PathChoice::Both;
    let rows = run_sweep_with_threads(&config, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();

    let crossing = |p: Protocol, mode: DetectionMode, eps: f64| -> f64 {
        let group: Vec<_> = rows
            .iter()
            .filter(|r| r.protocol == p && r.detection == mode && r.excess_noise == eps)
            .collect();
        let lengths: Vec<f64> = group.iter().map(|r| r.length_km).collect();
        let rates: Vec<f64> = group.iter().map(|r| r.report.delta_i).collect();
        match zero_crossing(&lengths, &rates) {
            (Some(l), CrossingStatus::Crossed | CrossingStatus::PositiveThroughout) => l,
            _ => 0.0,
        }
    };
    let l8: Vec<f64> = [0.005, 0.01, 0.02]
        .iter()
        .map(|&e| crossing(Protocol::Psk8, DetectionMode::Homodyne, e))
        .collect();
    let decreasing = l8.windows(2).all(|w| w[0] > w[1]);
    let mut dominance = true;
    for mode in MODES {
        for eps in [0.005, 0.01, 0.02] {
            dominance &= crossing(Protocol::Psk8, mode, eps) >= crossing(Protocol::Psk4, mode, eps);
        }
    }
    outcome(
        rate_at_100 > 0.0 && decreasing && dominance && secs < 60.0,
        format!(
            "ΔI₈(100 km) = {rate_at_100:.4e} (need > 0), PSK8 crossings {:.2}/{:.2}/{:.2} km \
             decreasing: {decreasing}, PSK8 ≥ PSK4: {dominance}, sweep {secs:.2} s (< 60 s)",
            l8[0], l8[1], l8[2]
        ),
    )
}

fn monte_carlo() -> Outcome {
    let points = [
        (
            ModulationScheme::psk_with_variance(4, 1.0).unwrap(),
            DetectionMode::Homodyne,
            0.0,
            0.005,
        ),
        (
            ModulationScheme::psk_with_variance(8, 1.0).unwrap(),
            DetectionMode::Homodyne,
            25.0,
            0.005,
        ),
        (
            ModulationScheme::psk_with_variance(8, 0.5).unwrap(),
            DetectionMode::Heterodyne,
            50.0,
            0.01,
        ),
        (
            ModulationScheme::gaussian(1.0).unwrap(),
            DetectionMode::Homodyne,
            10.0,
            0.02,
        ),
        (
            ModulationScheme::gaussian(2.0).unwrap(),
            DetectionMode::Heterodyne,
            100.0,
            0.005,
        ),
        (
            ModulationScheme::psk_with_variance(4, 2.0).unwrap(),
            DetectionMode::Homodyne,
            150.0,
            0.02,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (i, (scheme, mode, l, eps)) in points.iter().enumerate() {
        let link = LinkParams::new(*l, 0.2, *eps).unwrap();
        let det = nominal_detector(*mode);
        let stats = simulate_quadratures(scheme, &link, &det, 100_000, 1000 + i as u64).unwrap();
        let (v_b, v_b_a) = predicted_variances(scheme, &noise_budget(&link, &det).unwrap());
        worst = worst
            .max((stats.v_b - v_b).abs() / stats.v_b_stderr)
            .max((stats.v_b_given_a - v_b_a).abs() / stats.v_b_given_a_stderr);
    }
    outcome(
        worst < 5.0,
        format!("worst deviation {worst:.2} standard errors (< 5) at 10⁵ samples"),
    )
}

fn determinism() -> Outcome {
    let mut config = default_config(vec![Protocol::Psk4, Protocol::Psk8], MODES.to_vec());
    config.distance = DistanceGrid {
        start: 0.0,
        stop: 150.0,
        step: 1.0,
    };
    let first = sweep_csv(&config, Some(1)).unwrap();
    let second = sweep_csv(&config, Some(1)).unwrap();
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get().max(2));
    let parallel = sweep_csv(&config, Some(threads)).unwrap();
    outcome(
        first == second && first == parallel,
        format!(
            "{} bytes; rerun identical: {}, 1 vs {threads} threads identical: {}",
            first.len(),
            first == second,
            first == parallel
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("spectrum equivalence", spectrum_equivalence),
        ("purification", purification_checks),
        ("correlation", correlation_checks),
        ("path equivalence", path_equivalence),
        ("physicality", physicality),
        ("distance claims", distance_claims),
        ("Monte-Carlo", monte_carlo),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {} ({name}): {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
