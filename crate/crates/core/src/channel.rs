//! Fiber link and trusted detector noise, referred to the channel input.
//!
//! All variances are in shot-noise units. The channel adds
//! `χ_line = 1/T − 1 + ε`; a detector of efficiency `η` and electronic noise
//! `ε_ele` adds `χ_det/T`, where
//!
//! ```text
//!     homodyne:    χ_det = [(1 − η) + ε_ele] / η
//!     heterodyne:  χ_det = [1 + (1 − η) + 2ε_ele] / η
//! ```
//!
//! In the entanglement-based picture the detector is a beamsplitter of
//! transmittance `η` whose second port carries half of an EPR pair of
//! variance `N`, chosen so that the beamsplitter reproduces `χ_det`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::modulation::ModulationScheme;

/// Standard single-mode fiber attenuation in dB/km.
pub const DEFAULT_LOSS_DB_PER_KM: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectionMode {
    Homodyne,
    Heterodyne,
}

impl DetectionMode {
    pub fn name(self) -> &'static str {
        match self {
            DetectionMode::Homodyne => "homodyne",
            DetectionMode::Heterodyne => "heterodyne",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    /// Excess noise `ε`, referred to the channel input.
    pub excess_noise: f64,
}

impl LinkParams {
    pub fn new(length_km: f64, loss_db_per_km: f64, excess_noise: f64) -> Result<Self> {
        let link = LinkParams {
            length_km,
            loss_db_per_km,
            excess_noise,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length_km", self.length_km),
            ("loss_db_per_km", self.loss_db_per_km),
            ("excess_noise", self.excess_noise),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and ≥ 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub mode: DetectionMode,
    /// Quantum efficiency `η ∈ (0, 1]`.
    pub efficiency: f64,
    /// Electronic noise `ε_ele` in shot-noise units.
    pub electronic_noise: f64,
}

impl DetectorParams {
    pub fn new(mode: DetectionMode, efficiency: f64, electronic_noise: f64) -> Result<Self> {
        let det = DetectorParams {
            mode,
            efficiency,
            electronic_noise,
        };
        det.validate()?;
        Ok(det)
    }

    /// Unit efficiency, no electronic noise.
    pub fn ideal(mode: DetectionMode) -> Self {
        DetectorParams {
            mode,
            efficiency: 1.0,
            electronic_noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "efficiency {} outside (0, 1]",
                self.efficiency
            )));
        }
        if !(self.electronic_noise >= 0.0) || !self.electronic_noise.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "electronic noise {} must be finite and ≥ 0",
                self.electronic_noise
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub transmittance: f64,
    pub chi_line: f64,
    pub chi_det: f64,
    pub chi_total: f64,
    /// Variance `N` of the EPR pair modelling detector noise. Absent at unit
    /// efficiency, where the beamsplitter model degenerates.
    pub epr_variance: Option<f64>,
    pub mode: DetectionMode,
    pub efficiency: f64,
}

impl NoiseBudget {
    /// Variance the detector adds to Bob's mode after the beamsplitter,
    /// `(1 − η)N`, or its `η → 1` limit.
    pub fn detector_added_variance(&self) -> f64 {
        match self.mode {
            DetectionMode::Homodyne => self.efficiency * self.chi_det,
            DetectionMode::Heterodyne => self.efficiency * self.chi_det - 1.0,
        }
    }
}

/// `T = 10^{−μL/10}`.
pub fn transmittance(link: &LinkParams) -> f64 {
    10f64.powf(-link.loss_db_per_km * link.length_km / 10.0)
}

pub fn noise_budget(link: &LinkParams, det: &DetectorParams) -> Result<NoiseBudget> {
    link.validate()?;
    det.validate()?;
    let t = transmittance(link);
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transmittance underflows at {} km",
            link.length_km
        )));
    }
    let eta = det.efficiency;
    let chi_line = 1.0 / t - 1.0 + link.excess_noise;
    let chi_det = match det.mode {
        DetectionMode::Homodyne => ((1.0 - eta) + det.electronic_noise) / eta,
        DetectionMode::Heterodyne => (1.0 + (1.0 - eta) + 2.0 * det.electronic_noise) / eta,
    };
    let epr_variance = if eta < 1.0 {
        // ηχ_hom/(1 − η) and (ηχ_het − 1)/(1 − η), expanded to avoid cancellation
        let n = match det.mode {
            DetectionMode::Homodyne => 1.0 + det.electronic_noise / (1.0 - eta),
            DetectionMode::Heterodyne => 1.0 + 2.0 * det.electronic_noise / (1.0 - eta),
        };
        if !(n >= 1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "detector model needs EPR variance {n} ≥ 1"
            )));
        }
        Some(n.max(1.0))
    } else {
        None
    };
    Ok(NoiseBudget {
        transmittance: t,
        chi_line,
        chi_det,
        chi_total: chi_line + chi_det / t,
        epr_variance,
        mode: det.mode,
        efficiency: eta,
    })
}

/// Empirical x-quadrature statistics of Bob's measurement record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStats {
    /// Total variance of Bob's outcomes, `⟨x_B²⟩`.
    pub v_b: f64,
    /// `⟨x_B²⟩ − ⟨x_A x_B⟩²/⟨x_A²⟩`.
    pub v_b_given_a: f64,
    pub v_b_stderr: f64,
    pub v_b_given_a_stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Analytic `(V_B, V_{B|A})` in measured units: `ηT(V + χ_T)` and `ηT(1 + χ_T)`.
pub fn predicted_variances(scheme: &ModulationScheme, budget: &NoiseBudget) -> (f64, f64) {
    let gain = budget.efficiency * budget.transmittance;
    (
        gain * (scheme.variance() + budget.chi_total),
        gain * (1.0 + budget.chi_total),
    )
}

pub const MIN_SAMPLES: usize = 10_000;

/// Monte-Carlo prepare-and-measure run: Alice's displacement is drawn from the
/// constellation, Bob sees `√(ηT)·x_A` plus Gaussian noise of variance
/// `ηT(1 + χ_T)`. Deterministic for a given seed.
pub fn simulate_quadratures(
    scheme: &ModulationScheme,
    link: &LinkParams,
    det: &DetectorParams,
    n_samples: usize,
    seed: u64,
) -> Result<QuadratureStats> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let budget = noise_budget(link, det)?;
    let gain = budget.efficiency * budget.transmittance;
    let signal = gain.sqrt();
    let noise = (gain * (1.0 + budget.chi_total)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut xa = Vec::with_capacity(n_samples);
    let mut xb = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let a = match *scheme {
            ModulationScheme::Psk { n_states, alpha } => {
                let k = rng.random_range(0..n_states);
                2.0 * alpha * (2.0 * PI * k as f64 / n_states as f64).cos()
            }
            ModulationScheme::Gaussian { va } => va.sqrt() * rng.sample::<f64, _>(StandardNormal),
        };
        let n: f64 = rng.sample(StandardNormal);
        xa.push(a);
        xb.push(signal * a + noise * n);
    }

    let (v_b, v_b_stderr) = variance_with_stderr(&xb);
    let mean_a = mean(&xa);
    let mean_b = mean(&xb);
    let var_a = xa.iter().map(|a| (a - mean_a).powi(2)).sum::<f64>() / n_samples as f64;
    let cov = xa
        .iter()
        .zip(&xb)
        .map(|(a, b)| (a - mean_a) * (b - mean_b))
        .sum::<f64>()
        / n_samples as f64;
    let slope = if var_a > 0.0 { cov / var_a } else { 0.0 };
    let residual: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| b - slope * a).collect();
    let (v_b_given_a, v_b_given_a_stderr) = variance_with_stderr(&residual);

    Ok(QuadratureStats {
        v_b,
        v_b_given_a,
        v_b_stderr,
        v_b_given_a_stderr,
        n_samples,
        seed,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance and its standard error `√((m₄ − m₂²)/n)`.
fn variance_with_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mu = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d2 = (x - mu).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    (m2, ((m4 - m2 * m2) / n).max(0.0).sqrt())
}
