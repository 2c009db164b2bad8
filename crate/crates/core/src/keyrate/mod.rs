//! Collective-attack key rate with reverse reconciliation,
//! `ΔI = β·I_AB − χ_BE`.
//!
//! Eve's Holevo information is `χ_BE = S(AB₁) − S(AFG | m_B)`. The first term
//! comes from the symplectic spectrum `(ν₁, ν₂)` of the channel output
//! covariance. The second comes from the spectrum `(ν₃, ν₄, ν₅)` of Alice's
//! and the detector modes conditioned on Bob's outcome. It can be computed
//! two ways:
//!
//! - [`SpectrumPath::ClosedForm`]: `ν₃,₄ = √(½(A ± √(A² − 4B)))`, `ν₅ = 1`.
//! - [`SpectrumPath::Matrix`]: explicit beamsplitter, conditioning and a
//!   general symplectic eigensolver.

pub mod covariance;
pub mod symplectic;

use crate::channel::{noise_budget, DetectionMode, DetectorParams, LinkParams, NoiseBudget};
use crate::error::{Error, Result};
use crate::modulation::{source_covariance, ModulationScheme, SourceCovariance};

pub use covariance::{
    channel_output_covariance, detector_covariance, MultiModeCovariance, TwoModeCovariance,
};
pub use symplectic::{symplectic_eigenvalues_2mode, symplectic_eigenvalues_general};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumPath {
    ClosedForm,
    Matrix,
}

impl SpectrumPath {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumPath::ClosedForm => "closed_form",
            SpectrumPath::Matrix => "matrix",
        }
    }
}

/// `G(x) = (x+1)log₂(x+1) − x log₂x`, with `G(0) = 0`.
pub fn holevo_g(x: f64) -> Result<f64> {
    if x < -1e-12 || x.is_nan() {
        return Err(Error::Domain(format!("G({x}) undefined for x < 0")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Von Neumann entropy of a thermal mode with symplectic eigenvalue `nu`.
pub fn thermal_entropy(nu: f64) -> Result<f64> {
    symplectic::check_physical(&[nu])?;
    holevo_g(((nu - 1.0) / 2.0).max(0.0))
}

/// `I_AB = ½ log₂((V + χ_T)/(1 + χ_T))`, doubled for heterodyne detection.
pub fn mutual_information(src: &SourceCovariance, budget: &NoiseBudget) -> f64 {
    let chi = budget.chi_total;
    let half = 0.5 * ((src.x + chi) / (1.0 + chi)).log2();
    match budget.mode {
        DetectionMode::Homodyne => half,
        DetectionMode::Heterodyne => 2.0 * half,
    }
}

fn pair_from_invariants(a: f64, b: f64) -> Result<[f64; 2]> {
    let disc = a * a - 4.0 * b;
    if disc < -1e-12 * a * a {
        return Err(Error::NonPhysical(format!(
            "negative discriminant A² − 4B = {disc:e}"
        )));
    }
    let hi = (0.5 * (a + disc.max(0.0).sqrt())).sqrt();
    let lo = if hi > 0.0 {
        b.max(0.0).sqrt() / hi
    } else {
        0.0
    };
    Ok([hi, lo])
}

/// `(A, B)` invariants of the conditional state for homodyne detection.
fn homodyne_invariants(src: &SourceCovariance, budget: &NoiseBudget) -> (f64, f64) {
    let gamma = channel_output_covariance(src, budget);
    let (delta, det) = (gamma.delta(), gamma.determinant());
    let sqrt_d = det.max(0.0).sqrt();
    let (v, t) = (src.x, budget.transmittance);
    let chi = budget.chi_det;
    let denom = t * (v + budget.chi_total);
    let a = (delta * chi + v * sqrt_d + t * (v + budget.chi_line)) / denom;
    let b = sqrt_d * (v + sqrt_d * chi) / denom;
    (a, b)
}

/// Heterodyne invariants with `χ_het` throughout and the correlation term
/// `2T·Z²`. These agree with the matrix path to rounding.
fn heterodyne_invariants(src: &SourceCovariance, budget: &NoiseBudget) -> (f64, f64) {
    let gamma = channel_output_covariance(src, budget);
    let (delta, det) = (gamma.delta(), gamma.determinant());
    let sqrt_d = det.max(0.0).sqrt();
    let (v, t, z) = (src.x, budget.transmittance, src.z);
    let chi = budget.chi_det;
    let denom = t * (v + budget.chi_total);
    let a = (delta * chi * chi
        + det
        + 1.0
        + 2.0 * chi * (v * sqrt_d + t * (v + budget.chi_line))
        + 2.0 * t * z * z)
        / (denom * denom);
    let b = ((v + sqrt_d * chi) / denom).powi(2);
    (a, b)
}

/// Conditional spectrum `(ν₃, ν₄, ν₅ = 1)` from the closed-form invariants.
pub fn conditional_spectrum_closed(
    src: &SourceCovariance,
    budget: &NoiseBudget,
) -> Result<[f64; 3]> {
    let (a, b) = match budget.mode {
        DetectionMode::Homodyne => homodyne_invariants(src, budget),
        DetectionMode::Heterodyne => heterodyne_invariants(src, budget),
    };
    let [hi, lo] = pair_from_invariants(a, b)?;
    Ok([hi, lo, 1.0])
}

/// Conditional spectrum from the explicit three-mode covariance matrix.
pub fn conditional_spectrum_matrix(
    src: &SourceCovariance,
    budget: &NoiseBudget,
) -> Result<[f64; 3]> {
    let joint = detector_covariance(src, budget)?;
    let conditioned = joint.condition_on_last(budget.mode)?;
    let nus = symplectic_eigenvalues_general(&conditioned)?;
    Ok([nus[0], nus[1], nus[2]])
}

/// The heterodyne `A` invariant evaluated with the homodyne noise `χ_hom`
/// inside the bracket and a linear `2T·Z` correlation term, next to the
/// corrected closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterodyneComparison {
    pub uncorrected_a: f64,
    pub uncorrected_b: f64,
    /// `A² − 4B` of the uncorrected form; negative means no real spectrum.
    pub uncorrected_discriminant: f64,
    pub uncorrected: Option<[f64; 2]>,
    pub corrected: [f64; 2],
}

pub fn heterodyne_comparison(
    src: &SourceCovariance,
    budget: &NoiseBudget,
    chi_hom: f64,
) -> Result<HeterodyneComparison> {
    let gamma = channel_output_covariance(src, budget);
    let (delta, det) = (gamma.delta(), gamma.determinant());
    let sqrt_d = det.max(0.0).sqrt();
    let (v, t, z) = (src.x, budget.transmittance, src.z);
    let denom = t * (v + budget.chi_total);
    let uncorrected_a = (delta * chi_hom * chi_hom
        + det
        + 1.0
        + 2.0 * chi_hom * (v * sqrt_d + t * (v + budget.chi_line) + 2.0 * t * z))
        / (denom * denom);
    let uncorrected_b = ((v + sqrt_d * budget.chi_det) / denom).powi(2);
    let uncorrected_discriminant = uncorrected_a * uncorrected_a - 4.0 * uncorrected_b;
    let (a, b) = heterodyne_invariants(src, budget);
    Ok(HeterodyneComparison {
        uncorrected_a,
        uncorrected_b,
        uncorrected_discriminant,
        uncorrected: pair_from_invariants(uncorrected_a, uncorrected_b).ok(),
        corrected: pair_from_invariants(a, b)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateReport {
    /// Bits per channel use.
    pub i_ab: f64,
    pub chi_be: f64,
    /// `β·I_AB − χ_BE`, possibly negative.
    pub delta_i: f64,
    pub delta_i_clamped: f64,
    pub nu_channel: [f64; 2],
    pub nu_conditional: [f64; 3],
    pub path: SpectrumPath,
    /// Closed-form conditional spectrum, recorded when `path` is `Matrix`.
    pub closed_form_audit: Option<[f64; 3]>,
    pub beta: f64,
    pub scheme: ModulationScheme,
    pub link: LinkParams,
    pub detector: DetectorParams,
    pub source: SourceCovariance,
    pub budget: NoiseBudget,
}

impl KeyRateReport {
    pub fn all_symplectic(&self) -> [f64; 5] {
        let [a, b] = self.nu_channel;
        let [c, d, e] = self.nu_conditional;
        [a, b, c, d, e]
    }
}

/// Holevo bound from the two spectra.
pub fn holevo_bound(nu_channel: &[f64; 2], nu_conditional: &[f64; 3]) -> Result<f64> {
    let mut chi = 0.0;
    for &nu in nu_channel {
        chi += thermal_entropy(nu)?;
    }
    for &nu in nu_conditional {
        chi -= thermal_entropy(nu)?;
    }
    Ok(chi)
}

pub fn secret_key_rate(
    scheme: &ModulationScheme,
    link: &LinkParams,
    detector: &DetectorParams,
    beta: f64,
    path: SpectrumPath,
) -> Result<KeyRateReport> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "reconciliation efficiency {beta} outside [0, 1]"
        )));
    }
    let source = source_covariance(scheme)?;
    let budget = noise_budget(link, detector)?;
    let gamma = channel_output_covariance(&source, &budget);

    let (nu_channel, nu_conditional, closed_form_audit) = match path {
        SpectrumPath::ClosedForm => (
            symplectic_eigenvalues_2mode(&gamma)?,
            conditional_spectrum_closed(&source, &budget)?,
            None,
        ),
        SpectrumPath::Matrix => {
            let nus = symplectic_eigenvalues_general(&gamma.to_multimode())?;
            (
                [nus[0], nus[1]],
                conditional_spectrum_matrix(&source, &budget)?,
                conditional_spectrum_closed(&source, &budget).ok(),
            )
        }
    };
    symplectic::check_physical(&nu_channel)?;
    symplectic::check_physical(&nu_conditional)?;

    let i_ab = mutual_information(&source, &budget);
    let chi_be = holevo_bound(&nu_channel, &nu_conditional)?;
    let delta_i = beta * i_ab - chi_be;
    Ok(KeyRateReport {
        i_ab,
        chi_be,
        delta_i,
        delta_i_clamped: delta_i.max(0.0),
        nu_channel,
        nu_conditional,
        path,
        closed_form_audit,
        beta,
        scheme: *scheme,
        link: *link,
        detector: *detector,
        source,
        budget,
    })
}
