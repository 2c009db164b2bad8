//! PSK ensemble spectrum and source covariance entries.
//!
//! Alice draws one of `N` coherent states `|α e^{2πik/N}⟩` with equal
//! probability. The ensemble state is diagonal in the basis of states supported
//! on Fock levels `≡ k (mod N)`, and its eigenvalue on class `k` is the Poisson
//! mass of that residue class. The entanglement-based picture purifies the
//! ensemble into a two-mode state whose covariance matrix is
//!
//! ```text
//!     [ X·I₂   Z·σ_z ]
//!     [ Z·σ_z  Y·I₂  ]      σ_z = diag(1, −1)
//! ```
//!
//! with `X = Y = 1 + V_A` and a correlation `Z` that is strictly smaller than
//! the Gaussian value `√(V² − 1)`.

use crate::error::{Error, Result};

/// Relative size of the next Poisson term at which a residue-class sum stops.
const SERIES_REL_TOL: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulationScheme {
    /// `n_states` coherent states of amplitude `alpha` on a circle.
    Psk { n_states: usize, alpha: f64 },
    /// Gaussian-modulated coherent states of variance `va`.
    Gaussian { va: f64 },
}

impl ModulationScheme {
    pub fn psk(n_states: usize, alpha: f64) -> Result<Self> {
        check_psk(n_states, alpha)?;
        Ok(ModulationScheme::Psk { n_states, alpha })
    }

    /// PSK constellation with the amplitude chosen so that `V_A = 2α²`.
    pub fn psk_with_variance(n_states: usize, va: f64) -> Result<Self> {
        if !(va >= 0.0) {
            return Err(Error::Domain(format!("modulation variance {va} < 0")));
        }
        Self::psk(n_states, (va / 2.0).sqrt())
    }

    pub fn gaussian(va: f64) -> Result<Self> {
        if !(va >= 0.0) {
            return Err(Error::Domain(format!("modulation variance {va} < 0")));
        }
        Ok(ModulationScheme::Gaussian { va })
    }

    /// Modulation variance `V_A` in shot-noise units.
    pub fn modulation_variance(&self) -> f64 {
        match *self {
            ModulationScheme::Psk { alpha, .. } => 2.0 * alpha * alpha,
            ModulationScheme::Gaussian { va } => va,
        }
    }

    /// Total quadrature variance `V = V_A + 1` of Alice's mode.
    pub fn variance(&self) -> f64 {
        self.modulation_variance() + 1.0
    }
}

/// Eigenvalues `λ₀..λ_{N−1}` of the `N`-state PSK ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct PskSpectrum {
    pub lambdas: Vec<f64>,
    pub alpha: f64,
    pub n_states: usize,
}

impl PskSpectrum {
    pub fn trace(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// `λ_k` with a cyclic index, so `get(-1)` is `λ_{N−1}`.
    pub fn get(&self, k: isize) -> f64 {
        let n = self.n_states as isize;
        self.lambdas[k.rem_euclid(n) as usize]
    }
}

/// Entries of the two-mode source covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCovariance {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SourceCovariance {
    /// `X² − Z² ≥ 1` up to `tol`; equality holds for the Gaussian purification.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.x * self.y - self.z * self.z >= 1.0 - tol
    }
}

fn check_psk(n_states: usize, alpha: f64) -> Result<()> {
    if n_states < 2 {
        return Err(Error::Domain(format!(
            "PSK needs at least 2 states, got {n_states}"
        )));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "amplitude {alpha} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// Residue-class Poisson sums `λ_k = e^{−α²} Σ_n α^{2(Nn+k)} / (Nn+k)!`.
pub fn psk_eigenvalues(n_states: usize, alpha: f64) -> Result<PskSpectrum> {
    check_psk(n_states, alpha)?;
    let a2 = alpha * alpha;
    let mut lambdas = vec![0.0; n_states];
    if a2 == 0.0 {
        lambdas[0] = 1.0;
        return Ok(PskSpectrum {
            lambdas,
            alpha,
            n_states,
        });
    }

    // e^{−a2} a2^k / k! for the first member of each class.
    let mut first = (-a2).exp();
    for (k, lambda) in lambdas.iter_mut().enumerate() {
        if k > 0 {
            first *= a2 / k as f64;
        }
        let mut term = first;
        let mut n = k;
        let mut sum = 0.0;
        loop {
            sum += term;
            for j in 1..=n_states {
                term *= a2 / (n + j) as f64;
            }
            n += n_states;
            if term < SERIES_REL_TOL * sum || term == 0.0 {
                break;
            }
        }
        *lambda = sum;
    }
    Ok(PskSpectrum {
        lambdas,
        alpha,
        n_states,
    })
}

/// The eight-state spectrum from its trigonometric/hyperbolic closed form.
pub fn psk8_eigenvalues_closed(alpha: f64) -> Result<PskSpectrum> {
    check_psk(8, alpha)?;
    let a = alpha * alpha;
    let b = a / std::f64::consts::SQRT_2;
    let s2 = std::f64::consts::SQRT_2;
    let pre = 0.25 * (-a).exp();
    let (ch, sh, c, s) = (a.cosh(), a.sinh(), a.cos(), a.sin());
    let (chb, shb, cb, sb) = (b.cosh(), b.sinh(), b.cos(), b.sin());

    let even0 = ch + c;
    let even2 = ch - c;
    let odd1 = sh + s;
    let odd3 = sh - s;
    let lambdas = vec![
        pre * (even0 + 2.0 * cb * chb),
        pre * (odd1 + s2 * cb * shb + s2 * sb * chb),
        pre * (even2 + 2.0 * sb * shb),
        pre * (odd3 - s2 * cb * shb + s2 * sb * chb),
        pre * (even0 - 2.0 * cb * chb),
        pre * (odd1 - s2 * cb * shb - s2 * sb * chb),
        pre * (even2 - 2.0 * sb * shb),
        pre * (odd3 + s2 * cb * shb - s2 * sb * chb),
    ];
    Ok(PskSpectrum {
        lambdas,
        alpha,
        n_states: 8,
    })
}

/// Correlation `Z_N = 2α² Σ_k λ_{k−1}^{3/2} / λ_k^{1/2}` of the purified
/// PSK ensemble. Vanishes at `α = 0` by continuity.
pub fn correlation_z(n_states: usize, alpha: f64) -> Result<f64> {
    let spectrum = psk_eigenvalues(n_states, alpha)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = (0..n_states as isize)
        .map(|k| {
            let (prev, cur) = (spectrum.get(k - 1), spectrum.get(k));
            // an underflowed class contributes its vanishing limit
            if cur == 0.0 {
                0.0
            } else {
                prev.powf(1.5) / cur.sqrt()
            }
        })
        .sum();
    Ok(2.0 * alpha * alpha * sum)
}

/// Gaussian-modulation correlation `Z_G = √(V² − 1)` with `V = V_A + 1`.
pub fn gaussian_correlation(va: f64) -> f64 {
    (va * (va + 2.0)).sqrt()
}

pub fn source_covariance(scheme: &ModulationScheme) -> Result<SourceCovariance> {
    let v = scheme.variance();
    let z = match *scheme {
        ModulationScheme::Psk { n_states, alpha } => correlation_z(n_states, alpha)?,
        ModulationScheme::Gaussian { va } => gaussian_correlation(va),
    };
    Ok(SourceCovariance { x: v, y: v, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    // High-precision residue-class sums (40 digits) for α² = 0.5.
    const LAMBDA8_HALF: [f64; 8] = [
        0.606_530_718_474_051_8,
        0.303_265_333_120_840_0,
        0.075_816_332_627_305_34,
        0.012_636_055_418_099_234,
        0.001_579_506_926_644_123_3,
        0.000_157_950_692_645_388_31,
        1.316_255_771_988_283_4e-5,
        9.401_826_942_611_684e-7,
    ];

    #[test]
    fn vacuum_spectrum() {
        let s = psk_eigenvalues(8, 0.0).unwrap();
        assert_eq!(s.lambdas, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let c = psk8_eigenvalues_closed(0.0).unwrap();
        assert!((c.lambdas[0] - 1.0).abs() < 1e-15);
        assert!(c.lambdas[1..].iter().all(|l| l.abs() < 1e-15));
    }

    #[test]
    fn eight_state_half_photon() {
        let s = psk_eigenvalues(8, SQRT_HALF).unwrap();
        for (got, want) in s.lambdas.iter().zip(LAMBDA8_HALF) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        let c = psk8_eigenvalues_closed(SQRT_HALF).unwrap();
        for (got, want) in c.lambdas.iter().zip(&s.lambdas) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn four_state_unit_amplitude() {
        let s = psk_eigenvalues(4, 1.0).unwrap();
        let want = [
            0.383_216_875_982_359_64,
            0.370_946_117_017_402_93,
            0.184_450_765_635_946_7,
            0.061_386_241_364_290_728,
        ];
        for (got, want) in s.lambdas.iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((s.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_trace_at_two() {
        let c = psk8_eigenvalues_closed(2f64.sqrt()).unwrap();
        assert!((c.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(psk_eigenvalues(8, -0.1), Err(Error::Domain(_))));
        assert!(matches!(psk_eigenvalues(1, 0.5), Err(Error::Domain(_))));
        assert!(psk_eigenvalues(8, f64::NAN).is_err());
        assert!(ModulationScheme::gaussian(-1.0).is_err());
    }

    #[test]
    fn correlation_values() {
        assert_eq!(correlation_z(8, 0.0).unwrap(), 0.0);
        let z8 = correlation_z(8, SQRT_HALF).unwrap();
        let z4 = correlation_z(4, SQRT_HALF).unwrap();
        assert!((z8 - 1.691_337_412_671_724_1).abs() < 1e-13);
        assert!((z4 - 1.655_419_036_161_175_5).abs() < 1e-13);
        assert!(z4 < z8 && z8 < gaussian_correlation(1.0));
    }

    #[test]
    fn gaussian_correlation_values() {
        assert_eq!(gaussian_correlation(0.0), 0.0);
        assert!((gaussian_correlation(1.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((gaussian_correlation(3.0) - 15f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn source_covariance_entries() {
        let g = source_covariance(&ModulationScheme::gaussian(1.0).unwrap()).unwrap();
        assert_eq!((g.x, g.y), (2.0, 2.0));
        assert!((g.z - 3f64.sqrt()).abs() < 1e-15);

        let vac = source_covariance(&ModulationScheme::psk(8, 0.0).unwrap()).unwrap();
        assert_eq!((vac.x, vac.y, vac.z), (1.0, 1.0, 0.0));

        let p = source_covariance(&ModulationScheme::psk_with_variance(8, 1.0).unwrap()).unwrap();
        assert!((p.x - 2.0).abs() < 1e-15 && (p.y - 2.0).abs() < 1e-15);
        assert!((p.z - 1.691_337_412_671_724_1).abs() < 1e-13);
    }

    #[test]
    fn tiny_amplitude_has_no_nan() {
        for alpha in [1e-3, 1e-8, 1e-40, 1e-160] {
            let z = correlation_z(8, alpha).unwrap();
            assert!(z.is_finite() && z >= 0.0, "alpha={alpha}: {z}");
        }
    }

    proptest! {
        #[test]
        fn trace_is_one(alpha in 0.0f64..3.0, four in any::<bool>()) {
            let n = if four { 4 } else { 8 };
            let s = psk_eigenvalues(n, alpha).unwrap();
            prop_assert!((s.trace() - 1.0).abs() < 1e-12);
            prop_assert!(s.lambdas.iter().all(|&l| l >= 0.0));
            if alpha > 0.0 {
                prop_assert!(s.lambdas.iter().all(|&l| l > 0.0));
            }
        }

        #[test]
        fn closed_form_matches_series(a2 in 0.0f64..4.0) {
            let alpha = a2.sqrt();
            let c = psk8_eigenvalues_closed(alpha).unwrap();
            let s = psk_eigenvalues(8, alpha).unwrap();
            for (x, y) in c.lambdas.iter().zip(&s.lambdas) {
                prop_assert!((x - y).abs() < 1e-11, "a2={}: {} vs {}", a2, x, y);
            }
        }

        #[test]
        fn correlation_ordering(va in 0.01f64..3.0) {
            let alpha = (va / 2.0).sqrt();
            let z4 = correlation_z(4, alpha).unwrap();
            let z8 = correlation_z(8, alpha).unwrap();
            prop_assert!(0.0 < z4 && z4 < z8 && z8 < gaussian_correlation(va));
        }

        #[test]
        fn physical_for_every_scheme(va in 0.0f64..4.0, which in 0usize..3) {
            let scheme = match which {
                0 => ModulationScheme::psk_with_variance(4, va).unwrap(),
                1 => ModulationScheme::psk_with_variance(8, va).unwrap(),
                _ => ModulationScheme::gaussian(va).unwrap(),
            };
            let src = source_covariance(&scheme).unwrap();
            prop_assert!(src.is_physical(1e-10));
            prop_assert!((src.x - 1.0 - va).abs() < 1e-12);
        }

        #[test]
        fn correlation_increases_with_amplitude(a in 0.0f64..1.40, da in 1e-3f64..0.01) {
            for n in [4, 8] {
                prop_assert!(correlation_z(n, a + da).unwrap() > correlation_z(n, a).unwrap());
            }
        }
    }
}
