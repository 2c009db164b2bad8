//! Covariance matrices, Gaussian unitaries and Gaussian measurements.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)`. A symplectic matrix `S`
//! acts on a covariance matrix as `γ ↦ S γ Sᵀ`.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::channel::{DetectionMode, NoiseBudget};
use crate::error::{Error, Result};
use crate::modulation::SourceCovariance;

/// Largest asymmetry `|γ − γᵀ|` accepted before symmetrising.
pub const SYMMETRY_TOL: f64 = 1e-9;

fn sigma_z() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// Covariance matrix of Alice's mode and Bob's received mode,
/// `[[a, c], [cᵀ, b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    pub matrix: Matrix4<f64>,
}

impl TwoModeCovariance {
    pub fn from_blocks(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>) -> Self {
        let mut matrix = Matrix4::zeros();
        matrix.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        matrix.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
        matrix.fixed_view_mut::<2, 2>(0, 2).copy_from(&c);
        matrix
            .fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&c.transpose());
        TwoModeCovariance { matrix }
    }

    pub fn a(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn b(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn c(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `Δ = det a + det b + 2 det c`, the second symplectic invariant.
    pub fn delta(&self) -> f64 {
        self.a().determinant() + self.b().determinant() + 2.0 * self.c().determinant()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn to_multimode(&self) -> MultiModeCovariance {
        MultiModeCovariance {
            matrix: DMatrix::from_iterator(4, 4, self.matrix.iter().copied()),
            labels: vec!["A".into(), "B1".into()],
        }
    }
}

/// Symmetric `2n × 2n` covariance matrix with one label per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeCovariance {
    pub matrix: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl MultiModeCovariance {
    pub fn new(matrix: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::Domain(format!(
                "covariance matrix must be 2n×2n, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if labels.len() != matrix.nrows() / 2 {
            return Err(Error::Domain(format!(
                "{} labels for {} modes",
                labels.len(),
                matrix.nrows() / 2
            )));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * matrix.amax().max(1.0) {
            return Err(Error::Domain(format!("covariance asymmetry {asym:e}")));
        }
        let matrix = (&matrix + matrix.transpose()).scale(0.5);
        Ok(MultiModeCovariance { matrix, labels })
    }

    /// `n` uncorrelated vacuum modes.
    pub fn vacuum(labels: &[&str]) -> Self {
        MultiModeCovariance {
            matrix: DMatrix::identity(2 * labels.len(), 2 * labels.len()),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn direct_sum(&self, other: &MultiModeCovariance) -> MultiModeCovariance {
        let (n, m) = (self.matrix.nrows(), other.matrix.nrows());
        let mut matrix = DMatrix::zeros(n + m, n + m);
        matrix.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        matrix.view_mut((n, n), (m, m)).copy_from(&other.matrix);
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        MultiModeCovariance { matrix, labels }
    }

    /// `S γ Sᵀ`, keeping the symmetric part.
    pub fn transform(&self, symplectic: &DMatrix<f64>) -> MultiModeCovariance {
        let m = symplectic * &self.matrix * symplectic.transpose();
        MultiModeCovariance {
            matrix: (&m + m.transpose()).scale(0.5),
            labels: self.labels.clone(),
        }
    }

    /// Reorders (or selects) modes.
    pub fn select_modes(&self, order: &[usize]) -> MultiModeCovariance {
        let idx: Vec<usize> = order.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let matrix = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])]);
        let labels = order.iter().map(|&m| self.labels[m].clone()).collect();
        MultiModeCovariance { matrix, labels }
    }

    pub fn relabel(mut self, mode: usize, label: &str) -> Self {
        self.labels[mode] = label.to_string();
        self
    }

    /// Covariance of the remaining modes after measuring the last mode.
    ///
    /// Homodyne (x quadrature): `γ − C diag(1/γ_B[xx], 0) Cᵀ`, the
    /// Moore–Penrose inverse of the x-projected block written out directly.
    /// Heterodyne: `γ − C (γ_B + I)⁻¹ Cᵀ`.
    pub fn condition_on_last(&self, mode: DetectionMode) -> Result<MultiModeCovariance> {
        let n = self.matrix.nrows();
        if n < 4 {
            return Err(Error::Domain("need at least two modes to condition".into()));
        }
        let k = n - 2;
        let rest = self.matrix.view((0, 0), (k, k));
        let cross = self.matrix.view((0, k), (k, 2));
        let gamma_b = self.matrix.view((k, k), (2, 2)).into_owned();
        let gain = match mode {
            DetectionMode::Homodyne => {
                let xx = gamma_b[(0, 0)];
                if !(xx > 0.0) {
                    return Err(Error::NonPhysical(format!(
                        "measured x variance {xx} is not positive"
                    )));
                }
                DMatrix::from_row_slice(2, 2, &[1.0 / xx, 0.0, 0.0, 0.0])
            }
            DetectionMode::Heterodyne => (gamma_b + DMatrix::identity(2, 2))
                .try_inverse()
                .ok_or_else(|| Error::NonPhysical("γ_B + I is singular".into()))?,
        };
        let m = rest - &cross * gain * cross.transpose();
        Ok(MultiModeCovariance {
            matrix: (&m + m.transpose()).scale(0.5),
            labels: self.labels[..self.labels.len() - 1].to_vec(),
        })
    }
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]` on `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Two-mode squeezed vacuum of variance `n`, labelled `(F0, G)`.
pub fn epr_covariance(n: f64) -> Result<MultiModeCovariance> {
    if !(n >= 1.0) {
        return Err(Error::NonPhysical(format!("EPR variance {n} < 1")));
    }
    let c = (n * n - 1.0).sqrt();
    let gamma = TwoModeCovariance::from_blocks(
        Matrix2::identity() * n,
        Matrix2::identity() * n,
        sigma_z() * c,
    );
    Ok(gamma.to_multimode().relabel(0, "F0").relabel(1, "G"))
}

/// Beamsplitter of transmittance `eta` mixing modes `i` and `j`:
/// `(i, j) ↦ (√η i + √(1−η) j, −√(1−η) i + √η j)` on both quadratures.
pub fn beamsplitter(eta: f64, n_modes: usize, i: usize, j: usize) -> DMatrix<f64> {
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = t;
        s[(a, b)] = r;
        s[(b, a)] = -r;
        s[(b, b)] = t;
    }
    s
}

/// Adds `gain²` times the ancilla variances to both quadratures of `target`:
/// one QND gate `x_t += g x_f, p_f −= g p_t`, then `p_t += g p_g,
/// x_g −= g x_t`. With vacuum ancillas this is phase-insensitive Gaussian
/// noise on `target` whose purification stays in the ancillas.
pub fn qnd_noise_injection(
    gain: f64,
    n_modes: usize,
    target: usize,
    x_ancilla: usize,
    p_ancilla: usize,
) -> DMatrix<f64> {
    let (xt, pt) = (2 * target, 2 * target + 1);
    let (xf, pf) = (2 * x_ancilla, 2 * x_ancilla + 1);
    let (xg, pg) = (2 * p_ancilla, 2 * p_ancilla + 1);
    let dim = 2 * n_modes;

    let mut first = DMatrix::identity(dim, dim);
    first[(xt, xf)] = gain;
    first[(pf, pt)] = -gain;

    let mut second = DMatrix::identity(dim, dim);
    second[(pt, pg)] = gain;
    second[(xg, xt)] = -gain;

    second * first
}

/// `γ_AB₁ = [[V·I, √T·Z·σ_z], [√T·Z·σ_z, T(V + χ_line)·I]]`.
pub fn channel_output_covariance(
    src: &SourceCovariance,
    budget: &NoiseBudget,
) -> TwoModeCovariance {
    let t = budget.transmittance;
    TwoModeCovariance::from_blocks(
        Matrix2::identity() * src.x,
        Matrix2::identity() * (t * (src.y + budget.chi_line)),
        sigma_z() * (t.sqrt() * src.z),
    )
}

/// Below this detector loss `1 − η` the EPR variance `~1/(1 − η)` costs
/// more digits in the conditioning than it is worth.
pub const EPR_DILATION_MIN_LOSS: f64 = 1e-3;

/// Joint covariance of `(A, F, G, B)` just before Bob's measurement.
///
/// With `1 − η ≥ EPR_DILATION_MIN_LOSS`, Bob's mode `B₁` passes a
/// beamsplitter of transmittance `η` whose other port holds `F0` from an EPR
/// pair `(F0, G)` of variance `N`. Otherwise the detector noise `χ_det`
/// (less the heterodyne vacuum) is added to `B₁` with [`qnd_noise_injection`]
/// from vacuum ancillas. Both give Bob the same measurement on `B₁`, so the
/// conditional spectrum agrees; only the scale of `B` differs.
pub fn detector_covariance(
    src: &SourceCovariance,
    budget: &NoiseBudget,
) -> Result<MultiModeCovariance> {
    let gamma_ab = channel_output_covariance(src, budget).to_multimode();
    let dilation = budget
        .epr_variance
        .filter(|_| 1.0 - budget.efficiency >= EPR_DILATION_MIN_LOSS);
    let joint = match dilation {
        Some(n) => {
            let joint = gamma_ab.direct_sum(&epr_covariance(n)?);
            joint.transform(&beamsplitter(budget.efficiency, 4, 1, 2))
        }
        None => {
            // same POVM on B₁ as the beamsplitter model, in B₁ units
            let added = match budget.mode {
                DetectionMode::Homodyne => budget.chi_det,
                DetectionMode::Heterodyne => budget.chi_det - 1.0,
            };
            let joint = gamma_ab.direct_sum(&MultiModeCovariance::vacuum(&["F0", "G"]));
            joint.transform(&qnd_noise_injection(added.max(0.0).sqrt(), 4, 1, 2, 3))
        }
    };
    Ok(joint
        .relabel(1, "B")
        .relabel(2, "F")
        .select_modes(&[0, 2, 3, 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{noise_budget, DetectorParams, LinkParams};

    fn is_symplectic(s: &DMatrix<f64>) -> bool {
        let omega = symplectic_form(s.nrows() / 2);
        (s * &omega * s.transpose() - omega).amax() < 1e-14
    }

    #[test]
    fn gaussian_unitaries_are_symplectic() {
        for eta in [0.0, 0.3, 0.6, 1.0] {
            let s = beamsplitter(eta, 4, 1, 2);
            assert!(is_symplectic(&s));
            assert!((&s * s.transpose() - DMatrix::identity(8, 8)).amax() < 1e-15);
        }
        for g in [0.0, 0.2, 1.7] {
            assert!(is_symplectic(&qnd_noise_injection(g, 4, 1, 2, 3)));
        }
    }

    #[test]
    fn qnd_injection_adds_phase_insensitive_noise() {
        let g2: f64 = 0.3;
        let s = qnd_noise_injection(g2.sqrt(), 3, 0, 1, 2);
        let out = MultiModeCovariance::vacuum(&["B", "F", "G"]).transform(&s);
        assert!((out.matrix[(0, 0)] - (1.0 + g2)).abs() < 1e-15);
        assert!((out.matrix[(1, 1)] - (1.0 + g2)).abs() < 1e-15);
    }

    #[test]
    fn channel_output_blocks() {
        let link = LinkParams::new(50.0, 0.2, 0.005).unwrap();
        let det = DetectorParams::new(DetectionMode::Homodyne, 0.6, 0.05).unwrap();
        let budget = noise_budget(&link, &det).unwrap();
        let src = SourceCovariance {
            x: 2.0,
            y: 2.0,
            z: 3f64.sqrt(),
        };
        let g = channel_output_covariance(&src, &budget);
        assert_eq!(g.a(), Matrix2::identity() * 2.0);
        assert!((g.b() - Matrix2::identity() * 1.1005).amax() < 1e-12);
        let c = 0.1f64.sqrt() * 3f64.sqrt();
        assert!((g.c() - Matrix2::new(c, 0.0, 0.0, -c)).amax() < 1e-15);
    }

    #[test]
    fn rejects_malformed_matrices() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(MultiModeCovariance::new(m, vec!["A".into()]).is_err());
        assert!(MultiModeCovariance::new(DMatrix::identity(3, 3), vec!["A".into()]).is_err());
        assert!(MultiModeCovariance::new(DMatrix::identity(2, 2), vec![]).is_err());
        assert!(epr_covariance(0.5).is_err());
    }

    #[test]
    fn homodyne_conditioning_on_uncorrelated_mode_is_trivial() {
        let a = MultiModeCovariance::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 3.0])),
            vec!["A".into()],
        )
        .unwrap();
        let joint = a.direct_sum(&MultiModeCovariance::vacuum(&["B"]));
        for mode in [DetectionMode::Homodyne, DetectionMode::Heterodyne] {
            let cond = joint.condition_on_last(mode).unwrap();
            assert_eq!(cond.matrix, a.matrix);
            assert_eq!(cond.labels, vec!["A".to_string()]);
        }
    }

    #[test]
    fn detector_covariance_layout() {
        let link = LinkParams::new(20.0, 0.2, 0.01).unwrap();
        let det = DetectorParams::new(DetectionMode::Homodyne, 0.6, 0.05).unwrap();
        let budget = noise_budget(&link, &det).unwrap();
        let src = SourceCovariance {
            x: 2.0,
            y: 2.0,
            z: 1.7,
        };
        let joint = detector_covariance(&src, &budget).unwrap();
        assert_eq!(joint.labels, vec!["A", "F", "G", "B"]);
        // Bob's measured variance is η T (V + χ_T) in shot-noise units
        let t = budget.transmittance;
        let want = 0.6 * t * (2.0 + budget.chi_total);
        assert!((joint.matrix[(6, 6)] - want).abs() < 1e-12);
        assert!((joint.matrix[(7, 7)] - want).abs() < 1e-12);
    }
}
