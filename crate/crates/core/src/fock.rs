//! Truncated Fock-space reconstruction of the PSK ensemble.
//!
//! Everything here is built explicitly from number-basis amplitudes: coherent
//! states, the equal-weight mixture, the residue-class states `|φ_k⟩`, the
//! purification `Σ_k √λ_k |φ_k⟩|φ_k⟩` and Alice's measurement basis. The
//! results serve as ground truth for the closed forms in
//! [`crate::modulation`]; none of this code sits on the sweep path.
//!
//! States are truncated at `n_max`. Every constructor checks at runtime that
//! the Poisson mass discarded by the cutoff is below [`TAIL_TOLERANCE`].

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest neglected probability mass accepted by the cutoff check.
pub const TAIL_TOLERANCE: f64 = 1e-15;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Smallest cutoff allowed for mean photon number `alpha2`:
/// `⌈α² + 10|α| + 20⌉`.
pub fn minimum_cutoff(alpha2: f64) -> usize {
    (alpha2 + 10.0 * alpha2.sqrt() + 20.0).ceil() as usize
}

/// `max(32, minimum_cutoff)`.
pub fn default_cutoff(alpha: f64) -> usize {
    minimum_cutoff(alpha * alpha).max(32)
}

/// Poisson mass above `n_max`, summed in log space.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact: f64 = (1..=n_max + 1).map(|j| (j as f64).ln()).sum();
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = (-mean + n as f64 * ln_mean - ln_fact).exp();
        tail += term;
        if (n as f64 > mean && term < 1e-30 * tail.max(1e-300)) || n > n_max + 10_000 {
            return tail;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
}

fn check_truncation(alpha2: f64, n_max: usize) -> Result<()> {
    let needed = minimum_cutoff(alpha2);
    if n_max < needed {
        return Err(Error::Truncation(format!(
            "cutoff {n_max} below the minimum {needed} for |α|² = {alpha2}"
        )));
    }
    let tail = poisson_tail(alpha2, n_max);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::Truncation(format!(
            "neglected mass {tail:e} at cutoff {n_max} for |α|² = {alpha2}"
        )));
    }
    Ok(())
}

/// Single-mode state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amplitudes: DVector<C64>,
}

impl FockState {
    pub fn basis(n: usize, n_max: usize) -> Self {
        let mut amplitudes = DVector::from_element(n_max + 1, ZERO);
        amplitudes[n] = C64::new(1.0, 0.0);
        FockState { amplitudes }
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn normalized(&self) -> FockState {
        FockState {
            amplitudes: self.amplitudes.unscale(self.norm()),
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Operator on the truncated single-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub entries: DMatrix<C64>,
    pub hermitian: bool,
}

impl FockOperator {
    pub fn n_max(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn apply(&self, state: &FockState) -> FockState {
        FockState {
            amplitudes: &self.entries * &state.amplitudes,
        }
    }

    /// Ascending eigenvalues and matching eigenvector columns of a Hermitian
    /// operator.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        if !self.hermitian {
            return Err(Error::Eigensolver("operator is not Hermitian".into()));
        }
        let eig = SymmetricEigen::try_new(self.entries.clone(), 1e-15, 10_000)
            .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }
}

/// Truncated annihilation operator `â|n⟩ = √n |n−1⟩`.
pub fn annihilation(n_max: usize) -> FockOperator {
    let mut entries = DMatrix::from_element(n_max + 1, n_max + 1, ZERO);
    for n in 1..=n_max {
        entries[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator {
        entries,
        hermitian: false,
    }
}

/// Two-mode pure state `Σ c_{mn} |m⟩|n⟩`, stored as the matrix `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    pub amplitudes: DMatrix<C64>,
}

impl TwoModeState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Reduced state of the first mode, `c c†`.
    pub fn reduced_first(&self) -> FockOperator {
        FockOperator {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            hermitian: true,
        }
    }

    /// Reduced state of the second mode, `cᵀ c̄`.
    pub fn reduced_second(&self) -> FockOperator {
        FockOperator {
            entries: self.amplitudes.transpose() * self.amplitudes.conjugate(),
            hermitian: true,
        }
    }

    /// Unnormalised second-mode state left after projecting the first mode
    /// onto `onto`; its squared norm is the outcome probability.
    pub fn project_first(&self, onto: &FockState) -> FockState {
        FockState {
            amplitudes: self.amplitudes.transpose() * onto.amplitudes.conjugate(),
        }
    }

    /// `⟨2â†â + 1⟩` on the first mode.
    pub fn first_quadrature_variance(&self) -> f64 {
        let mut n = 0.0;
        for (m, row) in self.amplitudes.row_iter().enumerate() {
            n += m as f64 * row.norm_squared();
        }
        2.0 * n + 1.0
    }

    /// `⟨2b̂†b̂ + 1⟩` on the second mode.
    pub fn second_quadrature_variance(&self) -> f64 {
        let mut n = 0.0;
        for (m, col) in self.amplitudes.column_iter().enumerate() {
            n += m as f64 * col.norm_squared();
        }
        2.0 * n + 1.0
    }
}

/// Coherent state `c_n = e^{−|β|²/2} βⁿ/√(n!)`.
pub fn coherent_fock(beta: C64, n_max: usize) -> Result<FockState> {
    let mean = beta.norm_sqr();
    check_truncation(mean, n_max)?;
    let mut amplitudes = DVector::from_element(n_max + 1, ZERO);
    let mut c = C64::new((-mean / 2.0).exp(), 0.0);
    amplitudes[0] = c;
    for n in 1..=n_max {
        c = c * beta / (n as f64).sqrt();
        amplitudes[n] = c;
    }
    Ok(FockState { amplitudes })
}

/// Equal-weight mixture of the `n_states` coherent states `|α e^{2πik/N}⟩`.
pub fn mixture_density(n_states: usize, alpha: f64, n_max: usize) -> Result<FockOperator> {
    check_states(n_states, alpha)?;
    let dim = n_max + 1;
    let mut entries = DMatrix::from_element(dim, dim, ZERO);
    let weight = 1.0 / n_states as f64;
    for k in 0..n_states {
        let beta = C64::from_polar(alpha, 2.0 * PI * k as f64 / n_states as f64);
        let psi = coherent_fock(beta, n_max)?.amplitudes;
        entries += (&psi * psi.adjoint()).scale(weight);
    }
    // exact Hermitian symmetry for the eigensolver
    let entries = (&entries + entries.adjoint()).scale(0.5);
    Ok(FockOperator {
        entries,
        hermitian: true,
    })
}

fn check_states(n_states: usize, alpha: f64) -> Result<()> {
    if n_states < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 states, got {n_states}"
        )));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "amplitude {alpha} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// The residue-class component of `|α⟩` before normalisation; its squared
/// norm is the ensemble eigenvalue `λ_k`. Coefficients use log-space
/// factorials so large Fock levels cannot overflow.
pub fn phi_state_unnormalized(
    k: usize,
    n_states: usize,
    alpha: f64,
    n_max: usize,
) -> Result<FockState> {
    check_states(n_states, alpha)?;
    if k >= n_states {
        return Err(Error::Domain(format!(
            "class {k} out of range 0..{n_states}"
        )));
    }
    check_truncation(alpha * alpha, n_max)?;
    let mut amplitudes = DVector::from_element(n_max + 1, ZERO);
    if alpha == 0.0 {
        if k == 0 {
            amplitudes[0] = C64::new(1.0, 0.0);
        }
        return Ok(FockState { amplitudes });
    }
    let ln_alpha = alpha.ln();
    let mut ln_fact = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        if n % n_states == k {
            let ln_c = -0.5 * alpha * alpha + n as f64 * ln_alpha - 0.5 * ln_fact;
            amplitudes[n] = C64::new(ln_c.exp(), 0.0);
        }
    }
    Ok(FockState { amplitudes })
}

/// Normalised `|φ_k⟩`, supported on Fock levels `≡ k (mod N)`. At `α = 0`
/// the class-`k` state tends to `|k⟩`.
pub fn phi_state(k: usize, n_states: usize, alpha: f64, n_max: usize) -> Result<FockState> {
    let raw = phi_state_unnormalized(k, n_states, alpha, n_max)?;
    let norm = raw.norm();
    if norm == 0.0 || !norm.is_normal() {
        return Ok(FockState::basis(k, n_max));
    }
    Ok(raw.normalized())
}

/// Purification `Σ_k √λ_k |φ_k⟩|φ_k⟩` of the `N`-state ensemble, with `λ_k`
/// taken from the squared norms of the class components.
pub fn purification(n_states: usize, alpha: f64, n_max: usize) -> Result<TwoModeState> {
    let dim = n_max + 1;
    let mut amplitudes = DMatrix::from_element(dim, dim, ZERO);
    for k in 0..n_states {
        let raw = phi_state_unnormalized(k, n_states, alpha, n_max)?;
        // √λ_k |φ_k⟩|φ_k⟩ = |raw⟩|raw⟩ / √λ_k
        let lambda = raw.amplitudes.norm_squared();
        if lambda == 0.0 {
            continue;
        }
        amplitudes += (&raw.amplitudes * raw.amplitudes.transpose()).unscale(lambda.sqrt());
    }
    Ok(TwoModeState { amplitudes })
}

/// Alice's measurement basis `|ψ_k⟩ = N^{−1/2} Σ_m e^{2πikm/N} |φ_m⟩`.
///
/// Projecting the first mode of the purification onto `|ψ_k⟩` leaves the
/// second mode in `|α e^{−2πik/N}⟩`; see [`paired_phase_index`].
pub fn psi_measurement_states(n_states: usize, alpha: f64, n_max: usize) -> Result<Vec<FockState>> {
    let phis = (0..n_states)
        .map(|m| phi_state(m, n_states, alpha, n_max))
        .collect::<Result<Vec<_>>>()?;
    let scale = 1.0 / (n_states as f64).sqrt();
    Ok((0..n_states)
        .map(|k| {
            let mut amplitudes = DVector::from_element(n_max + 1, ZERO);
            for (m, phi) in phis.iter().enumerate() {
                let phase = 2.0 * PI * ((k * m) % n_states) as f64 / n_states as f64;
                amplitudes += phi.amplitudes.scale(scale) * C64::from_polar(1.0, phase);
            }
            FockState { amplitudes }
        })
        .collect())
}

/// Phase index `j` of the coherent state `|α e^{2πij/N}⟩` heralded by `|ψ_k⟩`.
pub fn paired_phase_index(k: usize, n_states: usize) -> usize {
    (n_states - k % n_states) % n_states
}

/// The eight-state measurement basis evaluated literally as
/// `½ Σ_m e^{i(4k+1)mπ/4} |φ_m⟩`. Kept for diagnostics: this family is not
/// orthonormal (each vector has norm √2 and `k`, `k+2` coincide).
pub fn measurement_states_uncorrected(alpha: f64, n_max: usize) -> Result<Vec<FockState>> {
    let phis = (0..8)
        .map(|m| phi_state(m, 8, alpha, n_max))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..8)
        .map(|k| {
            let mut amplitudes = DVector::from_element(n_max + 1, ZERO);
            for (m, phi) in phis.iter().enumerate() {
                let phase = (4 * k + 1) as f64 * m as f64 * PI / 4.0;
                amplitudes += phi.amplitudes.scale(0.5) * C64::from_polar(1.0, phase);
            }
            FockState { amplitudes }
        })
        .collect())
}

/// `⟨ab + a†b†⟩ = 2 Re⟨Ψ|a⊗b|Ψ⟩`.
pub fn numeric_correlation(state: &TwoModeState) -> f64 {
    let n_max = state.amplitudes.nrows() - 1;
    let a = annihilation(n_max).entries;
    let lowered = &a * &state.amplitudes * a.transpose();
    2.0 * state.amplitudes.dotc(&lowered).re
}

/// Two-mode squeezed vacuum with single-mode variance `v`,
/// `c_nn = √(1 − τ²) τⁿ` with `τ² = (v − 1)/(v + 1)`.
pub fn two_mode_squeezed(v: f64, n_max: usize) -> Result<TwoModeState> {
    if !(v >= 1.0) {
        return Err(Error::Domain(format!("EPR variance {v} < 1")));
    }
    let tau2 = (v - 1.0) / (v + 1.0);
    let tail = tau2.powi(n_max as i32 + 1);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::Truncation(format!(
            "neglected mass {tail:e} at cutoff {n_max} for EPR variance {v}"
        )));
    }
    let tau = tau2.sqrt();
    let mut amplitudes = DMatrix::from_element(n_max + 1, n_max + 1, ZERO);
    let mut c = (1.0 - tau2).sqrt();
    for n in 0..=n_max {
        amplitudes[(n, n)] = C64::new(c, 0.0);
        c *= tau;
    }
    Ok(TwoModeState { amplitudes })
}

/// Eigenvalues of the mixture sorted into residue classes: class `k` takes
/// the eigenvalue whose eigenvector overlaps `|φ_k⟩` most.
pub fn class_eigenvalues(n_states: usize, alpha: f64, n_max: usize) -> Result<Vec<f64>> {
    let rho = mixture_density(n_states, alpha, n_max)?;
    let (values, vectors) = rho.hermitian_eigen()?;
    (0..n_states)
        .map(|k| {
            let phi = phi_state(k, n_states, alpha, n_max)?;
            let best = (0..values.len())
                .max_by(|&i, &j| {
                    let oi = vectors.column(i).dotc(&phi.amplitudes).norm_sqr();
                    let oj = vectors.column(j).dotc(&phi.amplitudes).norm_sqr();
                    oi.total_cmp(&oj)
                })
                .expect("non-empty spectrum");
            Ok(values[best])
        })
        .collect()
}
