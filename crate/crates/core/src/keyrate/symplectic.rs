//! Symplectic eigenvalues.
//!
//! The two-mode spectrum has the closed form
//! `ν² = ½(Δ ± √(Δ² − 4D))` with `Δ = det a + det b + 2 det c` and
//! `D = det γ`. The general routine works for any number of modes: with
//! `γ = LLᵀ`, `Ωγ` is similar to the antisymmetric `K = LᵀΩL`, so the
//! symplectic eigenvalues are the square roots of the (pairwise degenerate)
//! eigenvalues of the symmetric matrix `KᵀK`. Degenerate spectra, such as
//! those of pure states, stay accurate to rounding.

use nalgebra::{Cholesky, SymmetricEigen};

use super::covariance::{symplectic_form, MultiModeCovariance, TwoModeCovariance};
use crate::error::{Error, Result};

/// Symplectic eigenvalues below `1 − NON_PHYSICAL_TOL` are rejected.
pub const NON_PHYSICAL_TOL: f64 = 1e-6;

/// `(ν₁, ν₂)` with `ν₁ ≥ ν₂`, from the two symplectic invariants.
pub fn symplectic_eigenvalues_2mode(gamma: &TwoModeCovariance) -> Result<[f64; 2]> {
    let delta = gamma.delta();
    let det = gamma.determinant();
    let disc = delta * delta - 4.0 * det;
    // a pure two-mode state has Δ² = 4D exactly
    let root = if disc < 0.0 && disc > -1e-12 * delta * delta {
        0.0
    } else if disc < 0.0 {
        return Err(Error::NonPhysical(format!(
            "complex symplectic spectrum: Δ² − 4D = {disc:e}"
        )));
    } else {
        disc.sqrt()
    };
    let hi = (0.5 * (delta + root)).sqrt();
    // ν₂ = √D / ν₁ avoids cancellation in Δ − √(Δ² − 4D)
    let lo = if hi > 0.0 {
        det.max(0.0).sqrt() / hi
    } else {
        0.0
    };
    if !(lo >= 1.0 - NON_PHYSICAL_TOL) {
        return Err(Error::NonPhysical(format!(
            "smallest symplectic eigenvalue {lo} < 1"
        )));
    }
    Ok([hi, lo])
}

/// Symplectic eigenvalues of an `n`-mode covariance matrix, descending.
pub fn symplectic_eigenvalues_general(gamma: &MultiModeCovariance) -> Result<Vec<f64>> {
    let n = gamma.n_modes();
    let chol = Cholesky::new(gamma.matrix.clone())
        .ok_or_else(|| Error::NonPhysical("covariance matrix is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * symplectic_form(n) * &l;
    let gram = k.transpose() * &k;
    let gram = (&gram + gram.transpose()).scale(0.5);
    let eig = SymmetricEigen::try_new(gram, 1e-16, 10_000)
        .ok_or_else(|| Error::Eigensolver("symmetric eigensolver did not converge".into()))?;
    let mut squares: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    squares.sort_by(|a, b| b.total_cmp(a));
    let nus: Vec<f64> = squares
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    debug_assert_eq!(nus.len(), n);
    Ok(nus)
}

/// Rejects spectra with a value below `1 − NON_PHYSICAL_TOL`.
pub fn check_physical(nus: &[f64]) -> Result<()> {
    match nus.iter().find(|&&nu| !(nu >= 1.0 - NON_PHYSICAL_TOL)) {
        Some(nu) => Err(Error::NonPhysical(format!(
            "symplectic eigenvalue {nu} violates the uncertainty principle"
        ))),
        None => Ok(()),
    }
}
