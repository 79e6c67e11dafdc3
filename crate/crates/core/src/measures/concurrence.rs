use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, eigh, sqrt_psd, DensityMatrix};

use crate::families::pauli_y;

fn check_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.shape().dims() != [2, 2] {
        return Err(Error::InvalidShape(format!(
            "two-qubit formula needs shape 2×2, got {}",
            rho.shape()
        )));
    }
    Ok(())
}

/// Two-qubit concurrence `max(0, λ₁−λ₂−λ₃−λ₄)`, where `λ_i` are the
/// decreasing square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubits(rho)?;
    let yy = pauli_y().kronecker(&pauli_y());
    let flipped = &yy * rho.matrix().conjugate() * &yy;
    let root = sqrt_psd(rho.matrix());
    let lam: Vec<f64> = eigh(&(&root * flipped * &root))
        .values
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation `h((1+√(1−C²))/2)`.
pub fn concurrence_eof_2q(rho: &DensityMatrix) -> Result<f64> {
    let conc = concurrence_2q(rho)?.min(1.0);
    Ok(binary_entropy((1.0 + (1.0 - conc * conc).sqrt()) / 2.0))
}
