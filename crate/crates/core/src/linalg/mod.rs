//! Dense complex linear algebra over labeled tensor-product Hilbert spaces.
//!
//! States carry a [`SystemShape`] naming each tensor factor, so partial
//! traces, Schmidt cuts and channel applications are addressed by label
//! rather than by position. Storage is dense throughout; everything here is
//! intended for total dimensions of a few hundred at most.
//!
//! Entropies are measured in bits.

mod ops;
mod shape;
mod spectral;
mod state;

pub use ops::{
    binary_entropy, mutual_information, partial_trace, purify, schmidt, shannon_entropy,
    uhlmann_fidelity, vn_entropy, SchmidtDecomposition,
};
pub use shape::SystemShape;
pub use spectral::{
    complete_orthonormal, eigh, eigvalsh, hermitian_part, is_unitary, max_abs, pinv_sqrt_psd,
    sqrt_psd, support_projector, unitary_deviation, HermitianEigen,
};
pub use state::{DensityMatrix, PureState};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on Hermiticity, positivity, trace and norm when validating states.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues at or below this are treated as exact zeros in `λ log λ`.
pub const ENTROPY_CLIP: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product of two dense matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Trace of a square matrix.
pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}
