use nalgebra::SymmetricEigen;

use super::{cr, CMatrix, CVector, C64};

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// Rebuild `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * cr(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of the Hermitian part of `m`, sorted by eigenvalue
/// descending. Each eigenvector is phase-fixed so that its first entry of
/// non-negligible magnitude is real and positive.
pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        fix_phase(&mut col);
        vectors.set_column(j, &col);
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues of the Hermitian part of `m`, in no particular order.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean + r, mean - r]
        }
        _ => SymmetricEigen::new(hermitian_part(m))
            .eigenvalues
            .iter()
            .copied()
            .collect(),
    }
}

/// Rotate `v` so that its first entry above 1e-12 in magnitude is real positive.
pub(crate) fn fix_phase(v: &mut CVector) -> C64 {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = 1e-12f64.max(scale * 1e-8);
    if let Some(z) = v.iter().find(|z| z.norm() > threshold).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
        phase
    } else {
        cr(1.0)
    }
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues from roundoff are clipped to zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    eigh(m).map(|v| v.max(0.0).sqrt())
}

/// `M^{-1/2}` on the support of `m` (eigenvalues above `cutoff`), zero on the kernel.
pub fn pinv_sqrt_psd(m: &CMatrix, cutoff: f64) -> CMatrix {
    eigh(m).map(|v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 })
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue above `cutoff`.
pub fn support_projector(m: &CMatrix, cutoff: f64) -> CMatrix {
    eigh(m).map(|v| if v > cutoff { 1.0 } else { 0.0 })
}

/// `max |U†U − I|` over entries.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitary_deviation(u) <= tol
}

/// Extend the orthonormal columns of `cols` to an orthonormal basis of
/// `C^dim`, trying the standard basis vectors in index order (modified
/// Gram-Schmidt, re-orthogonalised once). The given columns come first.
pub fn complete_orthonormal(cols: &CMatrix, dim: usize) -> CMatrix {
    assert_eq!(cols.nrows(), dim);
    let mut basis: Vec<CVector> = (0..cols.ncols())
        .map(|j| cols.column(j).into_owned())
        .collect();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[k] = cr(1.0);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / cr(norm));
        }
    }
    CMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn eigh_sorts_descending_and_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(0.25), c(0.1, -0.2), c(0.1, 0.2), cr(0.75)]);
        let e = eigh(&m);
        assert!(e.values[0] >= e.values[1]);
        let back = e.map(|v| v);
        assert!(max_abs(&(back - &m)) < 1e-14);
        assert!((e.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn completion_is_unitary() {
        let s = 1.0 / 2f64.sqrt();
        let cols = CMatrix::from_column_slice(3, 1, &[cr(s), cr(0.0), c(0.0, s)]);
        let u = complete_orthonormal(&cols, 3);
        assert!(unitary_deviation(&u) < 1e-12);
        assert_eq!(u.column(0), cols.column(0));
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(0.6), c(0.2, 0.1), c(0.2, -0.1), cr(0.4)]);
        let r = sqrt_psd(&m);
        assert!(max_abs(&(&r * &r - &m)) < 1e-13);
    }
}
