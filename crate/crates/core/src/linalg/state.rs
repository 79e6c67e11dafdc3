use crate::error::{Error, Result};

use super::spectral::{eigh, hermitian_part, max_abs};
use super::{cr, CMatrix, CVector, SystemShape, STATE_TOL};

/// Unit vector on a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    shape: SystemShape,
}

impl PureState {
    pub fn new(amplitudes: CVector, shape: SystemShape) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.total_dim(),
                found: amplitudes.len(),
            });
        }
        let dev = (amplitudes.norm() - 1.0).abs();
        if dev > STATE_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { amplitudes, shape })
    }

    /// Normalize `amplitudes` and wrap them; fails on a zero vector.
    pub fn normalized(amplitudes: CVector, shape: SystemShape) -> Result<Self> {
        let n = amplitudes.norm();
        if n < 1e-300 {
            return Err(Error::NotNormalized(1.0));
        }
        Self::new(amplitudes / cr(n), shape)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(shape: SystemShape, index: usize) -> Result<Self> {
        let n = shape.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index,
            });
        }
        let mut v = CVector::zeros(n);
        v[index] = cr(1.0);
        Ok(Self {
            amplitudes: v,
            shape,
        })
    }

    pub(crate) fn from_computed(amplitudes: CVector, shape: SystemShape) -> Self {
        debug_assert_eq!(amplitudes.len(), shape.total_dim());
        Self { amplitudes, shape }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_computed(self.projector(), self.shape.clone())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let shape = self.shape.concat(&other.shape)?;
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            shape,
        })
    }

    /// Reorder the tensor factors to `order` (a permutation of the labels).
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        let perm = self.shape.order(order)?;
        let map = self.shape.permutation_map(&perm);
        let amplitudes = CVector::from_iterator(map.len(), map.iter().map(|&o| self.amplitudes[o]));
        Ok(Self {
            amplitudes,
            shape: self.shape.select(&perm),
        })
    }

    /// Rename a factor in place.
    pub fn relabel(&self, from: &str, to: &str) -> Result<PureState> {
        let pos = self.shape.index_of(from)?;
        Ok(Self {
            amplitudes: self.amplitudes.clone(),
            shape: self.shape.with_label(pos, to)?,
        })
    }

    /// Amplitudes reshaped as a `d_A × d_B` matrix across the cut `A | rest`,
    /// with `A` the factors at `positions` (in shape order).
    pub(crate) fn cut_matrix(&self, positions: &[usize]) -> CMatrix {
        let rest = self.shape.complement(positions);
        let mut perm = positions.to_vec();
        perm.extend_from_slice(&rest);
        let map = self.shape.permutation_map(&perm);
        let da: usize = positions.iter().map(|&p| self.shape.dims()[p]).product();
        let db = self.dim() / da;
        CMatrix::from_fn(da, db, |i, j| self.amplitudes[map[i * db + j]])
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    shape: SystemShape,
}

impl DensityMatrix {
    /// Validate and wrap. The stored matrix is the Hermitian part of `matrix`.
    pub fn new(matrix: CMatrix, shape: SystemShape) -> Result<Self> {
        let n = shape.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm_dev = max_abs(&(&matrix - matrix.adjoint()));
        if herm_dev > STATE_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        let matrix = hermitian_part(&matrix);
        let tr = matrix.trace();
        let tr_dev = (tr - cr(1.0)).norm();
        if tr_dev > STATE_TOL {
            return Err(Error::TraceViolation(tr_dev));
        }
        let min_eig = eigh(&matrix).values.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(Self { matrix, shape })
    }

    /// Wrap a matrix produced by a valid computation, taking its Hermitian part.
    pub(crate) fn from_computed(matrix: CMatrix, shape: SystemShape) -> Self {
        debug_assert_eq!(matrix.nrows(), shape.total_dim());
        Self {
            matrix: hermitian_part(&matrix),
            shape,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    /// `I / d`.
    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let n = shape.total_dim();
        Self {
            matrix: CMatrix::identity(n, n) * cr(1.0 / n as f64),
            shape,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        eigh(&self.matrix)
            .values
            .iter()
            .filter(|&&v| v > cutoff)
            .count()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let shape = self.shape.concat(&other.shape)?;
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            shape,
        })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityMatrix> {
        let perm = self.shape.order(order)?;
        let map = self.shape.permutation_map(&perm);
        let n = map.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self {
            matrix,
            shape: self.shape.select(&perm),
        })
    }

    /// The same operator viewed as a single factor named `label`.
    pub fn flatten(&self, label: &str) -> Result<DensityMatrix> {
        Ok(Self {
            matrix: self.matrix.clone(),
            shape: SystemShape::single(label, self.dim())?,
        })
    }

    /// `U ρ U†` with `U` acting on the whole space.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_computed(
            u * &self.matrix * u.adjoint(),
            self.shape.clone(),
        ))
    }

    /// Convex combination `Σ w_k ρ_k`; all states must share a shape.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<DensityMatrix> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.shape != first.shape {
                return Err(Error::InvalidShape(format!(
                    "mixture of {} and {}",
                    first.shape, s.shape
                )));
            }
            acc += s.matrix() * cr(*w);
        }
        DensityMatrix::new(acc, first.shape.clone())
    }

    /// Max-entry distance to another matrix of the same size.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}
