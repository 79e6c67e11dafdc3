//! Product-measurement tomography of bipartite states.
//!
//! Each side measures in the eigenbases of a Hermitian operator basis
//! (Paulis for qubits, generalized Gell-Mann matrices otherwise). A setting
//! is a pair of local bases and its outcomes are pairs of basis indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, CMatrix, CVector, DensityMatrix, SystemShape};

const SLICE_TOL: f64 = 1e-9;
const GRAM_CUTOFF: f64 = 1e-10;

/// Projective measurements on each side of `A ⊗ B`; every local setting is an
/// orthonormal basis given as the columns of a unitary.
#[derive(Debug, Clone)]
pub struct ProductMeasurementSet {
    pub a_settings: Vec<CMatrix>,
    pub b_settings: Vec<CMatrix>,
    dim_a: usize,
    dim_b: usize,
}

/// Outcome probabilities `table[sa][sb][a][b]` for settings `(sa, sb)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

fn unit(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = cr(1.0);
    v
}

/// Eigenbases of the generalized Gell-Mann matrices on `C^d`: for each pair
/// `j < k` the symmetric and antisymmetric off-diagonal operators, plus the
/// computational basis for the diagonal ones. For `d = 2` these are the
/// X, Y and Z bases.
pub fn gell_mann_bases(d: usize) -> Vec<CMatrix> {
    if d == 1 {
        return vec![CMatrix::identity(1, 1)];
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut bases = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            for phase in [cr(1.0), c(0.0, 1.0)] {
                let mut cols = vec![
                    (unit(d, j) + unit(d, k) * phase) * cr(s),
                    (unit(d, j) - unit(d, k) * phase) * cr(s),
                ];
                cols.extend((0..d).filter(|&i| i != j && i != k).map(|i| unit(d, i)));
                bases.push(CMatrix::from_columns(&cols));
            }
        }
    }
    bases.push(CMatrix::identity(d, d));
    bases
}

impl ProductMeasurementSet {
    pub fn new(a_settings: Vec<CMatrix>, b_settings: Vec<CMatrix>) -> Result<Self> {
        let dim_of = |s: &[CMatrix]| -> Result<usize> {
            let d = s
                .first()
                .ok_or_else(|| Error::InvalidArgument("no measurement settings".into()))?
                .nrows();
            for u in s {
                if u.nrows() != d || u.ncols() != d {
                    return Err(Error::InvalidShape(format!("setting is not {d}×{d}")));
                }
                let dev = crate::linalg::unitary_deviation(u);
                if dev > 1e-9 {
                    return Err(Error::NotOrthonormal(dev));
                }
            }
            Ok(d)
        };
        let dim_a = dim_of(&a_settings)?;
        let dim_b = dim_of(&b_settings)?;
        Ok(Self {
            a_settings,
            b_settings,
            dim_a,
            dim_b,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// Product effects `|a⟩⟨a| ⊗ |b⟩⟨b|` in the order of [`Statistics`] flattening.
    pub fn effects(&self) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for ua in &self.a_settings {
            for ub in &self.b_settings {
                for a in 0..self.dim_a {
                    let pa = ua.column(a) * ua.column(a).adjoint();
                    for b in 0..self.dim_b {
                        let pb = ub.column(b) * ub.column(b).adjoint();
                        out.push(pa.kronecker(&pb));
                    }
                }
            }
        }
        out
    }

    /// Linear map `vec(ρ) ↦ probabilities`, one row per effect, with
    /// `Tr(Eρ) = Σ_ij E_ji ρ_ij` and `ρ` flattened row-major.
    fn design(&self) -> CMatrix {
        let effects = self.effects();
        let n = self.dim_a * self.dim_b;
        CMatrix::from_fn(effects.len(), n * n, |row, col| {
            effects[row][(col % n, col / n)]
        })
    }

    /// Rank of the effect Gram matrix `G_ij = Tr(E_i E_j)`.
    pub fn gram_rank(&self) -> usize {
        let effects = self.effects();
        let m = effects.len();
        let gram = CMatrix::from_fn(m, m, |i, j| (&effects[i] * &effects[j]).trace());
        crate::linalg::eigh(&gram)
            .values
            .iter()
            .filter(|&&v| v > GRAM_CUTOFF)
            .count()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.dim_a * self.dim_b;
        self.gram_rank() == n * n
    }
}

/// Informationally complete product measurements for `d_a × d_b`.
pub fn ic_product_set(dim_a: usize, dim_b: usize) -> Result<ProductMeasurementSet> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    ProductMeasurementSet::new(gell_mann_bases(dim_a), gell_mann_bases(dim_b))
}

fn check_bipartite(rho: &DensityMatrix, ms: &ProductMeasurementSet) -> Result<()> {
    let dims = rho.shape().dims();
    if dims.len() != 2 {
        return Err(Error::InvalidShape(format!(
            "tomography needs two subsystems, got {}",
            rho.shape()
        )));
    }
    if (dims[0], dims[1]) != ms.dims() {
        return Err(Error::DimensionMismatch {
            expected: ms.dim_a * ms.dim_b,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Born-rule probabilities for every setting pair.
pub fn exact_statistics(rho: &DensityMatrix, ms: &ProductMeasurementSet) -> Result<Statistics> {
    check_bipartite(rho, ms)?;
    let table = ms
        .a_settings
        .iter()
        .map(|ua| {
            ms.b_settings
                .iter()
                .map(|ub| {
                    let u = ua.kronecker(ub);
                    let rotated = u.adjoint() * rho.matrix() * &u;
                    (0..ms.dim_a)
                        .map(|a| {
                            (0..ms.dim_b)
                                .map(|b| {
                                    let i = a * ms.dim_b + b;
                                    rotated[(i, i)].re
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(Statistics { table })
}

impl Statistics {
    fn flat(&self) -> Vec<f64> {
        self.table
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .copied()
            .collect()
    }

    /// Each setting pair's outcomes are nonnegative and sum to one within 1e-9.
    pub fn validate(&self) -> Result<()> {
        for slice in self.table.iter().flatten() {
            let sum: f64 = slice.iter().flatten().sum();
            if (sum - 1.0).abs() > SLICE_TOL {
                return Err(Error::InvalidProbability(format!(
                    "setting outcomes sum to {sum}"
                )));
            }
            if let Some(p) = slice.iter().flatten().find(|&&p| p < -SLICE_TOL) {
                return Err(Error::InvalidProbability(format!("probability {p}")));
            }
        }
        Ok(())
    }
}

/// Linear-inversion estimate from statistics generated by `ms`, Hermitized
/// but not projected onto positive matrices.
pub fn reconstruct(
    stats: &Statistics,
    ms: &ProductMeasurementSet,
    shape: SystemShape,
) -> Result<DensityMatrix> {
    let n = ms.dim_a * ms.dim_b;
    if shape.dims() != [ms.dim_a, ms.dim_b] {
        return Err(Error::InvalidShape(format!(
            "shape {shape} does not match the measurement set"
        )));
    }
    let rank = ms.gram_rank();
    if rank < n * n {
        return Err(Error::RankDeficient {
            rank,
            required: n * n,
        });
    }
    let probs = stats.flat();
    let design = ms.design();
    if probs.len() != design.nrows() {
        return Err(Error::DimensionMismatch {
            expected: design.nrows(),
            found: probs.len(),
        });
    }
    let pinv = design
        .svd(true, true)
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p = CVector::from_iterator(probs.len(), probs.iter().map(|&x| cr(x)));
    let v = pinv * p;
    let m = CMatrix::from_fn(n, n, |i, j| v[i * n + j]);
    let m = crate::linalg::hermitian_part(&m);
    Ok(DensityMatrix::from_computed(m, shape))
}

/// `max |p(a,b) − p(a)p(b)|` over settings and outcome pairs.
pub fn correlation_test(stats: &Statistics) -> f64 {
    let mut worst = 0.0f64;
    for slice in stats.table.iter().flatten() {
        let pa: Vec<f64> = slice.iter().map(|row| row.iter().sum()).collect();
        let nb = slice.first().map_or(0, Vec::len);
        let pb: Vec<f64> = (0..nb)
            .map(|b| slice.iter().map(|row| row[b]).sum())
            .collect();
        for (a, row) in slice.iter().enumerate() {
            for (b, &p) in row.iter().enumerate() {
                worst = worst.max((p - pa[a] * pb[b]).abs());
            }
        }
    }
    worst
}
