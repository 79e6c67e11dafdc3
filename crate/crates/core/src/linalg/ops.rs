use nalgebra::SVD;

use crate::error::{Error, Result};

use super::spectral::{eigh, fix_phase, sqrt_psd};
use super::{cr, CMatrix, CVector, DensityMatrix, PureState, SystemShape, ENTROPY_CLIP};

/// Reduced state on the factors named in `keep`, in the original label order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "partial trace must keep at least one subsystem".into(),
        ));
    }
    let shape = rho.shape();
    let kept = shape.positions(keep)?;
    let traced = shape.complement(&kept);
    let mut perm = kept.clone();
    perm.extend_from_slice(&traced);
    let map = shape.permutation_map(&perm);
    let dk: usize = kept.iter().map(|&p| shape.dims()[p]).product();
    let dt = rho.dim() / dk;
    let m = rho.matrix();
    let out = CMatrix::from_fn(dk, dk, |i, j| {
        (0..dt).fold(cr(0.0), |acc, t| {
            acc + m[(map[i * dt + t], map[j * dt + t])]
        })
    });
    Ok(DensityMatrix::from_computed(out, shape.select(&kept)))
}

/// `-Σ λ log₂ λ` over a spectrum, dropping eigenvalues at or below the clip threshold.
pub(crate) fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > ENTROPY_CLIP)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Von Neumann entropy of a Hermitian PSD matrix, in bits.
pub(crate) fn matrix_entropy(m: &CMatrix) -> f64 {
    spectrum_entropy(&eigh(m).values)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `h(p) = -p log₂ p - (1-p) log₂ (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Shannon entropy in bits. Entries down to −1e-12 are clipped to zero and
/// the vector renormalized; the sum must be 1 within 1e-9.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(bad) = p.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::InvalidProbability(format!("entry {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("sum {sum}")));
    }
    let clipped: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    Ok(clipped
        .iter()
        .map(|&x| x / total)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum())
}

/// Schmidt decomposition `Σ_i c_i |l_i⟩ ⊗ |r_i⟩` across a bipartition.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Nonincreasing, strictly positive.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<CVector>,
    pub right_basis: Vec<CVector>,
    pub left_shape: SystemShape,
    pub right_shape: SystemShape,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// The state rebuilt on `left_shape ⊗ right_shape`.
    pub fn reconstruct(&self) -> PureState {
        let shape = self
            .left_shape
            .concat(&self.right_shape)
            .expect("cut shapes are disjoint");
        let mut v = CVector::zeros(shape.total_dim());
        for ((c, l), r) in self
            .coefficients
            .iter()
            .zip(&self.left_basis)
            .zip(&self.right_basis)
        {
            v += l.kronecker(r) * cr(*c);
        }
        PureState::from_computed(v, shape)
    }
}

/// Schmidt decomposition of `psi` across `cut | rest`.
///
/// Coefficients are sorted nonincreasing and those below 1e-14 dropped. Each
/// left vector has its first significant amplitude real and positive, the
/// phase being absorbed by the matching right vector.
pub fn schmidt<S: AsRef<str>>(psi: &PureState, cut: &[S]) -> Result<SchmidtDecomposition> {
    let shape = psi.shape();
    let left = shape.positions(cut)?;
    if left.is_empty() || left.len() == shape.len() {
        return Err(Error::InvalidArgument(
            "schmidt cut must be a nonempty proper subset".into(),
        ));
    }
    let right = shape.complement(&left);
    let m = psi.cut_matrix(&left);
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut coefficients = Vec::new();
    let mut left_basis = Vec::new();
    let mut right_basis = Vec::new();
    for i in order {
        let s = svd.singular_values[i];
        if s < 1e-14 {
            continue;
        }
        let mut l = u.column(i).into_owned();
        let mut r = v_t.row(i).transpose();
        let phase = fix_phase(&mut l);
        r *= phase.conj();
        coefficients.push(s);
        left_basis.push(l);
        right_basis.push(r);
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis,
        right_basis,
        left_shape: shape.select(&left),
        right_shape: shape.select(&right),
    })
}

/// Eigen-purification `Σ_i √λ_i |v_i⟩ ⊗ |i⟩` with the environment appended
/// last; its dimension is the rank of `rho`.
pub fn purify(rho: &DensityMatrix, env_label: &str) -> Result<PureState> {
    let eig = eigh(rho.matrix());
    let kept: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > ENTROPY_CLIP)
        .collect();
    let rank = kept.len().max(1);
    let env = SystemShape::single(env_label, rank)?;
    let shape = rho.shape().concat(&env)?;
    let d = rho.dim();
    let mut v = CVector::zeros(d * rank);
    let total: f64 = kept.iter().map(|&i| eig.values[i]).sum();
    for (k, &i) in kept.iter().enumerate() {
        let amp = (eig.values[i] / total).sqrt();
        for a in 0..d {
            v[a * rank + k] = eig.vectors[(a, i)] * amp;
        }
    }
    PureState::new(v, shape)
}

/// `(Tr √(√ρ σ √ρ))²`, clamped to [0, 1].
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let root = sqrt_psd(rho.matrix());
    let inner = &root * sigma.matrix() * &root;
    let tr: f64 = eigh(&inner).values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `S(A) + S(B) − S(AB)` for `A = cut`, `B` = the remaining factors.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityMatrix, cut: &[S]) -> Result<f64> {
    let shape = rho.shape();
    let a = shape.positions(cut)?;
    if a.is_empty() || a.len() == shape.len() {
        return Err(Error::InvalidArgument(
            "mutual information cut must be a nonempty proper subset".into(),
        ));
    }
    let b = shape.complement(&a);
    let labels_a: Vec<&str> = a.iter().map(|&i| shape.labels()[i].as_str()).collect();
    let labels_b: Vec<&str> = b.iter().map(|&i| shape.labels()[i].as_str()).collect();
    let sa = vn_entropy(&partial_trace(rho, &labels_a)?);
    let sb = vn_entropy(&partial_trace(rho, &labels_b)?);
    Ok(sa + sb - vn_entropy(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};

    fn bell() -> PureState {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(
            CVector::from_vec(vec![cr(s), cr(0.0), cr(0.0), cr(s)]),
            SystemShape::new(vec![2, 2], vec!["R", "Q"]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().to_density();
        let q = partial_trace(&rho, &["Q"]).unwrap();
        assert!(max_abs(&(q.matrix() - CMatrix::identity(2, 2) * cr(0.5))) < 1e-15);
        assert!(matches!(
            partial_trace(&rho, &["X"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn entropy_values() {
        assert!(vn_entropy(&bell().to_density()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(SystemShape::single("A", 2).unwrap());
        assert!((vn_entropy(&mixed) - 1.0).abs() < 1e-12);
        let diag = DensityMatrix::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.25), cr(0.75)])),
            SystemShape::single("A", 2).unwrap(),
        )
        .unwrap();
        // h(0.25) evaluated independently
        let h = -(0.25f64 * 0.25f64.log2()) - 0.75 * 0.75f64.log2();
        assert!((vn_entropy(&diag) - h).abs() < 1e-12);
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn shannon_values_and_errors() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((shannon_entropy(&[0.1, 0.9]).unwrap() - 0.468_995_593_589_281_2).abs() < 1e-12);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[1.1, -0.1]).is_err());
        assert!(shannon_entropy(&[1.0 + 1e-13, -1e-13]).is_ok());
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let d = schmidt(&bell(), &["R"]).unwrap();
        assert_eq!(d.rank(), 2);
        for c in &d.coefficients {
            assert!((c - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        }
        let shape = SystemShape::new(vec![2, 2], vec!["R", "Q"]).unwrap();
        let prod = PureState::basis(shape, 1).unwrap();
        let d = schmidt(&prod, &["R"]).unwrap();
        assert_eq!(d.coefficients.len(), 1);
        assert!((d.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(schmidt(&prod, &["R", "Q"]).is_err());
    }

    #[test]
    fn purify_maximally_mixed_gives_bell_type() {
        let mixed = DensityMatrix::maximally_mixed(SystemShape::single("Q", 2).unwrap());
        let psi = purify(&mixed, "E").unwrap();
        assert_eq!(psi.shape().dims(), &[2, 2]);
        let back = partial_trace(&psi.to_density(), &["Q"]).unwrap();
        assert!(back.distance(&mixed) < 1e-12);
        assert!(
            (vn_entropy(&partial_trace(&psi.to_density(), &["E"]).unwrap()) - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn purify_pure_adds_trivial_env() {
        let shape = SystemShape::single("Q", 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::new(CVector::from_vec(vec![cr(s), c(0.0, s)]), shape).unwrap();
        let p = purify(&psi.to_density(), "E").unwrap();
        assert_eq!(p.shape().dims(), &[2, 1]);
        let overlap = psi.amplitudes().dotc(p.amplitudes()).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let shape = SystemShape::single("A", 2).unwrap();
        let zero = PureState::basis(shape.clone(), 0).unwrap().to_density();
        let one = PureState::basis(shape.clone(), 1).unwrap().to_density();
        let mixed = DensityMatrix::maximally_mixed(shape);
        assert!((uhlmann_fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(uhlmann_fidelity(&zero, &one).unwrap().abs() < 1e-12);
        // pure-vs-mixed overlap ⟨0|I/2|0⟩
        assert!((uhlmann_fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((uhlmann_fidelity(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let shape = SystemShape::new(vec![2, 2], vec!["A", "B"]).unwrap();
        assert!((mutual_information(&bell().to_density(), &["R"]).unwrap() - 2.0).abs() < 1e-12);
        let prod = DensityMatrix::maximally_mixed(shape.clone());
        assert!(mutual_information(&prod, &["A"]).unwrap().abs() < 1e-12);
        let classical = DensityMatrix::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.5), cr(0.0), cr(0.0), cr(0.5)])),
            shape,
        )
        .unwrap();
        assert!((mutual_information(&classical, &["A"]).unwrap() - 1.0).abs() < 1e-12);
    }
}
