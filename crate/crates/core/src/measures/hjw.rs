//! Ensembles of a marginal as measurements on a purifying ancilla.
//!
//! Writing the purification as `|ψ⟩ = Σ Ψ_ab |a⟩|b⟩` with `b` the ancilla,
//! the outcome `M` leaves the rest in `Ψ Mᵀ Ψ†` (unnormalized).

use crate::channel::ENSEMBLE_CUTOFF;
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_part, max_abs, CMatrix, DensityMatrix, PureState};

use super::Ensemble;

const POVM_PSD_TOL: f64 = 1e-10;
const POVM_COMPLETENESS_TOL: f64 = 1e-9;
const PROBABILITY_CLIP: f64 = -1e-12;

/// Positive operators summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (k, e) in elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::InvalidPovm(format!("element {k} is not {d}×{d}")));
            }
            let herm = max_abs(&(e - e.adjoint()));
            if herm > POVM_PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {k} is not Hermitian ({herm:.2e})"
                )));
            }
            let low = eigh(e).values.last().copied().unwrap_or(0.0);
            if low < -POVM_PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {low:.2e}"
                )));
            }
            sum += e;
        }
        let dev = max_abs(&(sum - CMatrix::identity(d, d)));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:.2e}"
            )));
        }
        Ok(Self {
            elements: elements.iter().map(hermitian_part).collect(),
        })
    }

    /// Rank-1 projectors onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        Self::new(
            (0..u.ncols())
                .map(|k| {
                    let v = u.column(k);
                    v * v.adjoint()
                })
                .collect(),
        )
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Cut matrix with the ancilla as columns, and the shape of the rest.
fn split(purification: &PureState, ancilla: &str) -> Result<(CMatrix, crate::linalg::SystemShape)> {
    let shape = purification.shape();
    let anc = shape.index_of(ancilla)?;
    if shape.len() < 2 {
        return Err(Error::InvalidArgument(
            "purification needs a system besides the ancilla".into(),
        ));
    }
    let rest = shape.complement(&[anc]);
    Ok((purification.cut_matrix(&rest), shape.select(&rest)))
}

/// Outcome probabilities and relative states of measuring `povm` on the ancilla.
/// Outcomes with probability below 1e-14 are omitted.
pub fn hjw_ensemble(purification: &PureState, ancilla: &str, povm: &Povm) -> Result<Ensemble> {
    let (psi, rest) = split(purification, ancilla)?;
    if povm.dim() != psi.ncols() {
        return Err(Error::DimensionMismatch {
            expected: psi.ncols(),
            found: povm.dim(),
        });
    }
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for m in povm.elements() {
        let rel = &psi * m.transpose() * psi.adjoint();
        let p = rel.trace().re;
        if p < PROBABILITY_CLIP {
            return Err(Error::InvalidProbability(format!(
                "outcome probability {p}"
            )));
        }
        if p < ENSEMBLE_CUTOFF {
            continue;
        }
        weights.push(p);
        states.push(DensityMatrix::from_computed(
            rel / crate::linalg::cr(p),
            rest.clone(),
        ));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ensemble::new(weights, states)
}

/// A measurement on the ancilla whose relative-state ensemble is `target`.
/// Element `k` is `(m_k m_k†)ᵀ` with `m_k = Ψ⁺ √p_k |φ_k⟩`; any remainder
/// `I − Σ_k M_k` (off the support) is folded into the first element.
pub fn hjw_measurement(purification: &PureState, ancilla: &str, target: &Ensemble) -> Result<Povm> {
    let (psi, rest) = split(purification, ancilla)?;
    if target.states()[0].shape() != &rest {
        return Err(Error::InvalidShape(format!(
            "ensemble lives on {}, marginal on {}",
            target.states()[0].shape(),
            rest
        )));
    }
    let marginal = &psi * psi.adjoint();
    let dev = max_abs(&(target.average()?.matrix() - &marginal));
    if dev > 1e-9 {
        return Err(Error::InfeasibleEnsemble(dev));
    }
    let vectors = target.pure_vectors()?;
    let pinv = psi
        .clone()
        .svd(true, true)
        .pseudo_inverse(1e-8)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let d = psi.ncols();
    let mut elements: Vec<CMatrix> = target
        .weights()
        .iter()
        .zip(&vectors)
        .map(|(&p, phi)| {
            let m = &pinv * phi * crate::linalg::cr(p.max(0.0).sqrt());
            (&m * m.adjoint()).transpose()
        })
        .collect();
    let sum = elements.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    elements[0] += CMatrix::identity(d, d) - sum;
    Povm::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cr, partial_trace, purify, SystemShape};
    use crate::random::{haar_unitary, random_density, seeded};

    fn purified(seed: u64) -> (DensityMatrix, PureState) {
        let rho = random_density(SystemShape::single("A", 2).unwrap(), 2, &mut seeded(seed));
        let psi = purify(&rho, "E").unwrap();
        (rho, psi)
    }

    #[test]
    fn trivial_measurement_gives_marginal() {
        let (rho, psi) = purified(1);
        let e = hjw_ensemble(
            &psi,
            "E",
            &Povm::new(vec![CMatrix::identity(2, 2)]).unwrap(),
        )
        .unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.states()[0].distance(&rho) < 1e-12);
    }

    #[test]
    fn basis_measurement_gives_eigen_ensemble() {
        let (rho, psi) = purified(2);
        let e = hjw_ensemble(
            &psi,
            "E",
            &Povm::from_basis(&CMatrix::identity(2, 2)).unwrap(),
        )
        .unwrap();
        let eig = eigh(rho.matrix());
        for k in 0..2 {
            assert!((e.weights()[k] - eig.values[k]).abs() < 1e-12);
            let v = eig.vector(k);
            assert!(max_abs(&(e.states()[k].matrix() - &v * v.adjoint())) < 1e-10);
        }
    }

    #[test]
    fn random_measurement_resums_to_marginal() {
        let (rho, psi) = purified(3);
        let joint = partial_trace(&psi.to_density(), &["A"]).unwrap();
        assert!(joint.distance(&rho) < 1e-12);
        let povm = Povm::from_basis(&haar_unitary(2, &mut seeded(4))).unwrap();
        let e = hjw_ensemble(&psi, "E", &povm).unwrap();
        assert!(e.average().unwrap().distance(&rho) < 1e-10);
    }

    #[test]
    fn three_element_round_trip() {
        let (rho, psi) = purified(5);
        let povm = Povm::new(
            (0..3)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                    let v = crate::linalg::CVector::from_vec(vec![cr(t.cos()), cr(t.sin())]);
                    &v * v.adjoint() * cr(2.0 / 3.0)
                })
                .collect(),
        )
        .unwrap();
        let target = hjw_ensemble(&psi, "E", &povm).unwrap();
        assert_eq!(target.len(), 3);
        let back = hjw_measurement(&psi, "E", &target).unwrap();
        assert_eq!(back.len(), 3);
        let again = hjw_ensemble(&psi, "E", &back).unwrap();
        for k in 0..3 {
            assert!((again.weights()[k] - target.weights()[k]).abs() < 1e-8);
            assert!(again.states()[k].distance(&target.states()[k]) < 1e-8);
        }
        assert!(again.average().unwrap().distance(&rho) < 1e-10);
    }

    #[test]
    fn wrong_average_is_infeasible() {
        let (_, psi) = purified(6);
        let wrong = Ensemble::from_pure(
            vec![1.0],
            &[PureState::basis(SystemShape::single("A", 2).unwrap(), 0).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            hjw_measurement(&psi, "E", &wrong),
            Err(Error::InfeasibleEnsemble(_))
        ));
    }

    #[test]
    fn invalid_povms_rejected() {
        assert!(Povm::new(vec![CMatrix::identity(2, 2) * cr(0.5)]).is_err());
        let neg =
            CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![cr(1.5), cr(-0.5)]));
        assert!(Povm::new(vec![
            neg,
            CMatrix::identity(2, 2)
                - CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
                    cr(1.5),
                    cr(-0.5)
                ]))
        ])
        .is_err());
    }
}
