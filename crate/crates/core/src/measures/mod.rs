//! Entanglement and information measures of channel outputs.
//!
//! Optimizer-backed values are feasible points: the entanglement of
//! formation reported here is always an upper bound on the true minimum, and
//! the intrinsic coherent information a lower bound on the closed form.

mod concurrence;
mod eof;
mod hjw;

pub use concurrence::{concurrence_2q, concurrence_eof_2q};
pub use eof::{eof_intrinsic, eof_mixed, MixtureKind, MixtureObjective};
pub use hjw::{hjw_ensemble, hjw_measurement, Povm};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, max_abs, partial_trace, purify, sqrt_psd, vn_entropy, CMatrix, CVector, DensityMatrix,
    PureState,
};
use crate::optimize::{minimize_unitary, OptimizerConfig};

/// Weights `p_k` with states `ρ_k` on a common shape.
#[derive(Debug, Clone)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "ensemble has {} weights and {} states",
                weights.len(),
                states.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| w < -1e-12 || !w.is_finite()) {
            return Err(Error::InvalidProbability(format!("weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbability(format!("weights sum to {sum}")));
        }
        let shape = states[0].shape();
        if let Some(s) = states.iter().find(|s| s.shape() != shape) {
            return Err(Error::InvalidShape(format!(
                "ensemble mixes {} and {}",
                shape,
                s.shape()
            )));
        }
        Ok(Self { weights, states })
    }

    pub fn from_pure(weights: Vec<f64>, states: &[PureState]) -> Result<Self> {
        Self::new(weights, states.iter().map(PureState::to_density).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ p_k ρ_k`.
    pub fn average(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&self.weights, &self.states)
    }

    /// Unit vectors of the members, which must all be pure (purity > 1 − 1e-8).
    pub fn pure_vectors(&self) -> Result<Vec<CVector>> {
        self.states
            .iter()
            .map(|s| {
                let e = eigh(s.matrix());
                if e.values[0] < 1.0 - 1e-8 {
                    return Err(Error::InvalidArgument(format!(
                        "ensemble member is mixed (largest eigenvalue {})",
                        e.values[0]
                    )));
                }
                Ok(e.vector(0))
            })
            .collect()
    }
}

/// Optimizer-backed measure value with the point that achieves it.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// In bits.
    pub value: f64,
    /// Mixing unitary of the reported representation.
    pub mixing: CMatrix,
    /// The ensemble realizing `value`, when the measure is ensemble-based.
    pub ensemble: Option<Ensemble>,
    pub ensemble_size: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Input shape check: single-factor `ρ^Q`, purified as `Q ⊗ R`.
fn reference_purification(rho_q: &DensityMatrix) -> Result<PureState> {
    purify(&rho_q.flatten("Q")?, "R")
}

/// `S^{Q'}` and `S^{RQ'}` for the channel acting on `Q` of a purification of `ρ^Q`.
pub fn output_entropies(channel: &KrausChannel, rho_q: &DensityMatrix) -> Result<(f64, f64)> {
    if rho_q.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            found: rho_q.dim(),
        });
    }
    let joint = reference_purification(rho_q)?.to_density();
    let out = channel.apply_extended(&joint, "Q")?;
    let q_out = partial_trace(&out, &["Q"])?;
    Ok((vn_entropy(&q_out), vn_entropy(&out)))
}

/// `I = S^{Q'} − S^{RQ'}`; may be negative.
pub fn coherent_information(channel: &KrausChannel, rho_q: &DensityMatrix) -> Result<f64> {
    let (s_q, s_rq) = output_entropies(channel, rho_q)?;
    Ok(s_q - s_rq)
}

/// `I = S^{Q'} − min_V H(p(V))`, minimizing the Shannon entropy of the
/// ensemble weights over all operator-sum representations. The eigenbasis of
/// the environment output is used as the analytic warm start.
pub fn coherent_information_intrinsic(
    channel: &KrausChannel,
    rho_q: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<MeasureResult> {
    if rho_q.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            found: rho_q.dim(),
        });
    }
    let s_out = vn_entropy(&channel.apply(rho_q)?);
    let root = sqrt_psd(rho_q.matrix());
    let blocks: Vec<CMatrix> = channel.operators().iter().map(|a| a * &root).collect();
    let n = blocks.len();
    let objective = MixtureObjective::new(blocks, n, MixtureKind::Shannon);
    let warm = objective.gram_eigenbasis();
    let min = minimize_unitary(&objective, vec![warm], cfg);
    Ok(MeasureResult {
        value: s_out - min.value,
        mixing: min.unitary,
        ensemble: None,
        ensemble_size: n,
        restarts_used: min.restarts_used,
        converged: min.converged,
    })
}

/// Entanglement of a pure state across `cut | rest`: the entropy of either marginal.
pub fn eof_pure<S: AsRef<str>>(psi: &PureState, cut: &[S]) -> Result<f64> {
    let shape = psi.shape();
    let a = shape.positions(cut)?;
    if a.is_empty() || a.len() == shape.len() {
        return Err(Error::InvalidArgument(
            "cut must be a nonempty proper subset".into(),
        ));
    }
    Ok(vn_entropy(&partial_trace(&psi.to_density(), cut)?))
}

/// Largest deviation `max_k ‖ρ^A_k − ρ^A‖` between member marginals and the
/// ensemble's marginal on `keep`.
pub fn marginal_spread<S: AsRef<str>>(ensemble: &Ensemble, keep: &[S]) -> Result<f64> {
    let avg = partial_trace(&ensemble.average()?, keep)?;
    let mut worst = 0.0f64;
    for s in ensemble.states() {
        let m = partial_trace(s, keep)?;
        worst = worst.max(max_abs(&(m.matrix() - avg.matrix())));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::{binary_entropy, cr, SystemShape};
    use crate::random::{random_channel, random_density, seeded};

    fn mixed_qubit() -> DensityMatrix {
        DensityMatrix::maximally_mixed(SystemShape::single("Q", 2).unwrap())
    }

    #[test]
    fn coherent_information_examples() {
        let i = coherent_information(&KrausChannel::identity(2), &mixed_qubit()).unwrap();
        assert!((i - 1.0).abs() < 1e-12);
        let i = coherent_information(&families::depolarizing(1.0), &mixed_qubit()).unwrap();
        assert!((i + 1.0).abs() < 1e-12);
        for p in [0.1, 0.3, 0.5] {
            let i = coherent_information(&families::dephasing(p), &mixed_qubit()).unwrap();
            assert!((i - (1.0 - binary_entropy(p))).abs() < 1e-12);
        }
        let three = DensityMatrix::maximally_mixed(SystemShape::single("Q", 3).unwrap());
        assert!(coherent_information(&KrausChannel::identity(2), &three).is_err());
    }

    #[test]
    fn intrinsic_coherent_information_examples() {
        let cfg = OptimizerConfig {
            restarts: 4,
            ..Default::default()
        };
        let r = coherent_information_intrinsic(&KrausChannel::identity(2), &mixed_qubit(), &cfg)
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let deph = families::dephasing(0.3);
        let r = coherent_information_intrinsic(&deph, &mixed_qubit(), &cfg).unwrap();
        let direct = coherent_information(&deph, &mixed_qubit()).unwrap();
        assert!((r.value - direct).abs() < 1e-6);

        let mut rng = seeded(31);
        let ch = random_channel(2, 2, 2, &mut rng);
        let rho = random_density(SystemShape::single("Q", 2).unwrap(), 2, &mut rng);
        let r = coherent_information_intrinsic(&ch, &rho, &cfg).unwrap();
        let direct = coherent_information(&ch, &rho).unwrap();
        assert!((r.value - direct).abs() < 1e-6);
    }

    #[test]
    fn eof_pure_examples() {
        assert!((eof_pure(&families::bell_state(), &["R"]).unwrap() - 1.0).abs() < 1e-12);
        let shape = SystemShape::new(vec![2, 2], vec!["A", "B"]).unwrap();
        let prod = PureState::basis(shape.clone(), 2).unwrap();
        assert!(eof_pure(&prod, &["A"]).unwrap().abs() < 1e-12);
        let v = CVector::from_vec(vec![cr(0.9f64.sqrt()), cr(0.0), cr(0.0), cr(0.1f64.sqrt())]);
        let psi = PureState::new(v, shape).unwrap();
        let h = -(0.1f64 * 0.1f64.log2()) - 0.9 * 0.9f64.log2();
        assert!((eof_pure(&psi, &["B"]).unwrap() - h).abs() < 1e-12);
        assert!((h - 0.468_995_593_589_281_2).abs() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        let s = mixed_qubit();
        assert!(Ensemble::new(vec![0.5, 0.6], vec![s.clone(), s.clone()]).is_err());
        assert!(Ensemble::new(vec![1.0], vec![]).is_err());
        let e = Ensemble::new(vec![0.25, 0.75], vec![s.clone(), s.clone()]).unwrap();
        assert!(e.average().unwrap().distance(&s) < 1e-15);
        assert!(e.pure_vectors().is_err());
    }
}
