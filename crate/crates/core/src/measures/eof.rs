//! Entanglement of formation as a minimization over mixing unitaries.
//!
//! Both the ensemble form and the operator-sum form reduce to the same
//! problem: given matrices `W_1..W_n`, find an `m × m` unitary `U` minimizing
//! `Σ_k p_k S(σ_k / p_k)` where `σ_k = M_k M_k†`, `M_k = Σ_i U_ki W_i` and
//! `p_k = Tr σ_k`. For a pure-state ensemble `W_i` is the `i`-th scaled
//! eigenvector reshaped across the cut; for an operator-sum representation it
//! is `A_i √ρ`.

use std::f64::consts::LN_2;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{cr, eigh, eigvalsh, CMatrix, CVector, DensityMatrix, PureState, ENTROPY_CLIP};
use crate::optimize::{minimize_unitary, OptimizerConfig, UnitaryObjective};

use super::{Ensemble, MeasureResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureKind {
    /// `Σ_k p_k S(σ_k/p_k)`.
    Entanglement,
    /// `H(p)`, the Shannon entropy of the weights alone.
    Shannon,
}

/// Objective over `m × m` unitaries built from blocks `W_i`; see the module docs.
pub struct MixtureObjective {
    blocks: Vec<CMatrix>,
    m: usize,
    kind: MixtureKind,
}

impl MixtureObjective {
    /// `m` is raised to the number of blocks if smaller.
    pub fn new(blocks: Vec<CMatrix>, m: usize, kind: MixtureKind) -> Self {
        let m = m.max(blocks.len()).max(1);
        // The spectrum of M M† equals that of M^T (M^T)†, so work on the smaller side.
        let blocks = if blocks.first().is_some_and(|b| b.nrows() > b.ncols()) {
            blocks.iter().map(|b| b.transpose()).collect()
        } else {
            blocks
        };
        Self { blocks, m, kind }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// `Γ_ij = Tr(W_i W_j†)`.
    pub fn gram(&self) -> CMatrix {
        let n = self.blocks.len();
        CMatrix::from_fn(n, n, |i, j| {
            self.blocks[i]
                .iter()
                .zip(self.blocks[j].iter())
                .map(|(a, b)| a * b.conj())
                .sum()
        })
    }

    /// The unitary `E†` (padded to `m`) diagonalizing the weights: with
    /// `Γ = E Λ E†`, row `k` of `E†` yields weight `λ_k` and mutually
    /// orthogonal `M_k`.
    pub fn gram_eigenbasis(&self) -> CMatrix {
        let n = self.blocks.len();
        let e = eigh(&self.gram()).vectors;
        let mut u = CMatrix::identity(self.m, self.m);
        u.view_mut((0, 0), (n, n)).copy_from(&e.adjoint());
        u
    }

    fn mixed(&self, u: &CMatrix, k: usize) -> CMatrix {
        let (r, c) = self.blocks[0].shape();
        let mut acc = CMatrix::zeros(r, c);
        for (i, w) in self.blocks.iter().enumerate() {
            let coef = u[(k, i)];
            if coef.norm() > 0.0 {
                acc += w * coef;
            }
        }
        acc
    }

    /// Weights `p_k` and unnormalized members `M_k` at `u`.
    pub fn members(&self, u: &CMatrix) -> Vec<(f64, CMatrix)> {
        (0..self.m)
            .map(|k| {
                let mk = self.mixed(u, k);
                (mk.norm_squared(), mk)
            })
            .collect()
    }
}

/// `p ln p − Tr σ ln σ` in nats, from the spectrum of `σ`.
fn weighted_entropy(p: f64, spectrum: &[f64]) -> f64 {
    if p <= ENTROPY_CLIP {
        return 0.0;
    }
    let s: f64 = spectrum
        .iter()
        .filter(|&&l| l > ENTROPY_CLIP)
        .map(|&l| -l * l.ln())
        .sum();
    p * p.ln() + s
}

impl UnitaryObjective for MixtureObjective {
    fn dim(&self) -> usize {
        self.m
    }

    fn lower_bound(&self) -> f64 {
        0.0
    }

    fn value(&self, u: &CMatrix) -> f64 {
        let mut value = 0.0;
        for k in 0..self.m {
            let mk = self.mixed(u, k);
            let p = mk.norm_squared();
            value += match self.kind {
                MixtureKind::Entanglement => weighted_entropy(p, &eigvalsh(&(&mk * mk.adjoint()))),
                MixtureKind::Shannon if p > ENTROPY_CLIP => -p * p.ln(),
                MixtureKind::Shannon => 0.0,
            };
        }
        value / LN_2
    }

    fn evaluate(&self, u: &CMatrix) -> (f64, CMatrix) {
        let n = self.blocks.len();
        let mut value = 0.0;
        let mut grad = CMatrix::zeros(self.m, self.m);
        for k in 0..self.m {
            let mk = self.mixed(u, k);
            let p = mk.norm_squared();
            let ln_p = p.max(ENTROPY_CLIP).ln();
            // df_k = Tr(G_k dσ_k) with G_k Hermitian.
            let g = match self.kind {
                MixtureKind::Entanglement => {
                    let eig = eigh(&(&mk * mk.adjoint()));
                    value += weighted_entropy(p, &eig.values);
                    eig.map(|l| ln_p - l.max(ENTROPY_CLIP).ln())
                }
                MixtureKind::Shannon => {
                    if p > ENTROPY_CLIP {
                        value -= p * ln_p;
                    }
                    let d = mk.nrows();
                    CMatrix::identity(d, d) * cr(-(ln_p + 1.0))
                }
            };
            let gm = g * &mk;
            for i in 0..n {
                let t: crate::linalg::C64 = self.blocks[i]
                    .iter()
                    .zip(gm.iter())
                    .map(|(w, x)| w.conj() * x)
                    .sum();
                grad[(k, i)] = t * cr(2.0 / LN_2);
            }
        }
        (value / LN_2, grad)
    }
}

fn rank_from(values: &[f64]) -> usize {
    values.iter().filter(|&&v| v > ENTROPY_CLIP).count().max(1)
}

/// Minimum over pure-state ensembles of `ρ` of the average entanglement across
/// `cut | rest`. Ensembles are `m = cfg.ensemble_cap` (default `rank²`)
/// mixtures of the scaled eigenvectors, with the eigen-ensemble as warm start.
pub fn eof_mixed<S: AsRef<str>>(
    rho: &DensityMatrix,
    cut: &[S],
    cfg: &OptimizerConfig,
) -> Result<MeasureResult> {
    let shape = rho.shape();
    let positions = shape.positions(cut)?;
    if positions.is_empty() || positions.len() == shape.len() {
        return Err(Error::InvalidArgument(
            "cut must be a nonempty proper subset".into(),
        ));
    }
    let eig = eigh(rho.matrix());
    let r = rank_from(&eig.values);
    let vectors: Vec<CVector> = (0..r)
        .map(|i| eig.vector(i) * cr(eig.values[i].max(0.0).sqrt()))
        .collect();
    let blocks = vectors
        .iter()
        .map(|v| PureState::from_computed(v.clone(), shape.clone()).cut_matrix(&positions))
        .collect();
    let m = cfg.ensemble_cap.unwrap_or(r * r).max(r);
    let objective = MixtureObjective::new(blocks, m, MixtureKind::Entanglement);
    let warm = CMatrix::identity(m, m);
    let (value, u, restarts_used, converged) = if m == 1 {
        (objective.value(&warm), warm, 1, true)
    } else {
        let min = minimize_unitary(&objective, vec![warm], cfg);
        (min.value, min.unitary, min.restarts_used, min.converged)
    };

    let mut weights = Vec::new();
    let mut states = Vec::new();
    for k in 0..m {
        let phi = vectors
            .iter()
            .enumerate()
            .fold(CVector::zeros(rho.dim()), |acc, (i, v)| acc + v * u[(k, i)]);
        let p = phi.norm_squared();
        if p < crate::channel::ENSEMBLE_CUTOFF {
            continue;
        }
        weights.push(p);
        states.push(PureState::from_computed(phi / cr(p.sqrt()), shape.clone()).to_density());
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(MeasureResult {
        value: value.max(0.0),
        mixing: u,
        ensemble: Some(Ensemble::new(weights, states)?),
        ensemble_size: m,
        restarts_used,
        converged,
    })
}

/// Minimum over operator-sum representations `B = V·A` of `Σ_k p_k S(B_k ρ B_k† / p_k)`.
/// Warm starts are the given representation and the one diagonalizing the
/// environment output. The reported ensemble holds the conditional output states.
pub fn eof_intrinsic(
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
    let root = crate::linalg::sqrt_psd(rho_q.matrix());
    let blocks: Vec<CMatrix> = channel.operators().iter().map(|a| a * &root).collect();
    let n = blocks.len();
    let probe = MixtureObjective::new(blocks.clone(), n, MixtureKind::Entanglement);
    let r = rank_from(&eigh(&probe.gram()).values);
    let m = cfg.ensemble_cap.unwrap_or(r * r).max(n);
    let objective = MixtureObjective::new(blocks, m, MixtureKind::Entanglement);
    let warm = vec![CMatrix::identity(m, m), objective.gram_eigenbasis()];
    let min = minimize_unitary(&objective, warm, cfg);
    let ensemble = channel
        .mix_representation(&min.unitary)?
        .output_ensemble(rho_q)?;
    Ok(MeasureResult {
        value: min.value.max(0.0),
        mixing: min.unitary,
        ensemble: Some(ensemble),
        ensemble_size: m,
        restarts_used: min.restarts_used,
        converged: min.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::{c, partial_trace, purify, vn_entropy, SystemShape};
    use crate::optimize::directional_derivatives;
    use crate::random::{ginibre, haar_unitary, random_channel, random_density, seeded};

    fn random_skew(n: usize, seed: u64) -> CMatrix {
        let g = ginibre(n, n, &mut seeded(seed));
        (&g - g.adjoint()) * cr(0.5)
    }

    fn random_blocks(n: usize, r: usize, c: usize, seed: u64) -> Vec<CMatrix> {
        let mut rng = seeded(seed);
        let blocks: Vec<CMatrix> = (0..n).map(|_| ginibre(r, c, &mut rng)).collect();
        let total: f64 = blocks.iter().map(|b| b.norm_squared()).sum();
        blocks.into_iter().map(|b| b / cr(total.sqrt())).collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        for kind in [MixtureKind::Entanglement, MixtureKind::Shannon] {
            for (rows, cols) in [(2, 2), (3, 2), (2, 4)] {
                let obj = MixtureObjective::new(random_blocks(3, rows, cols, 5), 4, kind);
                let u = haar_unitary(4, &mut seeded(6));
                let (a, n) = directional_derivatives(&obj, &u, &random_skew(4, 7), 1e-6);
                assert!(
                    (a - n).abs() < 1e-6 * (1.0 + a.abs()),
                    "{kind:?}: {a} vs {n}"
                );
            }
        }
    }

    #[test]
    fn identity_value_is_eigen_ensemble_average() {
        let mut rng = seeded(9);
        let shape = SystemShape::new(vec![2, 3], vec!["A", "B"]).unwrap();
        let rho = random_density(shape.clone(), 2, &mut rng);
        let eig = eigh(rho.matrix());
        let mut expected = 0.0;
        for i in 0..2 {
            let psi = PureState::from_computed(eig.vector(i), shape.clone());
            expected +=
                eig.values[i] * vn_entropy(&partial_trace(&psi.to_density(), &["A"]).unwrap());
        }
        let vectors: Vec<CMatrix> = (0..2)
            .map(|i| {
                PureState::from_computed(eig.vector(i) * cr(eig.values[i].sqrt()), shape.clone())
                    .cut_matrix(&[0])
            })
            .collect();
        let obj = MixtureObjective::new(vectors, 4, MixtureKind::Entanglement);
        assert!((obj.value(&CMatrix::identity(4, 4)) - expected).abs() < 1e-10);
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            ..Default::default()
        }
    }

    #[test]
    fn pure_input_gives_pure_value() {
        let shape = SystemShape::new(vec![2, 2], vec!["A", "B"]).unwrap();
        let v = CVector::from_vec(vec![cr(0.9f64.sqrt()), cr(0.0), cr(0.0), cr(0.1f64.sqrt())]);
        let rho = PureState::new(v, shape).unwrap().to_density();
        let r = eof_mixed(&rho, &["A"], &quick()).unwrap();
        assert!((r.value - crate::linalg::binary_entropy(0.1)).abs() < 1e-12);
        assert_eq!(r.ensemble_size, 1);
    }

    #[test]
    fn classically_correlated_state_is_separable() {
        let shape = SystemShape::new(vec![2, 2], vec!["A", "B"]).unwrap();
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = cr(0.5);
        m[(3, 3)] = cr(0.5);
        let rho = DensityMatrix::new(m, shape).unwrap();
        let r = eof_mixed(&rho, &["A"], &quick()).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn degenerate_bell_mixture_is_separable() {
        // ½(|Φ+⟩⟨Φ+| + |Φ−⟩⟨Φ−|) has a degenerate spectrum whose eigenbasis
        // returned by eigh may be entangled; the optimizer must still find 0.
        let shape = SystemShape::new(vec![2, 2], vec!["A", "B"]).unwrap();
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = cr(0.5);
        m[(3, 3)] = cr(0.5);
        let u = families::pauli_z().kronecker(&CMatrix::identity(2, 2));
        let hadamard_like = (CMatrix::identity(4, 4) + &u * c(0.0, 1.0)) * cr(0.5f64.sqrt());
        let rho = DensityMatrix::new(m, shape)
            .unwrap()
            .conjugate_by(&hadamard_like)
            .unwrap();
        let r = eof_mixed(&rho, &["B"], &quick()).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn intrinsic_examples() {
        let mixed = DensityMatrix::maximally_mixed(SystemShape::single("Q", 2).unwrap());
        let r = eof_intrinsic(&KrausChannel::identity(2), &mixed, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = eof_intrinsic(&families::depolarizing(1.0), &mixed, &quick()).unwrap();
        assert!(r.value < 1e-4, "{}", r.value);
    }

    #[test]
    fn intrinsic_matches_extended_output() {
        let mut rng = seeded(17);
        let ch = random_channel(2, 2, 2, &mut rng);
        let rho = random_density(SystemShape::single("Q", 2).unwrap(), 2, &mut rng);
        let joint = purify(&rho, "R").unwrap().to_density();
        let out = ch.apply_extended(&joint, "Q").unwrap();
        let a = eof_intrinsic(&ch, &rho, &quick()).unwrap();
        let b = eof_mixed(&out, &["R"], &quick()).unwrap();
        assert!(
            (a.value - b.value).abs() < 1e-4,
            "{} vs {}",
            a.value,
            b.value
        );
    }
}
