use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal, cr, eigh, partial_trace, schmidt, vn_entropy, CMatrix, CVector,
    DensityMatrix, PureState,
};
use crate::optimize::{minimize_unitary, OptimizerConfig, UnitaryObjective};

use super::{fresh_label, split_input, swapped};

const RANK_CUTOFF: f64 = 1e-10;
const ORTHONORMALITY_TOL: f64 = 1e-7;
const PETZ_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMethod {
    SchmidtBlock,
    Petz,
    Optimized,
}

impl std::fmt::Display for RecoveryMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SchmidtBlock => "schmidt-block",
            Self::Petz => "petz",
            Self::Optimized => "optimized",
        })
    }
}

/// A channel from the channel's output space back to its input space.
#[derive(Debug, Clone)]
pub struct RecoveryMap {
    pub channel: KrausChannel,
    pub method: RecoveryMethod,
}

/// Operators sending the orthonormal columns of `sources` onto orthonormal
/// `targets` (as many as fit, in order), grouped so that each operator uses
/// each target at most once.
fn isometric_chunks(sources: &CMatrix, targets: &CMatrix) -> Vec<CMatrix> {
    let width = targets.ncols();
    let mut ops = Vec::new();
    let mut start = 0;
    while start < sources.ncols() {
        let len = width.min(sources.ncols() - start);
        let src = sources.columns(start, len);
        let dst = targets.columns(0, len);
        ops.push(dst * src.adjoint());
        start += len;
    }
    ops
}

/// Symmetric orthonormalization `Q (Q†Q)^{-1/2}`.
fn orthonormalize(q: &CMatrix) -> CMatrix {
    let gram = q.adjoint() * q;
    q * eigh(&gram).map(|v| 1.0 / v.max(1e-300).sqrt())
}

/// Recovery assembled from the product structure of the reference and the
/// environment after the channel. Fails with [`Error::NotCorrectable`] when
/// that structure is absent.
pub fn synthesize_recovery(channel: &KrausChannel, input: &PureState) -> Result<RecoveryMap> {
    let (r, q) = split_input(channel, input)?;
    let sch = schmidt(input, &[r])?;
    let env = fresh_label(input, "E");
    let out = channel.dilate().evolve(input, q, &env)?;
    let d_r = input.shape().dims()[0];
    let d_out = channel.out_dim();
    let d_in = channel.in_dim();
    let d_e = out.shape().dims()[2];

    let sigma_e = partial_trace(&out.to_density(), &[env.as_str()])?;
    let env_eig = eigh(sigma_e.matrix());
    let amp = out.amplitudes();

    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut columns: Vec<CVector> = Vec::new();
    for (i, (&coef, r_vec)) in sch.coefficients.iter().zip(&sch.left_basis).enumerate() {
        let r_i = coef * coef;
        if r_i <= RANK_CUTOFF {
            continue;
        }
        for (j, &s_j) in env_eig.values.iter().enumerate() {
            if s_j <= RANK_CUTOFF {
                continue;
            }
            let e_vec = env_eig.vector(j);
            let mut v = CVector::zeros(d_out);
            for a in 0..d_r {
                let ra = r_vec[a].conj();
                if ra.norm() == 0.0 {
                    continue;
                }
                for qp in 0..d_out {
                    for e in 0..d_e {
                        v[qp] += ra * amp[(a * d_out + qp) * d_e + e] * e_vec[e].conj();
                    }
                }
            }
            columns.push(v / cr((r_i * s_j).sqrt()));
            blocks.push((i, j));
        }
    }
    if columns.is_empty() || columns.len() > d_out {
        return Err(Error::NotCorrectable(format!(
            "{} relative vectors do not fit in output dimension {d_out}",
            columns.len()
        )));
    }
    let qmat = CMatrix::from_columns(&columns);
    let dev = crate::linalg::max_abs(
        &(qmat.adjoint() * &qmat - CMatrix::identity(columns.len(), columns.len())),
    );
    if dev > ORTHONORMALITY_TOL {
        return Err(Error::NotCorrectable(format!(
            "relative output vectors are orthonormal only within {dev:.3e}"
        )));
    }
    let qmat = orthonormalize(&qmat);

    let code: Vec<CVector> = sch
        .right_basis
        .iter()
        .zip(&sch.coefficients)
        .filter(|(_, &c)| c * c > RANK_CUTOFF)
        .map(|(v, _)| v.clone())
        .collect();
    let targets = complete_orthonormal(&CMatrix::from_columns(&code), d_in);

    let mut ops = Vec::new();
    let env_blocks: Vec<usize> = {
        let mut js: Vec<usize> = blocks.iter().map(|&(_, j)| j).collect();
        js.sort_unstable();
        js.dedup();
        js
    };
    for j in env_blocks {
        let mut d = CMatrix::zeros(d_in, d_out);
        for (col, &(i, jj)) in blocks.iter().enumerate() {
            if jj != j {
                continue;
            }
            let ordinal = code_index(&sch.coefficients, i);
            let src = qmat.column(col);
            d += targets.column(ordinal) * src.adjoint();
        }
        ops.push(d);
    }
    let full = complete_orthonormal(&qmat, d_out);
    let rest = full
        .columns(qmat.ncols(), d_out - qmat.ncols())
        .into_owned();
    ops.extend(isometric_chunks(&rest, &targets));
    Ok(RecoveryMap {
        channel: KrausChannel::new(ops)?,
        method: RecoveryMethod::SchmidtBlock,
    })
}

/// Position of Schmidt vector `i` among those kept above the rank cutoff.
fn code_index(coefficients: &[f64], i: usize) -> usize {
    coefficients[..i]
        .iter()
        .filter(|&&c| c * c > RANK_CUTOFF)
        .count()
}

/// `R_k = ρ^{1/2} A_k† σ^{-1/2}` with `σ` the channel output, plus isometric
/// terms on the kernel of `σ` so the map is trace preserving.
pub fn petz_recovery(channel: &KrausChannel, rho_q: &DensityMatrix) -> Result<RecoveryMap> {
    let sigma = channel.apply(rho_q)?;
    let eig = eigh(sigma.matrix());
    let inv_sqrt = eig.map(|v| if v > PETZ_CUTOFF { 1.0 / v.sqrt() } else { 0.0 });
    let rho_eig = eigh(rho_q.matrix());
    let root = rho_eig.map(|v| v.max(0.0).sqrt());
    let mut ops: Vec<CMatrix> = channel
        .operators()
        .iter()
        .map(|a| &root * a.adjoint() * &inv_sqrt)
        .collect();
    let kernel: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] <= PETZ_CUTOFF)
        .collect();
    if !kernel.is_empty() {
        let sources =
            CMatrix::from_columns(&kernel.iter().map(|&i| eig.vector(i)).collect::<Vec<_>>());
        ops.extend(isometric_chunks(&sources, &rho_eig.vectors));
    }
    Ok(RecoveryMap {
        channel: KrausChannel::new(ops)?.trimmed(),
        method: RecoveryMethod::Petz,
    })
}

/// Entanglement fidelity `⟨Ψ|(I⊗D)(I⊗E)(|Ψ⟩⟨Ψ|)|Ψ⟩`.
pub fn verify_recovery(
    channel: &KrausChannel,
    recovery: &RecoveryMap,
    input: &PureState,
) -> Result<f64> {
    let (_, q) = split_input(channel, input)?;
    if recovery.channel.in_dim() != channel.out_dim()
        || recovery.channel.out_dim() != channel.in_dim()
    {
        return Err(Error::DimensionMismatch {
            expected: channel.out_dim(),
            found: recovery.channel.in_dim(),
        });
    }
    let noisy = channel.apply_extended(&input.to_density(), q)?;
    let restored = recovery.channel.apply_extended(&noisy, q)?;
    Ok(overlap(input, &restored))
}

fn overlap(psi: &PureState, rho: &DensityMatrix) -> f64 {
    let v = psi.amplitudes();
    (v.adjoint() * rho.matrix() * v)[(0, 0)].re.clamp(0.0, 1.0)
}

/// Fidelity of `(D^R ⊗ D^Q)(E^R ⊗ E^Q)(|Ψ⟩⟨Ψ|)` with `|Ψ⟩`.
pub fn verify_local(
    channel_r: &KrausChannel,
    channel_q: &KrausChannel,
    recovery_r: &RecoveryMap,
    recovery_q: &RecoveryMap,
    input: &PureState,
) -> Result<f64> {
    let (r, q) = split_input(channel_q, input)?;
    let rho = input.to_density();
    let rho = channel_r.apply_extended(&rho, r)?;
    let rho = channel_q.apply_extended(&rho, q)?;
    let rho = recovery_r.channel.apply_extended(&rho, r)?;
    let rho = recovery_q.channel.apply_extended(&rho, q)?;
    Ok(overlap(input, &rho))
}

/// Recoveries `(D^R, D^Q)` for independent noise on both factors, each
/// synthesized from its own one-sided stage.
pub fn recover_local(
    channel_r: &KrausChannel,
    channel_q: &KrausChannel,
    input: &PureState,
) -> Result<(RecoveryMap, RecoveryMap)> {
    let d_q = synthesize_recovery(channel_q, input)?;
    let d_r = synthesize_recovery(channel_r, &swapped(input)?)?;
    Ok((d_r, d_q))
}

/// Entanglement fidelity of recoveries given by the first `d_out` columns of
/// an `n_r·d_in`-dimensional unitary, operator `j` being rows `j·d_in..`.
struct RecoveryObjective {
    /// `A_k ρ`.
    products: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
    n_r: usize,
}

impl RecoveryObjective {
    fn operators(&self, u: &CMatrix) -> Vec<CMatrix> {
        (0..self.n_r)
            .map(|j| {
                u.view((j * self.d_in, 0), (self.d_in, self.d_out))
                    .into_owned()
            })
            .collect()
    }

    fn traces(&self, d: &CMatrix) -> Vec<crate::linalg::C64> {
        self.products
            .iter()
            .map(|ar| {
                d.iter()
                    .zip(ar.transpose().iter())
                    .map(|(x, y)| x * y)
                    .sum()
            })
            .collect()
    }
}

impl UnitaryObjective for RecoveryObjective {
    fn dim(&self) -> usize {
        self.n_r * self.d_in
    }

    fn lower_bound(&self) -> f64 {
        -1.0
    }

    fn value(&self, u: &CMatrix) -> f64 {
        -self
            .operators(u)
            .iter()
            .flat_map(|d| self.traces(d))
            .map(|t| t.norm_sqr())
            .sum::<f64>()
    }

    fn evaluate(&self, u: &CMatrix) -> (f64, CMatrix) {
        let n = self.dim();
        let mut grad = CMatrix::zeros(n, n);
        let mut value = 0.0;
        for (j, d) in self.operators(u).iter().enumerate() {
            let mut g = CMatrix::zeros(self.d_in, self.d_out);
            for (t, ar) in self.traces(d).into_iter().zip(&self.products) {
                value -= t.norm_sqr();
                g -= ar.adjoint() * (t * 2.0);
            }
            grad.view_mut((j * self.d_in, 0), (self.d_in, self.d_out))
                .copy_from(&g);
        }
        (value, grad)
    }
}

/// Largest number of recovery operators such that the search space stays
/// at most 64-dimensional (and never below what the output dimension needs).
fn recovery_operator_count(d_in: usize, d_out: usize) -> usize {
    let needed = d_out.div_ceil(d_in);
    (d_in * d_out).min(64 / d_in).max(needed)
}

/// Embed a recovery's operators as the leading columns of a unitary, when
/// they fit into `n_r` operators.
fn as_start(recovery: &KrausChannel, d_in: usize, n_r: usize) -> Option<CMatrix> {
    let ops = recovery.trimmed();
    if ops.len() > n_r {
        return None;
    }
    let d_out = ops.in_dim();
    let mut v = CMatrix::zeros(n_r * d_in, d_out);
    for (j, d) in ops.operators().iter().enumerate() {
        v.view_mut((j * d_in, 0), (d_in, d_out)).copy_from(d);
    }
    let full = complete_orthonormal(&v, n_r * d_in);
    (full.ncols() == n_r * d_in).then_some(full)
}

/// Numerically optimized recovery, started from `seeds` and `cfg.restarts`
/// random points. The returned fidelity is a lower bound on the optimum.
pub fn refine_recovery(
    channel: &KrausChannel,
    input: &PureState,
    seeds: &[&RecoveryMap],
    cfg: &OptimizerConfig,
) -> Result<(RecoveryMap, f64)> {
    let (_, q) = split_input(channel, input)?;
    let rho_q = partial_trace(&input.to_density(), &[q])?;
    let d_in = channel.in_dim();
    let d_out = channel.out_dim();
    let n_r = recovery_operator_count(d_in, d_out);
    let objective = RecoveryObjective {
        products: channel
            .operators()
            .iter()
            .map(|a| a * rho_q.matrix())
            .collect(),
        d_in,
        d_out,
        n_r,
    };
    let warm = seeds
        .iter()
        .filter_map(|s| as_start(&s.channel, d_in, n_r))
        .collect();
    let min = minimize_unitary(&objective, warm, cfg);
    let map = RecoveryMap {
        channel: KrausChannel::new(objective.operators(&min.unitary))?.trimmed(),
        method: RecoveryMethod::Optimized,
    };
    let fidelity = verify_recovery(channel, &map, input)?;
    Ok((map, fidelity))
}

/// How well the channel can be undone when it is only nearly correctable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    /// `S^Q − I`.
    pub epsilon: f64,
    /// `max(0, 1 − 2√ε)`.
    pub paper_bound: f64,
    pub achieved_fidelity: f64,
    pub method: RecoveryMethod,
    pub bound_met: bool,
}

/// Best fidelity over the Petz recovery, the Schmidt-block recovery (when it
/// exists) and an optimized recovery, compared with `1 − 2√ε`.
pub fn approx_report(
    channel: &KrausChannel,
    input: &PureState,
    cfg: &OptimizerConfig,
) -> Result<(ApproxReport, RecoveryMap)> {
    let (_, q) = split_input(channel, input)?;
    let joint = input.to_density();
    let rho_q = partial_trace(&joint, &[q])?;
    let out = channel.apply_extended(&joint, q)?;
    let coherent = vn_entropy(&partial_trace(&out, &[q])?) - vn_entropy(&out);
    let epsilon = vn_entropy(&rho_q) - coherent;
    let paper_bound = (1.0 - 2.0 * epsilon.max(0.0).sqrt()).max(0.0);

    let mut candidates = vec![petz_recovery(channel, &rho_q)?];
    if let Ok(block) = synthesize_recovery(channel, input) {
        candidates.push(block);
    }
    let mut best: Option<(RecoveryMap, f64)> = None;
    for c in candidates.iter() {
        let f = verify_recovery(channel, c, input)?;
        if best.as_ref().is_none_or(|(_, bf)| f > *bf) {
            best = Some((c.clone(), f));
        }
    }
    let seeds: Vec<&RecoveryMap> = candidates.iter().collect();
    let (refined, f) = refine_recovery(channel, input, &seeds, cfg)?;
    let (map, achieved) = match best {
        Some((m, bf)) if bf >= f => (m, bf),
        _ => (refined, f),
    };
    Ok((
        ApproxReport {
            epsilon,
            paper_bound,
            achieved_fidelity: achieved,
            method: map.method,
            bound_met: achieved >= paper_bound,
        },
        map,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::{binary_entropy, max_abs};
    use crate::random::{random_channel, random_unitary_channel, seeded};

    #[test]
    fn identity_recovers_with_identity() {
        let bell = families::bell_state();
        let id = KrausChannel::identity(2);
        let rec = synthesize_recovery(&id, &bell).unwrap();
        assert!(rec.channel.same_channel(&id));
        assert!((verify_recovery(&id, &rec, &bell).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_is_undone_by_its_inverse() {
        let u = random_unitary_channel(2, &mut seeded(1));
        let bell = families::bell_state();
        let rec = synthesize_recovery(&u, &bell).unwrap();
        let inverse = KrausChannel::new(vec![u.operators()[0].adjoint()]).unwrap();
        assert!(rec.channel.same_channel(&inverse));
    }

    #[test]
    fn repetition_code_both_recoveries() {
        let ch = families::repetition_bit_flip(0.3);
        let psi = families::repetition_state();
        let block = synthesize_recovery(&ch, &psi).unwrap();
        assert!(verify_recovery(&ch, &block, &psi).unwrap() >= 1.0 - 1e-9);
        let rho_q = partial_trace(&psi.to_density(), &["Q"]).unwrap();
        let petz = petz_recovery(&ch, &rho_q).unwrap();
        assert!(petz.channel.validate().is_ok());
        assert!(verify_recovery(&ch, &petz, &psi).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn depolarized_bell_is_not_recoverable() {
        let ch = families::depolarizing(1.0);
        let bell = families::bell_state();
        assert!(matches!(
            synthesize_recovery(&ch, &bell),
            Err(Error::NotCorrectable(_))
        ));
        let rho_q = partial_trace(&bell.to_density(), &["Q"]).unwrap();
        let petz = petz_recovery(&ch, &rho_q).unwrap();
        assert!(verify_recovery(&ch, &petz, &bell).unwrap() <= 0.25 + 1e-9);
        let mut rng = seeded(4);
        for _ in 0..20 {
            let guess = RecoveryMap {
                channel: random_channel(2, 2, 3, &mut rng),
                method: RecoveryMethod::Optimized,
            };
            assert!(verify_recovery(&ch, &guess, &bell).unwrap() <= 0.25 + 1e-9);
        }
    }

    #[test]
    fn optimizer_gradient_matches() {
        let ch = families::amplitude_damping(0.3);
        let rho = families::bell_state().to_density();
        let rho_q = partial_trace(&rho, &["Q"]).unwrap();
        let obj = RecoveryObjective {
            products: ch.operators().iter().map(|a| a * rho_q.matrix()).collect(),
            d_in: 2,
            d_out: 2,
            n_r: 4,
        };
        let u = crate::random::haar_unitary(8, &mut seeded(2));
        let g = crate::random::ginibre(8, 8, &mut seeded(3));
        let dir = (&g - g.adjoint()) * cr(0.5);
        let (a, n) = crate::optimize::directional_derivatives(&obj, &u, &dir, 1e-6);
        assert!((a - n).abs() < 1e-7, "{a} vs {n}");
    }

    #[test]
    fn approx_report_examples() {
        let cfg = OptimizerConfig {
            restarts: 4,
            ..Default::default()
        };
        let bell = families::bell_state();
        let (r, _) = approx_report(&KrausChannel::identity(2), &bell, &cfg).unwrap();
        assert!(r.epsilon.abs() < 1e-12);
        assert!((r.achieved_fidelity - 1.0).abs() < 1e-9);

        let (r, _) = approx_report(&families::dephasing(0.01), &bell, &cfg).unwrap();
        assert!((r.epsilon - binary_entropy(0.01)).abs() < 1e-9);
        assert!((r.paper_bound - (1.0 - 2.0 * binary_entropy(0.01).sqrt())).abs() < 1e-9);
        assert!(r.bound_met);
        assert!((r.achieved_fidelity - 0.99).abs() < 1e-6);

        let (r, _) = approx_report(&families::dephasing(0.5), &bell, &cfg).unwrap();
        assert_eq!(r.paper_bound, 0.0);
    }

    #[test]
    fn local_recovery_composes() {
        let mut rng = seeded(8);
        let u = random_unitary_channel(2, &mut rng);
        let ch_q = families::repetition_bit_flip(0.2);
        let psi = families::repetition_state();
        let (d_r, d_q) = recover_local(&u, &ch_q, &psi).unwrap();
        let f = verify_local(&u, &ch_q, &d_r, &d_q, &psi).unwrap();
        assert!(f >= 1.0 - 1e-8);
        let inv = KrausChannel::new(vec![u.operators()[0].adjoint()]).unwrap();
        assert!(max_abs(&(inv.choi().matrix - d_r.channel.choi().matrix)) < 1e-8);
    }
}
