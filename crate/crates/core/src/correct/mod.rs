//! Perfect-correctability certificates and recovery maps.
//!
//! Inputs are pure states on two factors `(R, Q)`; the channel acts on the
//! second factor. The primary verdict is `S^Q − I < tol`. The entanglement
//! of formation, the `R`–`E` mutual information and the Knill–Laflamme
//! residual are computed alongside it, and a verdict that disagrees with the
//! primary one is reported as [`Error::CertificateDisagreement`].

pub mod corpus;
mod recovery;

pub use recovery::{
    approx_report, petz_recovery, recover_local, refine_recovery, synthesize_recovery,
    verify_local, verify_recovery, ApproxReport, RecoveryMap, RecoveryMethod,
};

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    mutual_information, partial_trace, support_projector, vn_entropy, CMatrix, DensityMatrix,
    PureState,
};
use crate::measures::eof_mixed;
use crate::optimize::OptimizerConfig;

pub const DEFAULT_TOL: f64 = 1e-7;
/// The `R`–`E` product test passes below this mutual information (bits).
pub const MUTUAL_INFO_TOL: f64 = 1e-6;
/// The Knill–Laflamme test passes below this residual.
pub const KL_TOL: f64 = 1e-7;
/// When correctable, the entanglement upper bound must be this close to `S^Q`.
pub const EOF_GAP_TOL: f64 = 1e-4;

/// Outcome of [`certify`]; entropies in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub s_q: f64,
    pub coherent_info: f64,
    /// Upper bound from the optimizer; absent when skipped.
    pub eof_value: Option<f64>,
    pub eof_converged: Option<bool>,
    pub re_mutual_info: f64,
    pub kl_residual: f64,
    pub correctable: bool,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub tol: f64,
    pub optimizer: OptimizerConfig,
    pub compute_eof: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            optimizer: OptimizerConfig::default(),
            compute_eof: true,
        }
    }
}

/// Labels `(R, Q)` of a two-factor input, checking the channel's input dimension.
pub(crate) fn split_input<'a>(
    channel: &KrausChannel,
    input: &'a PureState,
) -> Result<(&'a str, &'a str)> {
    let shape = input.shape();
    if shape.len() != 2 {
        return Err(Error::InvalidShape(format!(
            "input must have two factors (reference, system), got {shape}"
        )));
    }
    let (r, q) = (shape.labels()[0].as_str(), shape.labels()[1].as_str());
    if shape.dims()[1] != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            found: shape.dims()[1],
        });
    }
    Ok((r, q))
}

/// A label not already used by `input`, starting from `base`.
pub(crate) fn fresh_label(input: &PureState, base: &str) -> String {
    let mut label = base.to_string();
    while input.shape().contains(&label) {
        label.push('\'');
    }
    label
}

/// Joint state of the reference and the environment after the channel,
/// `Tr_{Q'} (I ⊗ U^{QE})(|Ψ⟩⟨Ψ| ⊗ |0⟩⟨0|)(I ⊗ U^{QE})†`. The environment is labeled `E`.
pub fn re_output(channel: &KrausChannel, input: &PureState) -> Result<DensityMatrix> {
    let (r, q) = split_input(channel, input)?;
    let env = fresh_label(input, "E");
    let out = channel.dilate().evolve(input, q, &env)?;
    partial_trace(&out.to_density(), &[r, env.as_str()])
}

/// `max_{j,k} ‖P A_j†A_k P − λ_jk P‖_F` with `λ_jk = Tr(P A_j†A_k P) / Tr P`
/// and `P` the support projector of `ρ^Q`.
pub fn kl_residual(channel: &KrausChannel, rho_q: &DensityMatrix) -> Result<f64> {
    if rho_q.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            found: rho_q.dim(),
        });
    }
    let p = support_projector(rho_q.matrix(), 1e-10);
    let rank = p.trace().re;
    let ops: Vec<CMatrix> = channel.operators().iter().map(|a| a * &p).collect();
    let mut worst = 0.0f64;
    for aj in &ops {
        for ak in &ops {
            let x = aj.adjoint() * ak;
            let lambda = x.trace() / rank;
            worst = worst.max((x - &p * lambda).norm());
        }
    }
    Ok(worst)
}

/// Certify whether `channel` acting on the second factor of `input` can be
/// perfectly undone.
pub fn certify(
    channel: &KrausChannel,
    input: &PureState,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let (r, q) = split_input(channel, input)?;
    let joint = input.to_density();
    let rho_q = partial_trace(&joint, &[q])?;
    let s_q = vn_entropy(&rho_q);
    let out = channel.apply_extended(&joint, q)?;
    let coherent_info = vn_entropy(&partial_trace(&out, &[q])?) - vn_entropy(&out);
    let re_mutual_info = mutual_information(&re_output(channel, input)?, &[r])?;
    let kl_residual = kl_residual(channel, &rho_q)?;
    let correctable = s_q - coherent_info < opts.tol;

    let (eof_value, eof_converged) = if opts.compute_eof {
        let e = eof_mixed(&out, &[r], &opts.optimizer)?;
        (Some(e.value), Some(e.converged))
    } else {
        (None, None)
    };

    let cert = Certificate {
        s_q,
        coherent_info,
        eof_value,
        eof_converged,
        re_mutual_info,
        kl_residual,
        correctable,
        tolerance: opts.tol,
    };
    check_agreement(&cert)?;
    Ok(cert)
}

fn check_agreement(cert: &Certificate) -> Result<()> {
    let gap = cert.s_q - cert.coherent_info;
    if (cert.re_mutual_info < MUTUAL_INFO_TOL) != cert.correctable {
        return Err(Error::CertificateDisagreement(format!(
            "S^Q - I = {gap:.3e} but R-E mutual information = {:.3e}",
            cert.re_mutual_info
        )));
    }
    if (cert.kl_residual < KL_TOL) != cert.correctable {
        return Err(Error::CertificateDisagreement(format!(
            "S^Q - I = {gap:.3e} but Knill-Laflamme residual = {:.3e}",
            cert.kl_residual
        )));
    }
    if let Some(e) = cert.eof_value {
        if cert.correctable && cert.s_q - e > EOF_GAP_TOL {
            return Err(Error::CertificateDisagreement(format!(
                "correctable but S^Q - E = {:.3e}",
                cert.s_q - e
            )));
        }
    }
    Ok(())
}

/// `input` with its two factors swapped, so that a channel on the reference
/// can be treated as acting on the system.
pub(crate) fn swapped(input: &PureState) -> Result<PureState> {
    let labels = input.shape().labels();
    if labels.len() != 2 {
        return Err(Error::InvalidShape(format!(
            "input must have two factors, got {}",
            input.shape()
        )));
    }
    input.permute(&[labels[1].as_str(), labels[0].as_str()])
}

/// Certificate for independent noise `channel_r` on the reference and
/// `channel_q` on the system. Correctable iff each one-sided stage is. The
/// combined certificate reports the weaker stage: the smaller coherent
/// information and entanglement bound, and the larger product-test and
/// Knill-Laflamme residuals.
pub fn certify_local(
    channel_r: &KrausChannel,
    channel_q: &KrausChannel,
    input: &PureState,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let stage_q = certify(channel_q, input, opts)?;
    let stage_r = certify(channel_r, &swapped(input)?, opts)?;
    let min_opt = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(x, y)| x.min(y));
    Ok(Certificate {
        s_q: stage_q.s_q,
        coherent_info: stage_q.coherent_info.min(stage_r.coherent_info),
        eof_value: min_opt(stage_q.eof_value, stage_r.eof_value),
        eof_converged: stage_q
            .eof_converged
            .zip(stage_r.eof_converged)
            .map(|(a, b)| a && b),
        re_mutual_info: stage_q.re_mutual_info.max(stage_r.re_mutual_info),
        kl_residual: stage_q.kl_residual.max(stage_r.kl_residual),
        correctable: stage_q.correctable && stage_r.correctable,
        tolerance: opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::random::{random_unitary_channel, seeded};

    fn quick() -> CertifyOptions {
        CertifyOptions {
            optimizer: OptimizerConfig {
                restarts: 4,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn identity_certifies() {
        let c = certify(
            &KrausChannel::identity(2),
            &families::bell_state(),
            &quick(),
        )
        .unwrap();
        assert!(c.correctable);
        assert!((c.s_q - 1.0).abs() < 1e-12);
        assert!((c.coherent_info - 1.0).abs() < 1e-12);
        assert!((c.eof_value.unwrap() - 1.0).abs() < 1e-9);
        assert!(c.re_mutual_info.abs() < 1e-12);
    }

    #[test]
    fn depolarizing_does_not_certify() {
        let c = certify(
            &families::depolarizing(1.0),
            &families::bell_state(),
            &quick(),
        )
        .unwrap();
        assert!(!c.correctable);
        assert!((c.coherent_info + 1.0).abs() < 1e-9);
        assert!(c.eof_value.unwrap() < 1e-4);
        assert!((c.re_mutual_info - 2.0).abs() < 1e-9);
    }

    #[test]
    fn repetition_code_certifies() {
        for p in [0.1, 0.3, 0.9] {
            let c = certify(
                &families::repetition_bit_flip(p),
                &families::repetition_state(),
                &quick(),
            )
            .unwrap();
            assert!(c.correctable, "p = {p}");
            assert!(c.kl_residual < 1e-12);
        }
    }

    #[test]
    fn re_output_examples() {
        let bell = families::bell_state();
        let id = re_output(&KrausChannel::identity(2), &bell).unwrap();
        assert_eq!(id.shape().labels(), ["R", "E"]);
        let rho_r = partial_trace(&bell.to_density(), &["R"]).unwrap();
        let env0 = PureState::basis(crate::linalg::SystemShape::single("E", 1).unwrap(), 0)
            .unwrap()
            .to_density();
        assert!(id.distance(&rho_r.tensor(&env0).unwrap()) < 1e-12);

        let dep = re_output(&families::depolarizing(1.0), &bell).unwrap();
        assert!((mutual_information(&dep, &["R"]).unwrap() - 2.0).abs() < 1e-9);
        let deph = re_output(&families::dephasing(0.5), &bell).unwrap();
        assert!((mutual_information(&deph, &["R"]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn local_certificates() {
        let bell = families::bell_state();
        let id = KrausChannel::identity(2);
        assert!(
            certify_local(&id, &id, &bell, &quick())
                .unwrap()
                .correctable
        );
        let mut rng = seeded(3);
        let u = random_unitary_channel(2, &mut rng);
        let v = random_unitary_channel(2, &mut rng);
        assert!(certify_local(&u, &v, &bell, &quick()).unwrap().correctable);
        let c = certify_local(&families::depolarizing(0.5), &id, &bell, &quick()).unwrap();
        assert!(!c.correctable);
    }

    #[test]
    fn shape_errors() {
        let three = PureState::basis(
            crate::linalg::SystemShape::new(vec![2, 2, 2], vec!["A", "B", "C"]).unwrap(),
            0,
        )
        .unwrap();
        assert!(certify(&KrausChannel::identity(2), &three, &quick()).is_err());
        assert!(matches!(
            certify(
                &KrausChannel::identity(3),
                &families::bell_state(),
                &quick()
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
