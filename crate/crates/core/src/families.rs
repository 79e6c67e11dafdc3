//! Built-in channels and states: the standard single-qubit noise families,
//! the 3-qubit repetition code, and the Bell state.

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{c, cr, CMatrix, CVector, PureState, SystemShape};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "noise parameter {p} outside [0, 1]"
        )))
    }
}

/// `{√(1−p) I, √p Z}`.
pub fn dephasing(p: f64) -> KrausChannel {
    pauli_mixture(&[(1.0 - p, CMatrix::identity(2, 2)), (p, pauli_z())])
}

/// `{√(1−p) I, √p X}`.
pub fn bit_flip(p: f64) -> KrausChannel {
    pauli_mixture(&[(1.0 - p, CMatrix::identity(2, 2)), (p, pauli_x())])
}

/// `{√(1−3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}`; `p = 1` is the fully depolarizing channel.
pub fn depolarizing(p: f64) -> KrausChannel {
    pauli_mixture(&[
        (1.0 - 0.75 * p, CMatrix::identity(2, 2)),
        (0.25 * p, pauli_x()),
        (0.25 * p, pauli_y()),
        (0.25 * p, pauli_z()),
    ])
}

/// `{[[1,0],[0,√(1−γ)]], [[0,√γ],[0,0]]}`.
pub fn amplitude_damping(gamma: f64) -> KrausChannel {
    let a0 = CMatrix::from_row_slice(
        2,
        2,
        &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - gamma).max(0.0).sqrt())],
    );
    let a1 = CMatrix::from_row_slice(
        2,
        2,
        &[cr(0.0), cr(gamma.max(0.0).sqrt()), cr(0.0), cr(0.0)],
    );
    KrausChannel::new(vec![a0, a1]).expect("amplitude damping is complete")
}

fn pauli_mixture(terms: &[(f64, CMatrix)]) -> KrausChannel {
    let ops = terms
        .iter()
        .map(|(w, m)| m * cr(w.max(0.0).sqrt()))
        .collect();
    KrausChannel::new(ops).expect("pauli mixture is complete")
}

/// Bit flip on the first of three qubits: `{√(1−p) I₈, √p X⊗I⊗I}`.
pub fn repetition_bit_flip(p: f64) -> KrausChannel {
    let x1 = pauli_x()
        .kronecker(&CMatrix::identity(2, 2))
        .kronecker(&CMatrix::identity(2, 2));
    pauli_mixture(&[(1.0 - p, CMatrix::identity(8, 8)), (p, x1)])
}

/// `(|00⟩ + |11⟩)/√2` on `R ⊗ Q`.
pub fn bell_state() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(
        CVector::from_vec(vec![cr(s), cr(0.0), cr(0.0), cr(s)]),
        SystemShape::new(vec![2, 2], vec!["R", "Q"]).expect("valid shape"),
    )
    .expect("normalized")
}

/// `(|0⟩|000⟩ + |1⟩|111⟩)/√2` with `R` one qubit and `Q` three qubits (dimension 8).
pub fn repetition_state() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(16);
    v[0] = cr(s);
    v[8 + 7] = cr(s);
    PureState::new(
        v,
        SystemShape::new(vec![2, 8], vec!["R", "Q"]).expect("valid shape"),
    )
    .expect("normalized")
}

/// `|+⟩` on a single qubit.
pub fn plus_state(label: &str) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(
        CVector::from_vec(vec![cr(s), cr(s)]),
        SystemShape::single(label, 2).expect("valid shape"),
    )
    .expect("normalized")
}

/// Names accepted by [`channel_by_name`].
pub const CHANNEL_FAMILIES: &[&str] = &[
    "identity",
    "dephasing",
    "bitflip",
    "depolarizing",
    "amplitude-damping",
    "repetition",
];

/// Families swept by noise parameter.
pub const SWEEP_FAMILIES: &[&str] = &["dephasing", "bitflip", "depolarizing", "amplitude-damping"];

/// Look up a built-in channel family; `identity` ignores the parameter.
pub fn channel_by_name(name: &str, p: f64) -> Result<KrausChannel> {
    if name != "identity" {
        check_probability(p)?;
    }
    match name {
        "identity" => Ok(KrausChannel::identity(2)),
        "dephasing" => Ok(dephasing(p)),
        "bitflip" | "bit-flip" => Ok(bit_flip(p)),
        "depolarizing" => Ok(depolarizing(p)),
        "amplitude-damping" => Ok(amplitude_damping(p)),
        "repetition" => Ok(repetition_bit_flip(p)),
        other => Err(Error::InvalidArgument(format!(
            "unknown channel family `{other}`"
        ))),
    }
}

/// Parse `name` or `name:p`.
pub fn parse_channel_spec(spec: &str) -> Result<KrausChannel> {
    let (name, p) = match spec.split_once(':') {
        Some((n, p)) => (
            n,
            p.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad noise parameter `{p}`")))?,
        ),
        None => (spec, 0.0),
    };
    channel_by_name(name, p)
}

/// Built-in input state matched to a channel family: the repetition code for
/// `repetition`, otherwise the Bell state.
pub fn default_state_for(family: &str) -> PureState {
    if family.starts_with("repetition") {
        repetition_state()
    } else {
        bell_state()
    }
}

pub fn state_by_name(name: &str) -> Result<PureState> {
    match name {
        "bell" => Ok(bell_state()),
        "repetition" => Ok(repetition_state()),
        other => Err(Error::InvalidArgument(format!("unknown state `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_families_are_complete() {
        for name in CHANNEL_FAMILIES {
            for p in [0.0, 0.3, 1.0] {
                assert!(
                    channel_by_name(name, p).unwrap().validate().is_ok(),
                    "{name}"
                );
            }
        }
        assert!(channel_by_name("dephasing", 1.5).is_err());
        assert!(channel_by_name("nope", 0.1).is_err());
    }

    #[test]
    fn parse_specs() {
        let ch = parse_channel_spec("depolarizing:1.0").unwrap();
        assert_eq!(ch.len(), 4);
        assert!((ch.operators()[0][(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(parse_channel_spec("dephasing:x").is_err());
        assert_eq!(parse_channel_spec("identity").unwrap().len(), 1);
    }
}
