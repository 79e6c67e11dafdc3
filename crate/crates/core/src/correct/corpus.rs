//! Generated instances for checking the correctability criteria against each other.

use rand::Rng;

use crate::channel::KrausChannel;
use crate::linalg::{cr, CMatrix, CVector, PureState, SystemShape};
use crate::random::{
    derive_seed, haar_unitary, random_channel, random_probabilities, random_pure, seeded,
};

#[derive(Debug, Clone)]
pub struct Instance {
    pub channel: KrausChannel,
    /// Pure state on `(R, Q)`.
    pub input: PureState,
    /// Whether the instance was built to be perfectly correctable.
    pub correctable: bool,
}

/// Cyclic shift `|i⟩ ↦ |i + s mod n⟩`.
fn shift(n: usize, s: usize) -> CMatrix {
    CMatrix::from_fn(
        n,
        n,
        |r, c| if r == (c + s) % n { cr(1.0) } else { cr(0.0) },
    )
}

/// Random `k`-dimensional code in `Q = C^n` and `errors` unitary errors whose
/// images of the code are mutually orthogonal; the reference has dimension `k`.
/// Needs `k · errors ≤ n`.
pub fn code_instance<R: Rng + ?Sized>(k: usize, n: usize, errors: usize, rng: &mut R) -> Instance {
    assert!(k * errors <= n, "code blocks must fit in the system");
    let w = haar_unitary(n, rng);
    let weights = random_probabilities(errors, rng);
    let operators = (0..errors)
        .map(|l| {
            let mut inner = CMatrix::identity(n, n);
            inner
                .view_mut((0, 0), (k, k))
                .copy_from(&haar_unitary(k, rng));
            &w * shift(n, l * k) * inner * w.adjoint() * cr(weights[l].sqrt())
        })
        .collect();
    let channel = KrausChannel::new(operators).expect("weighted unitaries are complete");
    let mixing = haar_unitary(errors, rng);
    let channel = channel
        .mix_representation(&mixing)
        .expect("haar mixing is unitary");

    let code = random_pure(
        SystemShape::new(vec![k, k], vec!["R", "C"]).expect("valid shape"),
        rng,
    );
    let mut amps = CVector::zeros(k * n);
    for a in 0..k {
        for c in 0..k {
            let x = code.amplitudes()[a * k + c];
            for q in 0..n {
                amps[a * n + q] += x * w[(q, c)];
            }
        }
    }
    let input = PureState::normalized(
        amps,
        SystemShape::new(vec![k, n], vec!["R", "Q"]).expect("valid shape"),
    )
    .expect("isometric image of a unit vector");
    Instance {
        channel,
        input,
        correctable: true,
    }
}

/// Random channel with at least two Kraus operators on a random entangled input.
pub fn generic_instance<R: Rng + ?Sized>(
    d_r: usize,
    d_q: usize,
    kraus: usize,
    rng: &mut R,
) -> Instance {
    let channel = random_channel(d_q, d_q, kraus.max(2), rng);
    let input = random_pure(
        SystemShape::new(vec![d_r, d_q], vec!["R", "Q"]).expect("valid shape"),
        rng,
    );
    Instance {
        channel,
        input,
        correctable: false,
    }
}

/// `half` correctable code instances followed by `half` generic ones, all
/// with total dimension at most 16.
pub fn mixed_corpus(seed: u64, half: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(2 * half);
    for i in 0..half {
        let mut rng = seeded(derive_seed(seed, i as u64));
        let (k, n, errors) = match i % 4 {
            0 => (2, 4, 2),
            1 => (2, 6, 3),
            2 => (2, 8, 4),
            _ => (3, 6, 2),
        };
        out.push(code_instance(k, n, errors, &mut rng));
    }
    for i in 0..half {
        let mut rng = seeded(derive_seed(seed ^ 0x5eed, i as u64));
        let d_q = 2 + i % 3;
        let d_r = 2 + (i / 3) % 2;
        out.push(generic_instance(d_r, d_q, 2 + i % 2, &mut rng));
    }
    out
}
