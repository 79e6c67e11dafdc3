//! Seeded generators for states, unitaries and channels.
//!
//! Everything takes an explicit RNG so results are reproducible from a `u64` seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channel::KrausChannel;
use crate::linalg::{c, cr, CMatrix, CVector, DensityMatrix, PureState, SystemShape};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for stream `index` of `seed`; stable across platforms.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of R's diagonal removed).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            cr(1.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// First `cols` columns of a Haar unitary of size `rows`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols);
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

pub fn random_pure<R: Rng + ?Sized>(shape: SystemShape, rng: &mut R) -> PureState {
    let v = CVector::from_fn(shape.total_dim(), |_, _| c(gaussian(rng), gaussian(rng)));
    PureState::normalized(v, shape).expect("gaussian vector is nonzero")
}

/// Random state of the given rank, `GG†/Tr(GG†)` with `G` Ginibre `d × rank`.
pub fn random_density<R: Rng + ?Sized>(
    shape: SystemShape,
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let g = ginibre(shape.total_dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / cr(tr), shape).expect("wishart matrix is a valid state")
}

/// Uniform point on the probability simplex.
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random channel with `n_kraus` operators, sliced from a Haar isometry
/// `C^{d_in} → C^{n_kraus} ⊗ C^{d_out}`.
pub fn random_channel<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> KrausChannel {
    assert!(
        n_kraus * d_out >= d_in,
        "isometry needs n_kraus·d_out ≥ d_in"
    );
    let v = haar_isometry(n_kraus * d_out, d_in, rng);
    let ops = (0..n_kraus)
        .map(|k| v.rows(k * d_out, d_out).into_owned())
        .collect();
    KrausChannel::new(ops).expect("isometry slices are complete")
}

/// Random unitary channel `{U}`.
pub fn random_unitary_channel<R: Rng + ?Sized>(d: usize, rng: &mut R) -> KrausChannel {
    KrausChannel::new(vec![haar_unitary(d, rng)]).expect("unitary is complete")
}
