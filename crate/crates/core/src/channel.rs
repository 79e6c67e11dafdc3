//! Trace-preserving completely positive maps in operator-sum form, their
//! unitary dilations, and the induced channel to the environment.

use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal, cr, max_abs, unitary_deviation, CMatrix, CVector, DensityMatrix,
    PureState, SystemShape,
};
use crate::measures::Ensemble;

/// Completeness tolerance for `Σ A_k†A_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Two channels are equal when their Choi matrices agree to this max-entry distance.
pub const CHANNEL_EQ_TOL: f64 = 1e-9;
/// Kraus operators with smaller Frobenius norm are dropped before dilation.
pub const ZERO_KRAUS_TOL: f64 = 1e-12;
/// Ensemble members with smaller weight are dropped.
pub const ENSEMBLE_CUTOFF: f64 = 1e-14;

/// `ρ ↦ Σ_k A_k ρ A_k†` with `d_out × d_in` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
}

impl KrausChannel {
    /// Build and check completeness.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(operators)?;
        ch.validate()?;
        Ok(ch)
    }

    /// Build after structural checks only (nonempty, shared dimensions);
    /// completeness is left to [`KrausChannel::validate`].
    pub fn new_unchecked(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one operator".into()))?;
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidArgument("empty kraus operator".into()));
        }
        for op in &operators {
            if op.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch {
                    expected: out_dim * in_dim,
                    found: op.nrows() * op.ncols(),
                });
            }
        }
        Ok(Self {
            operators,
            in_dim,
            out_dim,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            operators: vec![CMatrix::identity(d, d)],
            in_dim: d,
            out_dim: d,
        }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |Σ A_k†A_k − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.in_dim, self.in_dim);
        for a in &self.operators {
            acc += a.adjoint() * a;
        }
        max_abs(&(acc - CMatrix::identity(self.in_dim, self.in_dim)))
    }

    pub fn validate(&self) -> Result<()> {
        let dev = self.completeness_deviation();
        if dev > COMPLETENESS_TOL {
            Err(Error::CompletenessViolation(dev))
        } else {
            Ok(())
        }
    }

    fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for a in &self.operators {
            out += a * rho * a.adjoint();
        }
        out
    }

    /// `Σ_k A_k ρ A_k†`. A single-factor input keeps its label; otherwise the
    /// whole input is treated as one system and the output is labeled `out`
    /// unless the dimension is unchanged.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: rho.dim(),
            });
        }
        let shape = if self.in_dim == self.out_dim {
            rho.shape().clone()
        } else if rho.shape().len() == 1 {
            rho.shape().with_dim(0, self.out_dim)
        } else {
            SystemShape::single("out", self.out_dim)?
        };
        Ok(DensityMatrix::from_computed(
            self.apply_matrix(rho.matrix()),
            shape,
        ))
    }

    /// `(I ⊗ E)(ρ)` with the channel acting on the factor `target`.
    pub fn apply_extended(&self, joint: &DensityMatrix, target: &str) -> Result<DensityMatrix> {
        let shape = joint.shape();
        let pos = shape.index_of(target)?;
        if shape.dims()[pos] != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: shape.dims()[pos],
            });
        }
        let out_shape = shape.with_dim(pos, self.out_dim);
        let n = out_shape.total_dim();
        let mut out = CMatrix::zeros(n, n);
        for a in &self.operators {
            let lifted = lift(a, shape, pos);
            out += &lifted * joint.matrix() * lifted.adjoint();
        }
        Ok(DensityMatrix::from_computed(out, out_shape))
    }

    /// `{B_k = Σ_l V_kl A_l}`; the operator list is zero-padded to the size of `V`.
    pub fn mix_representation(&self, v: &CMatrix) -> Result<KrausChannel> {
        let m = v.nrows();
        if v.ncols() != m || m < self.len() {
            return Err(Error::InvalidArgument(format!(
                "mixing matrix must be square with size ≥ {}",
                self.len()
            )));
        }
        let dev = unitary_deviation(v);
        if dev > 1e-9 {
            return Err(Error::NonUnitary(dev));
        }
        let operators = (0..m)
            .map(|k| {
                self.operators
                    .iter()
                    .enumerate()
                    .fold(CMatrix::zeros(self.out_dim, self.in_dim), |acc, (l, a)| {
                        acc + a * v[(k, l)]
                    })
            })
            .collect();
        Ok(Self {
            operators,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        })
    }

    /// Drop operators with Frobenius norm below [`ZERO_KRAUS_TOL`] (keeps at least one).
    pub fn trimmed(&self) -> KrausChannel {
        let mut ops: Vec<CMatrix> = self
            .operators
            .iter()
            .filter(|a| a.norm() >= ZERO_KRAUS_TOL)
            .cloned()
            .collect();
        if ops.is_empty() {
            ops.push(self.operators[0].clone());
        }
        Self {
            operators: ops,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        }
    }

    /// Unnormalized Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` on `in ⊗ out`.
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.in_dim * self.out_dim;
        let mut m = CMatrix::zeros(n, n);
        for a in &self.operators {
            let v = CVector::from_fn(n, |idx, _| a[(idx % self.out_dim, idx / self.out_dim)]);
            m += &v * v.adjoint();
        }
        ChoiMatrix {
            matrix: m,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
        }
    }

    /// Max-entry Choi distance; infinite when dimensions differ.
    pub fn distance(&self, other: &KrausChannel) -> f64 {
        self.choi().distance(&other.choi())
    }

    pub fn same_channel(&self, other: &KrausChannel) -> bool {
        self.distance(other) < CHANNEL_EQ_TOL
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel> {
        if after.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                found: after.in_dim,
            });
        }
        let mut ops = Vec::with_capacity(self.len() * after.len());
        for b in &after.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        Ok(Self {
            operators: ops,
            in_dim: self.in_dim,
            out_dim: after.out_dim,
        })
    }

    /// `self ⊗ other` acting on a two-factor system.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.len() * other.len());
        for a in &self.operators {
            for b in &other.operators {
                ops.push(a.kronecker(b));
            }
        }
        Self {
            operators: ops,
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
        }
    }

    /// Stinespring dilation with `|0^E⟩` the first environment basis state.
    ///
    /// Zero operators are trimmed first so `env_dim` equals the number of
    /// remaining operators. The fixed columns `U|q,0⟩ = Σ_k A_k|q⟩|k⟩` are
    /// completed to a unitary by Gram-Schmidt over the standard basis in
    /// index order. The system factor has dimension `max(d_in, d_out)`.
    pub fn dilate(&self) -> UnitaryDilation {
        let ch = self.trimmed();
        let env_dim = ch.len();
        let sys_dim = ch.in_dim.max(ch.out_dim);
        let big = sys_dim * env_dim;
        let env_init = 0;
        let mut fixed = CMatrix::zeros(big, ch.in_dim);
        for (k, a) in ch.operators.iter().enumerate() {
            for q in 0..ch.in_dim {
                for qp in 0..ch.out_dim {
                    fixed[(qp * env_dim + k, q)] = a[(qp, q)];
                }
            }
        }
        let full = complete_orthonormal(&fixed, big);
        let fixed_positions: Vec<usize> = (0..ch.in_dim).map(|q| q * env_dim + env_init).collect();
        let mut u = CMatrix::zeros(big, big);
        for (q, &col) in fixed_positions.iter().enumerate() {
            u.set_column(col, &full.column(q));
        }
        let mut extra = ch.in_dim;
        for col in 0..big {
            if !fixed_positions.contains(&col) {
                u.set_column(col, &full.column(extra));
                extra += 1;
            }
        }
        UnitaryDilation {
            joint_unitary: u,
            sys_dim,
            in_dim: ch.in_dim,
            out_dim: ch.out_dim,
            env_dim,
            env_init,
            env_basis: CMatrix::identity(env_dim, env_dim),
        }
    }

    /// The channel to the environment, `ρ ↦ Tr_Q[U(ρ ⊗ |0⟩⟨0|)U†]`, with
    /// operators `(F_j)_{k,i} = (A_k)_{j,i}`.
    pub fn complementary(&self) -> KrausChannel {
        let n = self.len();
        let operators = (0..self.out_dim)
            .map(|j| CMatrix::from_fn(n, self.in_dim, |k, i| self.operators[k][(j, i)]))
            .collect();
        Self {
            operators,
            in_dim: self.in_dim,
            out_dim: n,
        }
    }

    /// `{p_k = Tr A_kρA_k†, ρ_k = A_kρA_k†/p_k}`, dropping `p_k` below [`ENSEMBLE_CUTOFF`].
    pub fn output_ensemble(&self, rho: &DensityMatrix) -> Result<Ensemble> {
        let out = self.apply(rho)?;
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for a in &self.operators {
            let m = a * rho.matrix() * a.adjoint();
            let p = m.trace().re;
            if p < ENSEMBLE_CUTOFF {
                continue;
            }
            weights.push(p);
            states.push(DensityMatrix::from_computed(m / cr(p), out.shape().clone()));
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ensemble::new(weights, states)
    }
}

/// `I_before ⊗ op ⊗ I_after` with `op` placed at factor `pos` of `shape`.
pub(crate) fn lift(op: &CMatrix, shape: &SystemShape, pos: usize) -> CMatrix {
    let before: usize = shape.dims()[..pos].iter().product();
    let after: usize = shape.dims()[pos + 1..].iter().product();
    let left = CMatrix::identity(before, before).kronecker(op);
    left.kronecker(&CMatrix::identity(after, after))
}

/// Choi matrix on `in ⊗ out`; its partial trace over `out` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub matrix: CMatrix,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl ChoiMatrix {
    pub fn distance(&self, other: &ChoiMatrix) -> f64 {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }
}

/// Joint unitary `U^{QE}` on `Q ⊗ E` realizing a channel from the environment state `|env_init⟩`.
///
/// Flat index of `|q, e⟩` is `q · env_dim + e`. When input and output
/// dimensions differ, `Q` is padded to the larger one.
#[derive(Debug, Clone)]
pub struct UnitaryDilation {
    pub joint_unitary: CMatrix,
    pub sys_dim: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub env_dim: usize,
    pub env_init: usize,
    /// Orthonormal environment basis `|k^E⟩` as columns.
    pub env_basis: CMatrix,
}

impl UnitaryDilation {
    /// Kraus operators `A_k|ψ⟩ = ⟨b_k|U|ψ, 0⟩` for the basis given as columns of `basis`.
    pub fn kraus(&self, basis: &CMatrix) -> Result<KrausChannel> {
        if basis.nrows() != self.env_dim || basis.ncols() != self.env_dim {
            return Err(Error::DimensionMismatch {
                expected: self.env_dim,
                found: basis.nrows(),
            });
        }
        let dev = unitary_deviation(basis);
        if dev > 1e-9 {
            return Err(Error::NotOrthonormal(dev));
        }
        let u = &self.joint_unitary;
        let de = self.env_dim;
        let operators = (0..de)
            .map(|k| {
                CMatrix::from_fn(self.out_dim, self.in_dim, |qp, q| {
                    (0..de).fold(cr(0.0), |acc, e| {
                        acc + basis[(e, k)].conj() * u[(qp * de + e, q * de + self.env_init)]
                    })
                })
            })
            .collect();
        KrausChannel::new(operators)
    }

    /// Kraus operators in the stored environment basis.
    pub fn kraus_standard(&self) -> KrausChannel {
        self.kraus(&self.env_basis)
            .expect("stored environment basis is orthonormal")
    }

    /// The isometry `|q⟩ ↦ U|q, 0⟩`, restricted to output rows `q' < out_dim`.
    pub fn isometry(&self) -> CMatrix {
        let de = self.env_dim;
        CMatrix::from_fn(self.out_dim * de, self.in_dim, |row, q| {
            self.joint_unitary[(row, q * de + self.env_init)]
        })
    }

    /// Evolve `|ψ⟩ ⊗ |0^E⟩` under `I ⊗ U^{QE}` with `Q = target`; the
    /// environment factor `env_label` is appended after all others.
    pub fn evolve(&self, psi: &PureState, target: &str, env_label: &str) -> Result<PureState> {
        let shape = psi.shape();
        let pos = shape.index_of(target)?;
        if shape.dims()[pos] != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: shape.dims()[pos],
            });
        }
        let v = self.isometry();
        let env = SystemShape::single(env_label, self.env_dim)?;
        let out_shape = shape.with_dim(pos, self.out_dim).concat(&env)?;
        let before: usize = shape.dims()[..pos].iter().product();
        let after: usize = shape.dims()[pos + 1..].iter().product();
        let de = self.env_dim;
        let amp = psi.amplitudes();
        let mut out = CVector::zeros(out_shape.total_dim());
        for b in 0..before {
            for a in 0..after {
                for q in 0..self.in_dim {
                    let x = amp[(b * self.in_dim + q) * after + a];
                    if x.norm() == 0.0 {
                        continue;
                    }
                    for qp in 0..self.out_dim {
                        for e in 0..de {
                            let idx = ((b * self.out_dim + qp) * after + a) * de + e;
                            out[idx] += v[(qp * de + e, q)] * x;
                        }
                    }
                }
            }
        }
        Ok(PureState::from_computed(out, out_shape))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::linalg::{partial_trace, vn_entropy, SystemShape};
    use crate::random::{haar_unitary, random_channel, random_density, seeded};

    fn qubit(label: &str) -> SystemShape {
        SystemShape::single(label, 2).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(KrausChannel::identity(2).validate().is_ok());
        assert!(families::bit_flip(0.5).validate().is_ok());
        let doubled =
            KrausChannel::new_unchecked(vec![CMatrix::identity(2, 2), CMatrix::identity(2, 2)])
                .unwrap();
        match doubled.validate() {
            Err(Error::CompletenessViolation(d)) => assert!((d - 1.0).abs() < 1e-12),
            other => panic!("expected completeness violation, got {other:?}"),
        }
        assert!(KrausChannel::new(vec![CMatrix::identity(2, 2); 2]).is_err());
    }

    #[test]
    fn apply_examples() {
        let rho = random_density(qubit("Q"), 2, &mut seeded(5));
        assert!(
            KrausChannel::identity(2)
                .apply(&rho)
                .unwrap()
                .distance(&rho)
                < 1e-15
        );

        let zero = PureState::basis(qubit("Q"), 0).unwrap().to_density();
        let out = families::depolarizing(1.0).apply(&zero).unwrap();
        assert!(out.distance(&DensityMatrix::maximally_mixed(qubit("Q"))) < 1e-15);

        let plus = families::plus_state("Q").to_density();
        let out = families::dephasing(0.5).apply(&plus).unwrap();
        assert!(out.distance(&DensityMatrix::maximally_mixed(qubit("Q"))) < 1e-15);

        let three = DensityMatrix::maximally_mixed(SystemShape::single("Q", 3).unwrap());
        assert!(matches!(
            KrausChannel::identity(2).apply(&three),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_extended_examples() {
        let bell = families::bell_state().to_density();
        let same = KrausChannel::identity(2)
            .apply_extended(&bell, "Q")
            .unwrap();
        assert!(same.distance(&bell) < 1e-15);
        let dep = families::depolarizing(1.0)
            .apply_extended(&bell, "Q")
            .unwrap();
        let shape = bell.shape().clone();
        assert!(dep.distance(&DensityMatrix::maximally_mixed(shape)) < 1e-15);
        assert!(matches!(
            families::depolarizing(1.0).apply_extended(&bell, "X"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn reference_marginal_is_untouched() {
        let mut rng = seeded(11);
        for _ in 0..10 {
            let psi = crate::random::random_pure(
                SystemShape::new(vec![3, 2], vec!["R", "Q"]).unwrap(),
                &mut rng,
            );
            let ch = random_channel(2, 2, 3, &mut rng);
            let rho = psi.to_density();
            let out = ch.apply_extended(&rho, "Q").unwrap();
            let before = partial_trace(&rho, &["R"]).unwrap();
            let after = partial_trace(&out, &["R"]).unwrap();
            assert!(before.distance(&after) < 1e-10);
        }
    }

    #[test]
    fn mixing_preserves_choi() {
        let ch = families::bit_flip(0.3);
        let same = ch.mix_representation(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(same.operators(), ch.operators());

        let s = 1.0 / 2f64.sqrt();
        let h = CMatrix::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)]);
        let mixed = ch.mix_representation(&h).unwrap();
        assert!(max_abs(&(&mixed.operators()[0] - &ch.operators()[0])) > 0.1);
        assert!(mixed.distance(&ch) < 1e-12);

        let v = haar_unitary(4, &mut seeded(2));
        let padded = ch.mix_representation(&v).unwrap();
        assert_eq!(padded.len(), 4);
        assert!(padded.distance(&ch) < 1e-12);

        let not_unitary = CMatrix::identity(2, 2) * cr(2.0);
        assert!(matches!(
            ch.mix_representation(&not_unitary),
            Err(Error::NonUnitary(_))
        ));
    }

    #[test]
    fn dilation_examples() {
        let d = KrausChannel::identity(2).dilate();
        assert_eq!(d.env_dim, 1);
        assert!(max_abs(&(&d.joint_unitary - CMatrix::identity(2, 2))) < 1e-15);

        let deph = families::dephasing(0.2);
        let back = deph.dilate().kraus_standard();
        assert!(back.distance(&deph) < 1e-9);

        let ad = families::amplitude_damping(0.4);
        assert!(unitary_deviation(&ad.dilate().joint_unitary) < 1e-9);

        let u = KrausChannel::new(vec![haar_unitary(3, &mut seeded(4))]).unwrap();
        let closed = u.dilate().kraus_standard();
        assert_eq!(closed.len(), 1);
        assert!(unitary_deviation(&closed.operators()[0]) < 1e-12);
    }

    #[test]
    fn dilation_with_zero_operator_is_trimmed() {
        let ch = KrausChannel::new(vec![CMatrix::identity(2, 2), CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(ch.dilate().env_dim, 1);
    }

    #[test]
    fn rotated_environment_basis_is_a_mixing() {
        let mut rng = seeded(9);
        let ch = random_channel(2, 2, 3, &mut rng);
        let d = ch.dilate();
        let w = haar_unitary(3, &mut rng);
        let rotated = d.kraus(&w).unwrap();
        let expected = ch.mix_representation(&w.adjoint()).unwrap();
        for (a, b) in rotated.operators().iter().zip(expected.operators()) {
            assert!(max_abs(&(a - b)) < 1e-9);
        }
        assert!(d.kraus(&(CMatrix::identity(3, 3) * cr(2.0))).is_err());
    }

    #[test]
    fn complementary_examples() {
        let u = KrausChannel::new(vec![haar_unitary(2, &mut seeded(8))]).unwrap();
        let comp = u.complementary();
        let rho = random_density(qubit("Q"), 2, &mut seeded(1));
        let env = comp.apply(&rho).unwrap();
        assert_eq!(env.dim(), 1);
        assert!((env.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(qubit("Q"));
        let env = families::depolarizing(1.0)
            .complementary()
            .apply(&mixed)
            .unwrap();
        assert!((vn_entropy(&env) - 2.0).abs() < 1e-12);

        let deph = families::dephasing(0.3);
        let env = deph.complementary().apply(&mixed).unwrap();
        let bell = families::bell_state().to_density();
        let out = deph.apply_extended(&bell, "Q").unwrap();
        assert!((vn_entropy(&env) - vn_entropy(&out)).abs() < 1e-9);
    }

    #[test]
    fn double_complement_is_original() {
        let ch = random_channel(2, 3, 2, &mut seeded(21));
        let back = ch.complementary().complementary();
        assert!(back.distance(&ch) < 1e-12);
    }

    #[test]
    fn output_ensemble_examples() {
        let rho = random_density(qubit("Q"), 2, &mut seeded(3));
        let e = KrausChannel::identity(2).output_ensemble(&rho).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e.weights()[0] - 1.0).abs() < 1e-15);

        let zero = PureState::basis(qubit("Q"), 0).unwrap().to_density();
        let e = families::bit_flip(0.3).output_ensemble(&zero).unwrap();
        assert!((e.weights()[0] - 0.7).abs() < 1e-12);
        assert!((e.weights()[1] - 0.3).abs() < 1e-12);
        let one = PureState::basis(qubit("Q"), 1).unwrap().to_density();
        assert!(e.states()[0].distance(&zero) < 1e-12);
        assert!(e.states()[1].distance(&one) < 1e-12);

        let plus = families::plus_state("Q").to_density();
        let deph = families::dephasing(0.25);
        let e = deph.output_ensemble(&plus).unwrap();
        assert!(e.average().unwrap().distance(&deph.apply(&plus).unwrap()) < 1e-12);
    }

    #[test]
    fn evolve_matches_kraus_sum() {
        let mut rng = seeded(17);
        let ch = random_channel(2, 3, 2, &mut rng);
        let psi = crate::random::random_pure(
            SystemShape::new(vec![2, 2], vec!["R", "Q"]).unwrap(),
            &mut rng,
        );
        let out = ch.dilate().evolve(&psi, "Q", "E").unwrap();
        assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
        let rq = partial_trace(&out.to_density(), &["R", "Q"]).unwrap();
        let direct = ch.apply_extended(&psi.to_density(), "Q").unwrap();
        assert!(rq.distance(&direct) < 1e-10);
    }
}
