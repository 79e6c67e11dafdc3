//! Minimization over the unitary group.
//!
//! Points are parametrized locally as `U·exp(X)` with `X` anti-Hermitian.
//! Each run is a Riemannian conjugate-gradient descent (Polak-Ribière+ with
//! Armijo backtracking along the geodesic `t ↦ U·exp(tD)`); the gradient is
//! the anti-Hermitian part of `U†G`, where `G` is the Euclidean gradient
//! supplied by the objective. Several independent starts are run in parallel
//! and the lowest value wins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{c, cr, eigh, CMatrix, HermitianEigen};
use crate::random::{derive_seed, haar_unitary, seeded};

/// Settings shared by every optimizer-backed measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Random starts, in addition to any analytic warm starts.
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Two runs agree when their final values differ by less than this.
    pub agreement_tol: f64,
    /// A run stops once its best value improved by less than `stall_tol`
    /// over the last `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
    /// Ensemble size override; `None` means `rank²`.
    pub ensemble_cap: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iter: 500,
            seed: 0,
            agreement_tol: 1e-5,
            stall_tol: 1e-9,
            stall_window: 50,
            ensemble_cap: None,
        }
    }
}

/// A smooth function of an `n × n` unitary.
pub trait UnitaryObjective: Sync {
    fn dim(&self) -> usize;

    /// Value and Euclidean gradient `G`, normalized so that
    /// `df = Re Tr(G† dU)` to first order.
    fn evaluate(&self, u: &CMatrix) -> (f64, CMatrix);

    fn value(&self, u: &CMatrix) -> f64 {
        self.evaluate(u).0
    }

    /// A value known to be unattainable from below; runs stop once within
    /// `stall_tol` of it.
    fn lower_bound(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// Outcome of a single descent.
#[derive(Debug, Clone)]
pub struct Run {
    pub value: f64,
    pub unitary: CMatrix,
    pub iterations: usize,
}

/// Best point over all starts.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub value: f64,
    pub unitary: CMatrix,
    pub restarts_used: usize,
    /// At least two independent starts reached the best value within `agreement_tol`.
    pub converged: bool,
    pub run_values: Vec<f64>,
}

fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Riemannian gradient `(U†G − G†U)/2` in the Lie algebra.
fn skew_gradient(u: &CMatrix, g: &CMatrix) -> CMatrix {
    let a = u.adjoint() * g;
    (&a - a.adjoint()) * cr(0.5)
}

/// `t ↦ exp(tD)` for a fixed anti-Hermitian `D`, via the spectrum of `iD`.
struct Geodesic {
    eig: HermitianEigen,
}

impl Geodesic {
    fn new(d: &CMatrix) -> Self {
        Self {
            eig: eigh(&(d * c(0.0, 1.0))),
        }
    }

    fn exp(&self, t: f64) -> CMatrix {
        let v = &self.eig.vectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eig.values.iter().enumerate() {
            // D = -iH, so exp(tD) = V diag(e^{-i t λ}) V†
            let phase = c(0.0, -t * lam).exp();
            for i in 0..v.nrows() {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * v.adjoint()
    }
}

/// Re-unitarize via QR with the phases of R's diagonal moved into Q.
fn retract(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let qr = u.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// One conjugate-gradient descent from `start`.
pub fn descend<O: UnitaryObjective + ?Sized>(
    objective: &O,
    start: CMatrix,
    cfg: &OptimizerConfig,
) -> Run {
    let mut u = start;
    let (mut f, g) = objective.evaluate(&u);
    let mut omega = skew_gradient(&u, &g);
    let mut dir = -omega.clone();
    let mut step = 0.0f64;
    let mut history = vec![f];
    let mut iterations = 0;
    let floor = objective.lower_bound();

    while iterations < cfg.max_iter {
        iterations += 1;
        let gnorm2 = re_inner(&omega, &omega);
        if gnorm2.sqrt() < 1e-12 || f - floor < cfg.stall_tol {
            break;
        }
        let mut slope = re_inner(&omega, &dir);
        let mut steepest = false;
        if slope >= 0.0 {
            dir = -omega.clone();
            slope = -gnorm2;
            steepest = true;
        }
        let dnorm = re_inner(&dir, &dir).sqrt();
        let geo = Geodesic::new(&dir);
        let mut t = if step > 0.0 { 2.0 * step } else { 0.5 / dnorm };
        let mut accepted = None;
        for _ in 0..50 {
            let candidate = &u * geo.exp(t);
            let fc = objective.value(&candidate);
            if fc <= f + 1e-4 * t * slope {
                accepted = Some((candidate, fc));
                break;
            }
            t *= 0.5;
            if t * dnorm < 1e-16 {
                break;
            }
        }
        let Some((next, _)) = accepted else {
            if steepest {
                break;
            }
            dir = -omega.clone();
            step = 0.0;
            continue;
        };
        step = t;
        u = if iterations % 25 == 0 {
            retract(&next)
        } else {
            next
        };
        let (fn_, gn) = objective.evaluate(&u);
        f = fn_;
        let omega_new = skew_gradient(&u, &gn);
        let beta = (re_inner(&omega_new, &(&omega_new - &omega)) / gnorm2).max(0.0);
        dir = -&omega_new + &dir * cr(beta);
        omega = omega_new;

        history.push(f);
        if history.len() > cfg.stall_window {
            let past = history[history.len() - 1 - cfg.stall_window];
            if past - f < cfg.stall_tol {
                break;
            }
        }
    }
    Run {
        value: f,
        unitary: u,
        iterations,
    }
}

/// Run `warm_starts` plus `cfg.restarts` Haar-random starts and keep the best.
pub fn minimize_unitary<O: UnitaryObjective + ?Sized>(
    objective: &O,
    warm_starts: Vec<CMatrix>,
    cfg: &OptimizerConfig,
) -> Minimum {
    let n = objective.dim();
    let mut starts = warm_starts;
    for i in 0..cfg.restarts {
        starts.push(haar_unitary(
            n,
            &mut seeded(derive_seed(cfg.seed, i as u64)),
        ));
    }
    if starts.is_empty() {
        starts.push(CMatrix::identity(n, n));
    }
    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|s| descend(objective, s, cfg))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(i, _)| i)
        .expect("at least one run");
    let best_value = runs[best].value;
    let agreeing = runs
        .iter()
        .filter(|r| r.value - best_value < cfg.agreement_tol)
        .count();
    Minimum {
        value: best_value,
        unitary: runs[best].unitary.clone(),
        restarts_used: runs.len(),
        converged: agreeing >= 2 || runs.len() == 1,
        run_values: runs.iter().map(|r| r.value).collect(),
    }
}

/// Central finite-difference check of an objective's gradient along a random
/// anti-Hermitian direction. Returns `(analytic, numeric)` directional derivatives.
pub fn directional_derivatives<O: UnitaryObjective + ?Sized>(
    objective: &O,
    u: &CMatrix,
    direction: &CMatrix,
    h: f64,
) -> (f64, f64) {
    let (_, g) = objective.evaluate(u);
    let analytic = re_inner(&skew_gradient(u, &g), direction);
    let geo = Geodesic::new(direction);
    let fp = objective.value(&(u * geo.exp(h)));
    let fm = objective.value(&(u * geo.exp(-h)));
    (analytic, (fp - fm) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitary_deviation};
    use crate::random::ginibre;

    /// `f(U) = −Re Tr(T† U)`, minimized at `U = T` for unitary `T`.
    struct Target(CMatrix);

    impl UnitaryObjective for Target {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn evaluate(&self, u: &CMatrix) -> (f64, CMatrix) {
            let v = -(self.0.adjoint() * u).trace().re;
            (v, -self.0.clone())
        }
    }

    fn random_skew(n: usize, seed: u64) -> CMatrix {
        let g = ginibre(n, n, &mut seeded(seed));
        (&g - g.adjoint()) * cr(0.5)
    }

    #[test]
    fn geodesic_stays_unitary() {
        let d = random_skew(4, 1);
        let e = Geodesic::new(&d).exp(0.7);
        assert!(unitary_deviation(&e) < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let t = haar_unitary(3, &mut seeded(2));
        let obj = Target(t);
        let u = haar_unitary(3, &mut seeded(3));
        let (a, n) = directional_derivatives(&obj, &u, &random_skew(3, 4), 1e-5);
        assert!((a - n).abs() < 1e-7, "{a} vs {n}");
    }

    #[test]
    fn finds_target_unitary() {
        let t = haar_unitary(4, &mut seeded(7));
        let obj = Target(t.clone());
        let cfg = OptimizerConfig {
            restarts: 3,
            ..Default::default()
        };
        let m = minimize_unitary(&obj, vec![], &cfg);
        assert!((m.value + 4.0).abs() < 1e-8);
        assert!(max_abs(&(&m.unitary - &t)) < 1e-4);
        assert!(m.converged);
        assert_eq!(m.restarts_used, 3);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let obj = Target(haar_unitary(3, &mut seeded(1)));
        let cfg = OptimizerConfig {
            restarts: 4,
            ..Default::default()
        };
        let a = minimize_unitary(&obj, vec![], &cfg);
        let b = minimize_unitary(&obj, vec![], &cfg);
        assert_eq!(a.run_values, b.run_values);
        assert_eq!(a.unitary, b.unitary);
    }
}
