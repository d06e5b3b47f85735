//! Landweber iteration and ISTA over an abstract forward/adjoint pair.
//!
//! Both solvers start from zero, project every iterate onto the admissible
//! support (values vanish outside the support disk), and stop when the
//! relative iterate change drops below `rel_tol` or the budget runs out.
//! With the automatic step size `s = 0.9 / L`, where `L` estimates
//! `||op* op||` by power iteration, the Landweber residual and the ISTA
//! objective are non-increasing; both are recorded per iteration.

use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// A linear map bundled with its exact adjoint, acting on flat vectors.
pub trait AdjointPair {
    fn domain_dim(&self) -> usize;
    fn range_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64>;
}

impl AdjointPair for crate::wave::DenseMatrix {
    fn domain_dim(&self) -> usize {
        self.cols()
    }

    fn range_dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        crate::wave::DenseMatrix::apply(self, x)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.apply_transpose(y)
    }
}

/// Step-size policy for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `0.9 / L` with `L` the power-iteration estimate of `||op* op||`.
    Auto,
    Fixed(f64),
}

/// Shared solver configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub step: StepSize,
    /// l1 weight; ignored by the Landweber iteration.
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop when `||x_{k+1} - x_k|| / ||x_{k+1}||` falls below this.
    pub rel_tol: f64,
    /// Power iterations used when the step size is automatic.
    pub power_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: StepSize::Auto,
            lambda: 0.0,
            max_iters: 500,
            rel_tol: 1e-6,
            power_iters: 30,
        }
    }
}

/// Result of an iterative solve. `converged == false` means the iteration
/// budget ran out; the best iterate is still returned.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norms (Landweber) or objective values (ISTA), one per
    /// iteration, evaluated at the iterate the step started from.
    pub history: Vec<f64>,
    pub final_residual: f64,
}

/// Componentwise shrinkage `sign(x) max(|x| - theta, 0)`.
pub fn soft_threshold(x: &[f64], theta: f64) -> Result<Vec<f64>> {
    if theta < 0.0 {
        return Err(Error::NegativeThreshold { value: theta });
    }
    Ok(x.iter().map(|&v| soft_scalar(v, theta)).collect())
}

#[inline]
fn soft_scalar(v: f64, theta: f64) -> f64 {
    if v > theta {
        v - theta
    } else if v < -theta {
        v + theta
    } else {
        0.0
    }
}

/// Power-iteration estimate of the largest eigenvalue of `op* op`
/// (the squared operator norm of `op`).
pub fn estimate_operator_norm(op: &dyn AdjointPair, iters: usize, seed: u64) -> f64 {
    assert!(iters >= 10, "need at least 10 power iterations");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.domain_dim())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let norm = l2(&x);
    if norm == 0.0 {
        return 0.0;
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    let mut lambda = 0.0;
    for _ in 0..iters {
        let z = op.apply_adjoint(&op.apply(&x));
        let zn = l2(&z);
        if zn == 0.0 {
            return 0.0;
        }
        lambda = zn;
        x = z;
        for v in x.iter_mut() {
            *v /= zn;
        }
    }
    lambda
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn resolve_step(op: &dyn AdjointPair, cfg: &SolverConfig) -> f64 {
    match cfg.step {
        StepSize::Fixed(s) => {
            assert!(s > 0.0, "step size must be positive");
            s
        }
        StepSize::Auto => {
            let l = estimate_operator_norm(op, cfg.power_iters, 0);
            if l == 0.0 {
                1.0
            } else {
                0.9 / l
            }
        }
    }
}

fn apply_mask(x: &mut [f64], mask: Option<&[f64]>) {
    if let Some(m) = mask {
        for (v, &w) in x.iter_mut().zip(m.iter()) {
            *v *= w;
        }
    }
}

/// Gradient descent on `1/2 ||op x - y||^2` from zero; for consistent data
/// it converges to the minimum-norm least-squares solution on the masked
/// support.
pub fn landweber(
    op: &dyn AdjointPair,
    y: &[f64],
    mask: Option<&[f64]>,
    cfg: &SolverConfig,
) -> SolveOutcome {
    run_iteration(op, y, mask, cfg, false)
}

/// Iterative soft thresholding for `1/2 ||op x - y||^2 + lambda ||x||_1`.
pub fn ista(
    op: &dyn AdjointPair,
    y: &[f64],
    mask: Option<&[f64]>,
    cfg: &SolverConfig,
) -> SolveOutcome {
    run_iteration(op, y, mask, cfg, true)
}

fn run_iteration(
    op: &dyn AdjointPair,
    y: &[f64],
    mask: Option<&[f64]>,
    cfg: &SolverConfig,
    shrink: bool,
) -> SolveOutcome {
    assert_eq!(y.len(), op.range_dim());
    if let Some(m) = mask {
        assert_eq!(m.len(), op.domain_dim());
    }
    let s = resolve_step(op, cfg);
    let theta = s * cfg.lambda;

    let mut x = vec![0.0; op.domain_dim()];
    let mut history = Vec::with_capacity(cfg.max_iters.min(1 << 16));
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = 0.0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let mut r = op.apply(&x);
        for (rv, &yv) in r.iter_mut().zip(y.iter()) {
            *rv -= yv;
        }
        let res_norm_sq: f64 = r.iter().map(|v| v * v).sum();
        residual = res_norm_sq.sqrt();
        history.push(if shrink {
            0.5 * res_norm_sq + cfg.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
        } else {
            residual
        });

        let g = op.apply_adjoint(&r);
        let mut x_new: Vec<f64> = x.iter().zip(g.iter()).map(|(&xv, &gv)| xv - s * gv).collect();
        if shrink {
            for v in x_new.iter_mut() {
                *v = soft_scalar(*v, theta);
            }
        }
        apply_mask(&mut x_new, mask);

        let mut diff_sq = 0.0;
        let mut new_sq = 0.0;
        for (a, b) in x_new.iter().zip(x.iter()) {
            diff_sq += (a - b) * (a - b);
            new_sq += a * a;
        }
        x = x_new;
        if diff_sq.sqrt() <= cfg.rel_tol * new_sq.sqrt().max(1e-300) {
            converged = true;
            break;
        }
    }

    SolveOutcome { solution: x, iterations, converged, history, final_residual: residual }
}
