//! Kernel mean matching.
//!
//! Finds weights `beta` on a source sample so that its weighted kernel mean
//! embedding matches the target sample's:
//!
//! ```text
//! min_beta | (1/n) sum_i phi(x_i) - (1/n') sum_j beta_j phi(x'_j) |^2
//! s.t.     0 <= beta_j <= B,   |mean(beta) - 1| <= eps
//! ```
//!
//! Expanded, the objective is `beta^T K beta / n'^2 - 2 beta^T kappa / (n n') + c`
//! with `K` the source Gram matrix, `kappa_j = sum_i k(x'_j, x_i)` and `c`
//! the target's mean self-similarity. It is solved by monotone accelerated
//! projected gradient; the projection onto the box intersected with the
//! mean slab is exact.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{PgpuError, Result};
use crate::kernels::{gram_matrix, gram_symmetric, KernelSpec};

const RIDGE: f64 = 1e-8;
const BISECTION_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KmmConfig {
    /// Cap `B` on every weight.
    pub upper_bound: f64,
    /// Slack on the mean constraint; `None` uses `(sqrt(n') - 1) / sqrt(n')`.
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    /// Stationarity tolerance: largest change of any weight in one step.
    pub tol: f64,
}

impl Default for KmmConfig {
    fn default() -> Self {
        KmmConfig {
            upper_bound: 1000.0,
            epsilon: None,
            max_iters: 5000,
            tol: 1e-6,
        }
    }
}

impl KmmConfig {
    pub fn epsilon_for(&self, n_source: usize) -> f64 {
        self.epsilon.unwrap_or_else(|| {
            let r = (n_source as f64).sqrt();
            (r - 1.0) / r
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upper_bound > 0.0 && self.upper_bound.is_finite()) {
            return Err(PgpuError::InvalidParameter(format!(
                "KMM upper bound must be positive, got {}",
                self.upper_bound
            )));
        }
        if let Some(eps) = self.epsilon {
            if !(0.0..1.0).contains(&eps) {
                return Err(PgpuError::InvalidParameter(format!("KMM epsilon must lie in [0, 1), got {eps}")));
            }
        }
        if self.max_iters == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(PgpuError::InvalidParameter("KMM needs max_iters > 0 and tol > 0".into()));
        }
        Ok(())
    }
}

/// Importance weights for the source sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaWeights {
    pub beta: Vec<f64>,
    /// Squared embedding distance at `beta`.
    pub objective: f64,
    pub iterations: usize,
    /// Objective after each accepted iterate, starting from the initial point.
    pub objective_trace: Vec<f64>,
}

impl BetaWeights {
    pub fn mean(&self) -> f64 {
        self.beta.iter().sum::<f64>() / self.beta.len() as f64
    }
}

/// The quadratic program in expanded form. Exposed so that independent
/// solvers can be checked against the same objective.
#[derive(Clone, Debug)]
pub struct KmmProblem {
    /// Source Gram matrix.
    pub gram: Array2<f64>,
    /// `kappa_j = sum_i k(x'_j, x_i)` over the target sample.
    pub kappa: Vec<f64>,
    /// `sum_{i,i'} k(x_i, x_i') / n^2`.
    pub target_self: f64,
    pub n_target: usize,
}

impl KmmProblem {
    pub fn build(kernel: &KernelSpec, target: ArrayView2<f64>, source: ArrayView2<f64>) -> Result<Self> {
        kernel.validate()?;
        if target.nrows() == 0 || source.nrows() == 0 {
            return Err(PgpuError::InvalidParameter("KMM needs nonempty samples".into()));
        }
        let cross = gram_matrix(kernel, source, target)?;
        let kappa = cross.rows().into_iter().map(|r| r.sum()).collect();
        let n = target.nrows();
        let target_self = gram_symmetric(kernel, target).sum() / (n * n) as f64;
        Ok(KmmProblem {
            gram: gram_symmetric(kernel, source),
            kappa,
            target_self,
            n_target: n,
        })
    }

    pub fn n_source(&self) -> usize {
        self.kappa.len()
    }

    fn objective_with(&self, beta: &[f64], k_beta: &[f64]) -> f64 {
        let m = self.n_source() as f64;
        let n = self.n_target as f64;
        let quad: f64 = beta.iter().zip(k_beta).map(|(b, kb)| b * kb).sum();
        let lin: f64 = beta.iter().zip(&self.kappa).map(|(b, k)| b * k).sum();
        quad / (m * m) - 2.0 * lin / (n * m) + self.target_self
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let kb = self.mat_vec(beta);
        self.objective_with(beta, &kb)
    }

    fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        self.gram
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn solve_kmm(
    kernel: &KernelSpec,
    target: ArrayView2<f64>,
    source: ArrayView2<f64>,
    config: &KmmConfig,
) -> Result<BetaWeights> {
    config.validate()?;
    if target.ncols() != source.ncols() {
        return Err(PgpuError::DimensionMismatch {
            expected: target.ncols(),
            actual: source.ncols(),
        });
    }
    let mut problem = KmmProblem::build(kernel, target, source)?;
    match solve_problem(&problem, config) {
        Err(PgpuError::Numerical(reason)) => {
            log::debug!("KMM retrying with ridge after: {reason}");
            for i in 0..problem.n_source() {
                problem.gram[[i, i]] += RIDGE;
            }
            solve_problem(&problem, config)
        }
        other => other,
    }
}

/// Solves an already assembled problem.
pub fn solve_problem(problem: &KmmProblem, config: &KmmConfig) -> Result<BetaWeights> {
    config.validate()?;
    let m = problem.n_source();
    let eps = config.epsilon_for(m);
    let bound = config.upper_bound;
    if bound < 1.0 - eps {
        return Err(PgpuError::InfeasibleKmm {
            upper_bound: bound,
            min_mean: 1.0 - eps,
        });
    }
    let projection = Projection {
        upper: bound,
        sum_lo: m as f64 * (1.0 - eps),
        sum_hi: m as f64 * (1.0 + eps),
    };

    // Lipschitz constant of the gradient from a PSD eigenvalue bound
    let trace: f64 = (0..m).map(|i| problem.gram[[i, i]]).sum();
    let max_row = problem
        .gram
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lambda = trace.min(max_row);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PgpuError::Numerical(format!("Gram eigenvalue bound {lambda}")));
    }
    let mf = m as f64;
    let nf = problem.n_target as f64;
    let lipschitz = 2.0 * lambda / (mf * mf);
    let step = 1.0 / lipschitz;
    let lin_scale = 2.0 / (nf * mf);
    let quad_scale = 2.0 / (mf * mf);

    let mut x = projection.apply(&vec![1.0; m]);
    let mut kx = problem.mat_vec(&x);
    let mut fx = problem.objective_with(&x, &kx);
    let mut trace_out = vec![fx];
    // extrapolated point and its Gram product, kept as a linear combination
    let mut y = x.clone();
    let mut ky = kx.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let candidate: Vec<f64> = (0..m)
            .map(|j| y[j] - step * (quad_scale * ky[j] - lin_scale * problem.kappa[j]))
            .collect();
        let z = projection.apply(&candidate);
        let kz = problem.mat_vec(&z);
        let fz = problem.objective_with(&z, &kz);
        if !fz.is_finite() {
            return Err(PgpuError::Numerical("non-finite KMM objective".into()));
        }
        let moved = z.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let (x_next, kx_next, f_next) = if fz <= fx { (z.clone(), kz.clone(), fz) } else { (x.clone(), kx.clone(), fx) };
        let c_z = t / t_next;
        let c_x = (t - 1.0) / t_next;
        for j in 0..m {
            y[j] = x_next[j] + c_z * (z[j] - x_next[j]) + c_x * (x_next[j] - x[j]);
            ky[j] = kx_next[j] + c_z * (kz[j] - kx_next[j]) + c_x * (kx_next[j] - kx[j]);
        }
        x = x_next;
        kx = kx_next;
        fx = f_next;
        t = t_next;
        trace_out.push(fx);
        if moved <= config.tol {
            break;
        }
    }

    // a PSD quadratic minus a linear term plus the target term is a squared norm
    let scale = problem.target_self.abs().max(1.0);
    if fx < -1e-9 * scale {
        return Err(PgpuError::Numerical(format!("negative squared distance {fx}")));
    }
    Ok(BetaWeights {
        beta: x,
        objective: fx.max(0.0),
        iterations,
        objective_trace: trace_out,
    })
}

/// Euclidean projection onto `{0 <= b <= upper, sum_lo <= sum(b) <= sum_hi}`.
struct Projection {
    upper: f64,
    sum_lo: f64,
    sum_hi: f64,
}

impl Projection {
    fn clipped_sum(&self, v: &[f64], shift: f64) -> f64 {
        v.iter().map(|&a| (a - shift).clamp(0.0, self.upper)).sum()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let sum = self.clipped_sum(v, 0.0);
        let shift = if sum > self.sum_hi {
            self.find_shift(v, self.sum_hi, true)
        } else if sum < self.sum_lo {
            self.find_shift(v, self.sum_lo, false)
        } else {
            0.0
        };
        v.iter().map(|&a| (a - shift).clamp(0.0, self.upper)).collect()
    }

    /// Bisection for the shift whose clipped sum meets `target`, returning
    /// the endpoint on the feasible side.
    fn find_shift(&self, v: &[f64], target: f64, too_large: bool) -> f64 {
        let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // sum(shift) is nonincreasing; lo gives the largest sum, hi the smallest
        let mut lo = vmin - self.upper - 1.0;
        let mut hi = vmax + 1.0;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.clipped_sum(v, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if too_large {
            hi
        } else {
            lo
        }
    }
}
