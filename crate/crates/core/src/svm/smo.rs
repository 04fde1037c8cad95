//! Sequential minimal optimization for the weighted C-SVC dual
//!
//! ```text
//! min_a  0.5 a^T Q a - 1^T a   s.t.  y^T a = 0,  0 <= a_i <= C_i
//! ```
//!
//! with `Q_ij = y_i y_j K_ij` and per-example bounds `C_i = C * w_i`.
//! Pairs are chosen by the maximal-violating-pair rule; ties go to the
//! lowest index, so identical inputs always follow the same path.

use ndarray::Array2;

const TAU: f64 = 1e-12;

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn solve(
    gram: &Array2<f64>,
    y: &[f64],
    bounds: &[f64],
    tol: f64,
    max_iter: usize,
) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of the dual objective, Q a - 1
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| gram[[i, i]]).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let Some((i, j, gap)) = select_pair(&alpha, &grad, y, bounds) else {
            converged = true;
            break;
        };
        if gap < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let ki = gram.row(i);
        let kj = gram.row(j);
        let (ci, cj) = (bounds[i], bounds[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];

        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for k in 0..n {
            grad[k] += y[k] * (ki[k] * di + kj[k] * dj);
        }
    }

    let bias = compute_bias(&alpha, &grad, y, bounds);
    DualSolution {
        alpha,
        bias,
        iterations,
        converged,
    }
}

#[inline]
fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

#[inline]
fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Returns `(i, j, m - M)` for the maximal violating pair.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], bounds: &[f64]) -> Option<(usize, usize, f64)> {
    let mut best_up: Option<(usize, f64)> = None;
    let mut best_low: Option<(usize, f64)> = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], bounds[t]) && best_up.is_none_or(|(_, m)| v > m) {
            best_up = Some((t, v));
        }
        if in_low(alpha[t], y[t], bounds[t]) && best_low.is_none_or(|(_, m)| v < m) {
            best_low = Some((t, v));
        }
    }
    let ((i, m), (j, big_m)) = (best_up?, best_low?);
    Some((i, j, m - big_m))
}

/// Average of `-y_i G_i` over free variables, else the midpoint of the feasible interval.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], bounds: &[f64]) -> f64 {
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        if bounds[t] <= 0.0 {
            continue;
        }
        let v = -y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < bounds[t] {
            sum_free += v;
            n_free += 1;
        } else {
            if in_up(alpha[t], y[t], bounds[t]) {
                lower = lower.max(v);
            }
            if in_low(alpha[t], y[t], bounds[t]) {
                upper = upper.min(v);
            }
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else if lower.is_finite() && upper.is_finite() {
        0.5 * (lower + upper)
    } else if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        0.0
    }
}
