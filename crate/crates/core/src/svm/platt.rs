//! Sigmoid calibration of SVM decision values.

use serde::{Deserialize, Serialize};

use crate::error::{check_label, PgpuError, Result};

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

/// `P(+1 | f) = 1 / (1 + exp(a * f + b))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlattCalibration {
    pub a: f64,
    pub b: f64,
}

impl PlattCalibration {
    /// Returns `(p_pos, p_neg)`, both strictly inside `(0, 1)`.
    pub fn probabilities(&self, decision: f64) -> (f64, f64) {
        let z = self.a * decision + self.b;
        let p = if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        };
        let p = p.clamp(f64::EPSILON / 2.0, 1.0 - f64::EPSILON / 2.0);
        (p, 1.0 - p)
    }
}

/// Fits the sigmoid by Newton's method with backtracking on the
/// cross-entropy against smoothed targets `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`.
pub fn fit_platt(decision_values: &[f64], labels: &[i8]) -> Result<PlattCalibration> {
    if decision_values.len() != labels.len() {
        return Err(PgpuError::LengthMismatch {
            what: "labels",
            expected: decision_values.len(),
            actual: labels.len(),
        });
    }
    for &l in labels {
        check_label(l)?;
    }
    let n_pos = labels.iter().filter(|&&l| l > 0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(PgpuError::DegenerateTrainingSet(
            "calibration needs both classes".into(),
        ));
    }
    let (lo, hi) = decision_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(PgpuError::Numerical("non-finite decision value".into()));
    }
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
        return Err(PgpuError::ConstantDecisionValues);
    }

    let hi_target = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let lo_target = 1.0 / (n_neg as f64 + 2.0);
    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l > 0 { hi_target } else { lo_target })
        .collect();

    let objective = |a: f64, b: f64| -> f64 {
        decision_values
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let z = f * a + b;
                if z >= 0.0 {
                    t * z + (-z).exp().ln_1p()
                } else {
                    (t - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((n_neg as f64 + 1.0) / (n_pos as f64 + 1.0)).ln();
    let mut fval = objective(a, b);

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&f, &t) in decision_values.iter().zip(&targets) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.hypot(g2) < GRAD_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut accepted = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            log::debug!("platt line search stalled at a={a}, b={b}");
            break;
        }
    }
    Ok(PlattCalibration { a, b })
}
