//! Weighted soft-margin kernel SVM with Platt-calibrated probabilities.

mod platt;
mod smo;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_label, PgpuError, Result};
use crate::kernels::{gram_symmetric, KernelSpec};

pub use platt::{fit_platt, PlattCalibration};

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration cap; `None` means ten sweeps of `n` pair updates per example.
    pub max_iter: Option<usize>,
}

impl SvmParams {
    pub fn new(c: f64, kernel: KernelSpec) -> Self {
        SvmParams {
            c,
            kernel,
            tol: 1e-3,
            max_iter: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(PgpuError::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(PgpuError::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Dual-form classifier `f(x) = sum_i coef_i k(sv_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Array2<f64>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    /// Row of each support vector in the training matrix.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    /// A model with no support vectors; useful for testing and as a constant classifier.
    pub fn constant(dim: usize, bias: f64, kernel: KernelSpec, c: f64) -> Self {
        SvmModel {
            support_vectors: Array2::zeros((0, dim)),
            dual_coefs: Vec::new(),
            support_indices: Vec::new(),
            bias,
            kernel,
            c,
            iterations: 0,
            converged: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.ncols()
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(PgpuError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self.decision_unchecked(x))
    }

    fn decision_unchecked(&self, x: &[f64]) -> f64 {
        let mut f = self.bias;
        for (sv, &coef) in self.support_vectors.outer_iter().zip(&self.dual_coefs) {
            f += coef * self.kernel.apply(sv.as_slice().expect("owned row-major"), x);
        }
        f
    }

    pub fn decision_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.dim() {
            return Err(PgpuError::DimensionMismatch {
                expected: self.dim(),
                actual: x.ncols(),
            });
        }
        Ok(x.outer_iter().map(|row| self.decision_row(row)).collect())
    }

    fn decision_row(&self, row: ArrayView1<f64>) -> f64 {
        match row.as_slice() {
            Some(s) => self.decision_unchecked(s),
            None => self.decision_unchecked(&row.to_vec()),
        }
    }

    /// `+1` when the decision value is nonnegative, else `-1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.decision_value(x)? >= 0.0 { 1 } else { -1 })
    }
}

fn validate_inputs(x: ArrayView2<f64>, y: &[i8], weights: &[f64]) -> Result<()> {
    let n = x.nrows();
    if y.len() != n {
        return Err(PgpuError::LengthMismatch { what: "labels", expected: n, actual: y.len() });
    }
    if weights.len() != n {
        return Err(PgpuError::LengthMismatch { what: "weights", expected: n, actual: weights.len() });
    }
    for &l in y {
        check_label(l)?;
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(PgpuError::InvalidParameter(format!("weights must be finite and nonnegative, got {w}")));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(PgpuError::DegenerateTrainingSet("all weights are zero".into()));
    }
    let has = |class: i8| y.iter().zip(weights).any(|(&l, &w)| l == class && w > 0.0);
    if n < 2 || !has(1) || !has(-1) {
        return Err(PgpuError::DegenerateTrainingSet(
            "both classes must carry positive weight".into(),
        ));
    }
    Ok(())
}

/// Trains `min 0.5|w|^2 + C sum_i weight_i xi_i` through its dual, where
/// each multiplier is boxed by `0 <= alpha_i <= C * weight_i`.
pub fn train_weighted_svm(x: ArrayView2<f64>, y: &[i8], weights: &[f64], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    validate_inputs(x, y, weights)?;
    let n = x.nrows();
    let gram = gram_symmetric(&params.kernel, x);
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let bounds: Vec<f64> = weights.iter().map(|w| params.c * w).collect();
    let max_iter = params.max_iter.unwrap_or_else(|| 10 * n * n).max(1);
    let sol = smo::solve(&gram, &yf, &bounds, params.tol, max_iter);
    if !sol.converged {
        log::warn!("SMO stopped after {} iterations without reaching tol {}", sol.iterations, params.tol);
    }

    let support: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
    let support_vectors = x.select(Axis(0), &support).as_standard_layout().to_owned();
    let dual_coefs = support.iter().map(|&i| sol.alpha[i] * yf[i]).collect();
    Ok(SvmModel {
        support_vectors,
        dual_coefs,
        support_indices: support,
        bias: sol.bias,
        kernel: params.kernel,
        c: params.c,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

pub fn train_svm(x: ArrayView2<f64>, y: &[i8], params: &SvmParams) -> Result<SvmModel> {
    train_weighted_svm(x, y, &vec![1.0; x.nrows()], params)
}

/// Per-example violation of the weighted C-SVC optimality conditions, in
/// margin units, recomputed from the model alone.
///
/// `x`, `y` and `weights` must be the model's training inputs.
pub fn kkt_residuals(model: &SvmModel, x: ArrayView2<f64>, y: &[i8], weights: &[f64]) -> Result<Vec<f64>> {
    let n = x.nrows();
    validate_inputs(x, y, weights)?;
    let mut alpha = vec![0.0; n];
    for (&i, &coef) in model.support_indices.iter().zip(&model.dual_coefs) {
        alpha[i] = coef.abs();
    }
    let f = model.decision_values(x)?;
    let scale = 1e-9;
    Ok((0..n)
        .map(|i| {
            let bound = model.c * weights[i];
            let margin = y[i] as f64 * f[i];
            if bound == 0.0 {
                0.0
            } else if alpha[i] <= scale * bound {
                (1.0 - margin).max(0.0)
            } else if alpha[i] >= bound * (1.0 - scale) {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .collect())
}

/// An SVM together with a sigmoid mapping its decision values to `P(+1 | x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticSvm {
    pub model: SvmModel,
    pub calibration: PlattCalibration,
}

/// Minimum sample size for cross-validated calibration.
pub const CV_CALIBRATION_MIN: usize = 30;
const CALIBRATION_FOLDS: usize = 3;
const CALIBRATION_SEED: u64 = 0x5eed_ca1b;

impl ProbabilisticSvm {
    /// Trains on all data; the sigmoid is fitted to 3-fold cross-validated
    /// decision values when `n >= 30`, otherwise to the training decision values.
    pub fn fit(x: ArrayView2<f64>, y: &[i8], params: &SvmParams) -> Result<Self> {
        let weights = vec![1.0; x.nrows()];
        validate_inputs(x, y, &weights)?;
        let model = train_weighted_svm(x, y, &weights, params)?;
        let decision = if x.nrows() >= CV_CALIBRATION_MIN {
            cross_validated_decisions(x, y, params)?
        } else {
            model.decision_values(x)?
        };
        let calibration = fit_platt(&decision, y)?;
        Ok(ProbabilisticSvm { model, calibration })
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<(f64, f64)> {
        Ok(self.calibration.probabilities(self.model.decision_value(x)?))
    }

    /// `P(+1 | x)` for every row.
    pub fn positive_probabilities(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .model
            .decision_values(x)?
            .into_iter()
            .map(|f| self.calibration.probabilities(f).0)
            .collect())
    }
}

pub fn predict_proba(model: &SvmModel, calibration: &PlattCalibration, x: &[f64]) -> Result<(f64, f64)> {
    Ok(calibration.probabilities(model.decision_value(x)?))
}

fn cross_validated_decisions(x: ArrayView2<f64>, y: &[i8], params: &SvmParams) -> Result<Vec<f64>> {
    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(CALIBRATION_SEED));
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % CALIBRATION_FOLDS;
    }
    let mut decision = vec![0.0; n];
    for fold in 0..CALIBRATION_FOLDS {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let held: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let ty: Vec<i8> = train.iter().map(|&i| y[i]).collect();
        let n_pos = ty.iter().filter(|&&l| l > 0).count();
        if n_pos == 0 || n_pos == ty.len() {
            // a one-class fold can only say which side everything falls on
            let v = if n_pos > 0 { 1.0 } else { -1.0 };
            held.iter().for_each(|&i| decision[i] = v);
            continue;
        }
        let tx = x.select(Axis(0), &train);
        let model = train_svm(tx.view(), &ty, params)?;
        let hx = x.select(Axis(0), &held);
        for (&i, f) in held.iter().zip(model.decision_values(hx.view())?) {
            decision[i] = f;
        }
    }
    Ok(decision)
}
