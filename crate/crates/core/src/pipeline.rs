//! The end-to-end classifier: estimate observed gaps, relabel, reweight with
//! kernel mean matching, and train a weighted SVM on the relabelled sample.

use std::collections::HashMap;

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{PuDataset, PuSample};
use crate::error::{PgpuError, Result};
use crate::harness::evaluate;
use crate::kmm::{solve_kmm, BetaWeights, KmmConfig};
use crate::relabel::{estimate_boundary_min, observed_gap, relabel, GapEstimate, RelabelResult};
use crate::svm::{train_weighted_svm, ProbabilisticSvm, SvmModel, SvmParams};

/// How the boundary `l` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Mean of the `n'` smallest observed-positive gaps.
    MinNprime,
    /// Grid search scored by cross-validated accuracy on observed labels.
    Cv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings { grid: boundary_grid(), folds: 5, seed: 0 }
    }
}

/// `-0.90, -0.89, ..., -0.60`.
pub fn boundary_grid() -> Vec<f64> {
    (0..=30).map(|k| (k as f64 - 90.0) / 100.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgpuParams {
    /// SVM used to estimate `P(~Y | x)`.
    pub prob_svm: SvmParams,
    /// Final weighted SVM; its kernel is also used for kernel mean matching.
    pub svm: SvmParams,
    pub kmm: KmmConfig,
    pub n_prime: usize,
    pub boundary: BoundaryMode,
    pub cv: CvSettings,
}

impl PgpuParams {
    pub fn new(svm: SvmParams) -> Self {
        PgpuParams {
            prob_svm: svm,
            svm,
            kmm: KmmConfig::default(),
            n_prime: 3,
            boundary: BoundaryMode::MinNprime,
            cv: CvSettings::default(),
        }
    }
}

/// A trained classifier and the intermediate results that produced it.
#[derive(Clone, Debug)]
pub struct PgpuFit {
    pub model: SvmModel,
    pub gaps: GapEstimate,
    pub boundary_l: f64,
    pub relabel: RelabelResult,
    pub beta: BetaWeights,
}

/// Observed gaps from a Platt-calibrated SVM trained on `(x, s)`.
pub fn estimate_observed_gaps(sample: &PuSample, params: &SvmParams) -> Result<GapEstimate> {
    let prob = ProbabilisticSvm::fit(sample.x.view(), &sample.s, params)?;
    observed_gap(&prob.positive_probabilities(sample.x.view())?)
}

/// Relabels with a given boundary, matches the full sample's kernel mean and
/// trains the weighted SVM.
pub fn fit_with_boundary(
    sample: &PuSample,
    gaps: &GapEstimate,
    boundary_l: f64,
    params: &PgpuParams,
) -> Result<(SvmModel, RelabelResult, BetaWeights)> {
    let partition = relabel(gaps, &sample.s, boundary_l)?;
    if partition.positive_idx.is_empty() || partition.negative_idx.is_empty() {
        return Err(PgpuError::OneClassRelabel);
    }
    let (idx, labels) = partition.selected();
    let source = sample.x.select(Axis(0), &idx);
    let beta = solve_kmm(&params.svm.kernel, sample.x.view(), source.view(), &params.kmm)?;
    let model = train_weighted_svm(source.view(), &labels, &beta.beta, &params.svm)?;
    Ok((model, partition, beta))
}

pub fn fit_pgpu(sample: &PuSample, params: &PgpuParams) -> Result<PgpuFit> {
    let boundary_l = match params.boundary {
        BoundaryMode::MinNprime => None,
        BoundaryMode::Cv => Some(estimate_boundary_cv(sample, params)?),
    };
    let gaps = estimate_observed_gaps(sample, &params.prob_svm)?;
    let boundary_l = match boundary_l {
        Some(l) => l,
        None => estimate_boundary_min(&gaps, &sample.s, params.n_prime)?,
    };
    let (model, relabel, beta) = fit_with_boundary(sample, &gaps, boundary_l, params)?;
    Ok(PgpuFit { model, gaps, boundary_l, relabel, beta })
}

/// Trains on the observed part of `train` and scores against the latent labels of `test`.
pub fn run_pgpu(train: &PuDataset, test: &PuDataset, params: &PgpuParams) -> Result<f64> {
    let sample = train.observed();
    if sample.n_labelled() < params.n_prime {
        return Err(PgpuError::NotEnoughPositives { needed: params.n_prime, available: sample.n_labelled() });
    }
    let fit = fit_pgpu(&sample, params)?;
    evaluate(&fit.model, test)
}

/// Stratified fold assignment on the observed labels.
fn assign_folds(s: &[i8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; s.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] == class).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            fold_of[i] = pos % folds;
        }
    }
    fold_of
}

/// Picks the grid value with the best mean validation accuracy of the whole
/// pipeline, measured against observed labels. Ties go to the most negative
/// candidate. Folds that fail for a candidate are skipped.
pub fn estimate_boundary_cv(sample: &PuSample, params: &PgpuParams) -> Result<f64> {
    let cv = &params.cv;
    if cv.grid.is_empty() || cv.folds < 2 {
        return Err(PgpuError::InvalidParameter("cross-validation needs a grid and at least 2 folds".into()));
    }
    let mut grid = cv.grid.clone();
    grid.sort_by(f64::total_cmp);

    let fold_of = assign_folds(&sample.s, cv.folds, cv.seed);
    struct Fold {
        train: PuSample,
        valid: PuSample,
        gaps: GapEstimate,
    }
    let folds: Vec<Fold> = (0..cv.folds)
        .filter_map(|k| {
            let tr: Vec<usize> = (0..sample.len()).filter(|&i| fold_of[i] != k).collect();
            let va: Vec<usize> = (0..sample.len()).filter(|&i| fold_of[i] == k).collect();
            if va.is_empty() {
                return None;
            }
            let train = sample.subset(&tr);
            match estimate_observed_gaps(&train, &params.prob_svm) {
                Ok(gaps) => Some(Fold { train, valid: sample.subset(&va), gaps }),
                Err(e) => {
                    log::debug!("cv fold {k} skipped: {e}");
                    None
                }
            }
        })
        .collect();

    // the relabelled set depends on l only through how many unlabelled gaps fall at or below it
    let mut cache: HashMap<(usize, usize), Option<f64>> = HashMap::new();
    let mut best: Option<(f64, f64)> = None;
    for &l in &grid {
        let mut total = 0.0;
        let mut used = 0usize;
        for (k, fold) in folds.iter().enumerate() {
            let n_neg = fold
                .gaps
                .gaps
                .iter()
                .zip(&fold.train.s)
                .filter(|(&g, &s)| s == -1 && g <= l)
                .count();
            let score = *cache.entry((k, n_neg)).or_insert_with(|| {
                fit_with_boundary(&fold.train, &fold.gaps, l, params)
                    .and_then(|(model, _, _)| observed_accuracy(&model, &fold.valid))
                    .map_err(|e| log::debug!("cv candidate {l} fold {k} skipped: {e}"))
                    .ok()
            });
            if let Some(acc) = score {
                total += acc;
                used += 1;
            }
        }
        if used == 0 {
            continue;
        }
        let mean = total / used as f64;
        if best.is_none_or(|(_, b)| mean > b) {
            best = Some((l, mean));
        }
    }
    best.map(|(l, _)| l).ok_or(PgpuError::NoViableBoundary)
}

fn observed_accuracy(model: &SvmModel, valid: &PuSample) -> Result<f64> {
    let f = model.decision_values(valid.x.view())?;
    let hits = f
        .iter()
        .zip(&valid.s)
        .filter(|(&v, &s)| (if v >= 0.0 { 1 } else { -1 }) == s)
        .count();
    Ok(hits as f64 / valid.len() as f64)
}
