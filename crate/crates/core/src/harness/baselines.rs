use ndarray::{Array2, Axis};

use crate::datagen::{split_indices, PuDataset, PuSample};
use crate::error::{PgpuError, Result};
use crate::harness::evaluate;
use crate::svm::{train_svm, train_weighted_svm, ProbabilisticSvm, SvmParams};

/// SVM trained on the PU labels as if they were clean.
pub fn run_svm_naive(train: &PuDataset, test: &PuDataset, params: &SvmParams) -> Result<f64> {
    let sample = train.observed();
    let model = train_svm(sample.x.view(), &sample.s, params)?;
    evaluate(&model, test)
}

/// Reference SVM on the latent labels of the same training instances.
pub fn run_clean_svm(train: &PuDataset, test: &PuDataset, params: &SvmParams) -> Result<f64> {
    run_svm_naive(&train.to_clean()?, test, params)
}

/// Weight of the positive copy of an unlabelled example,
/// `(1 - c)/c * g/(1 - g)` clamped to `[0, 1]`.
pub fn elkan_weight(p_labelled: f64, c: f64) -> f64 {
    if p_labelled >= 1.0 {
        return 1.0;
    }
    ((1.0 - c) / c * p_labelled / (1.0 - p_labelled)).clamp(0.0, 1.0)
}

/// Training set where labelled positives keep weight 1 and each unlabelled
/// example becomes a positive copy with weight `w` and a negative copy with
/// weight `1 - w`. Zero-weight copies are omitted; rows keep sample order.
pub fn elkan_weighted_set(sample: &PuSample, p_labelled: &[f64], c: f64) -> Result<(Array2<f64>, Vec<i8>, Vec<f64>)> {
    if p_labelled.len() != sample.len() {
        return Err(PgpuError::LengthMismatch { what: "probabilities", expected: sample.len(), actual: p_labelled.len() });
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(PgpuError::InvalidParameter(format!("label frequency c = {c} must lie in (0, 1]")));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for (i, (&s, &p)) in sample.s.iter().zip(p_labelled).enumerate() {
        if s == 1 {
            rows.push(i);
            labels.push(1);
            weights.push(1.0);
            continue;
        }
        let w = elkan_weight(p, c);
        if w > 0.0 {
            rows.push(i);
            labels.push(1);
            weights.push(w);
        }
        if w < 1.0 {
            rows.push(i);
            labels.push(-1);
            weights.push(1.0 - w);
        }
    }
    Ok((sample.x.select(Axis(0), &rows), labels, weights))
}

/// Elkan-Noto reweighting. `c = P(s=1 | y=1)` is estimated as the mean
/// predicted `P(s=1|x)` over labelled positives in a 20% hold-out.
pub fn run_elkan(train: &PuDataset, test: &PuDataset, params: &SvmParams, seed: u64) -> Result<f64> {
    let sample = train.observed();
    let (fit_idx, hold_idx) = split_indices(sample.len(), 0.8, seed)?;
    let hold = sample.subset(&hold_idx);
    if hold.n_labelled() == 0 {
        return Err(PgpuError::NotEnoughPositives { needed: 1, available: 0 });
    }
    let fit = sample.subset(&fit_idx);
    let g = ProbabilisticSvm::fit(fit.x.view(), &fit.s, params)?;
    let hold_p = g.positive_probabilities(hold.x.view())?;
    let (sum, count) = hold_p
        .iter()
        .zip(&hold.s)
        .filter(|(_, &s)| s == 1)
        .fold((0.0, 0usize), |(a, n), (&p, _)| (a + p, n + 1));
    let c = sum / count as f64;
    if c.is_nan() || c <= 0.0 {
        return Err(PgpuError::Numerical("estimated label frequency is zero".into()));
    }
    let p_all = g.positive_probabilities(sample.x.view())?;
    let (x, y, w) = elkan_weighted_set(&sample, &p_all, c.min(1.0))?;
    let model = train_weighted_svm(x.view(), &y, &w, params)?;
    evaluate(&model, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn weights_are_clamped() {
        for p in [0.0, 0.1, 0.5, 0.9, 0.999, 1.0] {
            for c in [0.05, 0.3, 0.7, 1.0] {
                let w = elkan_weight(p, c);
                assert!((0.0..=1.0).contains(&w));
            }
        }
        assert_eq!(elkan_weight(0.7, 1.0), 0.0);
        // (1 - 0.5)/0.5 * 0.2/0.8
        assert!((elkan_weight(0.2, 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn full_label_frequency_reduces_to_pu_labels() {
        let sample = PuSample::new(array![[0.0], [1.0], [2.0]], vec![1, -1, -1]).unwrap();
        let (x, y, w) = elkan_weighted_set(&sample, &[0.9, 0.4, 0.1], 1.0).unwrap();
        assert_eq!(x, sample.x);
        assert_eq!(y, sample.s);
        assert_eq!(w, vec![1.0; 3]);
    }

    #[test]
    fn unlabelled_rows_are_split() {
        let sample = PuSample::new(array![[0.0], [1.0]], vec![1, -1]).unwrap();
        let (x, y, w) = elkan_weighted_set(&sample, &[0.9, 0.2], 0.5).unwrap();
        assert_eq!(x.nrows(), 3);
        assert_eq!(y, vec![1, 1, -1]);
        assert!((w[1] - 0.25).abs() < 1e-15 && (w[2] - 0.75).abs() < 1e-15);
    }
}
