//! PU datasets, the synthetic benchmark generators and label flipping.

mod csv_io;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_label, PgpuError, Result};
use crate::relabel::FlipRateSpec;
use crate::svm::{ProbabilisticSvm, SvmParams};

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};

/// Features with observed labels `s` (`-1` meaning unlabelled) and, for
/// synthetic data, the latent labels `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuDataset {
    pub x: Array2<f64>,
    pub s: Vec<i8>,
    pub y: Option<Vec<i8>>,
    /// Gap values that drove label flipping, kept for diagnostics.
    pub gap_truth: Option<Vec<f64>>,
}

/// The part of a dataset a learner may see: features and observed labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PuSample {
    pub x: Array2<f64>,
    pub s: Vec<i8>,
}

impl PuSample {
    pub fn new(x: Array2<f64>, s: Vec<i8>) -> Result<Self> {
        if s.len() != x.nrows() {
            return Err(PgpuError::LengthMismatch { what: "observed labels", expected: x.nrows(), actual: s.len() });
        }
        s.iter().try_for_each(|&l| check_label(l))?;
        Ok(PuSample { x, s })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn n_labelled(&self) -> usize {
        self.s.iter().filter(|&&l| l == 1).count()
    }

    pub fn subset(&self, idx: &[usize]) -> PuSample {
        PuSample {
            x: self.x.select(Axis(0), idx),
            s: idx.iter().map(|&i| self.s[i]).collect(),
        }
    }
}

impl PuDataset {
    pub fn new(x: Array2<f64>, s: Vec<i8>, y: Option<Vec<i8>>) -> Result<Self> {
        let n = x.nrows();
        if s.len() != n {
            return Err(PgpuError::LengthMismatch { what: "observed labels", expected: n, actual: s.len() });
        }
        s.iter().try_for_each(|&l| check_label(l))?;
        if let Some(y) = &y {
            if y.len() != n {
                return Err(PgpuError::LengthMismatch { what: "latent labels", expected: n, actual: y.len() });
            }
            y.iter().try_for_each(|&l| check_label(l))?;
            if let Some(i) = (0..n).find(|&i| s[i] == 1 && y[i] != 1) {
                return Err(PgpuError::InvalidParameter(format!(
                    "row {i} is an observed positive with latent label -1"
                )));
            }
        }
        Ok(PuDataset { x, s, y, gap_truth: None })
    }

    /// A fully labelled dataset (`s = y`).
    pub fn clean(x: Array2<f64>, y: Vec<i8>) -> Result<Self> {
        Self::new(x, y.clone(), Some(y))
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Strips latent labels; learners only ever receive this view.
    pub fn observed(&self) -> PuSample {
        PuSample { x: self.x.clone(), s: self.s.clone() }
    }

    pub fn latent(&self) -> Result<&[i8]> {
        self.y
            .as_deref()
            .ok_or_else(|| PgpuError::MissingLatentLabels("dataset has no latent labels".into()))
    }

    pub fn subset(&self, idx: &[usize]) -> PuDataset {
        PuDataset {
            x: self.x.select(Axis(0), idx),
            s: idx.iter().map(|&i| self.s[i]).collect(),
            y: self.y.as_ref().map(|y| idx.iter().map(|&i| y[i]).collect()),
            gap_truth: self.gap_truth.as_ref().map(|g| idx.iter().map(|&i| g[i]).collect()),
        }
    }

    /// The same instances with observed labels reset to the latent ones.
    pub fn to_clean(&self) -> Result<PuDataset> {
        let y = self.latent()?.to_vec();
        Ok(PuDataset { x: self.x.clone(), s: y.clone(), y: Some(y), gap_truth: self.gap_truth.clone() })
    }
}

/// Uniform samples: positives in the triangle `(-1,-1), (-1,1), (1,1)`
/// (above the diagonal), negatives in `(-1,-1), (1,1), (1,-1)`.
pub fn gen_triangles(n_pos: usize, n_neg: usize, seed: u64) -> PuDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_pos + n_neg;
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let a: f64 = rng.random_range(-1.0..=1.0);
        let b: f64 = rng.random_range(-1.0..=1.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        // reflecting across the diagonal maps the square onto either half uniformly
        if i < n_pos {
            x[[i, 0]] = lo;
            x[[i, 1]] = hi;
            y.push(1);
        } else {
            x[[i, 0]] = hi;
            x[[i, 1]] = lo;
            y.push(-1);
        }
    }
    PuDataset::clean(x, y).expect("generated labels are valid")
}

/// `P(Y = +1 | x)` on the overlapping square: `max(0, 0.5 - 10 (x1 - x2))`, clamped to 1.
pub fn overlap_positive_probability(x1: f64, x2: f64) -> f64 {
    (0.5 - 10.0 * (x1 - x2)).clamp(0.0, 1.0)
}

/// Analytic probabilistic gap on the overlapping square.
pub fn overlap_true_gap(x1: f64, x2: f64) -> f64 {
    2.0 * overlap_positive_probability(x1, x2) - 1.0
}

/// `n` points uniform on `[-1, 1]^2`, labelled positive with
/// [`overlap_positive_probability`].
pub fn gen_overlap_square(n: usize, seed: u64) -> PuDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let a: f64 = rng.random_range(-1.0..=1.0);
        let b: f64 = rng.random_range(-1.0..=1.0);
        x[[i, 0]] = a;
        x[[i, 1]] = b;
        let p = overlap_positive_probability(a, b);
        y.push(if rng.random::<f64>() < p { 1 } else { -1 });
    }
    PuDataset::clean(x, y).expect("generated labels are valid")
}

/// Hides each positive label independently with probability `spec.rate(gap_i)`.
/// Features, negatives and latent labels are left untouched.
pub fn flip_labels(clean: &PuDataset, gap: &[f64], spec: &FlipRateSpec, seed: u64) -> Result<PuDataset> {
    spec.validate()?;
    if gap.len() != clean.len() {
        return Err(PgpuError::LengthMismatch { what: "gaps", expected: clean.len(), actual: gap.len() });
    }
    if let Some(&g) = gap.iter().find(|g| !(-1.0..=1.0).contains(*g)) {
        return Err(PgpuError::InvalidParameter(format!("gap {g} outside [-1, 1]")));
    }
    let y = clean.y.clone().unwrap_or_else(|| clean.s.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = clean
        .s
        .iter()
        .zip(gap)
        .map(|(&s, &g)| {
            // draw for every row so the stream does not depend on the labels
            let u: f64 = rng.random();
            if s == 1 && u < spec.rate(g) {
                -1
            } else {
                s
            }
        })
        .collect();
    Ok(PuDataset { x: clean.x.clone(), s, y: Some(y), gap_truth: Some(gap.to_vec()) })
}

/// `2 P(Y=+1|x) - 1` from a Platt-calibrated SVM trained on the clean labels.
pub fn estimate_clean_gap(clean: &PuDataset, params: &SvmParams) -> Result<Vec<f64>> {
    let y = clean.latent()?;
    let prob = ProbabilisticSvm::fit(clean.x.view(), y, params)?;
    Ok(prob
        .positive_probabilities(clean.x.view())?
        .into_iter()
        .map(|p| 2.0 * p - 1.0)
        .collect())
}

/// Random train/test index partition, each part in ascending order.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 4 {
        return Err(PgpuError::InvalidParameter(format!("need at least 4 rows to split, got {n}")));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(PgpuError::InvalidParameter(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &PuDataset, train_fraction: f64, seed: u64) -> Result<(PuDataset, PuDataset)> {
    let (train, test) = split_indices(dataset.len(), train_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_shape() {
        let d = gen_triangles(1000, 1000, 3);
        assert_eq!(d.len(), 2000);
        assert_eq!(d.s.iter().filter(|&&l| l == 1).count(), 1000);
        assert!(d.x.iter().all(|v| (-1.0..=1.0).contains(v)));
        for (row, &l) in d.x.outer_iter().zip(&d.s) {
            // positives above the diagonal
            assert!(if l == 1 { row[1] >= row[0] } else { row[1] <= row[0] });
        }
        assert_eq!(d.s, d.y.clone().unwrap());
    }

    #[test]
    fn overlap_probability_examples() {
        assert_eq!(overlap_positive_probability(0.05, 0.0), 0.0);
        assert_eq!(overlap_positive_probability(0.0, 0.05), 1.0);
        assert_eq!(overlap_positive_probability(0.0, 0.0), 0.5);
    }

    #[test]
    fn overlap_region_is_large_enough() {
        let d = gen_overlap_square(2000, 11);
        let overlap = d
            .x
            .outer_iter()
            .filter(|r| {
                let p = overlap_positive_probability(r[0], r[1]);
                p > 0.0 && p < 1.0
            })
            .count();
        assert!(overlap as f64 >= 0.025 * 2000.0, "overlap count {overlap}");
    }

    #[test]
    fn constant_flips() {
        let clean = gen_triangles(1000, 1000, 5);
        let gaps = vec![0.8; 2000];
        let none = flip_labels(&clean, &gaps, &FlipRateSpec::Constant { alpha: 0.0 }, 1).unwrap();
        assert_eq!(none.s, clean.s);
        let all = flip_labels(&clean, &gaps, &FlipRateSpec::Constant { alpha: 1.0 }, 1).unwrap();
        assert!(all.s.iter().all(|&l| l == -1));
        for seed in 0..20 {
            let some = flip_labels(&clean, &gaps, &FlipRateSpec::Constant { alpha: 0.3 }, seed).unwrap();
            let flipped = (0..1000).filter(|&i| some.s[i] == -1).count();
            // Binomial(1000, 0.3): mean 300, sd 14.5
            assert!((255..=345).contains(&flipped), "seed {seed}: {flipped}");
            assert!(some.s[1000..].iter().all(|&l| l == -1));
            assert_eq!(some.x, clean.x);
        }
    }

    #[test]
    fn flip_rejects_bad_gaps() {
        let clean = gen_triangles(3, 3, 0);
        let spec = FlipRateSpec::Constant { alpha: 0.5 };
        assert!(flip_labels(&clean, &[0.0; 5], &spec, 0).is_err());
        assert!(flip_labels(&clean, &[1.5; 6], &spec, 0).is_err());
    }

    #[test]
    fn split_partition() {
        let (a, b) = split_indices(2000, 0.75, 9).unwrap();
        assert_eq!((a.len(), b.len()), (1500, 500));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..2000).collect::<Vec<_>>());
        assert_eq!(split_indices(2000, 0.75, 9).unwrap(), (a, b));
        assert!(split_indices(3, 0.75, 0).is_err());
    }

    #[test]
    fn dataset_rejects_mislabelled_positive() {
        let x = Array2::zeros((2, 1));
        assert!(PuDataset::new(x, vec![1, -1], Some(vec![-1, -1])).is_err());
    }
}
