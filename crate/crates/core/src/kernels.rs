//! Kernel functions and dense Gram matrices.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{PgpuError, Result};

/// A positive semidefinite kernel on feature vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    /// `exp(-gamma * |x - z|^2)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { gamma };
        spec.validate()?;
        Ok(spec)
    }

    /// RBF with `gamma = 1 / d`, the usual SVM-library default.
    pub fn default_for_dim(dim: usize) -> Self {
        KernelSpec::Rbf {
            gamma: 1.0 / dim.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            KernelSpec::Rbf { gamma } => Err(PgpuError::InvalidParameter(format!(
                "rbf gamma must be positive and finite, got {gamma}"
            ))),
        }
    }

    /// Evaluates the kernel without checking dimensions.
    #[inline]
    pub(crate) fn apply(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = x
                    .iter()
                    .zip(z)
                    .map(|(a, b)| {
                        let d = a - b;
                        d * d
                    })
                    .sum();
                (-gamma * sq).exp()
            }
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(PgpuError::DimensionMismatch {
            expected: x.len(),
            actual: z.len(),
        });
    }
    Ok(spec.apply(x, z))
}

/// Entry `(i, j)` is `k(x_i, z_j)`.
pub fn gram_matrix(spec: &KernelSpec, x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != z.ncols() {
        return Err(PgpuError::DimensionMismatch {
            expected: x.ncols(),
            actual: z.ncols(),
        });
    }
    let x = x.as_standard_layout();
    let z = z.as_standard_layout();
    let mut out = Array2::zeros((x.nrows(), z.nrows()));
    for (i, xi) in x.outer_iter().enumerate() {
        let xi = xi.as_slice().expect("standard layout row");
        for (j, zj) in z.outer_iter().enumerate() {
            out[[i, j]] = spec.apply(xi, zj.as_slice().expect("standard layout row"));
        }
    }
    Ok(out)
}

/// `G(X, X)`, computing each unordered pair once so the result is exactly symmetric.
pub fn gram_symmetric(spec: &KernelSpec, x: ArrayView2<f64>) -> Array2<f64> {
    let x = x.as_standard_layout();
    let n = x.nrows();
    let rows: Vec<&[f64]> = x
        .outer_iter()
        .map(|r| r.to_slice().expect("standard layout row"))
        .collect();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = spec.apply(rows[i], rows[j]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}
