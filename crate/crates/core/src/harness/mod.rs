//! Baselines, experiment orchestration and result reporting.

mod baselines;
mod config;
mod report;
mod suite;

pub use baselines::{elkan_weight, elkan_weighted_set, run_clean_svm, run_elkan, run_svm_naive};
pub use config::{DatasetSource, ExperimentConfig, FlipList, Method, SvmSettings};
pub use report::{render_report, ReportFormat};
pub use suite::{
    load_summary, run_suite, write_outputs, CellResult, ResultRecord, SplitFailure, SuiteOutput, Summary,
};

use crate::datagen::PuDataset;
use crate::error::{PgpuError, Result};
use crate::svm::SvmModel;

/// Fraction of `test` whose latent label matches the sign of the decision value.
pub fn evaluate(model: &SvmModel, test: &PuDataset) -> Result<f64> {
    let y = test.latent()?;
    if y.is_empty() {
        return Err(PgpuError::InvalidParameter("empty test set".into()));
    }
    let f = model.decision_values(test.x.view())?;
    Ok(accuracy(&f, y))
}

/// Accuracy of `sign(decision)` against `labels`; a zero decision counts as `+1`.
pub fn accuracy(decision: &[f64], labels: &[i8]) -> f64 {
    let hits = decision
        .iter()
        .zip(labels)
        .filter(|(&f, &l)| (if f >= 0.0 { 1 } else { -1 }) == l)
        .count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use ndarray::array;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1.0, -2.0, 0.5, -0.1], &[1, -1, 1, -1]), 1.0);
        assert_eq!(accuracy(&[1.0, -2.0, 0.5, -0.1], &[-1, 1, -1, 1]), 0.0);
        assert_eq!(accuracy(&[1.0, -2.0, 0.5, -0.1], &[1, -1, 1, 1]), 0.75);
    }

    #[test]
    fn evaluate_needs_latent_labels() {
        let m = SvmModel::constant(1, 1.0, KernelSpec::Linear, 1.0);
        let test = PuDataset::new(array![[0.0], [1.0]], vec![1, -1], None).unwrap();
        assert!(matches!(evaluate(&m, &test), Err(PgpuError::MissingLatentLabels(_))));
        let test = PuDataset::new(array![[0.0], [1.0]], vec![1, -1], Some(vec![1, -1])).unwrap();
        assert_eq!(evaluate(&m, &test).unwrap(), 0.5);
    }
}
