//! Python bindings. Matrices cross the boundary as lists of rows.

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pgpu::datagen::{self, PuDataset, PuSample};
use pgpu::harness::{run_suite as run_suite_rs, ExperimentConfig, Summary};
use pgpu::pipeline::{self, BoundaryMode, PgpuFit, PgpuParams};
use pgpu::{relabel as rl, FlipRateSpec, KernelSpec, KmmConfig, PgpuError, ProbabilisticSvm, SvmParams};

fn to_py(e: PgpuError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.outer_iter().map(|r| r.to_vec()).collect()
}

fn svm_params(dim: usize, c: f64, gamma: Option<f64>) -> SvmParams {
    let kernel = gamma.map_or_else(|| KernelSpec::default_for_dim(dim), |gamma| KernelSpec::Rbf { gamma });
    SvmParams::new(c, kernel)
}

fn parse_spec(spec: &str) -> PyResult<FlipRateSpec> {
    spec.parse().map_err(to_py)
}

/// Features, observed labels `s` (-1 = unlabelled) and optional latent labels `y`.
#[pyclass(name = "Dataset", module = "pgpu_py", skip_from_py_object)]
#[derive(Clone)]
struct PyDataset(PuDataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (x, s, y=None))]
    fn new(x: Vec<Vec<f64>>, s: Vec<i8>, y: Option<Vec<i8>>) -> PyResult<Self> {
        PuDataset::new(matrix(x)?, s, y).map(PyDataset).map_err(to_py)
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        rows(&self.0.x)
    }

    #[getter]
    fn s(&self) -> Vec<i8> {
        self.0.s.clone()
    }

    #[getter]
    fn y(&self) -> Option<Vec<i8>> {
        self.0.y.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Flips positives at the rate given by `spec` (e.g. `"linear:0.4"`),
    /// driven by a Platt-estimated gap on the clean labels.
    #[pyo3(signature = (spec, seed=0, c=1.0, gamma=None))]
    fn flip(&self, spec: &str, seed: u64, c: f64, gamma: Option<f64>) -> PyResult<Self> {
        let spec = parse_spec(spec)?;
        let clean = self.0.to_clean().map_err(to_py)?;
        let gap = datagen::estimate_clean_gap(&clean, &svm_params(clean.dim(), c, gamma)).map_err(to_py)?;
        datagen::flip_labels(&clean, &gap, &spec, seed).map(PyDataset).map_err(to_py)
    }

    #[pyo3(signature = (train_fraction=0.75, seed=0))]
    fn split(&self, train_fraction: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (a, b) = datagen::split(&self.0, train_fraction, seed).map_err(to_py)?;
        Ok((PyDataset(a), PyDataset(b)))
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        datagen::save_csv(&self.0, path).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, d={}, labelled={})", self.0.len(), self.0.dim(), self.0.observed().n_labelled())
    }
}

#[pyfunction]
#[pyo3(signature = (n_pos=1000, n_neg=1000, seed=0))]
fn gen_triangles(n_pos: usize, n_neg: usize, seed: u64) -> PyDataset {
    PyDataset(datagen::gen_triangles(n_pos, n_neg, seed))
}

#[pyfunction]
#[pyo3(signature = (n=2000, seed=0))]
fn gen_overlap_square(n: usize, seed: u64) -> PyDataset {
    PyDataset(datagen::gen_overlap_square(n, seed))
}

#[pyfunction]
fn load_csv(path: &str) -> PyResult<PyDataset> {
    datagen::load_csv(path).map(PyDataset).map_err(to_py)
}

/// SVM with Platt-scaled probabilities.
#[pyclass(name = "ProbSvm", module = "pgpu_py")]
struct PyProbSvm(ProbabilisticSvm);

#[pymethods]
impl PyProbSvm {
    #[staticmethod]
    #[pyo3(signature = (x, y, c=1.0, gamma=None))]
    fn fit(x: Vec<Vec<f64>>, y: Vec<i8>, c: f64, gamma: Option<f64>) -> PyResult<Self> {
        let x = matrix(x)?;
        let params = svm_params(x.ncols(), c, gamma);
        ProbabilisticSvm::fit(x.view(), &y, &params).map(PyProbSvm).map_err(to_py)
    }

    fn decision_values(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.0.model.decision_values(matrix(x)?.view()).map_err(to_py)
    }

    /// `(p_pos, p_neg)` per row.
    fn predict_proba(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
        let x = matrix(x)?;
        x.outer_iter().map(|r| self.0.predict_proba(&r.to_vec()).map_err(to_py)).collect()
    }

    #[getter]
    fn platt(&self) -> (f64, f64) {
        (self.0.calibration.a, self.0.calibration.b)
    }
}

/// A fitted probabilistic-gap PU classifier.
#[pyclass(name = "Pgpu", module = "pgpu_py")]
struct PyPgpu(PgpuFit);

#[pymethods]
impl PyPgpu {
    /// `boundary` is `"min"` (mean of the `n_prime` smallest labelled gaps) or `"cv"`.
    #[staticmethod]
    #[pyo3(signature = (x, s, c=1.0, gamma=None, n_prime=3, boundary="min", kmm_upper_bound=1000.0))]
    fn fit(
        x: Vec<Vec<f64>>,
        s: Vec<i8>,
        c: f64,
        gamma: Option<f64>,
        n_prime: usize,
        boundary: &str,
        kmm_upper_bound: f64,
    ) -> PyResult<Self> {
        let x = matrix(x)?;
        let mut params = PgpuParams::new(svm_params(x.ncols(), c, gamma));
        params.n_prime = n_prime;
        params.kmm.upper_bound = kmm_upper_bound;
        params.boundary = match boundary {
            "min" => BoundaryMode::MinNprime,
            "cv" => BoundaryMode::Cv,
            other => return Err(PyValueError::new_err(format!("unknown boundary mode '{other}'"))),
        };
        let sample = PuSample::new(x, s).map_err(to_py)?;
        pipeline::fit_pgpu(&sample, &params).map(PyPgpu).map_err(to_py)
    }

    #[getter]
    fn boundary_l(&self) -> f64 {
        self.0.boundary_l
    }

    #[getter]
    fn gaps(&self) -> Vec<f64> {
        self.0.gaps.gaps.clone()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.0.beta.beta.clone()
    }

    /// `(positive_idx, negative_idx, discarded_idx)` into the training rows.
    #[getter]
    fn partition(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let r = &self.0.relabel;
        (r.positive_idx.clone(), r.negative_idx.clone(), r.discarded_idx.clone())
    }

    fn decision_values(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.0.model.decision_values(matrix(x)?.view()).map_err(to_py)
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<i8>> {
        Ok(self.decision_values(x)?.into_iter().map(|f| if f >= 0.0 { 1 } else { -1 }).collect())
    }

    /// Accuracy against the latent labels of `test`.
    fn score(&self, test: &PyDataset) -> PyResult<f64> {
        pgpu::harness::evaluate(&self.0.model, &test.0).map_err(to_py)
    }
}

#[pyfunction]
fn observed_gap(p_pos: Vec<f64>) -> PyResult<Vec<f64>> {
    rl::observed_gap(&p_pos).map(|g| g.gaps).map_err(to_py)
}

#[pyfunction]
fn forward_gap(true_gap: f64, rho_plus: f64) -> f64 {
    rl::forward_gap(true_gap, rho_plus)
}

#[pyfunction]
fn flip_rate(spec: &str, gap: f64) -> PyResult<f64> {
    Ok(parse_spec(spec)?.rate(gap))
}

/// Returns `(positive_idx, negative_idx, discarded_idx)`.
#[pyfunction]
fn relabel(gaps: Vec<f64>, s: Vec<i8>, boundary_l: f64) -> PyResult<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let r = rl::relabel(&rl::GapEstimate { gaps }, &s, boundary_l).map_err(to_py)?;
    Ok((r.positive_idx, r.negative_idx, r.discarded_idx))
}

/// Kernel mean matching weights for `source` against `target`; returns `(beta, objective)`.
#[pyfunction]
#[pyo3(signature = (target, source, gamma=None, upper_bound=1000.0, epsilon=None))]
fn solve_kmm(
    target: Vec<Vec<f64>>,
    source: Vec<Vec<f64>>,
    gamma: Option<f64>,
    upper_bound: f64,
    epsilon: Option<f64>,
) -> PyResult<(Vec<f64>, f64)> {
    let target = matrix(target)?;
    let source = matrix(source)?;
    let kernel = gamma.map_or_else(|| KernelSpec::default_for_dim(target.ncols()), |gamma| KernelSpec::Rbf { gamma });
    let config = KmmConfig { upper_bound, epsilon, ..KmmConfig::default() };
    let w = pgpu::solve_kmm(&kernel, target.view(), source.view(), &config).map_err(to_py)?;
    Ok((w.beta, w.objective))
}

/// Runs an experiment suite from a JSON config and returns the JSON summary.
#[pyfunction]
fn run_suite(config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let out = run_suite_rs(&cfg).map_err(to_py)?;
    let summary = Summary { config: cfg, records: out.records };
    serde_json::to_string(&summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pgpu_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyProbSvm>()?;
    m.add_class::<PyPgpu>()?;
    m.add_function(wrap_pyfunction!(gen_triangles, m)?)?;
    m.add_function(wrap_pyfunction!(gen_overlap_square, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(observed_gap, m)?)?;
    m.add_function(wrap_pyfunction!(forward_gap, m)?)?;
    m.add_function(wrap_pyfunction!(flip_rate, m)?)?;
    m.add_function(wrap_pyfunction!(relabel, m)?)?;
    m.add_function(wrap_pyfunction!(solve_kmm, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
