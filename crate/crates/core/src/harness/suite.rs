use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::baselines::{run_clean_svm, run_elkan, run_svm_naive};
use super::config::{DatasetSource, ExperimentConfig, Method};
use crate::datagen::{estimate_clean_gap, flip_labels, gen_overlap_square, gen_triangles, load_csv, split_indices, PuDataset};
use crate::error::Result;
use crate::pipeline::{run_pgpu, BoundaryMode, CvSettings, PgpuParams};
use crate::relabel::FlipRateSpec;
use crate::seed::derive_seed;

const TRAIN_FRACTION: f64 = 0.75;

// seed stream tags
const DATA: u64 = 0;
const FLIP: u64 = 1;
const SPLIT: u64 = 2;
const METHOD: u64 = 3;

/// Outcome of one (setting, split, method) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: String,
    pub setting: String,
    pub split: usize,
    pub accuracy: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFailure {
    pub split: usize,
    pub error: String,
}

/// Aggregate over splits for one method and setting. Statistics cover the
/// successful splits; `None` when every split failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: String,
    pub setting: String,
    pub accuracy_mean: Option<f64>,
    /// Sample standard deviation (zero for a single split).
    pub accuracy_std: Option<f64>,
    pub per_split: Vec<f64>,
    pub wall_time_s: f64,
    pub failures: Vec<SplitFailure>,
}

impl ResultRecord {
    fn from_cells(method: &str, setting: &str, cells: &[&CellResult]) -> Self {
        let per_split: Vec<f64> = cells.iter().filter_map(|c| c.accuracy).collect();
        let failures = cells
            .iter()
            .filter_map(|c| c.error.as_ref().map(|e| SplitFailure { split: c.split, error: e.clone() }))
            .collect();
        let (mean, std) = mean_std(&per_split);
        ResultRecord {
            method: method.to_string(),
            setting: setting.to_string(),
            accuracy_mean: mean,
            accuracy_std: std,
            per_split,
            wall_time_s: cells.iter().map(|c| c.wall_time_s).sum(),
            failures,
        }
    }
}

pub(crate) fn mean_std(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub cells: Vec<CellResult>,
    pub records: Vec<ResultRecord>,
}

impl SuiteOutput {
    pub fn all_failed(&self) -> bool {
        self.cells.iter().all(|c| c.accuracy.is_none())
    }

    pub fn record(&self, method: Method, setting: &str) -> Option<&ResultRecord> {
        self.records.iter().find(|r| r.method == method.name() && r.setting == setting)
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
}

pub fn setting_name(spec: &Option<FlipRateSpec>) -> String {
    spec.map_or_else(|| "none".to_string(), |s| s.to_string())
}

fn load_source(cfg: &ExperimentConfig) -> Result<PuDataset> {
    let seed = derive_seed(&[cfg.master_seed, DATA]);
    Ok(match &cfg.dataset_source {
        DatasetSource::Triangles { n_pos, n_neg } => gen_triangles(*n_pos, *n_neg, seed),
        DatasetSource::OverlapSquare { n } => gen_overlap_square(*n, seed),
        DatasetSource::Csv { path } => load_csv(path)?,
    })
}

/// Runs every (setting, split, method) cell. Only setup failures (loading
/// data, estimating the clean gap) abort; cell failures are recorded.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    cfg.validate()?;
    let base = load_source(cfg)?;
    let params = cfg.svm_params(base.dim());
    let settings = cfg.settings();
    let clean_gap = if settings.iter().any(Option::is_some) {
        Some(estimate_clean_gap(&base.to_clean()?, &params)?)
    } else {
        None
    };

    let mut cells = Vec::new();
    for (si, setting) in settings.iter().enumerate() {
        let name = setting_name(setting);
        let data = match (setting, &clean_gap) {
            (Some(spec), Some(gap)) => flip_labels(&base.to_clean()?, gap, spec, derive_seed(&[cfg.master_seed, FLIP, si as u64]))?,
            _ => base.clone(),
        };
        for split in 0..cfg.n_splits {
            let (tr, te) = split_indices(data.len(), TRAIN_FRACTION, derive_seed(&[cfg.master_seed, SPLIT, si as u64, split as u64]))?;
            let train = data.subset(&tr);
            let test = data.subset(&te);
            for (mi, method) in cfg.methods.iter().enumerate() {
                let seed = derive_seed(&[cfg.master_seed, METHOD, si as u64, split as u64, mi as u64]);
                let start = Instant::now();
                let outcome = run_method(*method, &train, &test, cfg, &params, seed);
                let elapsed = start.elapsed().as_secs_f64();
                if let Err(e) = &outcome {
                    log::warn!("{method} / {name} / split {split}: {e}");
                }
                cells.push(CellResult {
                    method: method.name().to_string(),
                    setting: name.clone(),
                    split,
                    accuracy: outcome.as_ref().ok().copied(),
                    wall_time_s: if cfg.timing { elapsed } else { 0.0 },
                    error: outcome.err().map(|e| e.to_string()),
                });
            }
        }
    }

    let mut records = Vec::new();
    for setting in &settings {
        let name = setting_name(setting);
        for method in &cfg.methods {
            let group: Vec<&CellResult> = cells.iter().filter(|c| c.setting == name && c.method == method.name()).collect();
            records.push(ResultRecord::from_cells(method.name(), &name, &group));
        }
    }
    Ok(SuiteOutput { cells, records })
}

fn run_method(
    method: Method,
    train: &PuDataset,
    test: &PuDataset,
    cfg: &ExperimentConfig,
    params: &crate::svm::SvmParams,
    seed: u64,
) -> Result<f64> {
    let pgpu = |boundary| {
        let mut p = PgpuParams::new(*params);
        p.kmm = cfg.kmm;
        p.n_prime = cfg.n_prime;
        p.boundary = boundary;
        p.cv = CvSettings { seed, ..CvSettings::default() };
        p
    };
    match method {
        Method::Pgpu => run_pgpu(train, test, &pgpu(BoundaryMode::MinNprime)),
        Method::PgpuCv => run_pgpu(train, test, &pgpu(BoundaryMode::Cv)),
        Method::SvmNaive => run_svm_naive(train, test, params),
        Method::Elkan => run_elkan(train, test, params, seed),
        Method::Clean => run_clean_svm(train, test, params),
    }
}

/// Writes `results.csv` (one row per cell) and `summary.json`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &SuiteOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut wtr = csv::Writer::from_path(dir.join("results.csv"))?;
    wtr.write_record(["method", "setting", "split", "accuracy", "wall_time_s"])?;
    for c in &out.cells {
        wtr.write_record([
            c.method.clone(),
            c.setting.clone(),
            c.split.to_string(),
            c.accuracy.map_or(String::new(), |a| a.to_string()),
            c.wall_time_s.to_string(),
        ])?;
    }
    wtr.flush()?;
    let summary = Summary { config: cfg.clone(), records: out.records.clone() };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

pub fn load_summary(dir: impl AsRef<Path>) -> Result<Summary> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.as_ref().join("summary.json"))?)?)
}
