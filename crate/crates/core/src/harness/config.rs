use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PgpuError, Result};
use crate::kernels::KernelSpec;
use crate::kmm::KmmConfig;
use crate::relabel::FlipRateSpec;
use crate::svm::SvmParams;

/// Declarative description of an experiment suite, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_source: DatasetSource,
    /// One flip setting, a list of settings, or `null` to use observed labels as given.
    #[serde(default)]
    pub flip: Option<FlipList>,
    pub methods: Vec<Method>,
    #[serde(default = "default_splits")]
    pub n_splits: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub svm: SvmSettings,
    #[serde(default)]
    pub kmm: KmmConfig,
    #[serde(default = "default_n_prime")]
    pub n_prime: usize,
    /// Record wall-clock times; off by default so result files are reproducible.
    #[serde(default)]
    pub timing: bool,
}

fn default_splits() -> usize {
    10
}

fn default_n_prime() -> usize {
    3
}

impl ExperimentConfig {
    pub fn new(dataset_source: DatasetSource, flip: Option<FlipList>, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            dataset_source,
            flip,
            methods,
            n_splits: default_splits(),
            master_seed: 0,
            svm: SvmSettings::default(),
            kmm: KmmConfig::default(),
            n_prime: default_n_prime(),
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PgpuError::InvalidParameter(m.to_string()));
        if self.n_splits == 0 {
            return bad("n_splits must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty");
        }
        if self.n_prime == 0 {
            return bad("n_prime must be at least 1");
        }
        if self.svm.c.is_nan() || self.svm.c <= 0.0 || self.svm.tol.is_nan() || self.svm.tol <= 0.0 {
            return bad("svm.c and svm.tol must be positive");
        }
        if let Some(k) = &self.svm.kernel {
            k.validate()?;
        }
        self.kmm.validate()?;
        for spec in self.settings().into_iter().flatten() {
            spec.validate()?;
        }
        match self.dataset_source {
            DatasetSource::Triangles { n_pos, n_neg } if n_pos == 0 || n_neg == 0 => bad("triangles needs both classes"),
            DatasetSource::OverlapSquare { n } if n < 4 => bad("overlap_square needs at least 4 points"),
            _ => Ok(()),
        }
    }

    /// Flip settings in run order; `[None]` when labels are used as given.
    pub fn settings(&self) -> Vec<Option<FlipRateSpec>> {
        match &self.flip {
            None => vec![None],
            Some(FlipList::One(s)) => vec![Some(*s)],
            Some(FlipList::Many(v)) if v.is_empty() => vec![None],
            Some(FlipList::Many(v)) => v.iter().copied().map(Some).collect(),
        }
    }

    pub fn svm_params(&self, dim: usize) -> SvmParams {
        SvmParams::new(self.svm.c, self.svm.kernel.unwrap_or_else(|| KernelSpec::default_for_dim(dim))).with_tol(self.svm.tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlipList {
    One(FlipRateSpec),
    Many(Vec<FlipRateSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSettings {
    pub c: f64,
    /// `None` selects an RBF kernel with `gamma = 1/d`.
    pub kernel: Option<KernelSpec>,
    pub tol: f64,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings { c: 1.0, kernel: None, tol: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pgpu,
    PgpuCv,
    SvmNaive,
    Elkan,
    /// SVM on the latent labels of the same split.
    Clean,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pgpu => "pgpu",
            Method::PgpuCv => "pgpu_cv",
            Method::SvmNaive => "svm_naive",
            Method::Elkan => "elkan",
            Method::Clean => "clean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the data comes from. In JSON either a bare name (`"triangles"`,
/// `"overlap_square"`) or an object such as `{"csv": {"path": "data.csv"}}`
/// or `{"triangles": {"n_pos": 200, "n_neg": 200}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SourceRepr")]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Triangles { n_pos: usize, n_neg: usize },
    OverlapSquare { n: usize },
    Csv { path: PathBuf },
}

impl DatasetSource {
    pub fn triangles() -> Self {
        DatasetSource::Triangles { n_pos: 1000, n_neg: 1000 }
    }

    pub fn overlap_square() -> Self {
        DatasetSource::OverlapSquare { n: 2000 }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SourceRepr {
    Name(SourceName),
    Full(SourceFull),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum SourceName {
    Triangles,
    #[serde(alias = "overlap")]
    OverlapSquare,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum SourceFull {
    Triangles {
        #[serde(default = "thousand")]
        n_pos: usize,
        #[serde(default = "thousand")]
        n_neg: usize,
    },
    #[serde(alias = "overlap")]
    OverlapSquare {
        #[serde(default = "two_thousand")]
        n: usize,
    },
    Csv { path: PathBuf },
}

fn thousand() -> usize {
    1000
}

fn two_thousand() -> usize {
    2000
}

impl From<SourceRepr> for DatasetSource {
    fn from(r: SourceRepr) -> Self {
        match r {
            SourceRepr::Name(SourceName::Triangles) => DatasetSource::triangles(),
            SourceRepr::Name(SourceName::OverlapSquare) => DatasetSource::overlap_square(),
            SourceRepr::Full(SourceFull::Triangles { n_pos, n_neg }) => DatasetSource::Triangles { n_pos, n_neg },
            SourceRepr::Full(SourceFull::OverlapSquare { n }) => DatasetSource::OverlapSquare { n },
            SourceRepr::Full(SourceFull::Csv { path }) => DatasetSource::Csv { path },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"dataset_source": "triangles", "flip": {"kind": "inverse", "alpha": 0.1, "beta": 0.5},
                "methods": ["pgpu", "svm_naive"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.dataset_source, DatasetSource::triangles());
        assert_eq!(cfg.n_splits, 10);
        assert_eq!(cfg.n_prime, 3);
        assert_eq!(cfg.settings(), vec![Some(FlipRateSpec::Inverse { alpha: 0.1, beta: 0.5 })]);
        assert_eq!(cfg.svm_params(2).kernel, KernelSpec::Rbf { gamma: 0.5 });
    }

    #[test]
    fn full_config_round_trips() {
        let mut cfg = ExperimentConfig::new(
            DatasetSource::Csv { path: "d.csv".into() },
            Some(FlipList::Many(vec![FlipRateSpec::Linear { alpha: 0.2 }, FlipRateSpec::Constant { alpha: 0.1 }])),
            vec![Method::Elkan, Method::PgpuCv],
        );
        cfg.svm.kernel = Some(KernelSpec::Linear);
        cfg.kmm.epsilon = Some(0.2);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn sized_sources() {
        let cfg = ExperimentConfig::from_json(r#"{"dataset_source": {"overlap": {"n": 300}}, "methods": ["clean"]}"#).unwrap();
        assert_eq!(cfg.dataset_source, DatasetSource::OverlapSquare { n: 300 });
        assert_eq!(cfg.settings(), vec![None]);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            r#"{"dataset_source": "triangles", "methods": []}"#,
            r#"{"dataset_source": "triangles", "methods": ["pgpu"], "n_splits": 0}"#,
            r#"{"dataset_source": "circles", "methods": ["pgpu"]}"#,
            r#"{"dataset_source": "triangles", "methods": ["natarajan"]}"#,
            r#"{"dataset_source": "triangles", "methods": ["pgpu"], "flip": {"kind": "linear", "alpha": 3}}"#,
            r#"{"dataset_source": "triangles", "methods": ["pgpu"], "bogus": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
