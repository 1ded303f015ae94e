use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dimred::{ChainConfig, TsneConfig, UmapConfig, UmapInput};
use crate::error::{Error, Result};
use crate::models::ClassifierSpec;
use crate::preprocess::{ImputeStrategy, SyntheticSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Preprocess and reduce the whole dataset, then split (leaks test rows
    /// into every fitted transform).
    #[default]
    Faithful,
    /// Fit every transform on training rows only.
    Sound,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Sound => "sound",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "sound" => Ok(Mode::Sound),
            other => Err(Error::Config(format!("unknown mode `{other}` (faithful | sound)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub test_fraction: f64,
    pub folds: usize,
    pub learning_fractions: Vec<f64>,
    pub calibration_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            test_fraction: 0.25,
            folds: 10,
            learning_fractions: (1..=10).map(|i| i as f64 / 10.0).collect(),
            calibration_bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write every chain stage as `stage_<name>.csv`.
    pub stages: bool,
    /// Write SVG renderings of the curves under `plots/`.
    pub plots: bool,
    /// Write split-protocol models as JSON under `models/`.
    pub models: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            stages: true,
            plots: true,
            models: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub data_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub mode: Mode,
    /// Oversample each ILPD class to twice the majority count instead of to
    /// the majority count.
    pub paper_total: bool,
    pub iqr_k: f64,
    pub impute: ImputeStrategy,
    pub synthetic: SyntheticSpec,
    pub fa_factors: usize,
    pub tsne: TsneConfig,
    pub umap: UmapConfig,
    pub umap_input: UmapInput,
    pub classifiers: Vec<ClassifierSpec>,
    pub eval: EvalConfig,
    pub output: OutputConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_path: PathBuf::from("data/ilpd_standin.csv"),
            output_dir: PathBuf::from("out"),
            seed: 42,
            mode: Mode::Faithful,
            paper_total: true,
            iqr_k: 1.5,
            impute: ImputeStrategy::Faithful,
            synthetic: SyntheticSpec::default(),
            fa_factors: 3,
            tsne: TsneConfig::default(),
            umap: UmapConfig::default(),
            umap_input: UmapInput::Tsne,
            classifiers: ClassifierSpec::defaults(),
            eval: EvalConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses a JSON config; relative paths inside it resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = PipelineConfig::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [&mut cfg.data_path, &mut cfg.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chain(&self) -> ChainConfig {
        ChainConfig {
            lda_dims: 1,
            fa_factors: self.fa_factors,
            tsne: self.tsne.clone(),
            umap: self.umap.clone(),
            umap_input: self.umap_input,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.iqr_k >= 0.0) || !self.iqr_k.is_finite() {
            return Err(Error::Config(format!("iqr_k must be a finite value >= 0, got {}", self.iqr_k)));
        }
        self.synthetic.validate()?;
        if self.fa_factors == 0 {
            return Err(Error::Config("fa_factors must be at least 1".into()));
        }
        self.tsne.validate()?;
        self.umap.validate()?;
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        let mut labels: Vec<&str> = self.classifiers.iter().map(|c| c.label()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("each classifier kind may appear only once".into()));
        }
        for c in &self.classifiers {
            c.validate()?;
        }
        let e = &self.eval;
        if !(e.test_fraction > 0.0 && e.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction must be in (0, 1), got {}", e.test_fraction)));
        }
        if e.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if e.calibration_bins < 2 {
            return Err(Error::Config("calibration_bins must be at least 2".into()));
        }
        if e.learning_fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0))
            || e.learning_fractions.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config("learning_fractions must be ascending values in (0, 1]".into()));
        }
        Ok(())
    }
}
