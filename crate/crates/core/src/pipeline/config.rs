use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::augment::PageRankConfig;
use crate::compress::CompressionConfig;
use crate::gfn::GfnConfig;
use crate::graph::DEFAULT_SLICE_UNIT;
use crate::nn::TrainConfig;
use crate::seq::SeqConfig;

/// Which clock feeds `timing_report.json`. `work` counts operations and is
/// reproducible; `wall` measures elapsed seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimingClock {
    #[default]
    Work,
    Wall,
}

fn default_seed() -> u64 {
    42
}

fn default_fraction() -> f64 {
    0.8
}

fn default_slice_unit() -> usize {
    DEFAULT_SLICE_UNIT
}

fn default_psi() -> f64 {
    CompressionConfig::default().psi
}

fn default_sigma() -> usize {
    CompressionConfig::default().sigma
}

fn default_alpha() -> f64 {
    PageRankConfig::default().alpha
}

fn default_tolerance() -> f64 {
    PageRankConfig::default().tolerance
}

fn default_max_iters() -> usize {
    PageRankConfig::default().max_iters
}

fn default_train_gfn() -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-3,
        epochs: 30,
        batch_size: 16,
        ..TrainConfig::default()
    }
}

fn default_train_cls() -> TrainConfig {
    TrainConfig {
        learning_rate: 2e-3,
        epochs: 60,
        batch_size: 16,
        ..TrainConfig::default()
    }
}

/// Pipeline configuration, read from a TOML file. Relative paths are
/// resolved against the directory holding the file. The per-stage training
/// seeds are derived from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub transactions: PathBuf,
    pub labels: PathBuf,
    pub work_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_slice_unit")]
    pub slice_unit: usize,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default = "default_sigma")]
    pub sigma: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_tolerance")]
    pub pr_tolerance: f64,
    #[serde(default = "default_max_iters")]
    pub pr_max_iters: usize,
    #[serde(default)]
    pub timing_clock: TimingClock,
    #[serde(default)]
    pub gfn: GfnConfig,
    #[serde(default = "default_train_gfn")]
    pub train_gfn: TrainConfig,
    #[serde(default)]
    pub classifier: SeqConfig,
    #[serde(default = "default_train_cls")]
    pub train_cls: TrainConfig,
}

impl PipelineConfig {
    /// Configuration with default hyperparameters for the given paths.
    pub fn new(
        transactions: impl Into<PathBuf>,
        labels: impl Into<PathBuf>,
        work_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            transactions: transactions.into(),
            labels: labels.into(),
            work_dir: work_dir.into(),
            seed: default_seed(),
            train_fraction: default_fraction(),
            slice_unit: default_slice_unit(),
            psi: default_psi(),
            sigma: default_sigma(),
            alpha: default_alpha(),
            pr_tolerance: default_tolerance(),
            pr_max_iters: default_max_iters(),
            timing_clock: TimingClock::default(),
            gfn: GfnConfig::default(),
            train_gfn: default_train_gfn(),
            classifier: SeqConfig::default(),
            train_cls: default_train_cls(),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        for p in [&mut cfg.transactions, &mut cfg.labels, &mut cfg.work_dir] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.slice_unit == 0 {
            return Err(PipelineError::Config("slice_unit must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(PipelineError::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        self.compression().validate()?;
        let pr = self.pagerank();
        if !(pr.alpha > 0.0 && pr.alpha < 1.0)
            || !pr.tolerance.is_finite()
            || pr.tolerance <= 0.0
            || pr.max_iters == 0
        {
            return Err(PipelineError::Config(
                "pagerank needs alpha in (0, 1), tolerance > 0, max_iters >= 1".into(),
            ));
        }
        self.gfn.validate()?;
        self.classifier.validate()?;
        if self.classifier.class_count != self.gfn.class_count {
            return Err(PipelineError::Config(
                "gfn and classifier class_count differ".into(),
            ));
        }
        self.train_gfn.validate()?;
        self.train_cls.validate()?;
        Ok(())
    }

    pub fn compression(&self) -> CompressionConfig {
        CompressionConfig {
            psi: self.psi,
            sigma: self.sigma,
        }
    }

    pub fn pagerank(&self) -> PageRankConfig {
        PageRankConfig {
            alpha: self.alpha,
            tolerance: self.pr_tolerance,
            max_iters: self.pr_max_iters,
        }
    }

    pub fn gfn_training(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train_gfn
        }
    }

    pub fn classifier_training(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed.wrapping_add(1),
            ..self.train_cls
        }
    }
}
