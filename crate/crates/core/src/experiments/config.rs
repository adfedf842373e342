use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::BootstrapConfig;
use crate::lang::{GroundTruthLanguage, LanguageSpec};
use crate::learner::{NeuralConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FixedData,
    EpochTracking,
    Online,
    Perturbation,
    TemperatureSweep,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::FixedData => "fixed_data",
            ExperimentKind::EpochTracking => "epoch_tracking",
            ExperimentKind::Online => "online",
            ExperimentKind::Perturbation => "perturbation",
            ExperimentKind::TemperatureSweep => "temperature_sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageSource {
    Spec(LanguageSpec),
    /// A saved language file, resolved against the working directory.
    File(PathBuf),
}

impl LanguageSource {
    pub fn load(&self) -> Result<GroundTruthLanguage> {
        match self {
            LanguageSource::Spec(spec) => crate::lang::build_language(spec),
            LanguageSource::File(p) => GroundTruthLanguage::load(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// The ground-truth language itself.
    Oracle,
    #[serde(rename = "ngram", alias = "n_gram")]
    NGram,
    Neural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CandidateConfig {
    pub kind: CandidateKind,
    pub ngram_order: usize,
    pub ngram_alpha: f64,
    /// `None` picks a window of `k + 1` (language order plus one), 16-wide
    /// embeddings and 64 hidden units.
    pub neural: Option<NeuralConfig>,
    pub train: TrainConfig,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            kind: CandidateKind::Neural,
            ngram_order: 3,
            ngram_alpha: 0.01,
            neural: None,
            train: TrainConfig::default(),
        }
    }
}

impl CandidateConfig {
    pub fn neural_arch(&self, language_order: usize) -> NeuralConfig {
        self.neural.unwrap_or(NeuralConfig {
            window: language_order + 1,
            embed_dim: 16,
            hidden: 64,
        })
    }
}

/// Corpus sizes. Reference scale is 1M training and 500k test sequences;
/// the defaults are desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    /// Train and test sequences scored after every epoch.
    pub epoch_subset: usize,
    /// Fresh sequences per online iteration (reference: 500k).
    pub fresh: usize,
}

impl Default for CorpusSizes {
    fn default() -> Self {
        CorpusSizes {
            train: 50_000,
            valid: 5_000,
            test: 10_000,
            epoch_subset: 10_000,
            fresh: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinConfig {
    pub equal_range: usize,
    /// Equal-range bins need more than this many pairs to be reported.
    pub min_count: usize,
    pub equal_count: usize,
    /// Cells per axis of the joint histogram and columns of the heat map.
    pub histogram: usize,
}

impl Default for BinConfig {
    fn default() -> Self {
        BinConfig {
            equal_range: 20,
            min_count: 10,
            equal_count: 50,
            histogram: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationConfig {
    pub depth: usize,
    /// Uniformly random sequences to score alongside; 0 disables.
    pub random_sequences: usize,
    pub random_mean_len: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            depth: 30,
            random_sequences: 10_000,
            random_mean_len: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub language: LanguageSource,
    #[serde(default)]
    pub candidate: CandidateConfig,
    #[serde(default)]
    pub sizes: CorpusSizes,
    /// Online iterations (reference: 60).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Clear optimizer moments at the start of every online iteration.
    #[serde(default)]
    pub reset_optimizer: bool,
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub bins: BinConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    /// Seeds corpus sampling, perturbation and random sequences.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_iterations() -> usize {
    20
}

fn default_temperatures() -> Vec<f64> {
    vec![0.70, 0.85, 1.00, 1.15]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Desk-scale defaults for `kind` over `language`.
    pub fn new(kind: ExperimentKind, language: LanguageSource) -> Self {
        ExperimentConfig {
            kind,
            language,
            candidate: CandidateConfig::default(),
            sizes: CorpusSizes::default(),
            iterations: default_iterations(),
            reset_optimizer: false,
            temperatures: default_temperatures(),
            perturbation: PerturbationConfig::default(),
            bins: BinConfig::default(),
            bootstrap: BootstrapConfig::default(),
            seed: 0,
            out_dir: default_out_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sizes;
        if s.train == 0 || s.valid == 0 || s.test == 0 || s.epoch_subset == 0 || s.fresh == 0 {
            return Err(Error::invalid("corpus sizes must be at least 1"));
        }
        let b = &self.bins;
        if b.equal_range == 0 || b.equal_count == 0 || b.histogram == 0 {
            return Err(Error::invalid("bin counts must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("online runs need at least one iteration"));
        }
        if self.temperatures.is_empty() {
            return Err(Error::invalid("temperature list is empty"));
        }
        if self.perturbation.depth == 0 {
            return Err(Error::invalid("perturbation depth must be at least 1"));
        }
        if self.candidate.kind == CandidateKind::NGram && self.kind == ExperimentKind::EpochTracking {
            return Err(Error::invalid("n-gram candidates do not train by epochs"));
        }
        self.candidate.train.validate()?;
        if let Some(n) = &self.candidate.neural {
            n.validate()?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
