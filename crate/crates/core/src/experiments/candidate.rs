use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{CandidateConfig, CandidateKind};
use crate::domain::{LogProb, Sequence, Space, Token};
use crate::error::{Error, Result};
use crate::lang::{GroundTruthLanguage, LanguageFile};
use crate::learner::{train_neural, train_ngram, NGramModel, NeuralLM, TrainTrace};
use crate::model::SequenceModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model scored against the ground truth.
#[derive(Debug, Clone)]
pub enum Candidate {
    Oracle(GroundTruthLanguage),
    NGram(NGramModel),
    Neural(NeuralLM),
}

impl Candidate {
    pub fn kind(&self) -> CandidateKind {
        match self {
            Candidate::Oracle(_) => CandidateKind::Oracle,
            Candidate::NGram(_) => CandidateKind::NGram,
            Candidate::Neural(_) => CandidateKind::Neural,
        }
    }

    pub fn to_file(&self) -> ModelFile {
        let model = match self {
            Candidate::Oracle(l) => StoredModel::Oracle(l.to_file()),
            Candidate::NGram(m) => StoredModel::NGram(m.clone()),
            Candidate::Neural(m) => StoredModel::Neural(m.clone()),
        };
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(match file.model {
            StoredModel::Oracle(l) => Candidate::Oracle(GroundTruthLanguage::from_file(l)?),
            StoredModel::NGram(m) => {
                m.check()?;
                Candidate::NGram(m)
            }
            StoredModel::Neural(m) => Candidate::Neural(m.rebuild()?),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Versioned on-disk form of a [`Candidate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub model: StoredModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoredModel {
    Oracle(LanguageFile),
    NGram(NGramModel),
    Neural(NeuralLM),
}

impl SequenceModel for Candidate {
    fn space(&self) -> Space {
        match self {
            Candidate::Oracle(m) => m.space(),
            Candidate::NGram(m) => m.space(),
            Candidate::Neural(m) => m.space(),
        }
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        match self {
            Candidate::Oracle(m) => m.next_log_probs(prefix, out),
            Candidate::NGram(m) => m.next_log_probs(prefix, out),
            Candidate::Neural(m) => m.next_log_probs(prefix, out),
        }
    }

    fn step_log_probs(&self, x: &Sequence) -> Result<Vec<f64>> {
        match self {
            Candidate::Oracle(m) => m.step_log_probs(x),
            Candidate::NGram(m) => m.step_log_probs(x),
            Candidate::Neural(m) => m.step_log_probs(x),
        }
    }

    fn score(&self, x: &Sequence) -> Result<LogProb> {
        match self {
            Candidate::Oracle(m) => m.score(x),
            Candidate::NGram(m) => m.score(x),
            Candidate::Neural(m) => m.score(x),
        }
    }
}

/// Fits the configured candidate. The oracle ignores the data.
pub fn fit_candidate(
    cfg: &CandidateConfig,
    lang: &GroundTruthLanguage,
    train: &[Sequence],
    valid: &[Sequence],
) -> Result<(Candidate, Option<TrainTrace>)> {
    match cfg.kind {
        CandidateKind::Oracle => Ok((Candidate::Oracle(lang.clone()), None)),
        CandidateKind::NGram => {
            let m = train_ngram(train, lang.space(), cfg.ngram_order, cfg.ngram_alpha)?;
            Ok((Candidate::NGram(m), None))
        }
        CandidateKind::Neural => {
            let arch = cfg.neural_arch(lang.base().order());
            let (m, trace) = train_neural(train, valid, lang.space(), arch, &cfg.train)?;
            Ok((Candidate::Neural(m), Some(trace)))
        }
    }
}
