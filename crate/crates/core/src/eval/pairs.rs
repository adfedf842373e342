use serde::{Deserialize, Serialize};

use crate::domain::{LogProb, Sequence};
use crate::error::{Error, Result};
use crate::model::SequenceModel;

/// `log p_M(x) - log p_L(x)`.
pub fn estimation_error(estimate: LogProb, target: LogProb) -> Result<f64> {
    if !estimate.is_finite() || !target.is_finite() {
        return Err(Error::NonFinite(format!(
            "estimation error of estimate {} against target {}",
            estimate.value(),
            target.value()
        )));
    }
    Ok(estimate.value() - target.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbPair {
    pub id: usize,
    pub length: usize,
    /// `log p_L(x)`.
    pub target: LogProb,
    /// `log p_M(x)`.
    pub estimate: LogProb,
}

impl ProbPair {
    pub fn is_finite(&self) -> bool {
        self.target.is_finite() && self.estimate.is_finite()
    }

    /// Estimation error. Only meaningful for finite pairs.
    pub fn error(&self) -> f64 {
        self.estimate.value() - self.target.value()
    }
}

/// Scored pairs, with non-finite ones kept apart so aggregates never see
/// them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    pub pairs: Vec<ProbPair>,
    pub quarantined: Vec<ProbPair>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len() + self.quarantined.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn errors(&self) -> Vec<f64> {
        self.pairs.iter().map(ProbPair::error).collect()
    }

    pub fn mean_error(&self) -> Option<f64> {
        super::stats::mean(&self.errors())
    }
}

/// Scores every sequence of `data` under both distributions. Pair ids are
/// positions in `data`.
pub fn collect_pairs<L, M>(lang: &L, model: &M, data: &[Sequence]) -> Result<PairSet>
where
    L: SequenceModel + ?Sized,
    M: SequenceModel + ?Sized,
{
    let mut set = PairSet::default();
    for (id, x) in data.iter().enumerate() {
        let pair = ProbPair {
            id,
            length: x.len(),
            target: lang.score(x)?,
            estimate: model.score(x)?,
        };
        if pair.is_finite() {
            set.pairs.push(pair);
        } else {
            set.quarantined.push(pair);
        }
    }
    Ok(set)
}
