use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{mean, BootstrapConfig};
use crate::domain::Sequence;
use crate::error::{Error, Result};
use crate::model::SequenceModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    /// Scored steps: tokens plus the EOS step, minus the step forced at
    /// `max_len`.
    pub steps: usize,
    pub count: usize,
    /// `steps * mean_token_error`.
    pub expected: f64,
    /// Mean sequence-level error of sequences with this many steps.
    pub observed: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthAnalysis {
    /// Per-sequence mean of step errors, averaged over sequences.
    pub mean_token_error: f64,
    /// Ascending in `steps`.
    pub rows: Vec<LengthRow>,
    /// Sequences with a non-finite step under either distribution.
    pub quarantined: usize,
}

/// Compares observed error by length against pure per-step compounding.
/// Row `r` bootstraps with substream `r.steps`.
pub fn length_analysis<L, M>(
    lang: &L,
    model: &M,
    data: &[Sequence],
    bootstrap: &BootstrapConfig,
) -> Result<LengthAnalysis>
where
    L: SequenceModel + ?Sized,
    M: SequenceModel + ?Sized,
{
    if data.is_empty() {
        return Err(Error::NotEnoughData("length analysis needs sequences".into()));
    }
    let max_len = lang.space().max_len;
    let mut per_seq = Vec::with_capacity(data.len());
    let mut by_steps: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut quarantined = 0;
    for x in data {
        if x.len() > max_len {
            quarantined += 1;
            continue;
        }
        let target = lang.step_log_probs(x)?;
        let estimate = model.step_log_probs(x)?;
        let steps = (x.len() + 1).min(max_len);
        let diffs: Vec<f64> = estimate[..steps]
            .iter()
            .zip(&target[..steps])
            .map(|(m, l)| m - l)
            .collect();
        if diffs.iter().any(|d| !d.is_finite()) {
            quarantined += 1;
            continue;
        }
        let total: f64 = diffs.iter().sum();
        per_seq.push(total / steps as f64);
        by_steps.entry(steps).or_default().push(total);
    }
    let mean_token_error = mean(&per_seq)
        .ok_or_else(|| Error::NotEnoughData("every sequence has a zero-probability step".into()))?;
    let mut rows = Vec::with_capacity(by_steps.len());
    for (steps, errs) in by_steps {
        let (ci_lo, ci_hi) = bootstrap.ci(&errs, steps as u64)?;
        rows.push(LengthRow {
            steps,
            count: errs.len(),
            expected: steps as f64 * mean_token_error,
            observed: mean(&errs).expect("non-empty group"),
            ci_lo,
            ci_hi,
        });
    }
    Ok(LengthAnalysis {
        mean_token_error,
        rows,
        quarantined,
    })
}
