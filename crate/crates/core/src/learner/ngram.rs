use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Sequence, Space, Token};
use crate::error::{Error, Result};
use crate::model::SequenceModel;

/// Add-α smoothed n-gram model. Order `n` conditions on the previous
/// `n - 1` symbols, BOS-padded; `n = 1` is a unigram model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramModel {
    space: Space,
    order: usize,
    alpha: f64,
    // context index -> counts over tokens + EOS
    counts: BTreeMap<u64, Vec<u64>>,
}

pub fn train_ngram(corpus: &[Sequence], space: Space, n: usize, alpha: f64) -> Result<NGramModel> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("smoothing constant must be >= 0, got {alpha}")));
    }
    let mut model = NGramModel {
        space,
        order: n,
        alpha,
        counts: BTreeMap::new(),
    };
    model.observe(corpus)?;
    Ok(model)
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Adds the counts of `corpus`. Training on `a` then observing `b` equals
    /// training on `a ++ b`.
    pub fn observe(&mut self, corpus: &[Sequence]) -> Result<()> {
        let space = self.space;
        let width = space.vocab.n_outputs();
        for x in corpus {
            x.validate(&space.vocab)?;
            if x.len() > space.max_len {
                return Err(Error::invalid(format!(
                    "training sequence of length {} exceeds max_len {}",
                    x.len(),
                    space.max_len
                )));
            }
        }
        for x in corpus {
            let toks = x.tokens();
            // the step at max_len is forced EOS and carries no information
            for i in 0..=toks.len().min(space.max_len - 1) {
                let sym = toks.get(i).map_or(space.vocab.eos(), |t| t.index());
                let ctx = self.context_index(toks, i);
                self.counts.entry(ctx).or_insert_with(|| vec![0; width])[sym] += 1;
            }
        }
        Ok(())
    }

    fn context_index(&self, tokens: &[Token], pos: usize) -> u64 {
        let v = &self.space.vocab;
        let base = v.n_context_symbols() as u64;
        let width = self.order - 1;
        (0..width).fold(0u64, |acc, slot| {
            acc * base + v.context_symbol(tokens, pos, width, slot) as u64
        })
    }

    /// Observed counts for the context preceding position `pos`.
    pub fn context_counts(&self, tokens: &[Token], pos: usize) -> Option<&[u64]> {
        self.counts
            .get(&self.context_index(tokens, pos))
            .map(|c| c.as_slice())
    }

    /// Rejects tables that could not have come from [`train_ngram`].
    pub(crate) fn check(&self) -> Result<()> {
        if self.order == 0 || !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("n-gram order or smoothing constant out of range"));
        }
        let width = self.space.vocab.n_outputs();
        let n_contexts = (self.space.vocab.n_context_symbols() as u64).checked_pow(self.order as u32 - 1);
        for (&ctx, c) in &self.counts {
            if c.len() != width || n_contexts.is_some_and(|n| ctx >= n) {
                return Err(Error::invalid(format!("malformed n-gram count row for context {ctx}")));
            }
        }
        Ok(())
    }

    /// Same counts, different smoothing constant.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        NGramModel {
            alpha,
            ..self.clone()
        }
    }
}

impl SequenceModel for NGramModel {
    fn space(&self) -> Space {
        self.space
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        let k = out.len() as f64;
        match self.counts.get(&self.context_index(prefix, prefix.len())) {
            Some(c) => {
                let total: u64 = c.iter().sum();
                let denom = (total as f64 + self.alpha * k).ln();
                for (o, &n) in out.iter_mut().zip(c) {
                    *o = (n as f64 + self.alpha).ln() - denom;
                }
            }
            // unseen context: (0 + α) / (0 + α·K), and the same uniform
            // fallback when α = 0 leaves the ratio undefined
            None => out.fill(-k.ln()),
        }
    }
}
