//! The autoregressive scoring interface shared by ground-truth languages and
//! candidate models.

use crate::domain::{LogProb, Sequence, Space, Token};
use crate::error::Result;

/// A locally normalized autoregressive distribution over [`Space`].
///
/// Implementors only supply the next-symbol distribution for prefixes
/// shorter than `max_len`; at `max_len` EOS is forced by the provided
/// methods.
pub trait SequenceModel {
    fn space(&self) -> Space;

    /// Writes `log p(· | prefix)` over the ordinary tokens followed by EOS
    /// into `out`, which has `vocab.n_outputs()` slots.
    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]);

    /// Per-step log-probabilities of `x`, one entry per token plus the final
    /// EOS step. Sequences longer than `max_len` have probability zero; their
    /// list ends with `-inf` at the first impossible step.
    fn step_log_probs(&self, x: &Sequence) -> Result<Vec<f64>> {
        let space = self.space();
        x.validate(&space.vocab)?;
        let toks = x.tokens();
        let eos = space.vocab.eos();
        let mut buf = vec![0.0; space.vocab.n_outputs()];
        let mut steps = Vec::with_capacity(toks.len() + 1);
        for i in 0..=toks.len() {
            let symbol = toks.get(i).map_or(eos, |t| t.index());
            if i >= space.max_len {
                steps.push(if symbol == eos { 0.0 } else { f64::NEG_INFINITY });
                break;
            }
            self.next_log_probs(&toks[..i], &mut buf);
            steps.push(buf[symbol]);
        }
        Ok(steps)
    }

    /// `log p(x)` by the chain rule, including the terminal EOS step.
    fn score(&self, x: &Sequence) -> Result<LogProb> {
        let steps = self.step_log_probs(x)?;
        Ok(LogProb::from_sum(steps.iter().sum()))
    }
}

impl<M: SequenceModel + ?Sized> SequenceModel for &M {
    fn space(&self) -> Space {
        (**self).space()
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        (**self).next_log_probs(prefix, out)
    }

    fn step_log_probs(&self, x: &Sequence) -> Result<Vec<f64>> {
        (**self).step_log_probs(x)
    }

    fn score(&self, x: &Sequence) -> Result<LogProb> {
        (**self).score(x)
    }
}

/// Total probability mass over every sequence of the space, by brute force.
pub fn enumerated_mass<M: SequenceModel + ?Sized>(model: &M) -> Result<f64> {
    let mut total = 0.0;
    for x in model.space().enumerate() {
        total += model.score(&x)?.prob();
    }
    Ok(total)
}
