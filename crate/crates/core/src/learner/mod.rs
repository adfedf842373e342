//! Candidate models trained on samples from a ground-truth language.

mod neural;
mod ngram;
mod train;

pub use neural::{NeuralConfig, NeuralLM};
pub use ngram::{train_ngram, NGramModel};
pub use train::{split_validation, train_neural, EpochRecord, TrainConfig, Trainer, TrainTrace};

use crate::domain::Sequence;
use crate::error::{Error, Result};
use crate::model::SequenceModel;

/// Mean over sequences of `exp(-(1/n) Σ_t log p(x_t | x_<t))`, where the
/// `n` steps of each sequence include its EOS step.
pub fn perplexity<M: SequenceModel + ?Sized>(model: &M, data: &[Sequence]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::NotEnoughData("perplexity of an empty corpus".into()));
    }
    let mut total = 0.0;
    for (index, x) in data.iter().enumerate() {
        let steps = model.step_log_probs(x)?;
        let lp: f64 = steps.iter().sum();
        if !lp.is_finite() {
            return Err(Error::ZeroProbability { index });
        }
        total += (-lp / (x.len() + 1) as f64).exp();
    }
    Ok(total / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Space, Token, Vocabulary};
    use crate::lang::{build_language, LanguageSpec};
    use crate::rng::{SeededRng, Stream};

    /// Assigns a fixed log-probability to every step.
    struct ConstantStep {
        space: Space,
        per_step: Vec<f64>,
    }

    impl SequenceModel for ConstantStep {
        fn space(&self) -> Space {
            self.space
        }
        fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
            out.fill(self.per_step[prefix.len().min(self.per_step.len() - 1)]);
        }
    }

    #[test]
    fn perplexity_examples() {
        let sp = Space::new(Vocabulary::new(4).unwrap(), 10).unwrap();
        let uniform = NeuralLM::zeros(sp, NeuralConfig { window: 1, embed_dim: 1, hidden: 1 }).unwrap();
        let data: Vec<Sequence> = (0..5).map(|n| Sequence::from_ids(&vec![2; n])).collect();
        assert!((perplexity(&uniform, &data).unwrap() - 5.0).abs() < 1e-12);

        let certain = ConstantStep { space: sp, per_step: vec![0.0] };
        assert_eq!(perplexity(&certain, &data[2..3]).unwrap(), 1.0);

        // per-token NLLs ln 2 and ln 8 on two single-token sequences (2 steps each)
        let a = ConstantStep { space: sp, per_step: vec![-(2f64.ln())] };
        let b = ConstantStep { space: sp, per_step: vec![-(8f64.ln())] };
        let x = Sequence::from_ids(&[1]);
        let pa = perplexity(&a, std::slice::from_ref(&x)).unwrap();
        let pb = perplexity(&b, std::slice::from_ref(&x)).unwrap();
        assert!(((pa + pb) / 2.0 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn perplexity_errors() {
        let sp = Space::new(Vocabulary::new(2).unwrap(), 5).unwrap();
        let zero = ConstantStep { space: sp, per_step: vec![f64::NEG_INFINITY] };
        let data = vec![Sequence::from_ids(&[0])];
        assert!(matches!(perplexity(&zero, &data), Err(Error::ZeroProbability { index: 0 })));
        assert!(perplexity(&zero, &[]).is_err());
    }

    #[test]
    fn ground_truth_perplexity_tracks_entropy_rate() {
        let l = build_language(&LanguageSpec {
            vocab_size: 8,
            order: 1,
            concentration: Some(2.0),
            eos_bias: 1.0,
            temperature: 1.0,
            max_len: 40,
            seed: 8,
        })
        .unwrap();
        let mut rng = SeededRng::substream(0, Stream::Sampling, 0);
        let data = l.sample_corpus(50_000, &mut rng);
        let pp = perplexity(&l, &data).unwrap();
        let (rate, _) = l.entropy_rate();
        let target = rate.exp();
        assert!((pp - target).abs() / target < 0.10, "pp {pp} vs exp(H) {target}");
    }
}
