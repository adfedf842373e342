//! Ground-truth artificial languages with exact sequence probabilities.
//!
//! A language is an order-k table of raw scores: one row of `|Σ| + 1`
//! log-weights (tokens, then EOS) for every BOS-padded context of `k`
//! symbols. Conditionals are the tempered softmax of a row, applied per
//! step, and EOS is forced once a sequence reaches `max_len`, so the support
//! is finite and `Σ_x p(x) = 1` exactly.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::domain::{LogProb, Sequence, Space, Token, Vocabulary};
use crate::error::{Error, Result};
use crate::logspace::{log_softmax_in_place, log_sum_exp_unchecked};
use crate::model::SequenceModel;
use crate::rng::{SeededRng, Stream};

pub const LANGUAGE_FORMAT_VERSION: u32 = 1;

fn default_temperature() -> f64 {
    1.0
}

fn default_max_len() -> usize {
    20
}

/// Parameters from which a language is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageSpec {
    pub vocab_size: usize,
    pub order: usize,
    /// Symmetric Dirichlet concentration for each row. Values below 1 give
    /// peaked, heavy-tailed rows. `None` is the infinite-concentration limit:
    /// every row uniform.
    pub concentration: Option<f64>,
    /// Multiplier applied to the EOS weight of every row before tempering.
    pub eos_bias: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    pub seed: u64,
}

impl LanguageSpec {
    pub fn validate(&self) -> Result<()> {
        Vocabulary::new(self.vocab_size)?;
        if self.order == 0 {
            return Err(Error::invalid("language order must be positive"));
        }
        if let Some(c) = self.concentration {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("concentration must be positive, got {c}")));
            }
        }
        if !(self.eos_bias > 0.0 && self.eos_bias.is_finite()) {
            return Err(Error::invalid(format!("eos_bias must be positive, got {}", self.eos_bias)));
        }
        check_temperature(self.temperature)?;
        if self.max_len == 0 {
            return Err(Error::invalid("max_len must be positive"));
        }
        let rows = (self.vocab_size as f64 + 1.0).powi(self.order as i32);
        if rows * (self.vocab_size as f64 + 1.0) > 5e7 {
            return Err(Error::invalid("language table too large"));
        }
        Ok(())
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be positive, got {t}")))
    }
}

/// Raw score table of an order-k autoregressive model.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularAutoregressiveModel {
    vocab: Vocabulary,
    order: usize,
    logits: Vec<f64>,
}

impl TabularAutoregressiveModel {
    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_contexts(&self) -> usize {
        self.vocab.n_context_symbols().pow(self.order as u32)
    }

    pub fn row(&self, context: usize) -> &[f64] {
        let w = self.vocab.n_outputs();
        &self.logits[context * w..(context + 1) * w]
    }

    /// Index of the row conditioning the symbol at position `pos` of `tokens`.
    pub fn context_index(&self, tokens: &[Token], pos: usize) -> usize {
        let base = self.vocab.n_context_symbols();
        (0..self.order).fold(0, |acc, slot| {
            acc * base + self.vocab.context_symbol(tokens, pos, self.order, slot)
        })
    }
}

/// Softmax of `logits / t`.
pub fn temper(logits: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut v = log_temper(logits, t)?;
    v.iter_mut().for_each(|x| *x = x.exp());
    Ok(v)
}

/// Log-softmax of `logits / t`.
pub fn log_temper(logits: &[f64], t: f64) -> Result<Vec<f64>> {
    check_temperature(t)?;
    if logits.iter().any(|x| x.is_nan()) || !logits.iter().any(|x| x.is_finite()) {
        return Err(Error::invalid("tempering needs at least one finite logit and no NaN"));
    }
    let mut v: Vec<f64> = logits.iter().map(|&x| x / t).collect();
    log_softmax_in_place(&mut v);
    Ok(v)
}

/// `ln X` for `X ~ Gamma(shape, 1)`, finite even when `X` underflows.
fn log_gamma_draw(shape: f64, rng: &mut SeededRng) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("valid gamma shape");
        g.sample(rng).max(f64::MIN_POSITIVE).ln()
    } else {
        // X = Y · U^(1/a) with Y ~ Gamma(a + 1)
        let g = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape");
        let y: f64 = g.sample(rng);
        y.max(f64::MIN_POSITIVE).ln() + rng.open01().ln() / shape
    }
}

/// An artificial language: a score table, a temperature and a length cap.
#[derive(Debug, Clone)]
pub struct GroundTruthLanguage {
    spec: LanguageSpec,
    base: TabularAutoregressiveModel,
    temperature: f64,
    space: Space,
    // tempered log-probabilities, row-major like `base.logits`
    log_rows: Vec<f64>,
    // cumulative probabilities for sampling
    cdf_rows: Vec<f64>,
}

pub fn build_language(spec: &LanguageSpec) -> Result<GroundTruthLanguage> {
    spec.validate()?;
    let vocab = Vocabulary::new(spec.vocab_size)?;
    let width = vocab.n_outputs();
    let n_contexts = vocab.n_context_symbols().pow(spec.order as u32);
    let mut rng = SeededRng::substream(spec.seed, Stream::LanguageRows, 0);
    let eos_shift = spec.eos_bias.ln();
    let mut logits = Vec::with_capacity(n_contexts * width);
    for _ in 0..n_contexts {
        for _ in 0..vocab.size() {
            logits.push(match spec.concentration {
                Some(c) => log_gamma_draw(c, &mut rng),
                None => 0.0,
            });
        }
        let eos = match spec.concentration {
            Some(c) => log_gamma_draw(c, &mut rng),
            None => 0.0,
        };
        logits.push(eos + eos_shift);
    }
    let base = TabularAutoregressiveModel {
        vocab,
        order: spec.order,
        logits,
    };
    GroundTruthLanguage::from_parts(spec.clone(), base, spec.temperature, spec.max_len)
}

impl GroundTruthLanguage {
    fn from_parts(
        spec: LanguageSpec,
        base: TabularAutoregressiveModel,
        temperature: f64,
        max_len: usize,
    ) -> Result<Self> {
        check_temperature(temperature)?;
        let space = Space::new(base.vocab, max_len)?;
        let width = base.vocab.n_outputs();
        let mut log_rows = Vec::with_capacity(base.logits.len());
        let mut cdf_rows = Vec::with_capacity(base.logits.len());
        for ctx in 0..base.n_contexts() {
            let row = log_temper(base.row(ctx), temperature)?;
            let mut acc = 0.0;
            for &lp in &row {
                acc += lp.exp();
                cdf_rows.push(acc);
            }
            // guard the sampler against a cumulative sum that ends below 1
            *cdf_rows.last_mut().unwrap() = f64::INFINITY;
            log_rows.extend_from_slice(&row);
        }
        debug_assert_eq!(log_rows.len(), base.n_contexts() * width);
        Ok(GroundTruthLanguage {
            spec,
            base,
            temperature,
            space,
            log_rows,
            cdf_rows,
        })
    }

    pub fn spec(&self) -> &LanguageSpec {
        &self.spec
    }

    pub fn base(&self) -> &TabularAutoregressiveModel {
        &self.base
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn vocab(&self) -> Vocabulary {
        self.space.vocab
    }

    pub fn max_len(&self) -> usize {
        self.space.max_len
    }

    /// Same score table under a different temperature.
    pub fn retemper(&self, temperature: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.temperature = temperature;
        Self::from_parts(spec, self.base.clone(), temperature, self.space.max_len)
    }

    fn log_row(&self, ctx: usize) -> &[f64] {
        let w = self.space.vocab.n_outputs();
        &self.log_rows[ctx * w..(ctx + 1) * w]
    }

    /// Next-symbol distribution (tokens, then EOS) after `prefix`.
    pub fn next_distribution(&self, prefix: &Sequence) -> Vec<f64> {
        let w = self.space.vocab.n_outputs();
        if prefix.len() >= self.space.max_len {
            let mut d = vec![0.0; w];
            d[self.space.vocab.eos()] = 1.0;
            return d;
        }
        let ctx = self.base.context_index(prefix.tokens(), prefix.len());
        self.log_row(ctx).iter().map(|lp| lp.exp()).collect()
    }

    /// Ancestral sample: draw until EOS, forcing EOS at `max_len`.
    pub fn sample_sequence(&self, rng: &mut SeededRng) -> Sequence {
        let w = self.space.vocab.n_outputs();
        let eos = self.space.vocab.eos();
        let mut toks: Vec<Token> = Vec::new();
        while toks.len() < self.space.max_len {
            let ctx = self.base.context_index(&toks, toks.len());
            let cdf = &self.cdf_rows[ctx * w..(ctx + 1) * w];
            let u: f64 = rng.random();
            let sym = cdf.partition_point(|&c| c <= u);
            if sym == eos {
                break;
            }
            toks.push(Token(sym as u32));
        }
        Sequence::new(toks)
    }

    pub fn sample_corpus(&self, n: usize, rng: &mut SeededRng) -> Vec<Sequence> {
        (0..n).map(|_| self.sample_sequence(rng)).collect()
    }

    pub fn score_sequence(&self, x: &Sequence) -> Result<LogProb> {
        self.score(x)
    }

    /// Exact expected per-step entropy (nats) and expected number of scored
    /// steps (tokens plus EOS), by forward propagation of the context
    /// distribution over positions.
    pub fn entropy_rate(&self) -> (f64, f64) {
        let vocab = self.space.vocab;
        let w = vocab.n_outputs();
        let base = vocab.n_context_symbols();
        let n_ctx = self.base.n_contexts();
        let k = self.base.order;
        let row_entropy: Vec<f64> = (0..n_ctx)
            .map(|c| {
                -self
                    .log_row(c)
                    .iter()
                    .filter(|lp| lp.is_finite())
                    .map(|&lp| lp.exp() * lp)
                    .sum::<f64>()
            })
            .collect();
        // all-BOS context is index (bos, bos, ...) in base-(V+1)
        let start = (0..k).fold(0, |acc, _| acc * base + vocab.bos());
        let shift = base.pow(k as u32 - 1);
        let mut mass = vec![0.0; n_ctx];
        mass[start] = 1.0;
        let (mut nll, mut steps) = (0.0, 0.0);
        for _ in 0..self.space.max_len {
            let mut next = vec![0.0; n_ctx];
            for (c, &m) in mass.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                nll += m * row_entropy[c];
                steps += m;
                let row = self.log_row(c);
                let tail = (c % shift) * base;
                for (t, &lp) in row.iter().enumerate().take(w - 1) {
                    next[tail + t] += m * lp.exp();
                }
            }
            mass = next;
        }
        // forced EOS: one more step with zero entropy
        steps += mass.iter().sum::<f64>();
        (nll / steps, steps)
    }

    pub fn to_file(&self) -> LanguageFile {
        LanguageFile {
            format_version: LANGUAGE_FORMAT_VERSION,
            spec: self.spec.clone(),
            temperature: self.temperature,
            max_len: self.space.max_len,
            logits: self.base.logits.clone(),
        }
    }

    pub fn from_file(file: LanguageFile) -> Result<Self> {
        if file.format_version != LANGUAGE_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: LANGUAGE_FORMAT_VERSION,
            });
        }
        file.spec.validate()?;
        let vocab = Vocabulary::new(file.spec.vocab_size)?;
        let expected = vocab.n_context_symbols().pow(file.spec.order as u32) * vocab.n_outputs();
        if file.logits.len() != expected {
            return Err(Error::invalid(format!(
                "logit table has {} entries, expected {expected}",
                file.logits.len()
            )));
        }
        if file.logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("logit table contains non-finite scores"));
        }
        let base = TabularAutoregressiveModel {
            vocab,
            order: file.spec.order,
            logits: file.logits,
        };
        Self::from_parts(file.spec, base, file.temperature, file.max_len)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
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

impl SequenceModel for GroundTruthLanguage {
    fn space(&self) -> Space {
        self.space
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        let ctx = self.base.context_index(prefix, prefix.len());
        out.copy_from_slice(self.log_row(ctx));
    }
}

/// On-disk form of a language. Scores are JSON numbers in shortest
/// round-trip form, so a reload reproduces every score bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanguageFile {
    pub format_version: u32,
    pub spec: LanguageSpec,
    pub temperature: f64,
    pub max_len: usize,
    pub logits: Vec<f64>,
}

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&q| q > 0.0).map(|&q| q * q.ln()).sum::<f64>()
}

/// Plain softmax, the `t = 1` case of [`temper`].
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp_unchecked(logits);
    logits.iter().map(|&x| (x - lse).exp()).collect()
}
