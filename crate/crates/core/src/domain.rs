//! Shared domain types: tokens, vocabularies, sequences and log-probabilities.
//!
//! A vocabulary of `size` ordinary tokens uses ids `0..size`. Distributions
//! over the next symbol have `size + 1` entries; the final entry is EOS. BOS
//! only ever appears as left padding inside a context and is encoded as
//! `size` there (see [`Vocabulary::context_symbol`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(pub u32);

impl Token {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vocabulary {
    size: usize,
}

impl Vocabulary {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid(format!(
                "a vocabulary needs at least 2 ordinary tokens, got {size}"
            )));
        }
        if size >= u32::MAX as usize {
            return Err(Error::invalid("vocabulary too large"));
        }
        Ok(Vocabulary { size })
    }

    /// Number of ordinary tokens.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of entries in a next-symbol distribution (tokens plus EOS).
    #[inline]
    pub fn n_outputs(&self) -> usize {
        self.size + 1
    }

    /// Index of EOS within a next-symbol distribution.
    #[inline]
    pub fn eos(&self) -> usize {
        self.size
    }

    /// Id used for BOS padding inside contexts.
    #[inline]
    pub fn bos(&self) -> usize {
        self.size
    }

    /// Number of distinct symbols that can occupy a context slot (tokens plus BOS).
    #[inline]
    pub fn n_context_symbols(&self) -> usize {
        self.size + 1
    }

    /// Context slot `slot` (0 = oldest) of a `width`-symbol window ending
    /// right before position `pos`, with BOS padding on the left.
    #[inline]
    pub fn context_symbol(&self, tokens: &[Token], pos: usize, width: usize, slot: usize) -> usize {
        // position of this slot in the sequence; negative means padding
        let back = width - slot;
        if back > pos {
            self.bos()
        } else {
            tokens[pos - back].index()
        }
    }

    pub fn contains(&self, t: Token) -> bool {
        t.index() < self.size
    }

    pub fn check(&self, t: Token) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::TokenOutOfVocabulary {
                token: t.0,
                vocab_size: self.size,
            })
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = Token> {
        (0..self.size as u32).map(Token)
    }
}

/// The set of sequences a model is defined over: a vocabulary plus a length
/// cap at which EOS is forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub vocab: Vocabulary,
    pub max_len: usize,
}

impl Space {
    pub fn new(vocab: Vocabulary, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::invalid("max_len must be positive"));
        }
        Ok(Space { vocab, max_len })
    }

    /// All sequences of length `0..=max_len`, shortest first. Only sensible
    /// for tiny spaces; used by the normalization checks.
    pub fn enumerate(&self) -> Vec<Sequence> {
        let v = self.vocab.size() as u32;
        let mut out = vec![Sequence::empty()];
        let mut frontier = vec![Vec::<Token>::new()];
        for _ in 0..self.max_len {
            let mut next = Vec::with_capacity(frontier.len() * v as usize);
            for prefix in &frontier {
                for t in 0..v {
                    let mut s = prefix.clone();
                    s.push(Token(t));
                    next.push(s);
                }
            }
            out.extend(next.iter().cloned().map(Sequence::new));
            frontier = next;
        }
        out
    }
}

/// An ordered list of ordinary tokens; BOS and EOS are implicit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sequence(Vec<Token>);

impl Sequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sequence(tokens)
    }

    pub fn empty() -> Self {
        Sequence(Vec::new())
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Sequence(ids.iter().copied().map(Token).collect())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.0.iter().map(|t| t.0).collect()
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.0
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        self.0.iter().try_for_each(|&t| vocab.check(t))
    }

    /// Parses a whitespace-separated list of token ids.
    pub fn parse(line: &str) -> Result<Self> {
        line.split_whitespace()
            .map(|w| {
                w.parse::<u32>()
                    .map(Token)
                    .map_err(|_| Error::invalid(format!("bad token id `{w}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Sequence)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", t.0)?;
        }
        Ok(())
    }
}

/// Natural-log probability. Zero probability is `-inf`; NaN is rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO_PROB: LogProb = LogProb(f64::NEG_INFINITY);
    pub const CERTAIN: LogProb = LogProb(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value > 0.0 {
            return Err(Error::NonFinite(format!(
                "{value} is not a valid log-probability"
            )));
        }
        Ok(LogProb(value))
    }

    /// Builds a log-probability from a value already known to be valid, e.g.
    /// a sum of valid log-probabilities. Small positive rounding residue is
    /// clamped to zero.
    pub(crate) fn from_sum(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogProb(value.min(0.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}
