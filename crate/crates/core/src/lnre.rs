//! Frequency spectra and Good-Turing estimates of unseen-event mass.
//!
//! The potential productivity `N_1 / N` estimates the probability that the
//! next draw is a type never seen before. A sample stays in the regime of
//! many rare events while it remains bounded away from zero.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m -> N_m`: how many types occur exactly `m` times in `n` events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    n: u64,
    classes: BTreeMap<u64, u64>,
}

impl FrequencySpectrum {
    pub fn from_classes(classes: BTreeMap<u64, u64>) -> Result<Self> {
        if classes.contains_key(&0) {
            return Err(Error::invalid("frequency class 0 is unobservable"));
        }
        let classes: BTreeMap<u64, u64> = classes.into_iter().filter(|&(_, c)| c > 0).collect();
        let n = classes.iter().map(|(m, c)| m * c).sum();
        Ok(FrequencySpectrum { n, classes })
    }

    /// Total events `N`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_m(&self, m: u64) -> u64 {
        self.classes.get(&m).copied().unwrap_or(0)
    }

    pub fn hapax(&self) -> u64 {
        self.n_m(1)
    }

    pub fn types(&self) -> u64 {
        self.classes.values().sum()
    }

    /// Non-empty classes in ascending `m`.
    pub fn classes(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.classes.iter().map(|(&m, &c)| (m, c))
    }

    fn bump(&mut self, old: u64) {
        if old > 0 {
            let c = self.classes.get_mut(&old).expect("class of a seen type");
            *c -= 1;
            if *c == 0 {
                self.classes.remove(&old);
            }
        }
        *self.classes.entry(old + 1).or_insert(0) += 1;
        self.n += 1;
    }
}

pub fn count_spectrum<E, I>(events: I) -> FrequencySpectrum
where
    E: Hash + Eq,
    I: IntoIterator<Item = E>,
{
    let mut s = SpectrumCounter::default();
    for e in events {
        s.push(e);
    }
    s.spectrum
}

/// A spectrum maintained one event at a time.
#[derive(Debug, Clone)]
pub struct SpectrumCounter<E> {
    counts: HashMap<E, u64>,
    spectrum: FrequencySpectrum,
}

impl<E> Default for SpectrumCounter<E> {
    fn default() -> Self {
        SpectrumCounter {
            counts: HashMap::new(),
            spectrum: FrequencySpectrum::default(),
        }
    }
}

impl<E: Hash + Eq> SpectrumCounter<E> {
    pub fn push(&mut self, e: E) {
        let c = self.counts.entry(e).or_insert(0);
        self.spectrum.bump(*c);
        *c += 1;
    }

    pub fn spectrum(&self) -> &FrequencySpectrum {
        &self.spectrum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodTuring {
    pub probability: f64,
    /// `N_{m+1} = 0`, so the estimate collapsed to zero.
    pub sparse: bool,
}

/// Per-event probability of a type seen `m` times:
/// `((m + 1) / N) * (N_{m+1} / N_m)`, on the raw spectrum.
pub fn good_turing(m: u64, s: &FrequencySpectrum) -> Result<GoodTuring> {
    if s.n == 0 {
        return Err(Error::NotEnoughData("Good-Turing on an empty sample".into()));
    }
    let n_m = s.n_m(m);
    if n_m == 0 {
        return Err(Error::EmptyFrequencyClass(m));
    }
    let next = s.n_m(m + 1);
    Ok(GoodTuring {
        probability: (m + 1) as f64 / s.n as f64 * (next as f64 / n_m as f64),
        sparse: next == 0,
    })
}

/// Mass of frequency class `m`, `N_m * P(m) = (m + 1) N_{m+1} / N`.
/// Defined for `m = 0`, where it is the unseen mass.
pub fn good_turing_mass(m: u64, s: &FrequencySpectrum) -> Result<f64> {
    if s.n == 0 {
        return Err(Error::NotEnoughData("Good-Turing on an empty sample".into()));
    }
    Ok((m + 1) as f64 * s.n_m(m + 1) as f64 / s.n as f64)
}

/// `N_1 / N`.
pub fn potential_productivity(s: &FrequencySpectrum) -> Result<f64> {
    if s.n == 0 {
        return Err(Error::NotEnoughData("productivity of an empty sample".into()));
    }
    Ok(s.hapax() as f64 / s.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub hapax: u64,
    pub types: u64,
    pub productivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityCurve {
    /// Event kind, e.g. the n-gram order.
    pub label: usize,
    pub points: Vec<CurvePoint>,
    /// The stream ended before the last checkpoint.
    pub truncated: bool,
}

/// Potential productivity of the first `N` events at every checkpoint, in
/// one pass.
pub fn productivity_curve<E, I>(events: I, checkpoints: &[u64], label: usize) -> Result<ProductivityCurve>
where
    E: Hash + Eq,
    I: IntoIterator<Item = E>,
{
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be positive and strictly increasing"));
    }
    let mut counter = SpectrumCounter::default();
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut events = events.into_iter();
    while let Some(&&target) = next.peek() {
        match events.next() {
            Some(e) => counter.push(e),
            None => break,
        }
        if counter.spectrum.n == target {
            let s = counter.spectrum();
            points.push(CurvePoint {
                n: s.n,
                hapax: s.hapax(),
                types: s.types(),
                productivity: potential_productivity(s)?,
            });
            next.next();
        }
    }
    Ok(ProductivityCurve {
        label,
        truncated: next.peek().is_some(),
        points,
    })
}

/// `10^2, 10^3, ...` up to and including the largest power not above `max`.
pub fn log_checkpoints(max: u64) -> Vec<u64> {
    std::iter::successors(Some(100u64), |&c| c.checked_mul(10))
        .take_while(|&c| c <= max)
        .collect()
}

/// Sliding windows of width `n` inside each document; none span a document
/// boundary.
pub fn extract_ngrams<T: Clone>(docs: &[Vec<T>], n: usize) -> Result<impl Iterator<Item = Vec<T>> + '_> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    Ok(docs.iter().flat_map(move |d| d.windows(n).map(<[T]>::to_vec)))
}

/// Whitespace-separated tokens, one document per line, mapped to ids in
/// order of first appearance. Blank lines are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenCorpus {
    pub documents: Vec<Vec<u32>>,
    pub vocabulary: Vec<String>,
}

impl TokenCorpus {
    pub fn read<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut corpus = TokenCorpus::default();
        for line in reader.lines() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let doc: Vec<u32> = line
                .split_whitespace()
                .map(|w| {
                    *ids.entry(w.to_string()).or_insert_with(|| {
                        corpus.vocabulary.push(w.to_string());
                        (corpus.vocabulary.len() - 1) as u32
                    })
                })
                .collect();
            if !doc.is_empty() {
                corpus.documents.push(doc);
            }
        }
        Ok(corpus)
    }

    pub fn open(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f), path)
    }

    pub fn n_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

pub fn write_curves_csv<W: std::io::Write>(out: W, curves: &[ProductivityCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "N", "hapax_count", "type_count", "productivity"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.label.to_string(),
                p.n.to_string(),
                p.hapax.to_string(),
                p.types.to_string(),
                p.productivity.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
