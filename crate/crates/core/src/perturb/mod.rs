//! Edit-based perturbations of sequences and uniformly random sequences,
//! for probing a candidate away from the high-probability region of the
//! language.

mod heatmap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::domain::{LogProb, Sequence, Space, Token, Vocabulary};
use crate::error::{Error, Result};
use crate::model::SequenceModel;
use crate::rng::{SeededRng, Stream};

pub use heatmap::{build_heatmap, write_heatmap_csv, HeatmapCell, HeatmapGrid};

/// Novelty rejection gives up after this many draws.
pub const RETRY_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Swap,
    Delete,
    Insert,
    Substitute,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 4] = [
        PerturbationKind::Swap,
        PerturbationKind::Delete,
        PerturbationKind::Insert,
        PerturbationKind::Substitute,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PerturbationKind::Swap => "swap",
            PerturbationKind::Delete => "delete",
            PerturbationKind::Insert => "insert",
            PerturbationKind::Substitute => "substitute",
        }
    }
}

/// A fully specified edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Swap(usize, usize),
    Delete(usize),
    /// Insert before position `.0`; `x.len()` appends.
    Insert(usize, Token),
    Substitute(usize, Token),
}

impl Edit {
    pub fn kind(self) -> PerturbationKind {
        match self {
            Edit::Swap(..) => PerturbationKind::Swap,
            Edit::Delete(_) => PerturbationKind::Delete,
            Edit::Insert(..) => PerturbationKind::Insert,
            Edit::Substitute(..) => PerturbationKind::Substitute,
        }
    }

    pub fn apply(self, x: &Sequence) -> Result<Sequence> {
        let mut t = x.tokens().to_vec();
        let n = t.len();
        let bad = |what: &str| Err(Error::invalid(format!("{what} out of range for length {n}")));
        match self {
            Edit::Swap(i, j) if i < n && j < n => t.swap(i, j),
            Edit::Delete(i) if i < n => {
                t.remove(i);
            }
            Edit::Insert(i, tok) if i <= n => t.insert(i, tok),
            Edit::Substitute(i, tok) if i < n => t[i] = tok,
            Edit::Swap(..) => return bad("swap position"),
            Edit::Delete(_) => return bad("delete position"),
            Edit::Insert(..) => return bad("insert position"),
            Edit::Substitute(..) => return bad("substitute position"),
        }
        Ok(Sequence::new(t))
    }
}

/// Kinds that can produce a novel sequence from `x` within `space`. Insert
/// needs room below `max_len`, since longer sequences have probability zero.
pub fn applicable_kinds(x: &Sequence, space: Space) -> Vec<PerturbationKind> {
    let t = x.tokens();
    let mut kinds = Vec::with_capacity(4);
    if t.len() >= 2 && t.iter().any(|&a| a != t[0]) {
        kinds.push(PerturbationKind::Swap);
    }
    if !t.is_empty() {
        kinds.push(PerturbationKind::Delete);
    }
    if t.len() < space.max_len {
        kinds.push(PerturbationKind::Insert);
    }
    if !t.is_empty() && space.vocab.size() >= 2 {
        kinds.push(PerturbationKind::Substitute);
    }
    kinds
}

fn random_token(vocab: &Vocabulary, rng: &mut SeededRng) -> Token {
    Token(rng.random_range(0..vocab.size() as u32))
}

fn draw_edit(kind: PerturbationKind, n: usize, vocab: &Vocabulary, rng: &mut SeededRng) -> Edit {
    match kind {
        PerturbationKind::Swap => {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            Edit::Swap(i.min(j), i.max(j))
        }
        PerturbationKind::Delete => Edit::Delete(rng.random_range(0..n)),
        PerturbationKind::Insert => Edit::Insert(rng.random_range(0..=n), random_token(vocab, rng)),
        PerturbationKind::Substitute => Edit::Substitute(rng.random_range(0..n), random_token(vocab, rng)),
    }
}

/// One random edit of `x` that yields a different token string. The kind is
/// uniform over [`applicable_kinds`]; positions and tokens are redrawn until
/// the result is novel, at most [`RETRY_CAP`] times.
pub fn perturb_once(x: &Sequence, space: Space, rng: &mut SeededRng) -> Result<(Sequence, PerturbationKind)> {
    x.validate(&space.vocab)?;
    let kinds = applicable_kinds(x, space);
    if kinds.is_empty() {
        return Err(Error::PerturbationExhausted {
            sequence: x.ids(),
            reason: "no perturbation applies".into(),
        });
    }
    let kind = kinds[rng.random_range(0..kinds.len())];
    for _ in 0..RETRY_CAP {
        let y = draw_edit(kind, x.len(), &space.vocab, rng).apply(x)?;
        if y != *x {
            return Ok((y, kind));
        }
    }
    Err(Error::PerturbationExhausted {
        sequence: x.ids(),
        reason: format!("{} found nothing novel in {RETRY_CAP} draws", kind.label()),
    })
}

/// `depth` successive perturbations; entry `i` is step `i + 1`.
pub fn perturb_chain(
    x: &Sequence,
    depth: usize,
    space: Space,
    rng: &mut SeededRng,
) -> Result<Vec<(usize, Sequence, PerturbationKind)>> {
    if depth == 0 {
        return Err(Error::invalid("perturbation depth must be at least 1"));
    }
    let mut out = Vec::with_capacity(depth);
    let mut cur = x.clone();
    for step in 1..=depth {
        let (next, kind) = perturb_once(&cur, space, rng).map_err(|e| Error::ChainStep {
            step,
            source: Box::new(e),
        })?;
        out.push((step, next.clone(), kind));
        cur = next;
    }
    Ok(out)
}

/// Poisson(`mean_len`) length, tokens i.i.d. uniform over the ordinary
/// tokens. Lengths are not capped.
pub fn random_sequence(vocab: &Vocabulary, rng: &mut SeededRng, mean_len: f64) -> Result<Sequence> {
    let poisson = Poisson::new(mean_len)
        .map_err(|e| Error::invalid(format!("mean length {mean_len}: {e}")))?;
    let len = poisson.sample(rng) as usize;
    Ok(Sequence::new((0..len).map(|_| random_token(vocab, rng)).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub origin_id: usize,
    /// At least 1; depth 0 is the unperturbed pair.
    pub depth: usize,
    pub kind: PerturbationKind,
    pub sequence: Sequence,
    pub target: LogProb,
    pub estimate: LogProb,
}

impl PerturbationRecord {
    pub fn is_finite(&self) -> bool {
        self.target.is_finite() && self.estimate.is_finite()
    }

    pub fn error(&self) -> f64 {
        self.estimate.value() - self.target.value()
    }
}

/// Perturbation chains for every sequence of `data`, scored under both
/// distributions. Origin `i` draws from perturbation substream `i`.
pub fn perturbation_records<L, M>(
    lang: &L,
    model: &M,
    data: &[Sequence],
    depth: usize,
    seed: u64,
) -> Result<Vec<PerturbationRecord>>
where
    L: SequenceModel + ?Sized,
    M: SequenceModel + ?Sized,
{
    let space = lang.space();
    let mut out = Vec::with_capacity(data.len() * depth);
    for (origin_id, x) in data.iter().enumerate() {
        let mut rng = SeededRng::substream(seed, Stream::Perturbation, origin_id as u64);
        for (d, y, kind) in perturb_chain(x, depth, space, &mut rng)? {
            out.push(PerturbationRecord {
                origin_id,
                depth: d,
                kind,
                target: lang.score(&y)?,
                estimate: model.score(&y)?,
                sequence: y,
            });
        }
    }
    Ok(out)
}

/// Records with empty `error` where either score is `-inf`.
pub fn write_records_csv<W: std::io::Write>(out: W, records: &[PerturbationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["origin_id", "depth", "kind", "length", "log_pL", "log_pM", "error"])?;
    for r in records {
        let error = if r.is_finite() { r.error().to_string() } else { String::new() };
        w.write_record([
            r.origin_id.to_string(),
            r.depth.to_string(),
            r.kind.label().to_string(),
            r.sequence.len().to_string(),
            r.target.value().to_string(),
            r.estimate.value().to_string(),
            error,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
