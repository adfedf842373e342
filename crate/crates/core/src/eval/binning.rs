use serde::{Deserialize, Serialize};

use super::pairs::ProbPair;
use super::stats::{mean, BootstrapConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
}

/// Bins too small to report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub bins: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualRangeReport {
    /// `n_bins + 1` edges over the target range.
    pub edges: Vec<f64>,
    /// Pair count of every bin, reported or not.
    pub counts: Vec<usize>,
    /// Bins with more than `min_count` pairs, in ascending target order.
    pub bins: Vec<BinSummary>,
    pub residual: Residual,
}

/// `n + 1` equally spaced edges from `lo` to `hi`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let w = (hi - lo) / n as f64;
    (0..=n).map(|i| if i == n { hi } else { lo + w * i as f64 }).collect()
}

/// Bin of `v` under `edges`: lower-inclusive, upper-exclusive, except the
/// last bin which also takes its upper edge.
pub(crate) fn locate(edges: &[f64], v: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if v < edges[0] || v > edges[n] || v.is_nan() {
        return None;
    }
    Some((edges.partition_point(|&e| e <= v) - 1).min(n - 1))
}

// negated comparisons so that NaN edges are rejected
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn check_edges(edges: &[f64], axis: &str) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(format!("{axis} edges must be strictly increasing")));
    }
    Ok(())
}

/// Splits `[min target, max target]` into `n_bins` equal-width intervals and
/// summarizes every bin holding more than `min_count` pairs. Bin `i`
/// bootstraps with substream `i`.
///
/// A degenerate range (all targets equal) is widened to one nat around the
/// common value.
pub fn bin_equal_range(
    pairs: &[ProbPair],
    n_bins: usize,
    min_count: usize,
    bootstrap: &BootstrapConfig,
) -> Result<EqualRangeReport> {
    if n_bins == 0 {
        return Err(Error::invalid("n_bins must be at least 1"));
    }
    if pairs.len() < 2 {
        return Err(Error::NotEnoughData("equal-range binning needs at least two pairs".into()));
    }
    let (mut lo, mut hi) = pairs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.target.value()), hi.max(p.target.value()))
    });
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let edges = uniform_edges(lo, hi, n_bins);
    let mut members = vec![Vec::new(); n_bins];
    for p in pairs {
        let b = locate(&edges, p.target.value()).expect("target within its own range");
        members[b].push(p.error());
    }
    let mut bins = Vec::new();
    let mut residual = Residual::default();
    for (i, errs) in members.iter().enumerate() {
        if errs.len() > min_count {
            let (ci_lo, ci_hi) = bootstrap.ci(errs, i as u64)?;
            bins.push(BinSummary {
                lo: edges[i],
                hi: edges[i + 1],
                count: errs.len(),
                mean_error: mean(errs).expect("non-empty bin"),
                ci_lo,
                ci_hi,
                level: bootstrap.level,
            });
        } else if !errs.is_empty() {
            residual.bins += 1;
            residual.pairs += errs.len();
        }
    }
    Ok(EqualRangeReport {
        edges,
        counts: members.iter().map(Vec::len).collect(),
        bins,
        residual,
    })
}

/// Sizes of `k` equal-count bins over `n` items, remainder first.
pub fn equal_count_sizes(n: usize, k: usize) -> Vec<usize> {
    let (base, rem) = (n / k, n % k);
    (0..k).map(|i| base + usize::from(i < rem)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileBin {
    /// 0 is the rarest bin.
    pub index: usize,
    pub target_lo: f64,
    pub target_hi: f64,
    pub count: usize,
    pub mean_error: f64,
    /// Pair ids in ascending target order.
    pub ids: Vec<usize>,
}

/// Sorts pairs by target (ties by id) and cuts them into `k` bins of equal
/// size. Leftover pairs go one each to the rarest bins.
pub fn bin_equal_count(pairs: &[ProbPair], k: usize) -> Result<Vec<QuantileBin>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if pairs.len() < k {
        return Err(Error::NotEnoughData(format!(
            "{} pairs cannot fill {k} equal-count bins",
            pairs.len()
        )));
    }
    let mut sorted: Vec<&ProbPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.target.value().total_cmp(&b.target.value()).then(a.id.cmp(&b.id)));
    let mut start = 0;
    Ok(equal_count_sizes(pairs.len(), k)
        .into_iter()
        .enumerate()
        .map(|(index, size)| {
            let chunk = &sorted[start..start + size];
            start += size;
            let errs: Vec<f64> = chunk.iter().map(|p| p.error()).collect();
            QuantileBin {
                index,
                target_lo: chunk[0].target.value(),
                target_hi: chunk[size - 1].target.value(),
                count: size,
                mean_error: mean(&errs).expect("bins are non-empty"),
                ids: chunk.iter().map(|p| p.id).collect(),
            }
        })
        .collect())
}

/// Counts of (target, estimate) pairs on a grid. `counts[i][j]` is target
/// bin `i`, estimate bin `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    /// Pairs outside the grid on either axis.
    pub margin: u64,
}

impl JointHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.margin
    }
}

pub fn joint_histogram(pairs: &[ProbPair], x_edges: &[f64], y_edges: &[f64]) -> Result<JointHistogram> {
    check_edges(x_edges, "target")?;
    check_edges(y_edges, "estimate")?;
    let mut counts = vec![vec![0; y_edges.len() - 1]; x_edges.len() - 1];
    let mut margin = 0;
    for p in pairs {
        match (locate(x_edges, p.target.value()), locate(y_edges, p.estimate.value())) {
            (Some(i), Some(j)) => counts[i][j] += 1,
            _ => margin += 1,
        }
    }
    Ok(JointHistogram {
        x_edges: x_edges.to_vec(),
        y_edges: y_edges.to_vec(),
        counts,
        margin,
    })
}
