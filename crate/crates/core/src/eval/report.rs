use std::io::Write;

use serde::{Deserialize, Serialize};

use super::binning::{BinSummary, JointHistogram};
use super::pairs::ProbPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One point of a per-epoch equal-count error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub epoch: usize,
    pub bin_index: usize,
    pub mean_error: f64,
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// `error` is left empty for non-finite pairs.
pub fn write_pairs_csv<W: Write>(out: W, pairs: &[ProbPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "length", "log_pL", "log_pM", "error"])?;
    for p in pairs {
        w.write_record([
            p.id.to_string(),
            p.length.to_string(),
            p.target.value().to_string(),
            p.estimate.value().to_string(),
            if p.is_finite() { p.error().to_string() } else { String::new() },
        ])?;
    }
    finish(w)
}

pub fn write_bins_csv<W: Write>(out: W, bins: &[BinSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lo", "hi", "count", "mean_error", "ci_lo", "ci_hi"])?;
    for b in bins {
        w.write_record([
            b.lo.to_string(),
            b.hi.to_string(),
            b.count.to_string(),
            b.mean_error.to_string(),
            b.ci_lo.to_string(),
            b.ci_hi.to_string(),
        ])?;
    }
    finish(w)
}

/// Every grid cell, including empty ones. Margin counts are not written.
pub fn write_histogram_csv<W: Write>(out: W, h: &JointHistogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_lo", "x_hi", "y_lo", "y_hi", "count"])?;
    for (i, row) in h.counts.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            w.write_record([
                h.x_edges[i].to_string(),
                h.x_edges[i + 1].to_string(),
                h.y_edges[j].to_string(),
                h.y_edges[j + 1].to_string(),
                c.to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn write_curves_csv<W: Write>(out: W, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "bin_index", "mean_error"])?;
    for r in rows {
        w.write_record([r.epoch.to_string(), r.bin_index.to_string(), r.mean_error.to_string()])?;
    }
    finish(w)
}
