//! Sequence-level estimation error: `log p_M(x) - log p_L(x)`, scored over
//! a corpus and summarized across the target probability range.
//!
//! Negative error means the candidate underestimates a sequence. All
//! binning is over the target log-probability in nats.

mod binning;
mod length;
mod pairs;
mod report;
mod stats;

pub(crate) use binning::{check_edges, locate};
pub use binning::{
    bin_equal_count, bin_equal_range, equal_count_sizes, joint_histogram, uniform_edges,
    BinSummary, EqualRangeReport, JointHistogram, QuantileBin, Residual,
};
pub use length::{length_analysis, LengthAnalysis, LengthRow};
pub use pairs::{collect_pairs, estimation_error, PairSet, ProbPair};
pub use report::{
    write_bins_csv, write_curves_csv, write_histogram_csv, write_pairs_csv, CurveRow, Split,
};
pub use stats::{bootstrap_ci, mean, relative_change, spearman, BootstrapConfig};
