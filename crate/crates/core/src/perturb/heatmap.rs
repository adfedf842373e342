use serde::{Deserialize, Serialize};

use super::PerturbationRecord;
use crate::error::{Error, Result};
use crate::eval::{check_edges, locate, ProbPair};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub count: usize,
    /// `None` for empty cells.
    pub mean_error: Option<f64>,
}

/// Mean error by target log-probability bin and perturbation depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub x_edges: Vec<f64>,
    /// `cells[depth][x_bin]`, depths `0..=max_depth`.
    pub cells: Vec<Vec<HeatmapCell>>,
    /// Finite records whose target falls outside `x_edges`.
    pub outside: usize,
    /// Records with a `-inf` score.
    pub quarantined: usize,
}

impl HeatmapGrid {
    pub fn max_depth(&self) -> usize {
        self.cells.len() - 1
    }
}

/// Depth 0 comes from the unperturbed pairs, deeper rows from `records`.
pub fn build_heatmap(
    records: &[PerturbationRecord],
    depth0: &[ProbPair],
    x_edges: &[f64],
    max_depth: usize,
) -> Result<HeatmapGrid> {
    check_edges(x_edges, "target")?;
    let nx = x_edges.len() - 1;
    let mut sums = vec![vec![(0usize, 0.0f64); nx]; max_depth + 1];
    let mut outside = 0;
    let mut quarantined = 0;
    let points = depth0
        .iter()
        .map(|p| (0, p.is_finite(), p.target.value(), p.error()))
        .chain(records.iter().map(|r| (r.depth, r.is_finite(), r.target.value(), r.error())));
    for (depth, finite, target, error) in points {
        if depth > max_depth {
            return Err(Error::invalid(format!("record depth {depth} exceeds max depth {max_depth}")));
        }
        if !finite {
            quarantined += 1;
            continue;
        }
        match locate(x_edges, target) {
            Some(i) => {
                let cell = &mut sums[depth][i];
                cell.0 += 1;
                cell.1 += error;
            }
            None => outside += 1,
        }
    }
    let cells = sums
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(count, sum)| HeatmapCell {
                    count,
                    mean_error: (count > 0).then(|| sum / count as f64),
                })
                .collect()
        })
        .collect();
    Ok(HeatmapGrid {
        x_edges: x_edges.to_vec(),
        cells,
        outside,
        quarantined,
    })
}

/// One row per cell; empty cells have an empty `mean_error`.
pub fn write_heatmap_csv<W: std::io::Write>(out: W, grid: &HeatmapGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_lo", "x_hi", "depth", "count", "mean_error"])?;
    for (depth, row) in grid.cells.iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            w.write_record([
                grid.x_edges[i].to_string(),
                grid.x_edges[i + 1].to_string(),
                depth.to_string(),
                c.count.to_string(),
                c.mean_error.map_or_else(String::new, |m| m.to_string()),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
