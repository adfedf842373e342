use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Stream};

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Percentile-bootstrap settings. Each call site derives its own substream
/// from `seed` and an index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub draws: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            draws: 10_000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn rng(&self, index: u64) -> SeededRng {
        SeededRng::substream(self.seed, Stream::Bootstrap, index)
    }

    pub fn ci(&self, values: &[f64], index: u64) -> Result<(f64, f64)> {
        bootstrap_ci(values, self.draws, self.level, &mut self.rng(index))
    }
}

/// Percentile bootstrap interval for the mean of `values`: `draws`
/// resamples of size `n` with replacement, then the central `level`
/// quantiles of the resampled means (linear interpolation).
///
/// Zero-variance input returns `(v, v)` exactly.
pub fn bootstrap_ci(values: &[f64], draws: usize, level: f64, rng: &mut SeededRng) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if draws == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!(
            "bootstrap needs draws >= 1 and level in (0, 1), got {draws} and {level}"
        )));
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok((first, first));
    }
    let n = values.len();
    let mut means: Vec<f64> = (0..draws)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile(&means, tail), quantile(&means, 1.0 - tail)))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(&next) if frac > 0.0 => sorted[i] + frac * (next - sorted[i]),
        _ => sorted[i],
    }
}

/// `out[i-1] = (s[i] - s[i-1]) / |s[i-1]|`; `None` where the previous value
/// is zero.
pub fn relative_change(series: &[f64]) -> Result<Vec<Option<f64>>> {
    if series.len() < 2 {
        return Err(Error::NotEnoughData("relative change needs at least two values".into()));
    }
    Ok(series
        .windows(2)
        .map(|w| (w[0] != 0.0).then(|| (w[1] - w[0]) / w[0].abs()))
        .collect())
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::invalid("spearman inputs differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::NotEnoughData("spearman needs at least two points".into()));
    }
    Ok(pearson(&ranks(x), &ranks(y)))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let mx = mean(x)?;
    let my = mean(y)?;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
