//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use std::collections::HashMap;

use tailprobe::lang::{build_language, GroundTruthLanguage, LanguageSpec};
use tailprobe::learner::NeuralLM;
use tailprobe::{Sequence, SequenceModel, Space, Token};

pub fn language(vocab_size: usize, order: usize, concentration: f64, max_len: usize, seed: u64) -> GroundTruthLanguage {
    build_language(&LanguageSpec {
        vocab_size,
        order,
        concentration: Some(concentration),
        eos_bias: 1.0,
        temperature: 1.0,
        max_len,
        seed,
    })
    .unwrap()
}

/// Mass of every sequence up to `max_len`, each probability computed from
/// `next_log_probs` directly rather than through `score`.
pub fn brute_force_mass<M: SequenceModel>(m: &M) -> f64 {
    let space = m.space();
    let v = space.vocab.size();
    let eos = space.vocab.eos();
    let mut buf = vec![0.0; space.vocab.n_outputs()];
    let mut total = 0.0;
    let mut stack: Vec<(Vec<Token>, f64)> = vec![(Vec::new(), 0.0)];
    while let Some((prefix, lp)) = stack.pop() {
        if prefix.len() == space.max_len {
            total += lp.exp();
            continue;
        }
        m.next_log_probs(&prefix, &mut buf);
        total += (lp + buf[eos]).exp();
        for (t, &step) in buf.iter().enumerate().take(v) {
            let mut next = prefix.clone();
            next.push(Token(t as u32));
            stack.push((next, lp + step));
        }
    }
    total
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter, with the block it occurred in.
pub fn gradient_check(model: &NeuralLM, batch: &[Sequence], h: f64) -> (f64, &'static str) {
    let (_, grad) = model.loss_and_gradients(batch).unwrap();
    let mut probe = model.clone();
    let mut worst = (0.0, "");
    for (name, range) in model.blocks() {
        for i in range {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + h;
            let up = probe.loss(batch).unwrap();
            probe.params_mut()[i] = orig - h;
            let down = probe.loss(batch).unwrap();
            probe.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            // the floor keeps round-off in vanishing gradients from dominating
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-6);
            if rel > worst.0 {
                worst = (rel, name);
            }
        }
    }
    worst
}

/// Scores every step `delta` nats above `inner`, except the step forced at
/// `max_len`.
pub struct ShiftedModel<'a, M> {
    pub inner: &'a M,
    pub delta: f64,
}

impl<M: SequenceModel> SequenceModel for ShiftedModel<'_, M> {
    fn space(&self) -> Space {
        self.inner.space()
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        self.inner.next_log_probs(prefix, out);
        for v in out.iter_mut() {
            *v += self.delta;
        }
    }
}

/// `m -> N_m` by counting and then counting the counts.
pub fn naive_spectrum<T: std::hash::Hash + Eq>(events: &[T]) -> HashMap<u64, u64> {
    let mut freq: HashMap<&T, u64> = HashMap::new();
    for e in events {
        *freq.entry(e).or_default() += 1;
    }
    let mut spec = HashMap::new();
    for &f in freq.values() {
        *spec.entry(f).or_default() += 1;
    }
    spec
}

/// Rank-frequency weights `r^-s` for `r = 1..=n`, normalized.
pub fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-s)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Every error statistic of an oracle run that is not exactly zero.
pub fn null_violations(summary: &tailprobe::experiments::RunSummary) -> Vec<String> {
    use tailprobe::experiments::RunSummary;
    let mut bad = Vec::new();
    let mut check = |what: String, v: f64| {
        if v != 0.0 {
            bad.push(format!("{what} = {v:e}"));
        }
    };
    match summary {
        RunSummary::FixedData(s) => {
            check("mean_error".into(), s.mean_error);
            for (i, b) in s.bins.iter().enumerate() {
                check(format!("bin {i} mean"), b.mean_error);
                check(format!("bin {i} ci_lo"), b.ci_lo);
                check(format!("bin {i} ci_hi"), b.ci_hi);
            }
            check("mean_token_error".into(), s.length.mean_token_error);
            for r in &s.length.rows {
                check(format!("length {} observed", r.steps), r.observed);
                check(format!("length {} ci_lo", r.steps), r.ci_lo);
                check(format!("length {} ci_hi", r.steps), r.ci_hi);
            }
        }
        RunSummary::EpochTracking(s) => {
            for c in &s.curves {
                check(format!("epoch {} {:?} mean", c.epoch, c.split), c.mean_error);
                check(format!("epoch {} {:?} |mean|", c.epoch, c.split), c.mean_abs_error);
                for (i, m) in c.bin_means.iter().enumerate() {
                    check(format!("epoch {} {:?} bin {i}", c.epoch, c.split), *m);
                }
            }
        }
        RunSummary::Online(s) => {
            for it in &s.iterations {
                check(format!("iteration {} mean", it.iteration), it.mean_error);
                check(format!("iteration {} rare bin", it.iteration), it.rare_bin_error);
                for (i, m) in it.bin_means.iter().enumerate() {
                    check(format!("iteration {} bin {i}", it.iteration), *m);
                }
            }
        }
        RunSummary::Perturbation(s) => {
            for (d, m) in s.depth_means.iter().enumerate() {
                check(format!("depth {d} mean"), m.unwrap_or(f64::NAN));
            }
            check("depth 0 rare bin".into(), s.depth0_rare_bin_error);
            check("random mean".into(), s.random_mean_error.unwrap_or(f64::NAN));
            for (d, row) in s.heatmap.cells.iter().enumerate() {
                for (x, c) in row.iter().enumerate() {
                    if let Some(m) = c.mean_error {
                        check(format!("heat map cell ({d}, {x})"), m);
                    }
                }
            }
        }
        RunSummary::TemperatureSweep(s) => {
            for r in &s.results {
                check(format!("T={} mean", r.temperature), r.mean_error);
                check(format!("T={} |bin|", r.temperature), r.mean_abs_bin_error);
                for (i, m) in r.bin_means.iter().enumerate() {
                    check(format!("T={} bin {i}", r.temperature), *m);
                }
            }
        }
    }
    bad
}
