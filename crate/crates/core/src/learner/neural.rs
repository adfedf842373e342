//! Fixed-window feedforward language model with hand-derived gradients.
//!
//! The `window` symbols preceding a position (BOS-padded) are embedded,
//! concatenated, passed through one `tanh` hidden layer and projected to
//! `|Σ| + 1` logits.

use std::ops::Range;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{Sequence, Space, Token};
use crate::error::{Error, Result};
use crate::logspace::log_softmax_in_place;
use crate::model::SequenceModel;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuralConfig {
    pub window: usize,
    pub embed_dim: usize,
    pub hidden: usize,
}

impl NeuralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::invalid("neural window, embed_dim and hidden must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    emb: Range<usize>,
    w1: Range<usize>,
    b1: Range<usize>,
    w2: Range<usize>,
    b2: Range<usize>,
}

impl Layout {
    fn new(space: &Space, cfg: &NeuralConfig) -> Self {
        let s = space.vocab.n_context_symbols();
        let o = space.vocab.n_outputs();
        let input = cfg.window * cfg.embed_dim;
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        Layout {
            emb: take(s * cfg.embed_dim),
            w1: take(cfg.hidden * input),
            b1: take(cfg.hidden),
            w2: take(o * cfg.hidden),
            b2: take(o),
        }
    }

    fn len(&self) -> usize {
        self.b2.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralLM {
    space: Space,
    config: NeuralConfig,
    params: Vec<f64>,
    #[serde(skip)]
    layout: Option<Layout>,
}

/// Scratch buffers for one forward/backward pass.
struct Scratch {
    ctx: Vec<usize>,
    input: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
    d_hidden: Vec<f64>,
    d_input: Vec<f64>,
}

impl NeuralLM {
    /// All-zero parameters: every conditional is uniform.
    pub fn zeros(space: Space, config: NeuralConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&space, &config);
        Ok(NeuralLM {
            space,
            config,
            params: vec![0.0; layout.len()],
            layout: Some(layout),
        })
    }

    /// Gaussian initialization scaled by fan-in, with a small output layer so
    /// the initial model is close to uniform.
    pub fn init(space: Space, config: NeuralConfig, rng: &mut SeededRng) -> Result<Self> {
        let mut m = Self::zeros(space, config)?;
        let l = m.layout().clone();
        let emb = Normal::new(0.0, 1.0).expect("valid normal");
        for p in &mut m.params[l.emb.clone()] {
            *p = emb.sample(rng);
        }
        let fan_in = (config.window * config.embed_dim) as f64;
        let w1 = Normal::new(0.0, 1.0 / fan_in.sqrt()).expect("valid normal");
        for p in &mut m.params[l.w1.clone()] {
            *p = w1.sample(rng);
        }
        let w2 = Normal::new(0.0, 0.1 / (config.hidden as f64).sqrt()).expect("valid normal");
        for p in &mut m.params[l.w2.clone()] {
            *p = w2.sample(rng);
        }
        Ok(m)
    }

    fn layout(&self) -> &Layout {
        self.layout.as_ref().expect("layout initialized")
    }

    /// Restores derived state after deserialization.
    pub(crate) fn rebuild(mut self) -> Result<Self> {
        self.config.validate()?;
        let layout = Layout::new(&self.space, &self.config);
        if layout.len() != self.params.len() {
            return Err(Error::invalid(format!(
                "parameter vector has {} entries, expected {}",
                self.params.len(),
                layout.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite neural parameters"));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn config(&self) -> &NeuralConfig {
        &self.config
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Named parameter blocks as ranges into [`params`](Self::params).
    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        let l = self.layout();
        vec![
            ("embedding", l.emb.clone()),
            ("hidden_weight", l.w1.clone()),
            ("hidden_bias", l.b1.clone()),
            ("output_weight", l.w2.clone()),
            ("output_bias", l.b2.clone()),
        ]
    }

    fn scratch(&self) -> Scratch {
        let c = &self.config;
        Scratch {
            ctx: vec![0; c.window],
            input: vec![0.0; c.window * c.embed_dim],
            hidden: vec![0.0; c.hidden],
            logits: vec![0.0; self.space.vocab.n_outputs()],
            d_hidden: vec![0.0; c.hidden],
            d_input: vec![0.0; c.window * c.embed_dim],
        }
    }

    /// Forward pass for the position `pos` of `tokens`, leaving log-probs in
    /// `s.logits`.
    fn forward(&self, tokens: &[Token], pos: usize, s: &mut Scratch) {
        let c = &self.config;
        let l = self.layout();
        let p = &self.params;
        let d = c.embed_dim;
        let input_len = c.window * d;
        let emb = &p[l.emb.clone()];
        for slot in 0..c.window {
            let sym = self.space.vocab.context_symbol(tokens, pos, c.window, slot);
            s.ctx[slot] = sym;
            s.input[slot * d..(slot + 1) * d].copy_from_slice(&emb[sym * d..(sym + 1) * d]);
        }
        let w1 = &p[l.w1.clone()];
        let b1 = &p[l.b1.clone()];
        for (h, out) in s.hidden.iter_mut().enumerate() {
            let row = &w1[h * input_len..(h + 1) * input_len];
            let a = b1[h] + row.iter().zip(&s.input).map(|(w, x)| w * x).sum::<f64>();
            *out = a.tanh();
        }
        let w2 = &p[l.w2.clone()];
        let b2 = &p[l.b2.clone()];
        let hn = c.hidden;
        for (o, z) in s.logits.iter_mut().enumerate() {
            let row = &w2[o * hn..(o + 1) * hn];
            *z = b2[o] + row.iter().zip(&s.hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        log_softmax_in_place(&mut s.logits);
    }

    /// Adds `d(-log p(target)) / dθ` for the position just run through
    /// [`forward`](Self::forward) into `grad`.
    fn backward(&self, target: usize, s: &mut Scratch, grad: &mut [f64]) {
        let c = &self.config;
        let l = self.layout();
        let p = &self.params;
        let d = c.embed_dim;
        let hn = c.hidden;
        let input_len = c.window * d;
        s.d_hidden.fill(0.0);
        let w2 = &p[l.w2.clone()];
        for o in 0..s.logits.len() {
            let dz = s.logits[o].exp() - if o == target { 1.0 } else { 0.0 };
            grad[l.b2.start + o] += dz;
            let g = &mut grad[l.w2.start + o * hn..l.w2.start + (o + 1) * hn];
            for (gw, h) in g.iter_mut().zip(&s.hidden) {
                *gw += dz * h;
            }
            for (dh, w) in s.d_hidden.iter_mut().zip(&w2[o * hn..(o + 1) * hn]) {
                *dh += dz * w;
            }
        }
        s.d_input.fill(0.0);
        let w1 = &p[l.w1.clone()];
        for h in 0..hn {
            let da = s.d_hidden[h] * (1.0 - s.hidden[h] * s.hidden[h]);
            if da == 0.0 {
                continue;
            }
            grad[l.b1.start + h] += da;
            let g = &mut grad[l.w1.start + h * input_len..l.w1.start + (h + 1) * input_len];
            for (gw, x) in g.iter_mut().zip(&s.input) {
                *gw += da * x;
            }
            for (dx, w) in s.d_input.iter_mut().zip(&w1[h * input_len..(h + 1) * input_len]) {
                *dx += da * w;
            }
        }
        for slot in 0..c.window {
            let sym = s.ctx[slot];
            let g = &mut grad[l.emb.start + sym * d..l.emb.start + (sym + 1) * d];
            for (ge, dx) in g.iter_mut().zip(&s.d_input[slot * d..(slot + 1) * d]) {
                *ge += dx;
            }
        }
    }

    /// Summed negative log-likelihood and number of scored positions,
    /// optionally accumulating unnormalized gradients.
    pub(crate) fn accumulate<'a>(
        &self,
        batch: impl IntoIterator<Item = &'a Sequence>,
        mut grad: Option<&mut [f64]>,
    ) -> Result<(f64, usize)> {
        let mut s = self.scratch();
        let eos = self.space.vocab.eos();
        let mut nll = 0.0;
        let mut n = 0;
        for x in batch {
            x.validate(&self.space.vocab)?;
            let toks = x.tokens();
            if toks.len() > self.space.max_len {
                return Err(Error::invalid(format!(
                    "sequence of length {} exceeds max_len {}",
                    toks.len(),
                    self.space.max_len
                )));
            }
            // forced EOS at max_len is not a modelled step
            for pos in 0..=toks.len().min(self.space.max_len - 1) {
                let target = toks.get(pos).map_or(eos, |t| t.index());
                self.forward(toks, pos, &mut s);
                nll -= s.logits[target];
                n += 1;
                if let Some(g) = grad.as_deref_mut() {
                    self.backward(target, &mut s, g);
                }
            }
        }
        Ok((nll, n))
    }

    /// Mean per-position negative log-likelihood of `batch`.
    pub fn loss(&self, batch: &[Sequence]) -> Result<f64> {
        let (nll, n) = self.accumulate(batch, None)?;
        if n == 0 {
            return Err(Error::NotEnoughData("empty batch".into()));
        }
        Ok(nll / n as f64)
    }

    /// Mean per-position negative log-likelihood and its exact gradient.
    pub fn loss_and_gradients(&self, batch: &[Sequence]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::NotEnoughData("empty batch".into()));
        }
        let mut grad = vec![0.0; self.params.len()];
        let (nll, n) = self.accumulate(batch, Some(&mut grad))?;
        let scale = 1.0 / n as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((nll * scale, grad))
    }
}

impl SequenceModel for NeuralLM {
    fn space(&self) -> Space {
        self.space
    }

    fn next_log_probs(&self, prefix: &[Token], out: &mut [f64]) {
        let mut s = self.scratch();
        self.forward(prefix, prefix.len(), &mut s);
        out.copy_from_slice(&s.logits);
    }

    fn step_log_probs(&self, x: &Sequence) -> Result<Vec<f64>> {
        // same as the default, reusing one scratch buffer for the whole sequence
        x.validate(&self.space.vocab)?;
        let toks = x.tokens();
        let eos = self.space.vocab.eos();
        let mut s = self.scratch();
        let mut steps = Vec::with_capacity(toks.len() + 1);
        for i in 0..=toks.len() {
            let symbol = toks.get(i).map_or(eos, |t| t.index());
            if i >= self.space.max_len {
                steps.push(if symbol == eos { 0.0 } else { f64::NEG_INFINITY });
                break;
            }
            self.forward(toks, i, &mut s);
            steps.push(s.logits[symbol]);
        }
        Ok(steps)
    }
}
