use serde::{Deserialize, Serialize};

use super::candidate::{fit_candidate, Candidate};
use super::config::{CandidateKind, ExperimentConfig, ExperimentKind};
use super::manifest::{RunManifest, RunRecorder};
use crate::domain::Sequence;
use crate::error::{Error, Result};
use crate::eval::{
    bin_equal_count, bin_equal_range, collect_pairs, joint_histogram, length_analysis, mean,
    relative_change, spearman, uniform_edges, write_bins_csv, write_curves_csv,
    write_histogram_csv, write_pairs_csv, BinSummary, CurveRow, LengthAnalysis, PairSet,
    ProbPair, QuantileBin, Residual, Split,
};
use crate::lang::GroundTruthLanguage;
use crate::learner::{split_validation, train_ngram, Trainer};
use crate::model::SequenceModel;
use crate::perturb::{
    build_heatmap, perturbation_records, random_sequence, write_heatmap_csv, write_records_csv,
    HeatmapGrid,
};
use crate::rng::{SeededRng, Stream};

// sampling substreams; a temperature-sweep entry `j` adds `j * SWEEP_STRIDE`
const TRAIN_STREAM: u64 = 0;
const TEST_STREAM: u64 = 1;
const VALID_STREAM: u64 = 2;
const FRESH_STREAM: u64 = 1000;
const SWEEP_STRIDE: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedDataSummary {
    pub n_test: usize,
    pub quarantined: usize,
    pub mean_error: f64,
    pub bins: Vec<BinSummary>,
    pub residual: Residual,
    /// Between bin midpoints and bin mean errors over reported bins.
    pub spearman: Option<f64>,
    pub histogram_margin: u64,
    pub length: LengthAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochCurve {
    pub epoch: usize,
    pub split: Split,
    pub mean_error: f64,
    pub mean_abs_error: f64,
    /// Equal-count bin means, rarest first.
    pub bin_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrackingSummary {
    pub curves: Vec<EpochCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineIteration {
    pub iteration: usize,
    pub mean_error: f64,
    pub mean_abs_error: f64,
    /// Mean error of the rarest equal-count bin.
    pub rare_bin_error: f64,
    /// Against the previous iteration's mean error; `None` on the first
    /// iteration or after a zero.
    pub relative_change: Option<f64>,
    pub bin_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineSummary {
    pub iterations: Vec<OnlineIteration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub n_records: usize,
    pub quarantined: usize,
    /// Mean error of all finite records at each depth, depth 0 included.
    pub depth_means: Vec<Option<f64>>,
    /// Mean error of the rarest equal-count bin of unperturbed test pairs.
    pub depth0_rare_bin_error: f64,
    pub random_mean_error: Option<f64>,
    pub random_quarantined: usize,
    pub heatmap: HeatmapGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureResult {
    pub temperature: f64,
    pub entropy_rate: f64,
    pub mean_error: f64,
    /// Mean over equal-count bins of `|bin mean error|`.
    pub mean_abs_bin_error: f64,
    pub bin_means: Vec<f64>,
    pub quarantined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSweepSummary {
    pub results: Vec<TemperatureResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunSummary {
    FixedData(FixedDataSummary),
    EpochTracking(EpochTrackingSummary),
    Online(OnlineSummary),
    Perturbation(PerturbationSummary),
    TemperatureSweep(TemperatureSweepSummary),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub summary: RunSummary,
}

/// Runs the experiment `cfg.kind` and writes its outputs to `cfg.out_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.kind {
        ExperimentKind::FixedData => run_fixed_data(cfg),
        ExperimentKind::EpochTracking => run_epoch_tracking(cfg),
        ExperimentKind::Online => run_online(cfg),
        ExperimentKind::Perturbation => run_perturbation(cfg),
        ExperimentKind::TemperatureSweep => run_temperature_sweep(cfg),
    }
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::invalid(format!(
            "config is for {}, not {}",
            cfg.kind.label(),
            kind.label()
        ))
        .in_stage("config"));
    }
    cfg.validate().map_err(|e| e.in_stage("config"))
}

fn begin(cfg: &ExperimentConfig) -> Result<(RunRecorder, GroundTruthLanguage)> {
    let mut rec = RunRecorder::new(&cfg.out_dir)?;
    let lang = rec.stage("language", || cfg.language.load())?;
    let json = lang.to_json().map_err(|e| e.in_stage("language"))?;
    rec.language("ground_truth", &json);
    rec.seed("language", lang.spec().seed);
    rec.seed("sampling", cfg.seed);
    rec.seed("train", cfg.candidate.train.seed);
    rec.seed("bootstrap", cfg.bootstrap.seed);
    Ok((rec, lang))
}

struct Corpora {
    train: Vec<Sequence>,
    valid: Vec<Sequence>,
    test: Vec<Sequence>,
}

fn sample_corpora(lang: &GroundTruthLanguage, cfg: &ExperimentConfig, offset: u64) -> Result<Corpora> {
    let s = &cfg.sizes;
    let mut r = SeededRng::substream(cfg.seed, Stream::Sampling, offset + TRAIN_STREAM);
    let sample = lang.sample_corpus(s.train + s.valid, &mut r);
    let fraction = s.valid as f64 / (s.train + s.valid) as f64;
    let (train, valid) = split_validation(sample, fraction)?;
    let mut r = SeededRng::substream(cfg.seed, Stream::Sampling, offset + TEST_STREAM);
    let test = lang.sample_corpus(s.test, &mut r);
    Ok(Corpora { train, valid, test })
}

/// Finite pairs followed by quarantined ones, in id order.
fn all_pairs(set: &PairSet) -> Vec<ProbPair> {
    let mut v: Vec<ProbPair> = set.pairs.iter().chain(&set.quarantined).copied().collect();
    v.sort_by_key(|p| p.id);
    v
}

fn require_mean(set: &PairSet) -> Result<f64> {
    set.mean_error()
        .ok_or_else(|| Error::NotEnoughData("every test sequence has probability zero under the candidate".into()))
}

fn fit(
    rec: &mut RunRecorder,
    cfg: &ExperimentConfig,
    lang: &GroundTruthLanguage,
    c: &Corpora,
    role: &str,
    trace_file: &str,
) -> Result<Candidate> {
    let (model, trace) = rec.stage("train", || fit_candidate(&cfg.candidate, lang, &c.train, &c.valid))?;
    if let Some(t) = trace {
        rec.write_csv(trace_file, |b| t.write_csv(b))?;
    }
    let json = model.to_json().map_err(|e| e.in_stage("write"))?;
    rec.model(role, &json)?;
    Ok(model)
}

fn histogram_edges(pairs: &[ProbPair], n: usize) -> Vec<f64> {
    let (mut lo, mut hi) = pairs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let (a, b) = (p.target.value(), p.estimate.value());
        (lo.min(a).min(b), hi.max(a).max(b))
    });
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    uniform_edges(lo, hi, n)
}

pub fn run_fixed_data(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(cfg, ExperimentKind::FixedData)?;
    let (mut rec, lang) = begin(cfg)?;
    let corpora = rec.stage("sample", || sample_corpora(&lang, cfg, 0))?;
    let model = fit(&mut rec, cfg, &lang, &corpora, "candidate", "trace.csv")?;
    let set = rec.stage("score", || collect_pairs(&lang, &model, &corpora.test))?;
    let summary = rec.stage("bin", || {
        let mean_error = require_mean(&set)?;
        let report = bin_equal_range(&set.pairs, cfg.bins.equal_range, cfg.bins.min_count, &cfg.bootstrap)?;
        let mids: Vec<f64> = report.bins.iter().map(|b| 0.5 * (b.lo + b.hi)).collect();
        let means: Vec<f64> = report.bins.iter().map(|b| b.mean_error).collect();
        let rho = if mids.len() >= 2 { spearman(&mids, &means)? } else { None };
        let edges = histogram_edges(&set.pairs, cfg.bins.histogram);
        let hist = joint_histogram(&set.pairs, &edges, &edges)?;
        let length = length_analysis(&lang, &model, &corpora.test, &cfg.bootstrap)?;
        Ok((
            FixedDataSummary {
                n_test: corpora.test.len(),
                quarantined: set.quarantined.len(),
                mean_error,
                bins: report.bins,
                residual: report.residual,
                spearman: rho,
                histogram_margin: hist.margin,
                length,
            },
            hist,
        ))
    })?;
    let (summary, hist) = summary;
    rec.write_csv("pairs.csv", |b| write_pairs_csv(b, &all_pairs(&set)))?;
    rec.write_csv("bins.csv", |b| write_bins_csv(b, &summary.bins))?;
    rec.write_csv("histogram.csv", |b| write_histogram_csv(b, &hist))?;
    rec.write_csv("length.csv", |b| write_length_csv(b, &summary.length))?;
    finish(rec, cfg, RunSummary::FixedData(summary))
}

fn write_length_csv<W: std::io::Write>(out: W, a: &LengthAnalysis) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["steps", "count", "expected", "observed", "ci_lo", "ci_hi"])?;
    for r in &a.rows {
        w.write_record([
            r.steps.to_string(),
            r.count.to_string(),
            r.expected.to_string(),
            r.observed.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn finish(rec: RunRecorder, cfg: &ExperimentConfig, summary: RunSummary) -> Result<RunOutput> {
    let mut rec = rec;
    rec.write_json("summary.json", &summary)?;
    let manifest = rec.finish(cfg)?;
    Ok(RunOutput { manifest, summary })
}

fn mean_abs(set: &PairSet) -> f64 {
    mean(&set.pairs.iter().map(|p| p.error().abs()).collect::<Vec<_>>()).unwrap_or(f64::NAN)
}

fn quantile_means(set: &PairSet, k: usize) -> Result<Vec<QuantileBin>> {
    bin_equal_count(&set.pairs, k)
}

fn curve<M: SequenceModel + ?Sized>(
    lang: &GroundTruthLanguage,
    model: &M,
    data: &[Sequence],
    epoch: usize,
    split: Split,
    k: usize,
) -> Result<EpochCurve> {
    let set = collect_pairs(lang, model, data)?;
    let bins = quantile_means(&set, k)?;
    Ok(EpochCurve {
        epoch,
        split,
        mean_error: require_mean(&set)?,
        mean_abs_error: mean_abs(&set),
        bin_means: bins.iter().map(|b| b.mean_error).collect(),
    })
}

fn curve_rows<'a>(curves: impl Iterator<Item = &'a EpochCurve>) -> Vec<CurveRow> {
    curves
        .flat_map(|c| {
            c.bin_means.iter().enumerate().map(move |(bin_index, &m)| CurveRow {
                epoch: c.epoch,
                bin_index,
                mean_error: m,
            })
        })
        .collect()
}

pub fn run_epoch_tracking(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(cfg, ExperimentKind::EpochTracking)?;
    let (mut rec, lang) = begin(cfg)?;
    let corpora = rec.stage("sample", || sample_corpora(&lang, cfg, 0))?;
    let n = cfg.sizes.epoch_subset;
    let train_subset = &corpora.train[..n.min(corpora.train.len())];
    let test_subset = &corpora.test[..n.min(corpora.test.len())];
    let k = cfg.bins.equal_count;
    let epochs = cfg.candidate.train.max_epochs;
    let mut curves = Vec::with_capacity(2 * epochs);
    let final_model = match cfg.candidate.kind {
        CandidateKind::Neural => {
            let arch = cfg.candidate.neural_arch(lang.base().order());
            let mut trainer = Trainer::new(lang.space(), arch, cfg.candidate.train.clone())
                .map_err(|e| e.in_stage("train"))?;
            for _ in 0..epochs {
                let r = rec.stage("train", || trainer.run_epoch(&corpora.train, &corpora.valid))?;
                let m = trainer.model();
                curves.push(rec.stage("score", || curve(&lang, m, train_subset, r.epoch, Split::Train, k))?);
                curves.push(rec.stage("score", || curve(&lang, m, test_subset, r.epoch, Split::Test, k))?);
            }
            let trace = trainer.trace().clone();
            rec.write_csv("trace.csv", |b| trace.write_csv(b))?;
            Candidate::Neural(trainer.model().clone())
        }
        CandidateKind::Oracle => {
            for epoch in 1..=epochs {
                curves.push(rec.stage("score", || curve(&lang, &lang, train_subset, epoch, Split::Train, k))?);
                curves.push(rec.stage("score", || curve(&lang, &lang, test_subset, epoch, Split::Test, k))?);
            }
            Candidate::Oracle(lang.clone())
        }
        CandidateKind::NGram => unreachable!("rejected by validate"),
    };
    let json = final_model.to_json().map_err(|e| e.in_stage("write"))?;
    rec.model("candidate", &json)?;
    for split in [Split::Train, Split::Test] {
        let rows = curve_rows(curves.iter().filter(|c| c.split == split));
        rec.write_csv(&format!("curves_{}.csv", split.label()), |b| write_curves_csv(b, &rows))?;
    }
    finish(rec, cfg, RunSummary::EpochTracking(EpochTrackingSummary { curves }))
}

enum OnlineModel {
    Oracle(GroundTruthLanguage),
    NGram(crate::learner::NGramModel),
    Neural(Box<Trainer>),
}

impl OnlineModel {
    fn candidate(&self) -> Candidate {
        match self {
            OnlineModel::Oracle(l) => Candidate::Oracle(l.clone()),
            OnlineModel::NGram(m) => Candidate::NGram(m.clone()),
            OnlineModel::Neural(t) => Candidate::Neural(t.model().clone()),
        }
    }
}

pub fn run_online(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(cfg, ExperimentKind::Online)?;
    let (mut rec, lang) = begin(cfg)?;
    let (valid, test) = rec.stage("sample", || {
        let mut r = SeededRng::substream(cfg.seed, Stream::Sampling, VALID_STREAM);
        let valid = lang.sample_corpus(cfg.sizes.valid, &mut r);
        let mut r = SeededRng::substream(cfg.seed, Stream::Sampling, TEST_STREAM);
        Ok((valid, lang.sample_corpus(cfg.sizes.test, &mut r)))
    })?;
    let c = &cfg.candidate;
    let mut model = rec.stage("train", || {
        Ok(match c.kind {
            CandidateKind::Oracle => OnlineModel::Oracle(lang.clone()),
            CandidateKind::NGram => OnlineModel::NGram(train_ngram(&[], lang.space(), c.ngram_order, c.ngram_alpha)?),
            CandidateKind::Neural => {
                let arch = c.neural_arch(lang.base().order());
                OnlineModel::Neural(Box::new(Trainer::new(lang.space(), arch, c.train.clone())?))
            }
        })
    })?;
    let k = cfg.bins.equal_count;
    let mut iterations: Vec<OnlineIteration> = Vec::with_capacity(cfg.iterations);
    for iteration in 1..=cfg.iterations {
        let fresh = rec.stage("sample", || {
            let mut r = SeededRng::substream(cfg.seed, Stream::Sampling, FRESH_STREAM + iteration as u64);
            Ok(lang.sample_corpus(cfg.sizes.fresh, &mut r))
        })?;
        rec.stage("train", || match &mut model {
            OnlineModel::Oracle(_) => Ok(()),
            OnlineModel::NGram(m) => m.observe(&fresh),
            OnlineModel::Neural(t) => {
                if cfg.reset_optimizer {
                    t.reset_optimizer();
                }
                t.run_epoch(&fresh, &valid).map(|_| ())
            }
        })?;
        let it = rec.stage("score", || {
            let set = match &model {
                OnlineModel::Oracle(l) => collect_pairs(&lang, l, &test)?,
                OnlineModel::NGram(m) => collect_pairs(&lang, m, &test)?,
                OnlineModel::Neural(t) => collect_pairs(&lang, t.model(), &test)?,
            };
            let bins = quantile_means(&set, k)?;
            let mean_error = require_mean(&set)?;
            let relative_change = iterations
                .last()
                .and_then(|prev| relative_change(&[prev.mean_error, mean_error]).ok()?[0]);
            Ok(OnlineIteration {
                iteration,
                mean_error,
                mean_abs_error: mean_abs(&set),
                rare_bin_error: bins[0].mean_error,
                relative_change,
                bin_means: bins.iter().map(|b| b.mean_error).collect(),
            })
        })?;
        iterations.push(it);
    }
    if let OnlineModel::Neural(t) = &model {
        let trace = t.trace().clone();
        rec.write_csv("trace.csv", |b| trace.write_csv(b))?;
    }
    let json = model.candidate().to_json().map_err(|e| e.in_stage("write"))?;
    rec.model("candidate", &json)?;
    rec.write_csv("online.csv", |b| write_online_csv(b, &iterations))?;
    let rows: Vec<CurveRow> = iterations
        .iter()
        .flat_map(|it| {
            it.bin_means.iter().enumerate().map(|(bin_index, &m)| CurveRow {
                epoch: it.iteration,
                bin_index,
                mean_error: m,
            })
        })
        .collect();
    rec.write_csv("curves_test.csv", |b| write_curves_csv(b, &rows))?;
    finish(rec, cfg, RunSummary::Online(OnlineSummary { iterations }))
}

fn write_online_csv<W: std::io::Write>(out: W, its: &[OnlineIteration]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "mean_error", "mean_abs_error", "rare_bin_error", "relative_change"])?;
    for it in its {
        w.write_record([
            it.iteration.to_string(),
            it.mean_error.to_string(),
            it.mean_abs_error.to_string(),
            it.rare_bin_error.to_string(),
            it.relative_change.map_or_else(String::new, |r| r.to_string()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn run_perturbation(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(cfg, ExperimentKind::Perturbation)?;
    let (mut rec, lang) = begin(cfg)?;
    rec.seed("perturbation", cfg.seed);
    let corpora = rec.stage("sample", || sample_corpora(&lang, cfg, 0))?;
    let model = fit(&mut rec, cfg, &lang, &corpora, "candidate", "trace.csv")?;
    let depth = cfg.perturbation.depth;
    let set = rec.stage("score", || collect_pairs(&lang, &model, &corpora.test))?;
    let records = rec.stage("perturb", || perturbation_records(&lang, &model, &corpora.test, depth, cfg.seed))?;
    let random = rec.stage("perturb", || {
        let pc = &cfg.perturbation;
        let mut r = SeededRng::substream(cfg.seed, Stream::RandomSequences, 0);
        let xs = (0..pc.random_sequences)
            .map(|_| random_sequence(&lang.vocab(), &mut r, pc.random_mean_len))
            .collect::<Result<Vec<_>>>()?;
        collect_pairs(&lang, &model, &xs)
    })?;
    let summary = rec.stage("bin", || {
        let finite = records.iter().filter(|r| r.is_finite());
        let (lo, hi) = set
            .pairs
            .iter()
            .map(|p| p.target.value())
            .chain(finite.map(|r| r.target.value()))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
        let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let heatmap = build_heatmap(&records, &set.pairs, &uniform_edges(lo, hi, cfg.bins.histogram), depth)?;
        let mut depth_means = vec![require_mean(&set).ok()];
        for d in 1..=depth {
            let errs: Vec<f64> = records
                .iter()
                .filter(|r| r.depth == d && r.is_finite())
                .map(|r| r.error())
                .collect();
            depth_means.push(mean(&errs));
        }
        let rare = quantile_means(&set, cfg.bins.equal_count)?;
        Ok(PerturbationSummary {
            n_records: records.len(),
            quarantined: records.iter().filter(|r| !r.is_finite()).count(),
            depth_means,
            depth0_rare_bin_error: rare[0].mean_error,
            random_mean_error: random.mean_error(),
            random_quarantined: random.quarantined.len(),
            heatmap,
        })
    })?;
    rec.write_csv("pairs.csv", |b| write_pairs_csv(b, &all_pairs(&set)))?;
    rec.write_csv("perturbations.csv", |b| write_records_csv(b, &records))?;
    rec.write_csv("heatmap.csv", |b| write_heatmap_csv(b, &summary.heatmap))?;
    if cfg.perturbation.random_sequences > 0 {
        rec.write_csv("random_pairs.csv", |b| write_pairs_csv(b, &all_pairs(&random)))?;
    }
    finish(rec, cfg, RunSummary::Perturbation(summary))
}

pub fn run_temperature_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(cfg, ExperimentKind::TemperatureSweep)?;
    let (mut rec, base) = begin(cfg)?;
    let k = cfg.bins.equal_count;
    let mut results = Vec::with_capacity(cfg.temperatures.len());
    let mut rows = Vec::new();
    for (j, &t) in cfg.temperatures.iter().enumerate() {
        let lang = rec.stage("language", || base.retemper(t))?;
        let json = lang.to_json().map_err(|e| e.in_stage("language"))?;
        rec.language(format!("t{j}"), &json);
        let corpora = rec.stage("sample", || sample_corpora(&lang, cfg, j as u64 * SWEEP_STRIDE))?;
        let model = fit(&mut rec, cfg, &lang, &corpora, &format!("t{j}"), &format!("trace_t{j}.csv"))?;
        let set = rec.stage("score", || collect_pairs(&lang, &model, &corpora.test))?;
        let result = rec.stage("bin", || {
            let bins = quantile_means(&set, k)?;
            let bin_means: Vec<f64> = bins.iter().map(|b| b.mean_error).collect();
            for b in &bins {
                rows.push((t, b.index, b.target_lo, b.target_hi, b.count, b.mean_error));
            }
            Ok(TemperatureResult {
                temperature: t,
                entropy_rate: lang.entropy_rate().0,
                mean_error: require_mean(&set)?,
                mean_abs_bin_error: bin_means.iter().map(|m| m.abs()).sum::<f64>() / bin_means.len() as f64,
                bin_means,
                quarantined: set.quarantined.len(),
            })
        })?;
        rec.write_csv(&format!("pairs_t{j}.csv"), |b| write_pairs_csv(b, &all_pairs(&set)))?;
        results.push(result);
    }
    rec.write_csv("tempsweep.csv", |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["temperature", "bin_index", "target_lo", "target_hi", "count", "mean_error"])?;
        for (t, i, lo, hi, n, m) in &rows {
            w.write_record([t.to_string(), i.to_string(), lo.to_string(), hi.to_string(), n.to_string(), m.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    })?;
    finish(rec, cfg, RunSummary::TemperatureSweep(TemperatureSweepSummary { results }))
}

/// Re-runs a manifest's configuration into `out_dir` and lists output
/// files whose contents differ from the original.
pub fn replay(manifest: &RunManifest, out_dir: &std::path::Path) -> Result<(RunOutput, Vec<String>)> {
    let mut cfg = manifest.config.clone();
    cfg.out_dir = out_dir.to_path_buf();
    let out = run(&cfg)?;
    let diff = manifest.output_differences(&out.manifest);
    Ok((out, diff))
}
