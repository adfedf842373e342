use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tailprobe::eval::{collect_pairs, write_pairs_csv};
use tailprobe::experiments::{
    self, Candidate, CandidateConfig, CandidateKind, ExperimentConfig, ExperimentKind, RunManifest,
};
use tailprobe::lang::{build_language, GroundTruthLanguage, LanguageSpec};
use tailprobe::learner::{split_validation, NeuralConfig, TrainConfig};
use tailprobe::lnre::{extract_ngrams, log_checkpoints, productivity_curve, write_curves_csv, TokenCorpus};
use tailprobe::{Sequence, SeededRng, Stream};

#[derive(Parser)]
#[command(name = "tailprobe", version, about = "Probe how sequence models misestimate rare sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect ground-truth languages.
    #[command(subcommand)]
    Lang(LangCommand),
    /// Draw sequences from a language, one per line.
    Sample(SampleArgs),
    /// Fit a candidate model on a corpus.
    Train(TrainArgs),
    /// Score a corpus under a language and a model.
    Score(ScoreArgs),
    /// Run an experiment from a JSON config.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Novelty statistics of token streams.
    #[command(subcommand)]
    Lnre(LnreCommand),
}

#[derive(Subcommand)]
enum LangCommand {
    Build(BuildArgs),
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    vocab_size: usize,
    #[arg(long)]
    order: usize,
    /// Dirichlet concentration of every row; omit for uniform rows.
    #[arg(long)]
    concentration: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    eos_bias: f64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 20)]
    max_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    lang: PathBuf,
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Ngram,
    Neural,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    lang: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    kind: ModelKind,
    #[arg(long, default_value_t = 3)]
    ngram_order: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Defaults to the language order plus one.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 16)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.05)]
    valid_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    lang: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalCommand {
    Fixed(RunArgs),
    Epochs(RunArgs),
    Online(RunArgs),
    Perturb(RunArgs),
    Tempsweep(RunArgs),
    /// Re-run a manifest and compare output hashes.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum LnreCommand {
    Curve(CurveArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Whitespace-separated tokens, one document per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    orders: Vec<usize>,
    /// Defaults to powers of ten from 100.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Lang(LangCommand::Build(a)) => lang_build(a),
        Command::Lang(LangCommand::Inspect { path }) => lang_inspect(&path),
        Command::Sample(a) => sample(a),
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Eval(EvalCommand::Replay { manifest, out_dir }) => replay(&manifest, &out_dir),
        Command::Eval(e) => {
            let (kind, args) = match e {
                EvalCommand::Fixed(a) => (ExperimentKind::FixedData, a),
                EvalCommand::Epochs(a) => (ExperimentKind::EpochTracking, a),
                EvalCommand::Online(a) => (ExperimentKind::Online, a),
                EvalCommand::Perturb(a) => (ExperimentKind::Perturbation, a),
                EvalCommand::Tempsweep(a) => (ExperimentKind::TemperatureSweep, a),
                EvalCommand::Replay { .. } => unreachable!(),
            };
            eval(kind, args)
        }
        Command::Lnre(LnreCommand::Curve(a)) => lnre_curve(a),
    }
}

fn load_language(path: &Path) -> Result<GroundTruthLanguage> {
    GroundTruthLanguage::load(path).context("stage `language` failed")
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_corpus(path: &Path) -> Result<Vec<Sequence>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    BufReader::new(f)
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            Sequence::parse(&line).with_context(|| format!("{}:{}", path.display(), i + 1))
        })
        .collect()
}

fn lang_build(a: BuildArgs) -> Result<()> {
    let spec = LanguageSpec {
        vocab_size: a.vocab_size,
        order: a.order,
        concentration: a.concentration,
        eos_bias: a.eos_bias,
        temperature: a.temperature,
        max_len: a.max_len,
        seed: a.seed,
    };
    let lang = build_language(&spec).context("stage `language` failed")?;
    lang.save(&a.out).context("stage `write` failed")?;
    Ok(())
}

fn lang_inspect(path: &Path) -> Result<()> {
    let lang = load_language(path)?;
    let (rate, steps) = lang.entropy_rate();
    let spec = lang.spec();
    println!("vocab_size      {}", spec.vocab_size);
    println!("order           {}", spec.order);
    println!("contexts        {}", lang.base().n_contexts());
    println!("concentration   {}", spec.concentration.map_or("uniform".into(), |c| c.to_string()));
    println!("eos_bias        {}", spec.eos_bias);
    println!("temperature     {}", lang.temperature());
    println!("max_len         {}", lang.max_len());
    println!("entropy_rate    {rate:.6} nats/step");
    println!("expected_steps  {steps:.6}");
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let lang = load_language(&a.lang)?;
    let mut rng = SeededRng::substream(a.seed, Stream::Sampling, 0);
    let mut out = output(a.out.as_deref())?;
    for _ in 0..a.n {
        writeln!(out, "{}", lang.sample_sequence(&mut rng))?;
    }
    out.flush()?;
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let lang = load_language(&a.lang)?;
    let data = read_corpus(&a.data).context("stage `sample` failed")?;
    let cfg = CandidateConfig {
        kind: match a.kind {
            ModelKind::Ngram => CandidateKind::NGram,
            ModelKind::Neural => CandidateKind::Neural,
        },
        ngram_order: a.ngram_order,
        ngram_alpha: a.alpha,
        neural: Some(NeuralConfig {
            window: a.window.unwrap_or(lang.base().order() + 1),
            embed_dim: a.embed_dim,
            hidden: a.hidden,
        }),
        train: TrainConfig {
            learning_rate: a.lr,
            batch_size: a.batch_size,
            max_epochs: a.epochs,
            seed: a.seed,
            ..Default::default()
        },
    };
    let (train, valid) = match a.kind {
        ModelKind::Ngram => (data, Vec::new()),
        ModelKind::Neural => split_validation(data, a.valid_fraction).context("stage `sample` failed")?,
    };
    let (model, trace) = experiments::fit_candidate(&cfg, &lang, &train, &valid).context("stage `train` failed")?;
    if let Some(t) = trace {
        for e in &t.epochs {
            eprintln!(
                "epoch {:>3}  train {:.5}  valid {:.5}  lr {:e}",
                e.epoch, e.train_loss, e.valid_loss, e.lr
            );
        }
    }
    model.save(&a.out).context("stage `write` failed")?;
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let lang = load_language(&a.lang)?;
    let model = Candidate::load(&a.model).context("stage `model` failed")?;
    let data = read_corpus(&a.data).context("stage `sample` failed")?;
    let set = collect_pairs(&lang, &model, &data).context("stage `score` failed")?;
    let mut pairs: Vec<_> = set.pairs.iter().chain(&set.quarantined).copied().collect();
    pairs.sort_by_key(|p| p.id);
    write_pairs_csv(output(a.out.as_deref())?, &pairs).context("stage `write` failed")?;
    if !set.quarantined.is_empty() {
        eprintln!("{} sequences have probability zero under the model", set.quarantined.len());
    }
    Ok(())
}

fn eval(kind: ExperimentKind, a: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config).context("stage `config` failed")?;
    if cfg.kind != kind {
        bail!("stage `config` failed: {} holds a {} experiment", a.config.display(), cfg.kind.label());
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(d) = a.out_dir {
        cfg.out_dir = d;
    }
    let out = experiments::run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&out.manifest)?);
    Ok(())
}

fn replay(manifest: &Path, out_dir: &Path) -> Result<()> {
    let m = RunManifest::load(manifest).context("stage `config` failed")?;
    let (_, diff) = experiments::replay(&m, out_dir)?;
    if !diff.is_empty() {
        bail!("stage `verify` failed: outputs differ: {}", diff.join(", "));
    }
    println!("all {} outputs reproduced", m.outputs.len());
    Ok(())
}

fn lnre_curve(a: CurveArgs) -> Result<()> {
    let corpus = TokenCorpus::open(&a.input).context("stage `read` failed")?;
    let checkpoints = a.checkpoints.unwrap_or_else(|| log_checkpoints(corpus.n_tokens() as u64));
    let mut curves = Vec::with_capacity(a.orders.len());
    for &n in &a.orders {
        let events = extract_ngrams(&corpus.documents, n).context("stage `extract` failed")?;
        let curve = productivity_curve(events, &checkpoints, n).context("stage `curve` failed")?;
        if curve.truncated {
            eprintln!("order {n}: stream ended before the last checkpoint");
        }
        curves.push(curve);
    }
    write_curves_csv(output(a.out.as_deref())?, &curves).context("stage `write` failed")?;
    Ok(())
}
