use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lexitopic::anonymize::{anonymize_segments, EntitySpan, TagTable};
use lexitopic::config::ToolkitConfig;
use lexitopic::corpus::{corpus_stats, filter_corpus, load_pages, ElementClass, FilterOptions, Segment};
use lexitopic::embed_store::write_embeddings;
use lexitopic::eval_detect::{mean_ap, BoxRecord, MapMode};
use lexitopic::eval_text::{read_pairs_tsv, score_pairs, Normalization};
use lexitopic::gen_eval::{batch_report, read_manifest};
use lexitopic::interpret::{build_prompts, run_prompts, PromptTask, TaskKind};
use lexitopic::pipeline::{self, ModelDir, ModelInputs};
use lexitopic::reduce::{fit_transform, ReduceConfig};
use lexitopic::report::MetricReport;
use lexitopic::topic_eval::{read_sweep_csv, score_topics, write_sweep_csv};
use lexitopic::topic_rep::PreparedCorpus;
use lexitopic::{io, plot, synthetic, Error};

const DEFAULTS: &str = "\
Defaults (override in the --config INI file):
  [embedding]  id_model = dlicari/distil-ita-legal-bert, max_seq_length = 512, batch_size = 32
  [umap]       n_neighbors = 5, n_components = 5, min_dist = 0.0, metric = cosine
  [hdbscan]    min_cluster_size = 5, min_samples = 5, metric = euclidean
  [vectorizer] ngram_range = (1, 2), min_df = 2, stop_words = italian
  [topics]     top_n_words = 15, diversity = 0.35
  [coherence]  window = 110, topn = 10";

#[derive(Parser)]
#[command(
    name = "lexitopic",
    version,
    about = "Topic discovery and evaluation for legal document corpora",
    after_help = DEFAULTS
)]
struct Cli {
    /// Seed for every randomized step
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the segment table from per-page extraction files
    Ingest(IngestArgs),
    /// Mask entity spans in a segment table
    Anonymize(AnonymizeArgs),
    /// Reduce, cluster and describe topics
    #[command(after_help = DEFAULTS)]
    Fit(FitArgs),
    /// Topic diversity and C_v for K from kmax down to kmin
    Sweep(SweepArgs),
    /// mAP of layout detections against ground truth
    EvalDetect(DetectArgs),
    /// CER and WER of recognized text lines
    EvalOcr(OcrArgs),
    /// BERTScore over token-embedding pairs
    Bertscore(BertArgs),
    /// Ask a chat-completion endpoint for topic labels or summaries
    Interpret(InterpretArgs),
    /// Write an SVG figure
    Plot(PlotArgs),
    /// Write the synthetic four-theme corpus and its embeddings
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated element classes to drop
    #[arg(long, value_delimiter = ',', default_value = "Page-footer")]
    drop_classes: Vec<String>,
    /// Paragraphs with a word count below this quantile are dropped
    #[arg(long, default_value_t = 0.25)]
    min_quantile: f64,
    /// Use the anonymized text of each element
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    anonymized: bool,
}

#[derive(Args)]
struct AnonymizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    spans: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// INI file; missing keys keep their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model directory to create
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model_dir: PathBuf,
    #[arg(long, default_value_t = 2)]
    kmin: usize,
    #[arg(long, default_value_t = 50)]
    kmax: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// 50 or 50-95
    #[arg(long, default_value = "50-95")]
    mode: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OcrArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    lowercase: bool,
    #[arg(long)]
    strip_punctuation: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BertArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpretArgs {
    #[arg(long)]
    model_dir: PathBuf,
    #[arg(long)]
    provider: String,
    /// label or summary
    #[arg(long)]
    task: String,
    /// Config holding the [llm.<provider>] section; defaults to the one used for fitting
    #[arg(long)]
    config: Option<PathBuf>,
    /// Results file; defaults to interpret.jsonl in the model directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Scatter,
    Bars,
    Sweep,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(value_enum)]
    kind: PlotKind,
    #[arg(long)]
    model_dir: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Bars per topic; defaults to the fitted top_n_words
    #[arg(long)]
    top_n: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    per_theme: usize,
}

type Result<T> = std::result::Result<T, Error>;

fn load_config(path: Option<&Path>) -> Result<ToolkitConfig> {
    match path {
        Some(p) => ToolkitConfig::from_file(p),
        None => Ok(ToolkitConfig::default()),
    }
}

fn emit(report: &MetricReport, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::invalid(e.to_string()))?;
    let _ = writeln!(std::io::stdout(), "{text}");
    if let Some(p) = out {
        io::write_bytes(p, format!("{text}\n").as_bytes())?;
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let drop_classes = a
        .drop_classes
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ElementClass>())
        .collect::<Result<BTreeSet<_>>>()?;
    let opts = FilterOptions {
        drop_classes,
        min_quantile: a.min_quantile,
        use_anonymized: a.anonymized,
    };
    let pages = load_pages(&a.input)?;
    let segments = filter_corpus(&pages, &opts)?;
    io::write_jsonl(&a.out, &segments)?;
    let stats = corpus_stats(&segments)?;
    let text = serde_json::to_string_pretty(&stats).map_err(|e| Error::invalid(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn anonymize(a: &AnonymizeArgs) -> Result<()> {
    let mut segments: Vec<Segment> = io::read_jsonl(&a.corpus)?;
    let spans: Vec<EntitySpan> = io::read_jsonl(&a.spans)?;
    let report = anonymize_segments(&mut segments, &spans, a.threshold, &TagTable::default())?;
    io::write_jsonl(&a.out, &segments)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::invalid(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn fit(a: &FitArgs, seed: u64) -> Result<()> {
    let config = load_config(a.config.as_deref())?;
    let segments: Vec<Segment> = io::read_jsonl(&a.corpus)?;
    let embeddings = lexitopic::embed_store::read_embeddings::<f32>(&a.embeddings)?;
    let result = pipeline::fit(&segments, &embeddings, &config, seed)?;
    let inputs = ModelInputs {
        corpus: absolute(&a.corpus),
        embeddings: absolute(&a.embeddings),
        config: a.config.as_deref().map(absolute),
        seed,
    };
    pipeline::write_model_dir(&a.out, &result, Some(inputs), &config)?;
    let (td, cv) = score_topics(&result.model.word_lists(), &result.corpus.tokens, &config.coherence)?;
    let mut report = MetricReport::new()
        .metric("topics", result.model.n_topics() as f64)
        .metric("noise", result.model.noise_size as f64)
        .metric("topic_diversity", td)
        .metric("coherence_cv", cv.score)
        .setting("seed", seed)
        .setting("model_dir", a.out.display());
    for w in &result.model.warnings {
        report.warn(w.clone());
    }
    if cv.degenerate {
        report.warn("coherence: some topic has an all-zero NPMI vector");
    }
    emit(&report, None)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let md = ModelDir::load(&a.model_dir)?;
    let config = pipeline::recorded_config(&md)?;
    let rows = pipeline::sweep_model_dir(&a.model_dir, &config, a.kmin, a.kmax)?;
    write_sweep_csv(&a.out, &rows)?;
    for r in &rows {
        println!("{}\t{:.4}\t{:.4}", r.k, r.topic_diversity, r.coherence_cv);
    }
    Ok(())
}

fn eval_detect(a: &DetectArgs) -> Result<()> {
    let mode: MapMode = a.mode.parse()?;
    let preds: Vec<BoxRecord> = io::read_jsonl(&a.pred)?;
    let gts: Vec<BoxRecord> = io::read_jsonl(&a.gt)?;
    let report = mean_ap(&preds, &gts, &mode.thresholds())?;
    emit(&report.to_metric_report(), a.out.as_deref())
}

fn eval_ocr(a: &OcrArgs) -> Result<()> {
    let pairs = read_pairs_tsv(&a.pairs)?;
    let norm = Normalization {
        lowercase: a.lowercase,
        strip_punctuation: a.strip_punctuation,
        ..Normalization::default()
    };
    let r = score_pairs(&pairs, norm)?;
    let report = MetricReport::new()
        .metric("cer", r.cer)
        .metric("wer", r.wer)
        .metric("cer_macro", r.macro_cer)
        .metric("wer_macro", r.macro_wer)
        .setting("pairs", r.pairs);
    emit(&report, a.out.as_deref())
}

fn bertscore(a: &BertArgs) -> Result<()> {
    let rows = read_manifest(&a.manifest)?;
    let report = batch_report(&rows)?;
    emit(&report.to_metric_report(), a.out.as_deref())
}

fn interpret(a: &InterpretArgs) -> Result<()> {
    let task: TaskKind = a.task.parse()?;
    let md = ModelDir::load(&a.model_dir)?;
    let config = match &a.config {
        Some(p) => ToolkitConfig::from_file(p)?,
        None => pipeline::recorded_config(&md)?,
    };
    let provider = config.provider(&a.provider)?;
    let (segments, _) = md.load_inputs()?;
    let texts: std::collections::HashMap<&str, &str> =
        segments.iter().map(|s| (s.segment_id.as_str(), s.text.as_str())).collect();
    let prompts = build_prompts(&md.topics.topics, &PromptTask::default_for(task), |id| {
        texts.get(id).map(|t| t.to_string())
    })?;
    let out = a.out.clone().unwrap_or_else(|| a.model_dir.join("interpret.jsonl"));
    let summary = run_prompts(provider, task, &prompts, &out)?;
    println!(
        "requested {} skipped {} failed {} -> {}",
        summary.requested,
        summary.skipped,
        summary.failed.len(),
        out.display()
    );
    if let Some((topic, msg)) = summary.failed.first() {
        return Err(Error::Request(format!(
            "{} of {} requests failed; topic {topic}: {msg}",
            summary.failed.len(),
            summary.requested
        )));
    }
    Ok(())
}

fn plot_cmd(a: &PlotArgs, seed: u64) -> Result<()> {
    let need_dir = || {
        a.model_dir
            .as_deref()
            .ok_or_else(|| Error::invalid("this plot needs --model-dir"))
    };
    let svg = match a.kind {
        PlotKind::Bars => {
            let md = ModelDir::load(need_dir()?)?;
            let config = pipeline::recorded_config(&md)?;
            plot::bars_svg(&md.topics.topics, a.top_n.unwrap_or(config.topics.top_n_words))?
        }
        PlotKind::Sweep => {
            let csv = a.csv.as_deref().ok_or_else(|| Error::invalid("sweep plot needs --csv"))?;
            plot::sweep_svg(&read_sweep_csv(csv)?)?
        }
        PlotKind::Scatter => {
            let md = ModelDir::load(need_dir()?)?;
            let config = pipeline::recorded_config(&md)?;
            let (segments, embeddings) = md.load_inputs()?;
            let stopwords = config.stop_words.load()?;
            let corpus = PreparedCorpus::new(&segments, &embeddings, &stopwords)?;
            let labels = md.labels_for(&corpus.ids)?;
            let seed = md.inputs().map(|i| i.seed).unwrap_or(seed);
            let cfg = ReduceConfig {
                n_components: 2,
                seed,
                ..config.umap.clone()
            };
            let xy = fit_transform(&corpus.embeddings, &cfg)?.embedding;
            let points: Vec<[f64; 2]> = xy.rows().map(|r| [r[0] as f64, r[1] as f64]).collect();
            plot::scatter_svg(&points, &labels, "Topics (2-D projection)")?
        }
    };
    io::write_bytes(&a.out, svg.as_bytes())
}

fn synth(a: &SynthArgs, seed: u64) -> Result<()> {
    let s = synthetic::synthetic_corpus(a.per_theme, seed)?;
    io::write_jsonl(&a.out.join("segments.jsonl"), &s.segments)?;
    write_embeddings(&s.embeddings, &a.out.join("embeddings.emb1"))?;
    println!("{} segments -> {}", s.segments.len(), a.out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Anonymize(a) => anonymize(a),
        Command::Fit(a) => fit(a, cli.seed),
        Command::Sweep(a) => sweep(a),
        Command::EvalDetect(a) => eval_detect(a),
        Command::EvalOcr(a) => eval_ocr(a),
        Command::Bertscore(a) => bertscore(a),
        Command::Interpret(a) => interpret(a),
        Command::Plot(a) => plot_cmd(a, cli.seed),
        Command::Synth(a) => synth(a, cli.seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
