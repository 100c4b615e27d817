//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use propmap::bertprep::{self, ExportOptions, WordPieceVocab};
use propmap::corpus::{self, LabeledFragment, SpanRecord};
use propmap::eval::{self, RunMetadata};
use propmap::features::{self, NgramRange, Vocabulary};
use propmap::gazetteer::EntityTag;
use propmap::linmod::{self, Algorithm, LinearModel, TrainConfig};
use propmap::pipeline::{self, DataConfig, ExperimentConfig, ListFile, Rewriter, Stage};
use propmap::synth;
use propmap::textprep::PreprocessConfig;
use propmap::{Error, Result};

#[derive(Parser)]
#[command(name = "propmap", version, about = "Propaganda technique classification with entity mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read articles and span annotations into fragment JSON lines.
    Ingest(IngestArgs),
    /// Replace gazetteer phrases and named entities with class tags.
    Map(MapArgs),
    /// Replace URLs, strip digits, punctuation and symbols, lowercase.
    Preprocess(PreprocessArgs),
    /// Fit TF-IDF features and a linear classifier.
    Train(TrainArgs),
    /// Label fragments with a trained model.
    Predict(PredictArgs),
    /// Score predicted spans against gold spans.
    Evaluate(EvaluateArgs),
    /// Write a WordPiece-encoded dataset for fine-tuning.
    ExportBert(ExportArgs),
    /// Run an end-to-end experiment from a config, preset or replay manifest.
    Run(RunArgs),
    /// Generate a synthetic span-annotated corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    articles: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// Drop exact duplicate annotation rows.
    #[arg(long)]
    dedup: bool,
    #[arg(long, short)]
    out: PathBuf,
    /// Split 2:1 and write the development third here.
    #[arg(long, requires = "seed")]
    dev_out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Bundled lists to use, e.g. NATION,SLOGANS.
    #[arg(long, value_delimiter = ',')]
    lists: Vec<EntityTag>,
    /// User list as `[NAME=]PATH:TAG`; replaces the bundled list for TAG.
    #[arg(long = "list", value_parser = parse_list_arg)]
    list_files: Vec<ListFile>,
    /// Tie-break order between lists, highest first.
    #[arg(long, value_delimiter = ',')]
    priority: Vec<EntityTag>,
    /// Entity spans as JSON lines keyed by article id.
    #[arg(long)]
    entities: Option<PathBuf>,
    /// Tag capitalized name runs as PERSON when no entity file is given.
    #[arg(long, conflicts_with = "entities")]
    heuristic_person: bool,
    #[arg(long, value_delimiter = ',', default_value = "PERSON")]
    entity_types: Vec<String>,
    /// Gazetteer replacements as TSV, in article coordinates.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    no_urls: bool,
    #[arg(long)]
    no_numbers: bool,
    #[arg(long)]
    no_punctuation: bool,
    #[arg(long)]
    no_symbols: bool,
    #[arg(long)]
    no_lowercase: bool,
    /// Extra tags to keep verbatim.
    #[arg(long, value_delimiter = ',')]
    protect: Vec<String>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "ridge")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    ngram_min: usize,
    #[arg(long, default_value_t = 1)]
    ngram_max: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Receives model.tsv, vocab.tsv and ngram.json.
    #[arg(long)]
    model_dir: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    model_dir: PathBuf,
    /// Predictions in the 4-column span format.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Write report.tsv and report.txt here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "")]
    name: String,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// WordPiece vocab.txt of the target checkpoint.
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    no_lowercase: bool,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = bertprep::DEFAULT_MAX_LEN)]
    max_len: usize,
    #[arg(long, default_value = bertprep::DEFAULT_CHECKPOINT)]
    checkpoint: String,
    #[arg(long)]
    shuffle_seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment config.
    #[arg(long, conflicts_with_all = ["preset", "replay"])]
    config: Option<PathBuf>,
    /// Named preset, by slug (`nation`) or table row name (`"Combined Lists"`).
    #[arg(long, conflicts_with = "replay")]
    preset: Option<String>,
    /// Re-run the experiment recorded in a manifest.json.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long)]
    articles: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    dev_annotations: Option<PathBuf>,
    #[arg(long)]
    entities: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; presets write to `<out>/<slug>`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
    /// List the presets and exit.
    #[arg(long)]
    list_presets: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    n_per_label: usize,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_list_arg(s: &str) -> std::result::Result<ListFile, String> {
    let spec = s.split_once('=').map_or(s, |(_, rest)| rest);
    let (path, tag) = spec
        .rsplit_once(':')
        .ok_or_else(|| format!("expected [NAME=]PATH:TAG, got {s:?}"))?;
    Ok(ListFile {
        path: PathBuf::from(path),
        tag: tag.parse().map_err(|e: Error| e.to_string())?,
    })
}

fn write(path: &Path, content: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, content).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let mut records = corpus::parse_annotations(&a.annotations)?;
    if a.dedup {
        records = corpus::dedup_annotations(records);
    }
    let articles = corpus::load_articles(&a.articles, &records)?;
    let fragments = corpus::fragments_from_records(&articles, &records)?;
    match (a.dev_out, a.seed) {
        (Some(dev_out), Some(seed)) => {
            let (train, dev) = eval::split_2_1(&fragments, seed)?;
            write(&a.out, corpus::fragments_to_jsonl(&train))?;
            write(&dev_out, corpus::fragments_to_jsonl(&dev))?;
            eprintln!("{} train and {} dev fragments", train.len(), dev.len());
        }
        _ => {
            write(&a.out, corpus::fragments_to_jsonl(&fragments))?;
            eprintln!("{} fragments from {} articles", fragments.len(), articles.len());
        }
    }
    Ok(())
}

fn rewrite_fragments(fragments: &[LabeledFragment], rewriter: &Rewriter) -> Result<Vec<LabeledFragment>> {
    fragments
        .iter()
        .map(|f| {
            Ok(LabeledFragment {
                text: rewriter.apply(f)?,
                ..f.clone()
            })
        })
        .collect()
}

fn map(a: MapArgs) -> Result<()> {
    let fragments = corpus::read_fragments(&a.input)?;
    let mut config = ExperimentConfig::default();
    let p = &mut config.pipeline;
    p.lists = a.lists;
    for f in &a.list_files {
        if !p.lists.contains(&f.tag) {
            p.lists.push(f.tag);
        }
    }
    if p.lists.is_empty() && a.entities.is_none() && !a.heuristic_person {
        p.lists = EntityTag::ALL.to_vec();
    }
    p.list_files = a.list_files;
    if !a.priority.is_empty() {
        p.priority = a.priority;
    }
    p.entity_types = a.entity_types.into_iter().collect();
    p.stages = Vec::new();
    if !p.lists.is_empty() {
        p.stages.push(Stage::Map);
    }
    if a.entities.is_some() || a.heuristic_person {
        p.stages.push(Stage::Ner);
    }
    config.data.entities = a.entities;
    config.validate()?;
    let rewriter = Rewriter::new(&config)?;
    let mapped = rewrite_fragments(&fragments, &rewriter)?;
    write(&a.out, corpus::fragments_to_jsonl(&mapped))?;

    if let Some(audit) = a.audit {
        let mut tsv = String::from("article_id\tbegin\tend\ttag\tsurface\n");
        if let Some(g) = rewriter.gazetteer() {
            for f in &fragments {
                let chars: Vec<char> = f.text.chars().collect();
                for m in g.find_matches(&f.text) {
                    let surface: String = chars[m.begin..m.end].iter().collect();
                    tsv.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\n",
                        f.article_id,
                        f.begin + m.begin,
                        f.begin + m.end,
                        m.tag,
                        surface
                    ));
                }
            }
        }
        write(&audit, tsv)?;
    }
    Ok(())
}

fn preprocess(a: PreprocessArgs) -> Result<()> {
    let fragments = corpus::read_fragments(&a.input)?;
    let mut config = ExperimentConfig::default();
    config.pipeline.stages = vec![Stage::Preprocess];
    config.preprocess = PreprocessConfig {
        replace_urls: !a.no_urls,
        remove_numbers: !a.no_numbers,
        remove_punctuation: !a.no_punctuation,
        remove_symbols: !a.no_symbols,
        lowercase: !a.no_lowercase,
        ..Default::default()
    }
    .protect(a.protect);
    let rewriter = Rewriter::new(&config)?;
    write(&a.out, corpus::fragments_to_jsonl(&rewrite_fragments(&fragments, &rewriter)?))
}

const NGRAM_FILE: &str = "ngram.json";

fn train(a: TrainArgs) -> Result<()> {
    let fragments = corpus::read_fragments(&a.input)?;
    let m = a.model;
    let ngrams = NgramRange {
        min: m.ngram_min,
        max: m.ngram_max,
    };
    ngrams.validate()?;
    let config = TrainConfig {
        algorithm: m.algorithm,
        ridge_alpha: m.alpha,
        sgd_epochs: m.epochs,
        seed: m.seed,
        ..Default::default()
    };
    config.validate()?;
    let docs: Vec<Vec<String>> = fragments.iter().map(|f| features::analyze(&f.text, ngrams)).collect();
    let vocab = features::fit_vocab(&docs)?;
    let x = features::tfidf_transform(&docs, &vocab);
    let y: Vec<_> = fragments.iter().map(|f| f.label).collect();
    let model = linmod::train(&x, &y, &config)?;
    fs::create_dir_all(&a.model_dir).map_err(|e| io_error(&a.model_dir, e))?;
    model.save(a.model_dir.join(pipeline::MODEL_FILE))?;
    vocab.save(a.model_dir.join(pipeline::VOCAB_FILE))?;
    write(
        &a.model_dir.join(NGRAM_FILE),
        serde_json::to_string(&ngrams).expect("n-gram range serializes"),
    )?;
    eprintln!(
        "trained {} on {} fragments, {} features, {} labels",
        format!("{:?}", m.algorithm).to_lowercase(),
        fragments.len(),
        vocab.len(),
        model.labels().len()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let fragments = corpus::read_fragments(&a.input)?;
    let model = LinearModel::load(a.model_dir.join(pipeline::MODEL_FILE))?;
    let vocab = Vocabulary::load(a.model_dir.join(pipeline::VOCAB_FILE))?;
    let ngram_path = a.model_dir.join(NGRAM_FILE);
    let ngrams: NgramRange = match fs::read_to_string(&ngram_path) {
        Ok(s) => serde_json::from_str(&s).map_err(|e| Error::Format {
            location: ngram_path.display().to_string(),
            message: e.to_string(),
        })?,
        Err(_) => NgramRange::default(),
    };
    let docs: Vec<Vec<String>> = fragments.iter().map(|f| features::analyze(&f.text, ngrams)).collect();
    let labels = model.predict(&features::tfidf_transform(&docs, &vocab))?;
    let records: Vec<SpanRecord> = fragments
        .iter()
        .zip(labels)
        .map(|(f, label)| SpanRecord {
            label,
            ..SpanRecord::from(f)
        })
        .collect();
    write(&a.out, corpus::format_annotations(&records))
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let gold = corpus::parse_annotations(&a.gold)?;
    let pred = corpus::parse_annotations(&a.pred)?;
    let (g, p) = eval::align_predictions(&gold, &pred)?;
    let scores = eval::micro_f1(&g, &p)?;
    let rendered = eval::report(
        &RunMetadata {
            name: a.name,
            split: a.gold.display().to_string(),
        },
        &scores,
    );
    print!("{}", rendered.text);
    if let Some(dir) = a.out_dir {
        write(&dir.join(pipeline::REPORT_TSV_FILE), &rendered.tsv)?;
        write(&dir.join(pipeline::REPORT_TEXT_FILE), &rendered.text)?;
    }
    Ok(())
}

fn export_bert(a: ExportArgs) -> Result<()> {
    let fragments = corpus::read_fragments(&a.input)?;
    let vocab = WordPieceVocab::load(&a.vocab)?.with_lowercase(!a.no_lowercase);
    let manifest = bertprep::export_dataset(
        &fragments,
        &vocab,
        &ExportOptions {
            max_len: a.max_len,
            checkpoint: a.checkpoint,
            shuffle_seed: a.shuffle_seed,
        },
        &a.out,
    )?;
    eprintln!("exported {} examples to {}", manifest.n_examples, a.out.display());
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    if a.list_presets {
        for p in &pipeline::PRESETS {
            println!("{:<26} {}", p.slug, p.row);
        }
        return Ok(());
    }
    let mut config = if let Some(path) = &a.config {
        ExperimentConfig::load(path)?
    } else if let Some(path) = &a.replay {
        ExperimentConfig::load(path)?
    } else if let Some(name) = &a.preset {
        let data = DataConfig {
            articles_dir: a.articles.clone().unwrap_or_default(),
            annotations: a.annotations.clone().unwrap_or_default(),
            ..Default::default()
        };
        let root = a.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
        let mut c = pipeline::preset_config(name, data, &root)?;
        c.output_dir = root.join(pipeline::find_preset(name).expect("preset resolved").slug);
        c
    } else {
        return Err(Error::Config("one of --config, --preset or --replay is required".into()));
    };
    if let Some(p) = a.articles {
        config.data.articles_dir = p;
    }
    if let Some(p) = a.annotations {
        config.data.annotations = p;
    }
    if a.dev_annotations.is_some() {
        config.data.dev_annotations = a.dev_annotations;
    }
    if a.entities.is_some() {
        config.data.entities = a.entities;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let (Some(out), None) = (a.out, &a.preset) {
        config.output_dir = out;
    }
    if a.print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    if config.data.annotations.as_os_str().is_empty() || config.data.articles_dir.as_os_str().is_empty() {
        return Err(Error::Config("articles directory and annotations are required".into()));
    }
    let outcome = pipeline::run_experiment(&config)?;
    match &outcome.report {
        Some(report) => {
            let text = fs::read_to_string(outcome.output_dir.join(pipeline::REPORT_TEXT_FILE))
                .map_err(|e| io_error(&outcome.output_dir, e))?;
            print!("{text}");
            eprintln!(
                "overall micro-F1 {:.2}; outputs in {}",
                report.overall_micro_f1 * 100.0,
                outcome.output_dir.display()
            );
        }
        None => eprintln!(
            "exported {} train and {} dev examples to {}",
            outcome.manifest.n_train,
            outcome.manifest.n_dev,
            outcome.output_dir.display()
        ),
    }
    Ok(())
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let c = synth::make_synthetic_corpus(a.seed, a.n_per_label, &a.out)?;
    eprintln!(
        "wrote {} train and {} dev fragments under {}",
        c.n_train,
        c.n_dev,
        c.root.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Map(a) => map(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::ExportBert(a) => export_bert(a),
        Command::Run(a) => run(a),
        Command::Synth(a) => synth_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_argument_forms() {
        let l = parse_list_arg("extra=data/x.txt:NATION").unwrap();
        assert_eq!((l.path, l.tag), (PathBuf::from("data/x.txt"), EntityTag::Nation));
        let l = parse_list_arg("c:/lists/y.txt:slogans").unwrap();
        assert_eq!(l.tag, EntityTag::Slogans);
        assert!(parse_list_arg("nolist").is_err());
        assert!(parse_list_arg("x.txt:PERSON").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
