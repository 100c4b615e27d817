//! End-to-end experiments: ingest → rewrite stages → classify or export.
//!
//! An [`ExperimentConfig`] names its inputs, the ordered rewrite stages
//! (`map`, `ner`, `preprocess`), the gazetteer lists and entity types, the
//! classifier settings and one root seed. Every run writes a replay manifest
//! holding the full config plus checksums of the inputs and lists used.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bertprep::{self, ExportOptions, WordPieceVocab};
use crate::corpus::{self, LabeledFragment, SpanRecord, TechniqueLabel};
use crate::error::{Error, Result, StageContext};
use crate::eval::{self, RunMetadata, ScoreReport};
use crate::features::{self, NgramRange};
use crate::gazetteer::{self, BuiltinList, EntityTag, Gazetteer, GazetteerEntry};
use crate::linmod::{self, LinearModel, TrainConfig};
use crate::nermap::{self, EntityAnnotation};
use crate::rewrite::RewriteResult;
use crate::textprep::{self, PreprocessConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Map,
    Ner,
    Preprocess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// TF-IDF features and a linear classifier, scored on the dev set.
    #[default]
    Classify,
    /// Write WordPiece-encoded train/dev sets for fine-tuning.
    ExportBert,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub articles_dir: PathBuf,
    pub annotations: PathBuf,
    /// Separate development annotations; when absent the training
    /// annotations are split 2:1 with the root seed.
    pub dev_annotations: Option<PathBuf>,
    /// Defaults to `articles_dir`.
    pub dev_articles_dir: Option<PathBuf>,
    /// JSON-lines entity spans keyed by article id, in article coordinates.
    /// Without it the `ner` stage uses the built-in heuristic tagger.
    pub entities: Option<PathBuf>,
    pub dedup: bool,
}

/// A user-supplied list file. Any files given for a tag replace the bundled
/// list for that tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListFile {
    pub path: PathBuf,
    pub tag: EntityTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub stages: Vec<Stage>,
    /// Gazetteer lists used by the `map` stage.
    pub lists: Vec<EntityTag>,
    pub list_files: Vec<ListFile>,
    pub priority: Vec<EntityTag>,
    pub entity_types: BTreeSet<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stages: vec![Stage::Preprocess],
            lists: Vec::new(),
            list_files: Vec::new(),
            priority: EntityTag::DEFAULT_PRIORITY.to_vec(),
            entity_types: nermap::person_types(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BertConfig {
    /// `vocab.txt` of the target checkpoint. When absent a vocabulary is
    /// built from the training texts.
    pub vocab: Option<PathBuf>,
    pub lowercase: bool,
    pub export: ExportOptions,
}

impl Default for BertConfig {
    fn default() -> Self {
        BertConfig {
            vocab: None,
            lowercase: true,
            export: ExportOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub pipeline: PipelineConfig,
    pub preprocess: PreprocessConfig,
    pub ngram_range: NgramRange,
    pub train: TrainConfig,
    pub bert: BertConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            seed: 1,
            mode: Mode::Classify,
            output_dir: PathBuf::from("runs/experiment"),
            data: DataConfig::default(),
            pipeline: PipelineConfig::default(),
            preprocess: PreprocessConfig::default(),
            ngram_range: NgramRange::default(),
            train: TrainConfig::default(),
            bert: BertConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parse a TOML or JSON config, chosen by file extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&content)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            // replay manifests nest the config
            let value = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&content).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let stages = &self.pipeline.stages;
        let unique: BTreeSet<String> = stages.iter().map(|s| format!("{s:?}")).collect();
        if unique.len() != stages.len() {
            return Err(Error::Config("pipeline stages must not repeat".into()));
        }
        let pos = |s: Stage| stages.iter().position(|&x| x == s);
        if let (Some(n), Some(p)) = (pos(Stage::Ner), pos(Stage::Preprocess)) {
            if n > p {
                return Err(Error::Config(
                    "the ner stage needs original casing and offsets; run it before preprocess".into(),
                ));
            }
        }
        if pos(Stage::Map).is_some() && self.pipeline.lists.is_empty() {
            return Err(Error::Config("the map stage needs at least one list".into()));
        }
        if pos(Stage::Ner).is_some() && self.pipeline.entity_types.is_empty() {
            return Err(Error::Config("the ner stage needs at least one entity type".into()));
        }
        if self.mode == Mode::Classify {
            self.train.validate()?;
            self.ngram_range.validate()?;
        }
        Ok(())
    }
}

/// Tagging and normalization stages applied to each fragment.
pub struct Rewriter {
    stages: Vec<Stage>,
    gazetteer: Option<Gazetteer>,
    /// Used by the heuristic tagger to skip gazetteer phrases.
    exclusion: Gazetteer,
    entities: Option<HashMap<String, Vec<EntityAnnotation>>>,
    entity_types: BTreeSet<String>,
    preprocess: PreprocessConfig,
    list_checksums: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Rewriter {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let p = &config.pipeline;
        let mut list_checksums = BTreeMap::new();
        let mut entries: Vec<GazetteerEntry> = Vec::new();
        for &tag in &p.lists {
            let files: Vec<&ListFile> = p.list_files.iter().filter(|f| f.tag == tag).collect();
            if files.is_empty() {
                let b = BuiltinList::for_tag(tag);
                list_checksums.insert(b.file_name().to_string(), sha256_hex(b.contents().as_bytes()));
                entries.extend(b.entries());
            }
            for f in files {
                let content = fs::read_to_string(&f.path).map_err(|e| Error::io(&f.path, e))?;
                list_checksums.insert(f.path.display().to_string(), sha256_hex(content.as_bytes()));
                entries.extend(gazetteer::parse_list(&content, tag, &f.path)?);
            }
        }
        let gazetteer = if p.stages.contains(&Stage::Map) {
            Some(Gazetteer::with_priority(entries, &p.priority)?)
        } else {
            None
        };
        let exclusion = gazetteer.clone().unwrap_or_else(Gazetteer::builtin);

        let entities = match (&config.data.entities, p.stages.contains(&Stage::Ner)) {
            (Some(path), true) => {
                let mut by_doc: HashMap<String, Vec<EntityAnnotation>> = HashMap::new();
                for a in nermap::ingest_entities(path)? {
                    by_doc.entry(a.doc_key.clone()).or_default().push(a);
                }
                Some(by_doc)
            }
            _ => None,
        };

        let preprocess = config.preprocess.clone().protect(p.entity_types.iter().cloned());
        Ok(Rewriter {
            stages: p.stages.clone(),
            gazetteer,
            exclusion,
            entities,
            entity_types: p.entity_types.clone(),
            preprocess,
            list_checksums,
        })
    }

    /// The `map` stage gazetteer, when that stage is enabled.
    pub fn gazetteer(&self) -> Option<&Gazetteer> {
        self.gazetteer.as_ref()
    }

    /// SHA-256 of each list used, keyed by bundled file name or path.
    pub fn list_checksums(&self) -> &BTreeMap<String, String> {
        &self.list_checksums
    }

    /// Rewrite one fragment's text through the configured stages.
    pub fn apply(&self, fragment: &LabeledFragment) -> Result<String> {
        let mut text = fragment.text.clone();
        // set while the text is still in the fragment's own coordinates
        // modulo tag replacements
        let mut mapped: Option<RewriteResult> = None;
        for stage in &self.stages {
            match stage {
                Stage::Map => {
                    let g = self.gazetteer.as_ref().expect("map stage has a gazetteer");
                    let r = g.map_entities(&text);
                    text = r.text.clone();
                    mapped = Some(r);
                }
                Stage::Ner => {
                    let anns = match &self.entities {
                        Some(by_doc) => {
                            let local = by_doc
                                .get(&fragment.article_id)
                                .map(|a| {
                                    nermap::project_to_fragment(
                                        a,
                                        &fragment.article_id,
                                        fragment.begin,
                                        fragment.end,
                                    )
                                })
                                .unwrap_or_default();
                            match &mapped {
                                Some(m) => shift_through(&local, m),
                                None => local,
                            }
                        }
                        None => nermap::heuristic_person_tagger(
                            &text,
                            &fragment.article_id,
                            Some(&self.exclusion),
                        ),
                    };
                    text = nermap::apply_person_tags(&text, &anns, &self.entity_types)
                        .stage("ner")?
                        .text;
                }
                Stage::Preprocess => {
                    text = textprep::preprocess(&text, &self.preprocess);
                }
            }
        }
        Ok(text)
    }
}

/// Move annotations through a gazetteer rewrite, dropping any that touch a
/// replaced span.
fn shift_through(anns: &[EntityAnnotation], r: &RewriteResult) -> Vec<EntityAnnotation> {
    anns.iter()
        .filter(|a| {
            !r.replacements
                .iter()
                .any(|rep| a.begin < rep.end && rep.begin < a.end)
        })
        .filter_map(|a| {
            let (begin, end) = r.map_span(a.begin, a.end)?;
            Some(EntityAnnotation {
                begin,
                end,
                ..a.clone()
            })
        })
        .collect()
}

/// Train and dev fragments plus a description of where the dev set came from.
pub struct Splits {
    pub train: Vec<LabeledFragment>,
    pub dev: Vec<LabeledFragment>,
    pub description: String,
}

fn load_records(path: &Path, dedup: bool) -> Result<Vec<SpanRecord>> {
    let records = corpus::parse_annotations(path)?;
    Ok(if dedup {
        corpus::dedup_annotations(records)
    } else {
        records
    })
}

pub fn load_splits(config: &ExperimentConfig) -> Result<Splits> {
    let data = &config.data;
    let records = load_records(&data.annotations, data.dedup)?;
    let articles = corpus::load_articles(&data.articles_dir, &records)?;
    let fragments = corpus::fragments_from_records(&articles, &records)?;
    match &data.dev_annotations {
        Some(dev_path) => {
            let dev_records = load_records(dev_path, data.dedup)?;
            let dev_dir = data.dev_articles_dir.as_ref().unwrap_or(&data.articles_dir);
            let dev_articles = corpus::load_articles(dev_dir, &dev_records)?;
            Ok(Splits {
                train: fragments,
                dev: corpus::fragments_from_records(&dev_articles, &dev_records)?,
                description: format!("dev annotations {}", dev_path.display()),
            })
        }
        None => {
            let (train, dev) = eval::split_2_1(&fragments, config.seed)?;
            Ok(Splits {
                train,
                dev,
                description: format!("internal 2:1 split (seed {})", config.seed),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayManifest {
    pub tool: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub split: String,
    pub list_checksums: BTreeMap<String, String>,
    pub input_checksums: BTreeMap<String, String>,
    pub n_train: usize,
    pub n_dev: usize,
    pub overall_micro_f1: Option<f64>,
}

pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const REPORT_TSV_FILE: &str = "report.tsv";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const MODEL_FILE: &str = "model.tsv";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const REPLAY_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Option<ScoreReport>,
    pub predictions: Vec<SpanRecord>,
    pub manifest: ReplayManifest,
    pub output_dir: PathBuf,
}

fn write_file(path: &Path, content: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn file_checksum(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Rewrite, vectorize, train, predict and score.
pub fn classify(
    config: &ExperimentConfig,
    rewriter: &Rewriter,
    train: &[LabeledFragment],
    dev: &[LabeledFragment],
) -> Result<(LinearModel, features::Vocabulary, Vec<TechniqueLabel>, ScoreReport)> {
    let rewrite_all = |frags: &[LabeledFragment]| -> Result<Vec<Vec<String>>> {
        frags
            .iter()
            .map(|f| rewriter.apply(f).map(|t| features::analyze(&t, config.ngram_range)))
            .collect()
    };
    let train_docs = rewrite_all(train).stage("rewrite")?;
    let dev_docs = rewrite_all(dev).stage("rewrite")?;

    let vocab = features::fit_vocab(&train_docs).stage("features")?;
    let x_train = features::tfidf_transform(&train_docs, &vocab);
    let x_dev = features::tfidf_transform(&dev_docs, &vocab);
    let y_train: Vec<TechniqueLabel> = train.iter().map(|f| f.label).collect();

    let train_config = TrainConfig {
        seed: config.seed,
        ..config.train.clone()
    };
    let model = linmod::train(&x_train, &y_train, &train_config).stage("train")?;
    let predicted = model.predict(&x_dev).stage("predict")?;
    let gold: Vec<TechniqueLabel> = dev.iter().map(|f| f.label).collect();
    let report = eval::micro_f1(&gold, &predicted).stage("evaluate")?;
    Ok((model, vocab, predicted, report))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let splits = load_splits(config).stage("ingest")?;
    let rewriter = Rewriter::new(config).stage("setup")?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e)).stage("write")?;

    let mut input_checksums = BTreeMap::new();
    for (key, path) in [
        ("annotations", Some(&config.data.annotations)),
        ("dev_annotations", config.data.dev_annotations.as_ref()),
        ("entities", config.data.entities.as_ref()),
        ("bert_vocab", config.bert.vocab.as_ref()),
    ] {
        if let Some(p) = path {
            input_checksums.insert(key.to_string(), file_checksum(p).stage("ingest")?);
        }
    }

    let mut manifest = ReplayManifest {
        tool: format!("propmap {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        seed: config.seed,
        split: splits.description.clone(),
        list_checksums: rewriter.list_checksums().clone(),
        input_checksums,
        n_train: splits.train.len(),
        n_dev: splits.dev.len(),
        overall_micro_f1: None,
    };

    let (report, predictions) = match config.mode {
        Mode::Classify => {
            let (model, vocab, predicted, report) =
                classify(config, &rewriter, &splits.train, &splits.dev)?;
            let predictions: Vec<SpanRecord> = splits
                .dev
                .iter()
                .zip(&predicted)
                .map(|(f, &label)| SpanRecord {
                    label,
                    ..SpanRecord::from(f)
                })
                .collect();
            let rendered = eval::report(
                &RunMetadata {
                    name: config.name.clone(),
                    split: splits.description.clone(),
                },
                &report,
            );
            (|| -> Result<()> {
                write_file(&out.join(PREDICTIONS_FILE), corpus::format_annotations(&predictions))?;
                write_file(&out.join(REPORT_TSV_FILE), &rendered.tsv)?;
                write_file(&out.join(REPORT_TEXT_FILE), &rendered.text)?;
                model.save(out.join(MODEL_FILE))?;
                vocab.save(out.join(VOCAB_FILE))
            })()
            .stage("write")?;
            manifest.overall_micro_f1 = Some(report.overall_micro_f1);
            (Some(report), predictions)
        }
        Mode::ExportBert => {
            export_bert(config, &rewriter, &splits, out)?;
            (None, Vec::new())
        }
    };

    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&out.join(REPLAY_FILE), json).stage("write")?;
    Ok(RunOutcome {
        report,
        predictions,
        manifest,
        output_dir: out.clone(),
    })
}

fn export_bert(config: &ExperimentConfig, rewriter: &Rewriter, splits: &Splits, out: &Path) -> Result<()> {
    let rewrite = |frags: &[LabeledFragment]| -> Result<Vec<LabeledFragment>> {
        frags
            .iter()
            .map(|f| {
                Ok(LabeledFragment {
                    text: rewriter.apply(f)?,
                    ..f.clone()
                })
            })
            .collect()
    };
    let train = rewrite(&splits.train).stage("rewrite")?;
    let dev = rewrite(&splits.dev).stage("rewrite")?;
    let vocab = match &config.bert.vocab {
        Some(path) => WordPieceVocab::load(path).stage("export")?,
        None => {
            let v = WordPieceVocab::build(train.iter().map(|f| f.text.as_str()), config.bert.lowercase);
            let lines: String = (0..v.len() as u32).filter_map(|i| v.token(i)).map(|t| format!("{t}\n")).collect();
            write_file(&out.join("vocab.txt"), lines).stage("export")?;
            v
        }
    }
    .with_lowercase(config.bert.lowercase);
    bertprep::export_dataset(&train, &vocab, &config.bert.export, out.join("train")).stage("export")?;
    bertprep::export_dataset(&dev, &vocab, &config.bert.export, out.join("dev")).stage("export")?;
    Ok(())
}

/// Which published results table a preset reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultsTable {
    /// Ridge baseline on the development set per mapping variant.
    Baseline,
    /// Fine-tuned transformer per dataset variant.
    Bert,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub slug: &'static str,
    /// Row name as printed in the results tables.
    pub row: &'static str,
    pub tables: &'static [ResultsTable],
}

use ResultsTable::{Baseline as T_BASE, Bert as T_BERT};

pub const PRESETS: [Preset; 15] = [
    Preset { slug: "baseline", row: "Baseline Model", tables: &[T_BASE, T_BERT] },
    Preset { slug: "nation", row: "NATION", tables: &[T_BASE] },
    Preset { slug: "religion", row: "RELIGION", tables: &[T_BASE] },
    Preset { slug: "politics", row: "POLITICS", tables: &[T_BASE] },
    Preset { slug: "slogans", row: "SLOGANS", tables: &[T_BASE] },
    Preset { slug: "combined-lists", row: "Combined Lists", tables: &[T_BASE] },
    Preset { slug: "person", row: "PERSON", tables: &[T_BASE] },
    Preset { slug: "various-entities", row: "Various Entities", tables: &[T_BASE] },
    Preset { slug: "bert-raw", row: "BERT raw", tables: &[T_BERT] },
    Preset { slug: "bert-preprocessed", row: "BERT Pre-processed", tables: &[T_BERT] },
    Preset { slug: "bert-various-entities", row: "BERT Various Entities", tables: &[T_BERT] },
    Preset { slug: "bert-person", row: "BERT Entity Person", tables: &[T_BERT] },
    Preset { slug: "bert-person-preprocessed", row: "BERT Entity Person Pre-processed", tables: &[T_BERT] },
    Preset { slug: "bert-lists", row: "BERT Lists", tables: &[T_BERT] },
    Preset { slug: "bert-lists-preprocessed", row: "BERT Lists Pre-processed", tables: &[T_BERT] },
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.slug == name || p.row.eq_ignore_ascii_case(name))
}

/// The experiment configuration for a preset, over the given data.
pub fn preset_config(name: &str, data: DataConfig, output_root: &Path) -> Result<ExperimentConfig> {
    let preset = find_preset(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset {name:?}; known: {}",
            PRESETS.iter().map(|p| p.slug).collect::<Vec<_>>().join(", ")
        ))
    })?;
    let all_lists = EntityTag::ALL.to_vec();
    let (mode, stages, lists, entity_types) = match preset.slug {
        "baseline" => (Mode::Classify, vec![Stage::Preprocess], vec![], nermap::person_types()),
        "nation" | "religion" | "politics" | "slogans" => (
            Mode::Classify,
            vec![Stage::Map, Stage::Preprocess],
            vec![preset.row.parse::<EntityTag>()?],
            nermap::person_types(),
        ),
        "combined-lists" => (
            Mode::Classify,
            vec![Stage::Map, Stage::Preprocess],
            all_lists,
            nermap::person_types(),
        ),
        "person" => (Mode::Classify, vec![Stage::Ner, Stage::Preprocess], vec![], nermap::person_types()),
        "various-entities" => (
            Mode::Classify,
            vec![Stage::Ner, Stage::Preprocess],
            vec![],
            nermap::various_entity_types(),
        ),
        "bert-raw" => (Mode::ExportBert, vec![], vec![], nermap::person_types()),
        "bert-preprocessed" => (Mode::ExportBert, vec![Stage::Preprocess], vec![], nermap::person_types()),
        "bert-various-entities" => (
            Mode::ExportBert,
            vec![Stage::Ner],
            vec![],
            nermap::various_entity_types(),
        ),
        "bert-person" => (Mode::ExportBert, vec![Stage::Ner], vec![], nermap::person_types()),
        "bert-person-preprocessed" => (
            Mode::ExportBert,
            vec![Stage::Ner, Stage::Preprocess],
            vec![],
            nermap::person_types(),
        ),
        "bert-lists" => (Mode::ExportBert, vec![Stage::Map], all_lists, nermap::person_types()),
        "bert-lists-preprocessed" => (
            Mode::ExportBert,
            vec![Stage::Map, Stage::Preprocess],
            all_lists,
            nermap::person_types(),
        ),
        other => unreachable!("preset {other} has no configuration"),
    };
    Ok(ExperimentConfig {
        name: preset.row.to_string(),
        mode,
        output_dir: output_root.join(preset.slug),
        data,
        pipeline: PipelineConfig {
            stages,
            lists,
            entity_types,
            ..Default::default()
        },
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_table_row_has_exactly_one_preset() {
        for (row, _) in eval::published::BASELINE_DEV_F1 {
            let n = PRESETS
                .iter()
                .filter(|p| p.row == row && p.tables.contains(&ResultsTable::Baseline))
                .count();
            assert_eq!(n, 1, "{row}");
        }
        for (row, _) in eval::published::BERT_DEV_F1 {
            let n = PRESETS
                .iter()
                .filter(|p| p.row == row && p.tables.contains(&ResultsTable::Bert))
                .count();
            assert_eq!(n, 1, "{row}");
        }
        for p in &PRESETS {
            let cfg = preset_config(p.slug, DataConfig::default(), Path::new("runs")).unwrap();
            cfg.validate().unwrap();
            assert_eq!(find_preset(p.row).unwrap().slug, p.slug);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.pipeline.stages = vec![Stage::Preprocess, Stage::Preprocess];
        assert!(cfg.validate().is_err());
        cfg.pipeline.stages = vec![Stage::Preprocess, Stage::Ner];
        assert!(cfg.validate().is_err());
        cfg.pipeline.stages = vec![Stage::Map];
        assert!(cfg.validate().is_err());
        cfg.pipeline.lists = vec![EntityTag::Nation];
        assert!(cfg.validate().is_ok());
        cfg.pipeline.stages = vec![Stage::Preprocess, Stage::Map];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = preset_config("combined-lists", DataConfig::default(), Path::new("runs")).unwrap();
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        let partial: ExperimentConfig = toml::from_str(
            "name = \"x\"\n[pipeline]\nstages = [\"map\", \"preprocess\"]\nlists = [\"NATION\"]\n[train]\nalgorithm = \"sgd_hinge\"\n",
        )
        .unwrap();
        assert_eq!(partial.pipeline.lists, vec![EntityTag::Nation]);
        assert_eq!(partial.train.algorithm, linmod::Algorithm::SgdHinge);
        assert_eq!(partial.train.ridge_alpha, 1.0);
    }

    fn frag(text: &str) -> LabeledFragment {
        LabeledFragment {
            article_id: "1".into(),
            label: TechniqueLabel::FlagWaving,
            begin: 10,
            end: 10 + text.chars().count(),
            text: text.into(),
        }
    }

    #[test]
    fn rewriter_stage_orders() {
        let mut cfg = ExperimentConfig::default();
        cfg.pipeline.lists = EntityTag::ALL.to_vec();
        cfg.pipeline.stages = vec![Stage::Map, Stage::Ner, Stage::Preprocess];
        let r = Rewriter::new(&cfg).unwrap();
        assert_eq!(
            r.apply(&frag("This is not Iran, said Mr. John Smith of 2020!")).unwrap(),
            "this is not NATION said PERSON of"
        );
        assert_eq!(r.list_checksums().len(), 4);

        cfg.pipeline.stages = vec![Stage::Preprocess, Stage::Map];
        let r = Rewriter::new(&cfg).unwrap();
        assert_eq!(r.apply(&frag("The U.S. and Iran")).unwrap(), "the u s and NATION");

        cfg.pipeline.stages = vec![];
        let r = Rewriter::new(&cfg).unwrap();
        assert_eq!(r.apply(&frag("Raw, Text")).unwrap(), "Raw, Text");
    }

    #[test]
    fn external_entities_follow_gazetteer_offsets() {
        let dir = tempfile::tempdir().unwrap();
        let ents = dir.path().join("ents.jsonl");
        // fragment starts at article offset 10: "Iran and John Smith" -> John Smith at 19..29
        fs::write(
            &ents,
            "{\"doc_key\":\"1\",\"begin\":19,\"end\":29,\"type\":\"PERSON\"}\n\
             {\"doc_key\":\"1\",\"begin\":10,\"end\":14,\"type\":\"GPE\"}\n",
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.data.entities = Some(ents);
        cfg.pipeline.lists = vec![EntityTag::Nation];
        cfg.pipeline.stages = vec![Stage::Map, Stage::Ner];
        cfg.pipeline.entity_types = nermap::various_entity_types();
        let r = Rewriter::new(&cfg).unwrap();
        assert_eq!(r.apply(&frag("Iran and John Smith")).unwrap(), "NATION and PERSON");

        cfg.pipeline.stages = vec![Stage::Ner, Stage::Map];
        let r = Rewriter::new(&cfg).unwrap();
        assert_eq!(r.apply(&frag("Iran and John Smith")).unwrap(), "GPE and PERSON");
    }
}
