//! End-to-end runs through the library pipeline and the `propmap` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use propmap::bertprep::{self, EncodedExample, FinetuneManifest, WordPieceVocab};
use propmap::corpus::{self, TechniqueLabel};
use propmap::pipeline::{self, DataConfig, ExperimentConfig, Mode, ReplayManifest};
use propmap::synth::{self, SyntheticCorpus};
use propmap::Error;

fn corpus_in(dir: &Path, n: usize) -> SyntheticCorpus {
    synth::make_synthetic_corpus(21, n, dir.join("data")).unwrap()
}

fn data(c: &SyntheticCorpus) -> DataConfig {
    DataConfig {
        articles_dir: c.articles_dir.clone(),
        annotations: c.train_annotations.clone(),
        dev_annotations: Some(c.dev_annotations.clone()),
        ..Default::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_propmap"))
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus_in(dir.path(), 15);
    let mut config = pipeline::preset_config("combined-lists", data(&c), &dir.path().join("a")).unwrap();
    config.data.dev_annotations = None;
    config.seed = 77;
    let first = pipeline::run_experiment(&config).unwrap();
    let manifest_text = fs::read_to_string(first.output_dir.join(pipeline::REPLAY_FILE)).unwrap();
    let manifest: ReplayManifest = serde_json::from_str(&manifest_text).unwrap();
    assert_eq!(manifest.seed, 77);
    assert_eq!(manifest.list_checksums.len(), 4);
    assert!(manifest.input_checksums.contains_key("annotations"));

    let replayed = ExperimentConfig::load(first.output_dir.join(pipeline::REPLAY_FILE)).unwrap();
    assert_eq!(replayed, config);
    let second = pipeline::run_experiment(&replayed).unwrap();
    for f in [pipeline::PREDICTIONS_FILE, pipeline::REPORT_TSV_FILE, pipeline::MODEL_FILE, pipeline::REPLAY_FILE] {
        assert_eq!(
            fs::read(first.output_dir.join(f)).unwrap(),
            fs::read(second.output_dir.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(manifest.n_train + manifest.n_dev, c.n_train);
}

#[test]
fn every_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus_in(dir.path(), 6);
    for p in &pipeline::PRESETS {
        let config = pipeline::preset_config(p.slug, data(&c), &dir.path().join("runs")).unwrap();
        let out = pipeline::run_experiment(&config).unwrap();
        match config.mode {
            Mode::Classify => {
                let report = out.report.unwrap();
                assert_eq!(report.n_instances, c.n_dev);
                assert_eq!(out.predictions.len(), c.n_dev);
            }
            Mode::ExportBert => {
                assert!(out.report.is_none());
                for split in ["train", "dev"] {
                    assert!(out.output_dir.join(split).join(bertprep::EXAMPLES_FILE).exists());
                }
            }
        }
    }
}

#[test]
fn errors_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus_in(dir.path(), 6);
    let mut config = pipeline::preset_config("baseline", data(&c), dir.path()).unwrap();
    config.data.annotations = dir.path().join("missing.tsv");
    match pipeline::run_experiment(&config) {
        Err(Error::Stage { stage: "ingest", source }) => assert!(matches!(*source, Error::Io { .. })),
        other => panic!("unexpected {other:?}"),
    }
    let mut config = pipeline::preset_config("person", data(&c), dir.path()).unwrap();
    config.data.entities = Some(dir.path().join("none.jsonl"));
    let err = pipeline::run_experiment(&config).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "setup", .. }), "{err}");
    assert!(!err.is_usage());
}

/// The fine-tuning side consumes examples.jsonl + manifest.json and returns
/// one label per example in spans.tsv order; here a stand-in "predicts" the
/// gold label for every other example.
#[test]
fn finetune_file_interface() {
    let dir = tempfile::tempdir().unwrap();
    let c = corpus_in(dir.path(), 9);
    let out = dir.path().join("export");
    let mut config = pipeline::preset_config("bert-lists", data(&c), &out).unwrap();
    config.bert.export.shuffle_seed = Some(3);
    let outcome = pipeline::run_experiment(&config).unwrap();
    let dev = outcome.output_dir.join("dev");

    let manifest: FinetuneManifest =
        serde_json::from_str(&fs::read_to_string(dev.join(bertprep::MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!((manifest.batch_size, manifest.epochs), (32, 4));
    assert_eq!(manifest.learning_rate, 2e-5);
    assert_eq!(manifest.labels.len(), 14);
    let vocab = WordPieceVocab::load(outcome.output_dir.join("vocab.txt")).unwrap();
    assert_eq!(manifest.vocab_sha256, vocab.sha256());

    let examples: Vec<EncodedExample> = fs::read_to_string(dev.join(bertprep::EXAMPLES_FILE))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let spans = corpus::parse_annotations(dev.join(bertprep::SPANS_FILE)).unwrap();
    assert_eq!(examples.len(), spans.len());
    assert_eq!(examples.len(), manifest.n_examples);
    let mut predicted = spans.clone();
    for (i, (ex, rec)) in examples.iter().zip(predicted.iter_mut()).enumerate() {
        ex.validate(&vocab, manifest.max_len).unwrap();
        assert_eq!(manifest.labels[ex.label_id], rec.label.as_str());
        if i % 2 == 1 {
            rec.label = TechniqueLabel::from_index((rec.label.index() + 1) % 14).unwrap();
        }
    }
    let pred_path = dir.path().join("finetune.predictions.tsv");
    fs::write(&pred_path, corpus::format_annotations(&predicted)).unwrap();

    let status = bin()
        .args(["evaluate", "--gold"])
        .arg(&c.dev_annotations)
        .arg("--pred")
        .arg(&pred_path)
        .arg("--out-dir")
        .arg(dir.path().join("eval"))
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let report = fs::read_to_string(dir.path().join("eval").join(pipeline::REPORT_TSV_FILE)).unwrap();
    let overall = report.lines().last().unwrap();
    let expected = (spans.len().div_ceil(2)) as f64 / spans.len() as f64 * 100.0;
    assert_eq!(overall.split('\t').nth(3).unwrap(), format!("{expected:.2}"));
}

#[test]
fn cli_pipeline_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let o = bin().current_dir(d).args(args).output().unwrap();
        (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
    };
    assert_eq!(run(&["synth", "--seed", "4", "--n-per-label", "6", "-o", "syn"]).0, 0);
    let steps: [&[&str]; 7] = [
        &["ingest", "--articles", "syn/articles", "--annotations", "syn/train.labels.tsv", "-o", "tr.jsonl", "--dev-out", "dv.jsonl", "--seed", "1"],
        &["map", "-i", "tr.jsonl", "-o", "tr.m.jsonl", "--lists", "NATION,SLOGANS", "--heuristic-person", "--audit", "audit.tsv"],
        &["preprocess", "-i", "tr.m.jsonl", "-o", "tr.p.jsonl"],
        &["train", "-i", "tr.p.jsonl", "--model-dir", "model", "--algorithm", "linear_svc"],
        &["predict", "-i", "dv.jsonl", "--model-dir", "model", "-o", "pred.tsv"],
        &["export-bert", "-i", "tr.p.jsonl", "--vocab", "vocab.txt", "-o", "bert"],
        &["run", "--preset", "nation", "--articles", "syn/articles", "--annotations", "syn/train.labels.tsv", "-o", "runs"],
    ];
    fs::write(d.join("vocab.txt"), "[PAD]\n[UNK]\n[CLS]\n[SEP]\nnation\n").unwrap();
    for args in steps {
        let (code, err) = run(args);
        assert_eq!(code, 0, "{args:?}: {err}");
    }
    assert!(fs::read_to_string(d.join("audit.tsv")).unwrap().starts_with("article_id\tbegin\tend\ttag\tsurface\n"));
    assert_eq!(corpus::parse_annotations(d.join("pred.tsv")).unwrap().len(), corpus::read_fragments(d.join("dv.jsonl")).unwrap().len());
    assert!(d.join("runs/nation/manifest.json").exists());
    assert_eq!(run(&["run", "--replay", "runs/nation/manifest.json", "-o", "replay"]).0, 0);
    assert_eq!(fs::read(d.join("runs/nation/predictions.tsv")).unwrap(), fs::read(d.join("replay/predictions.tsv")).unwrap());

    // usage errors
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["train"]).0, 1);
    assert_eq!(run(&["map", "-i", "tr.jsonl", "-o", "x", "--lists", "PEOPLE"]).0, 1);
    assert_eq!(run(&["run", "--preset", "nope", "--articles", "a", "--annotations", "b"]).0, 1);
    assert_eq!(run(&["train", "-i", "tr.p.jsonl", "--model-dir", "m", "--alpha", "-1"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    // data errors
    fs::write(d.join("bad.tsv"), "999\tDoubt\t0\t5\n").unwrap();
    let (code, err) = run(&["ingest", "--articles", "syn/articles", "--annotations", "bad.tsv", "-o", "x.jsonl"]);
    assert_eq!(code, 2);
    assert!(err.contains("999"), "{err}");
    fs::write(d.join("bad2.tsv"), "700001\tNot_A_Label\t0\t5\n").unwrap();
    assert_eq!(run(&["ingest", "--articles", "syn/articles", "--annotations", "bad2.tsv", "-o", "x.jsonl"]).0, 2);
    assert_eq!(run(&["predict", "-i", "dv.jsonl", "--model-dir", "nowhere", "-o", "p.tsv"]).0, 2);
}

#[test]
fn shipped_config_matches_its_preset() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/combined-lists.toml");
    let config = ExperimentConfig::load(path).unwrap();
    config.validate().unwrap();
    let preset = pipeline::preset_config("combined-lists", config.data.clone(), Path::new("runs")).unwrap();
    assert_eq!(config, preset);
}
