//! Run an experiment from a TOML config, then replay its manifest and check
//! the predictions are byte-identical.
//!
//!     cargo run --example experiment_config

use std::fs;

use propmap::pipeline::{self, ExperimentConfig};
use propmap::synth;

fn main() -> propmap::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let c = synth::make_synthetic_corpus(11, 24, dir.path().join("data"))?;
    let toml = format!(
        r#"name = "lists then entities"
seed = 11
output_dir = "{out}"

[data]
articles_dir = "{articles}"
annotations = "{train}"

[pipeline]
stages = ["map", "ner", "preprocess"]
lists = ["NATION", "SLOGANS"]
entity_types = ["PERSON"]

[train]
algorithm = "ridge"
ridge_alpha = 1.0
"#,
        out = dir.path().join("run").display(),
        articles = c.articles_dir.display(),
        train = c.train_annotations.display(),
    );
    let config_path = dir.path().join("experiment.toml");
    fs::write(&config_path, &toml).expect("write config");

    let config = ExperimentConfig::load(&config_path)?;
    let first = pipeline::run_experiment(&config)?;
    print!("{}", fs::read_to_string(first.output_dir.join(pipeline::REPORT_TEXT_FILE)).unwrap());

    let replay = ExperimentConfig::load(first.output_dir.join(pipeline::REPLAY_FILE))?;
    let second = pipeline::run_experiment(&ExperimentConfig {
        output_dir: dir.path().join("replay"),
        ..replay
    })?;
    let a = fs::read(first.output_dir.join(pipeline::PREDICTIONS_FILE)).unwrap();
    let b = fs::read(second.output_dir.join(pipeline::PREDICTIONS_FILE)).unwrap();
    println!("\nreplay predictions identical: {}", a == b);
    println!("list checksums: {:?}", first.manifest.list_checksums);
    Ok(())
}
