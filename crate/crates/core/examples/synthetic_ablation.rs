//! Generate a synthetic corpus and run every ridge-baseline preset on it,
//! printing a dev-set F1 table next to the published scores.
//!
//!     cargo run --release --example synthetic_ablation -- [seed] [n_per_label]

use std::time::Instant;

use propmap::eval::{self, published};
use propmap::pipeline::{self, DataConfig, ResultsTable};
use propmap::synth;

fn main() -> propmap::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let n: usize = args.next().map_or(60, |s| s.parse().expect("n_per_label"));

    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = synth::make_synthetic_corpus(seed, n, dir.path())?;
    println!(
        "synthetic corpus: {} train, {} dev, {} ambiguous fragments",
        corpus.n_train, corpus.n_dev, corpus.n_ambiguous
    );
    let data = DataConfig {
        articles_dir: corpus.articles_dir.clone(),
        annotations: corpus.train_annotations.clone(),
        dev_annotations: Some(corpus.dev_annotations.clone()),
        ..Default::default()
    };

    let mut rows = Vec::new();
    for preset in pipeline::PRESETS.iter().filter(|p| p.tables.contains(&ResultsTable::Baseline)) {
        let start = Instant::now();
        let mut config = pipeline::preset_config(preset.slug, data.clone(), &dir.path().join("runs"))?;
        config.seed = seed;
        let outcome = pipeline::run_experiment(&config)?;
        let f1 = outcome.report.expect("classify run").overall_micro_f1 * 100.0;
        let reported = published::BASELINE_DEV_F1
            .iter()
            .find(|(row, _)| *row == preset.row)
            .map(|(_, f)| *f);
        println!("{:<18} {f1:6.2}  ({:.0?})", preset.row, start.elapsed());
        rows.push((format!("{} (published {:.2})", preset.row, reported.unwrap_or(f64::NAN)), f1));
    }
    print!("\n{}", eval::render_f1_table("Configuration", &rows).text);
    Ok(())
}
