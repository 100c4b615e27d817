//! Train the three linear classifiers on a synthetic corpus and compare.
//!
//!     cargo run --release --example linear_training

use std::time::Instant;

use propmap::corpus::{self, TechniqueLabel};
use propmap::eval;
use propmap::features::{self, NgramRange};
use propmap::linmod::{self, Algorithm, TrainConfig};
use propmap::synth;
use propmap::textprep::{self, PreprocessConfig};

fn main() -> propmap::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let c = synth::make_synthetic_corpus(5, 45, dir.path())?;
    let load = |tsv| -> propmap::Result<(Vec<Vec<String>>, Vec<TechniqueLabel>)> {
        let frags = corpus::load_corpus(&c.articles_dir, tsv)?;
        let prep = PreprocessConfig::default();
        Ok(frags
            .iter()
            .map(|f| (features::analyze(&textprep::preprocess(&f.text, &prep), NgramRange::default()), f.label))
            .unzip())
    };
    let (train_docs, y_train) = load(&c.train_annotations)?;
    let (dev_docs, y_dev) = load(&c.dev_annotations)?;
    let vocab = features::fit_vocab(&train_docs)?;
    let x_train = features::tfidf_transform(&train_docs, &vocab);
    let x_dev = features::tfidf_transform(&dev_docs, &vocab);

    for algorithm in [Algorithm::Ridge, Algorithm::SgdHinge, Algorithm::LinearSvc] {
        let config = TrainConfig {
            algorithm,
            seed: 5,
            ..Default::default()
        };
        let start = Instant::now();
        let model = linmod::train(&x_train, &y_train, &config)?;
        let elapsed = start.elapsed();
        let dev = eval::micro_f1(&y_dev, &model.predict(&x_dev)?)?;
        let train = eval::micro_f1(&y_train, &model.predict(&x_train)?)?;
        print!("{algorithm:?}: train F1 {:.2}, dev F1 {:.2}", train.overall_micro_f1 * 100.0, dev.overall_micro_f1 * 100.0);
        if algorithm == Algorithm::Ridge {
            let (t, b) = (&model.weights()[0], model.biases()[0]);
            let targets: Vec<f64> = y_train
                .iter()
                .map(|&y| if y == model.labels()[0] { 1.0 } else { -1.0 })
                .collect();
            let res = linmod::ridge_residual_inf(&x_train, &targets, config.ridge_alpha, true, t, b);
            print!(", normal-equation residual {res:.1e}");
        }
        println!(" ({elapsed:.0?})");
    }
    Ok(())
}
