//! Score predictions with micro-averaged F1 and render reports, including
//! the published per-technique test scores.
//!
//!     cargo run --example evaluation_report

use propmap::corpus::TechniqueLabel::*;
use propmap::eval::{self, published, RunMetadata};

fn main() -> propmap::Result<()> {
    let gold = [Doubt, Doubt, Slogans, FlagWaving, LoadedLanguage, LoadedLanguage];
    let pred = [Doubt, Slogans, Slogans, FlagWaving, LoadedLanguage, Repetition];
    let scores = eval::micro_f1(&gold, &pred)?;
    let accuracy = gold.iter().zip(&pred).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64;
    let meta = RunMetadata {
        name: "toy".into(),
        split: "hand-written".into(),
    };
    print!("{}", eval::report(&meta, &scores).text);
    println!("accuracy {:.4} = micro-F1 {:.4}\n", accuracy, scores.overall_micro_f1);

    let mut rows: Vec<(String, f64)> = published::TEST_F1.iter().map(|(l, f)| (l.to_string(), *f)).collect();
    rows.push(("Overall".into(), published::TEST_OVERALL_F1));
    print!("{}", eval::render_f1_table("Published test F1", &rows).text);
    println!();
    let rows: Vec<(String, f64)> = published::BERT_DEV_F1.iter().map(|(n, f)| (n.to_string(), *f)).collect();
    print!("{}", eval::render_f1_table("Published dev F1", &rows).text);
    Ok(())
}
