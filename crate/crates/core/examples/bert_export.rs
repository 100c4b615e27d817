//! Encode fragments with a WordPiece vocabulary and write the fine-tuning
//! dataset (`examples.jsonl` + `manifest.json`).
//!
//!     cargo run --example bert_export [-- VOCAB_TXT]

use propmap::bertprep::{self, ExportOptions, WordPieceVocab};
use propmap::corpus::{LabeledFragment, TechniqueLabel};

fn main() -> propmap::Result<()> {
    let texts = [
        ("Make NATION great again", TechniqueLabel::Slogans),
        ("they are lying, unbelievable liars", TechniqueLabel::NameCallingLabeling),
        ("PERSON said the RELIGION threat is everywhere", TechniqueLabel::AppealToFearPrejudice),
    ];
    let vocab = match std::env::args().nth(1) {
        Some(path) => WordPieceVocab::load(path)?,
        None => WordPieceVocab::build(texts.iter().map(|(t, _)| *t), true),
    };
    println!("vocab: {} tokens, sha256 {}", vocab.len(), vocab.sha256());
    for (text, label) in &texts {
        println!("{text:?} -> {:?}", bertprep::wordpiece_tokenize(text, &vocab));
        let ex = bertprep::encode_label(text, *label, &vocab, 16)?;
        println!("  ids {:?}", ex.input_ids);
    }

    let fragments: Vec<LabeledFragment> = texts
        .iter()
        .enumerate()
        .map(|(i, (t, l))| LabeledFragment {
            article_id: (i + 1).to_string(),
            label: *l,
            begin: 0,
            end: t.chars().count(),
            text: t.to_string(),
        })
        .collect();
    let dir = tempfile::tempdir().expect("temp dir");
    let manifest = bertprep::export_dataset(&fragments, &vocab, &ExportOptions::default(), dir.path())?;
    println!("\n{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
    Ok(())
}
