//! Fit a TF-IDF vocabulary and print the sparse document vectors.
//!
//!     cargo run --example tfidf_features

use propmap::features::{self, NgramRange};

fn main() -> propmap::Result<()> {
    let corpus = [
        "the NATION must be great again",
        "they hate the NATION and its PERSON",
        "a great leader never lies",
    ];
    for ngrams in [NgramRange { min: 1, max: 1 }, NgramRange { min: 1, max: 2 }] {
        let docs: Vec<Vec<String>> = corpus.iter().map(|d| features::analyze(d, ngrams)).collect();
        let vocab = features::fit_vocab(&docs)?;
        let x = features::tfidf_transform(&docs, &vocab);
        println!("n-grams {}..={}: {} terms, {} non-zeros", ngrams.min, ngrams.max, vocab.len(), x.nnz());
        for (i, row) in x.rows().enumerate() {
            let cells: Vec<String> = row
                .indices
                .iter()
                .zip(row.values)
                .map(|(&j, v)| format!("{}={v:.3}", vocab.terms()[j]))
                .collect();
            println!("  doc {i}: {}", cells.join(" "));
        }
    }
    Ok(())
}
