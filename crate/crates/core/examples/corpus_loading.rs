//! Load span-annotated articles and print the labeled fragments.
//!
//!     cargo run --example corpus_loading [-- ARTICLES_DIR ANNOTATIONS_TSV]
//!
//! Without arguments a two-article corpus is written to a temp directory.
//! Offsets count Unicode scalar values, not bytes.

use std::fs;

use propmap::corpus;

fn main() -> propmap::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = tempfile::tempdir().expect("temp dir");
    let (articles, annotations) = if let [a, b] = args.as_slice() {
        (a.into(), b.into())
    } else {
        let articles = dir.path().join("articles");
        fs::create_dir_all(&articles).expect("create articles dir");
        fs::write(articles.join("article111.txt"), "Café très chaud. They will destroy our nation!\n").unwrap();
        fs::write(articles.join("article222.txt"), "Make America Great Again, he said.\n").unwrap();
        let tsv = dir.path().join("labels.tsv");
        fs::write(
            &tsv,
            "111\tLoaded_Language\t5\t15\n111\tAppeal_to_fear-prejudice\t17\t46\n\
             222\tSlogans\t0\t24\n222\tSlogans\t0\t24\n",
        )
        .unwrap();
        (articles, tsv)
    };

    let records = corpus::parse_annotations(&annotations)?;
    let deduped = corpus::dedup_annotations(records.clone());
    println!("{} annotation rows, {} after dedup", records.len(), deduped.len());
    let fragments = corpus::load_corpus(&articles, &annotations)?;
    for f in fragments.iter().take(20) {
        println!("{:>8} [{:>4},{:>4}) {:<28} {:?}", f.article_id, f.begin, f.end, f.label.as_str(), f.text);
    }
    Ok(())
}
