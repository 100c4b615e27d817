//! Synthetic span-annotated corpus for ablations without the official data.
//!
//! Each label owns a few pseudo-word keywords. Labels are paired (0–1, 2–3,
//! ...) and each pair also shares a set of ambiguous keywords. Every fragment
//! carries one entity surface form drawn from a bundled gazetteer list, and
//! the list category depends on the label, so paired labels always differ in
//! category. Every eighth fragment of a label uses only the shared keywords;
//! those can be told apart only through the entity category.
//!
//! Surface forms are split between train and dev so that no word token is
//! shared across splits: a classifier sees dev entities only through their
//! tags.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{self, SpanRecord, TechniqueLabel};
use crate::error::{Error, Result};
use crate::gazetteer::{BuiltinList, EntityTag, Gazetteer};

pub const ARTICLES_DIR: &str = "articles";
pub const TRAIN_FILE: &str = "train.labels.tsv";
pub const DEV_FILE: &str = "dev.labels.tsv";

const FRAGMENTS_PER_ARTICLE: usize = 7;
const KEYWORDS_PER_LABEL: usize = 5;
const SHARED_PER_PAIR: usize = 4;
const FILLER_WORDS: usize = 40;

const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub root: PathBuf,
    pub articles_dir: PathBuf,
    pub train_annotations: PathBuf,
    pub dev_annotations: PathBuf,
    pub n_train: usize,
    pub n_dev: usize,
    pub n_ambiguous: usize,
}

/// The entity category attached to fragments of a label.
pub fn category(label: TechniqueLabel) -> EntityTag {
    EntityTag::ALL[label.index() % EntityTag::ALL.len()]
}

/// Lowercase pseudo-words of three CV syllables, none of which is a
/// gazetteer phrase.
fn pseudo_words(n: usize, rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>, gaz: &Gazetteer) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w: String = (0..3)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if gaz.find_matches(&w).is_empty() && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn word_tokens(phrase: &str) -> BTreeSet<String> {
    phrase
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Per-category train and dev surface forms with disjoint word tokens.
fn partition_surface_forms(gaz: &Gazetteer) -> Vec<(Vec<String>, Vec<String>)> {
    let mut train_tokens = BTreeSet::new();
    let mut dev_tokens = BTreeSet::new();
    EntityTag::ALL
        .iter()
        .map(|&tag| {
            let (mut train, mut dev) = (Vec::new(), Vec::new());
            for entry in BuiltinList::for_tag(tag).entries() {
                let phrase = entry.phrase;
                // the whole phrase must map to exactly its own tag
                if gaz.map_entities(&phrase).text != tag.as_str() {
                    continue;
                }
                let toks = word_tokens(&phrase);
                let hits_train = !toks.is_disjoint(&train_tokens);
                let hits_dev = !toks.is_disjoint(&dev_tokens);
                let to_dev = match (hits_train, hits_dev) {
                    (true, true) => continue,
                    (true, false) => false,
                    (false, true) => true,
                    // two to train for every one to dev
                    (false, false) => train.len() >= 2 * (dev.len() + 1),
                };
                if to_dev {
                    dev_tokens.extend(toks);
                    dev.push(phrase);
                } else {
                    train_tokens.extend(toks);
                    train.push(phrase);
                }
            }
            (train, dev)
        })
        .collect()
}

/// Write `articles/article<id>.txt`, `train.labels.tsv` and `dev.labels.tsv`
/// under `out_dir`, with `n_per_label` fragments per label split 2:1.
pub fn make_synthetic_corpus(seed: u64, n_per_label: usize, out_dir: impl AsRef<Path>) -> Result<SyntheticCorpus> {
    let out_dir = out_dir.as_ref();
    if n_per_label < 3 {
        return Err(Error::Config(format!(
            "need at least 3 fragments per label, got {n_per_label}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaz = Gazetteer::builtin();
    let mut taken = BTreeSet::new();
    let keywords: Vec<Vec<String>> = TechniqueLabel::ALL
        .iter()
        .map(|_| pseudo_words(KEYWORDS_PER_LABEL, &mut rng, &mut taken, &gaz))
        .collect();
    let shared: Vec<Vec<String>> = (0..TechniqueLabel::ALL.len().div_ceil(2))
        .map(|_| pseudo_words(SHARED_PER_PAIR, &mut rng, &mut taken, &gaz))
        .collect();
    let filler = pseudo_words(FILLER_WORDS, &mut rng, &mut taken, &gaz);
    let forms = partition_surface_forms(&gaz);

    struct Fragment {
        label: TechniqueLabel,
        text: String,
        dev: bool,
    }
    let n_train_per_label = 2 * n_per_label / 3;
    let mut fragments = Vec::new();
    let mut n_ambiguous = 0;
    for label in TechniqueLabel::ALL {
        let cat = label.index() % EntityTag::ALL.len();
        for i in 0..n_per_label {
            let dev = i >= n_train_per_label;
            let ambiguous = i % 8 == 7;
            n_ambiguous += ambiguous as usize;
            let mut words: Vec<String> = Vec::new();
            let vocab = if ambiguous {
                &shared[label.index() / 2]
            } else {
                &keywords[label.index()]
            };
            for _ in 0..rng.gen_range(2..=3) {
                words.push(vocab.choose(&mut rng).unwrap().clone());
            }
            if !ambiguous && rng.gen_bool(0.5) {
                words.push(shared[label.index() / 2].choose(&mut rng).unwrap().clone());
            }
            for _ in 0..rng.gen_range(3..=5) {
                words.push(filler.choose(&mut rng).unwrap().clone());
            }
            words.shuffle(&mut rng);
            let pool = if dev { &forms[cat].1 } else { &forms[cat].0 };
            let entity = pool.choose(&mut rng).expect("non-empty surface form pool");
            words.insert(rng.gen_range(0..=words.len()), entity.clone());
            fragments.push(Fragment {
                label,
                text: words.join(" "),
                dev,
            });
        }
    }
    fragments.shuffle(&mut rng);

    let articles_dir = out_dir.join(ARTICLES_DIR);
    fs::create_dir_all(&articles_dir).map_err(|e| Error::io(&articles_dir, e))?;
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (a, chunk) in fragments.chunks(FRAGMENTS_PER_ARTICLE).enumerate() {
        let article_id = (700_001 + a).to_string();
        let mut text = String::new();
        let mut chars = 0;
        for f in chunk {
            let lead = format!("{} {}. ", capitalize(filler.choose(&mut rng).unwrap()), filler.choose(&mut rng).unwrap());
            chars += lead.chars().count();
            text.push_str(&lead);
            let begin = chars;
            chars += f.text.chars().count();
            text.push_str(&f.text);
            text.push_str(".\n");
            chars += 2;
            let record = SpanRecord {
                article_id: article_id.clone(),
                label: f.label,
                begin,
                end: chars - 2,
            };
            if f.dev {
                dev.push(record);
            } else {
                train.push(record);
            }
        }
        let path = corpus::article_path(&articles_dir, &article_id);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }

    let train_annotations = out_dir.join(TRAIN_FILE);
    let dev_annotations = out_dir.join(DEV_FILE);
    for (path, records) in [(&train_annotations, &train), (&dev_annotations, &dev)] {
        fs::write(path, corpus::format_annotations(records)).map_err(|e| Error::io(path, e))?;
    }
    Ok(SyntheticCorpus {
        root: out_dir.to_path_buf(),
        articles_dir,
        train_annotations,
        dev_annotations,
        n_train: train.len(),
        n_dev: dev.len(),
        n_ambiguous,
    })
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
