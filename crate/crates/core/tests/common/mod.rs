//! Independent reference implementations and random generators shared by
//! the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use propmap::corpus::TechniqueLabel;
use propmap::gazetteer::{EntityTag, GazetteerEntry};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- matcher

fn word_char(chars: &[char], i: usize) -> bool {
    let c = chars[i];
    if c.is_alphanumeric() {
        return true;
    }
    c == '-' && i > 0 && i + 1 < chars.len() && chars[i - 1].is_alphanumeric() && chars[i + 1].is_alphanumeric()
}

fn separates(chars: &[char], pos: usize) -> bool {
    pos == 0 || pos == chars.len() || !word_char(chars, pos - 1) || !word_char(chars, pos)
}

fn phrase_matches(chars: &[char], start: usize, phrase: &str) -> bool {
    let p: Vec<char> = phrase.chars().collect();
    if start + p.len() > chars.len() {
        return false;
    }
    let window: String = chars[start..start + p.len()].iter().collect();
    let acronym = phrase.chars().any(char::is_alphabetic) && !phrase.chars().any(char::is_lowercase);
    if p.len() >= 4 && !acronym {
        window.to_lowercase() == phrase.to_lowercase()
    } else {
        window == phrase
    }
}

/// Try every phrase at every position; keep the longest match at the
/// leftmost position, ties broken by list priority, then skip past it.
pub fn brute_force_matches(
    text: &str,
    entries: &[GazetteerEntry],
    priority: &[EntityTag],
) -> Vec<(usize, usize, EntityTag)> {
    let chars: Vec<char> = text.chars().collect();
    let rank = |t: EntityTag| priority.iter().position(|&p| p == t).unwrap();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut best: Option<(usize, EntityTag)> = None;
        for e in entries {
            let len = e.phrase.chars().count();
            if phrase_matches(&chars, i, &e.phrase) && separates(&chars, i) && separates(&chars, i + len) {
                best = match best {
                    Some((l, t)) if l > len || (l == len && rank(t) <= rank(e.tag)) => Some((l, t)),
                    _ => Some((len, e.tag)),
                };
            }
        }
        match best {
            Some((len, tag)) => {
                out.push((i, i + len, tag));
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

/// Splice tags into `text` at the given char spans.
pub fn splice(text: &str, spans: &[(usize, usize, EntityTag)]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for &(b, e, tag) in spans {
        out.extend(&chars[pos..b]);
        out.push_str(tag.as_str());
        pos = e;
    }
    out.extend(&chars[pos..]);
    out
}

const TOY_WORDS: [&str; 14] = [
    "ab", "abc", "Abc", "ABC", "abcd", "Abcd", "US", "us", "étÉ", "Été", "x-ray", "x", "bab", "cab",
];
const TOY_SEPARATORS: [&str; 7] = [" ", " ", " ", ", ", "-", ".", "'"];

/// 50 distinct phrases of 1–3 toy words, spread over the four tags.
pub fn toy_gazetteer<R: Rng>(rng: &mut R) -> Vec<GazetteerEntry> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < 50 {
        let n = rng.gen_range(1..=3);
        let words: Vec<&str> = (0..n).map(|_| *TOY_WORDS.choose(rng).unwrap()).collect();
        let sep = if rng.gen_bool(0.8) { " " } else { "-" };
        let phrase = words.join(sep);
        let tag = *EntityTag::ALL.choose(rng).unwrap();
        // a few phrases appear in two lists to exercise priority
        if seen.insert((phrase.clone(), tag)) {
            out.push(GazetteerEntry { phrase, tag });
        }
    }
    out
}

pub fn toy_text<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(0..25);
    let mut s = String::new();
    for _ in 0..n {
        if rng.gen_bool(0.1) {
            s.push(*['z', 'É', '1', '-', ' ', 'a', 'b'].choose(rng).unwrap());
        }
        s.push_str(TOY_WORDS.choose(rng).unwrap());
        s.push_str(TOY_SEPARATORS.choose(rng).unwrap());
    }
    s
}

/// Mixed-script strings with digits, punctuation, symbols, URLs and tags.
pub fn messy_text<R: Rng>(rng: &mut R) -> String {
    const PIECES: [&str; 24] = [
        "Iran", "America", "the", "Soviet Union", "Make America Great Again", "NATION", "PERSON",
        "URL", "http://x.org/a?b=1", "www.Example.com", "U.S.", "$5", "2020", "½", "«", "—", "!!",
        "é", "İstanbul", "ǅ", "Ⅻ", "x-ray", "Christian", "Build the wall",
    ];
    const SEPS: [&str; 6] = [" ", " ", ", ", "\t", "\n", ""];
    let n = rng.gen_range(0..14);
    let mut s = String::new();
    for _ in 0..n {
        if rng.gen_bool(0.2) {
            s.push(char::from_u32(rng.gen_range(0x20..0x3000)).unwrap_or('?'));
        }
        s.push_str(PIECES.choose(rng).unwrap());
        s.push_str(SEPS.choose(rng).unwrap());
    }
    s
}

// ----------------------------------------------------------------- tf-idf

/// Dense TF-IDF straight from the definition: raw counts × smoothed idf,
/// rows L2-normalized, columns sorted.
pub fn dense_tfidf(docs: &[Vec<String>]) -> (Vec<String>, Vec<Vec<f64>>) {
    let vocab: Vec<String> = docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = docs
        .iter()
        .map(|d| {
            let mut row: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| d.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();
    (vocab, rows)
}

/// Up to 10 documents over up to 20 distinct two-letter-or-longer terms.
pub fn random_corpus<R: Rng>(rng: &mut R) -> Vec<String> {
    let n_terms = rng.gen_range(1..=20);
    let terms: Vec<String> = (0..n_terms)
        .map(|i| {
            let stem = ["ab", "Ab", "x_y", "q9", "zz", "mö"][i % 6];
            format!("{stem}{}", "k".repeat(i / 6))
        })
        .collect();
    let n_docs = rng.gen_range(1..=10);
    let mut docs: Vec<String> = (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(0..12);
            let mut d = String::new();
            for _ in 0..len {
                d.push_str(terms.choose(rng).unwrap());
                d.push_str([" ", ", ", " a ", "-", " 7 "].choose(rng).unwrap());
            }
            d
        })
        .collect();
    // the vocabulary must be non-empty
    docs[0].push_str(&terms[0]);
    docs
}

/// Same tokens as the vectorizer: maximal runs of alphanumerics or `_`
/// of length ≥ 2, case kept.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() || c == '_' {
            cur.push(c);
        } else {
            if cur.chars().count() >= 2 {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

// ------------------------------------------------------------- evaluation

pub fn accuracy(gold: &[TechniqueLabel], pred: &[TechniqueLabel]) -> f64 {
    gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<TechniqueLabel> {
    (0..n).map(|_| TechniqueLabel::ALL[rng.gen_range(0..k)]).collect()
}

// ----------------------------------------------------------------- linear

/// Dense random design with about `density` non-zeros per cell.
pub fn random_dense<R: Rng>(rng: &mut R, n: usize, d: usize, density: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| if rng.gen_bool(density) { rng.gen_range(-2.0..2.0) } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `‖XᵀX w + α w − Xᵀ t‖∞` computed densely.
pub fn dense_ridge_residual(x: &[Vec<f64>], t: &[f64], alpha: f64, w: &[f64]) -> f64 {
    let d = w.len();
    let xw: Vec<f64> = x.iter().map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
    (0..d)
        .map(|j| {
            let xtxw: f64 = x.iter().zip(&xw).map(|(r, v)| r[j] * v).sum();
            let xtt: f64 = x.iter().zip(t).map(|(r, v)| r[j] * v).sum();
            (xtxw + alpha * w[j] - xtt).abs()
        })
        .fold(0.0, f64::max)
}

/// Linearly separable data: each label owns one indicator feature, plus
/// small shared noise features.
pub fn separable<R: Rng>(rng: &mut R, k: usize, per_label: usize, noise: usize) -> (Vec<Vec<f64>>, Vec<TechniqueLabel>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (l, label) in TechniqueLabel::ALL.iter().take(k).enumerate() {
        for _ in 0..per_label {
            let mut row = vec![0.0; k + noise];
            row[l] = rng.gen_range(1.0..2.0);
            for v in &mut row[k..] {
                *v = rng.gen_range(-0.1..0.1);
            }
            x.push(row);
            y.push(*label);
        }
    }
    (x, y)
}

pub fn label_counts(y: &[TechniqueLabel]) -> BTreeMap<TechniqueLabel, usize> {
    let mut m = BTreeMap::new();
    for l in y {
        *m.entry(*l).or_default() += 1;
    }
    m
}
