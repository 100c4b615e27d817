//! Bag-of-words TF-IDF features.
//!
//! Tokens are maximal runs of two or more word characters (letters, digits,
//! underscore). No case folding happens here. Weights use the smoothed idf
//! `ln((1 + n) / (1 + df)) + 1` and every row is scaled to unit L2 norm.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !is_word_char(c))
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_string)
        .collect()
}

/// Word n-gram settings; `(1, 1)` is plain unigrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl Default for NgramRange {
    fn default() -> Self {
        NgramRange { min: 1, max: 1 }
    }
}

impl NgramRange {
    pub fn validate(&self) -> Result<()> {
        if self.min == 0 || self.min > self.max {
            return Err(Error::Config(format!(
                "invalid n-gram range ({}, {})",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Tokenize and expand to space-joined n-grams.
pub fn analyze(text: &str, ngrams: NgramRange) -> Vec<String> {
    let tokens = tokenize(text);
    if ngrams == NgramRange::default() {
        return tokens;
    }
    let mut out = Vec::new();
    for n in ngrams.min..=ngrams.max {
        for w in tokens.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequencies: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    fn from_counts(df: BTreeMap<String, usize>, n_docs: usize) -> Result<Self> {
        if df.is_empty() || n_docs == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let (terms, document_frequencies): (Vec<String>, Vec<usize>) = df.into_iter().unzip();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms,
            index,
            document_frequencies,
            n_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.get(term).map(|i| self.document_frequencies[i])
    }

    pub fn idf(&self, column: usize) -> f64 {
        let n = self.n_docs as f64;
        let df = self.document_frequencies[column] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    /// `n_docs` header line followed by `term<TAB>df` rows in column order.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("n_docs\t{}\n", self.n_docs);
        for (t, df) in self.terms.iter().zip(&self.document_frequencies) {
            let _ = writeln!(out, "{t}\t{df}");
        }
        out
    }

    pub fn from_tsv(content: &str) -> Result<Self> {
        let mut lines = content.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        let n_docs = header
            .strip_prefix("n_docs\t")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| Error::format("vocabulary:1", "expected `n_docs<TAB><count>` header"))?;
        let mut df = BTreeMap::new();
        for (i, line) in lines {
            let (term, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::format(format!("vocabulary:{}", i + 1), "expected term<TAB>df"))?;
            let count: usize = count
                .parse()
                .map_err(|e| Error::format(format!("vocabulary:{}", i + 1), format!("df: {e}")))?;
            if count == 0 || count > n_docs {
                return Err(Error::format(
                    format!("vocabulary:{}", i + 1),
                    format!("df {count} outside 1..={n_docs}"),
                ));
            }
            df.insert(term.to_string(), count);
        }
        Self::from_counts(df, n_docs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&content)
    }
}

/// Fit a vocabulary over tokenized documents. Columns are in lexicographic term order.
pub fn fit_vocab<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<Vocabulary> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.iter().map(AsRef::as_ref).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    Vocabulary::from_counts(df, docs.len())
}

/// TF-IDF row for one document; out-of-vocabulary tokens are ignored.
pub fn tfidf_vector<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for t in doc {
        if let Some(i) = vocab.get(t.as_ref()) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let mut v = SparseVector::from_pairs(
        vocab.len(),
        counts
            .into_iter()
            .map(|(i, tf)| (i, tf * vocab.idf(i)))
            .collect(),
    );
    let norm = v.norm();
    if norm > 0.0 {
        for x in &mut v.values {
            *x /= norm;
        }
    }
    v
}

pub fn tfidf_transform<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> SparseMatrix {
    SparseMatrix::from_rows(vocab.len(), docs.iter().map(|d| tfidf_vector(d, vocab)))
        .expect("rows share the vocabulary dimension")
}
