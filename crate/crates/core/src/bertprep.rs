//! Transformer input preparation.
//!
//! Text is split on whitespace and punctuation, each word is broken into
//! WordPiece sub-tokens by greedy longest-prefix matching against a fixed
//! vocabulary (`##` marks word-internal pieces), and the sequence is framed as
//! `[CLS] tokens [SEP]` and padded to a fixed length.
//!
//! The exported `examples.jsonl` / `manifest.json` pair is what the
//! fine-tuning script consumes.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{self, LabeledFragment, SpanRecord, TechniqueLabel};
use crate::error::{Error, Result};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";

const CONTINUATION: &str = "##";
const MAX_WORD_CHARS: usize = 100;

pub const DEFAULT_MAX_LEN: usize = 128;
pub const DEFAULT_CHECKPOINT: &str = "bert-base-uncased";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPieceVocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    cls: u32,
    sep: u32,
    pad: u32,
    unk: u32,
    lowercase: bool,
    sha256: String,
}

impl WordPieceVocab {
    /// Parse a `vocab.txt` body: one token per line, id = line number.
    pub fn parse(content: &str) -> Result<Self> {
        let tokens: Vec<String> = content
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
            .collect();
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::format(
                    format!("vocab:{}", i + 1),
                    format!("duplicate token {t:?}"),
                ));
            }
        }
        let special = |name: &str| {
            index.get(name).copied().ok_or_else(|| {
                Error::format("vocab", format!("missing special token {name}"))
            })
        };
        Ok(WordPieceVocab {
            cls: special(CLS)?,
            sep: special(SEP)?,
            pad: special(PAD)?,
            unk: special(UNK)?,
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
            tokens,
            index,
            lowercase: true,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content)
    }

    /// A vocabulary covering `texts`: special tokens, every basic word, and
    /// every character both as a word start and as a `##` continuation.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, lowercase: bool) -> Self {
        let mut words = BTreeSet::new();
        let mut pieces = BTreeSet::new();
        for text in texts {
            for w in basic_tokenize(text, lowercase) {
                for c in w.chars() {
                    pieces.insert(c.to_string());
                    pieces.insert(format!("{CONTINUATION}{c}"));
                }
                words.insert(w);
            }
        }
        let mut content = [PAD, UNK, CLS, SEP].join("\n");
        for t in words.iter().chain(pieces.difference(&words)) {
            content.push('\n');
            content.push_str(t);
        }
        content.push('\n');
        Self::parse(&content)
            .expect("generated vocabulary is well formed")
            .with_lowercase(lowercase)
    }

    /// Whether text is lowercased and accent-stripped before lookup (uncased models).
    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    /// SHA-256 of the vocabulary file contents, hex encoded.
    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    /// Map ids back to token strings.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or(UNK).to_string())
            .collect()
    }
}

fn is_bert_punctuation(c: char) -> bool {
    let cp = c as u32;
    if (33..=47).contains(&cp)
        || (58..=64).contains(&cp)
        || (91..=96).contains(&cp)
        || (123..=126).contains(&cp)
    {
        return true;
    }
    crate::textprep::is_punctuation(c)
}

fn is_control(c: char) -> bool {
    if matches!(c, '\t' | '\n' | '\r') {
        return false;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::Control | GeneralCategory::Format
    )
}

/// Whitespace and punctuation pre-split; each punctuation character is its
/// own word.
pub fn basic_tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut words = Vec::new();
    for chunk in text.split_whitespace() {
        let cleaned: String = if lowercase {
            chunk
                .to_lowercase()
                .nfd()
                .filter(|&c| get_general_category(c) != GeneralCategory::NonspacingMark)
                .collect()
        } else {
            chunk.to_string()
        };
        let mut current = String::new();
        for c in cleaned.chars().filter(|&c| c != '\u{fffd}' && !is_control(c)) {
            if is_bert_punctuation(c) {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
                words.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    words
}

/// Greedy longest-prefix sub-tokens of one word, or `[UNK]`.
fn wordpiece_word(word: &str, vocab: &WordPieceVocab) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return vec![UNK.to_string()];
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found = None;
        while end > start {
            let mut piece: String = chars[start..end].iter().collect();
            if start > 0 {
                piece.insert_str(0, CONTINUATION);
            }
            if vocab.index.contains_key(&piece) {
                found = Some(piece);
                break;
            }
            end -= 1;
        }
        match found {
            Some(p) => pieces.push(p),
            None => return vec![UNK.to_string()],
        }
        start = end;
    }
    pieces
}

pub fn wordpiece_tokenize(text: &str, vocab: &WordPieceVocab) -> Vec<String> {
    basic_tokenize(text, vocab.lowercase)
        .iter()
        .flat_map(|w| wordpiece_word(w, vocab))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedExample {
    pub input_ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
    pub label_id: usize,
}

impl EncodedExample {
    /// Check the framing invariants against `vocab`.
    pub fn validate(&self, vocab: &WordPieceVocab, max_len: usize) -> std::result::Result<(), String> {
        if self.input_ids.len() != max_len || self.attention_mask.len() != max_len {
            return Err(format!(
                "lengths {} / {} differ from max_len {max_len}",
                self.input_ids.len(),
                self.attention_mask.len()
            ));
        }
        if self.input_ids.first() != Some(&vocab.cls_id()) {
            return Err("first id is not [CLS]".into());
        }
        let used = self.attention_mask.iter().take_while(|&&m| m == 1).count();
        if self.attention_mask[used..].iter().any(|&m| m != 0) {
            return Err("attention mask is not ones followed by zeros".into());
        }
        if used < 2 || self.input_ids[used - 1] != vocab.sep_id() {
            return Err("last unmasked id is not [SEP]".into());
        }
        if self.input_ids[..used].iter().filter(|&&i| i == vocab.sep_id()).count() != 1 {
            return Err("[SEP] must occur exactly once".into());
        }
        if self.input_ids[used..].iter().any(|&i| i != vocab.pad_id()) {
            return Err("masked positions must hold [PAD]".into());
        }
        if self.label_id >= TechniqueLabel::ALL.len() {
            return Err(format!("label id {} out of range", self.label_id));
        }
        Ok(())
    }
}

pub fn encode_label(
    text: &str,
    label: TechniqueLabel,
    vocab: &WordPieceVocab,
    max_len: usize,
) -> Result<EncodedExample> {
    if max_len < 3 {
        return Err(Error::Config(format!("max_len must be at least 3, got {max_len}")));
    }
    let tokens = wordpiece_tokenize(text, vocab);
    let mut input_ids = Vec::with_capacity(max_len);
    input_ids.push(vocab.cls_id());
    input_ids.extend(
        tokens
            .iter()
            .take(max_len - 2)
            .map(|t| vocab.id(t).unwrap_or(vocab.unk_id())),
    );
    input_ids.push(vocab.sep_id());
    let used = input_ids.len();
    input_ids.resize(max_len, vocab.pad_id());
    let mut attention_mask = vec![1u8; used];
    attention_mask.resize(max_len, 0);
    Ok(EncodedExample {
        input_ids,
        attention_mask,
        label_id: label.index(),
    })
}

/// Encode one fragment; `label` must be a canonical technique name.
pub fn encode(text: &str, label: &str, vocab: &WordPieceVocab, max_len: usize) -> Result<EncodedExample> {
    encode_label(text, label.parse()?, vocab, max_len)
}

/// Hyperparameters and metadata handed to the fine-tuning script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneManifest {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub max_len: usize,
    pub labels: Vec<String>,
    pub checkpoint: String,
    pub n_examples: usize,
    pub vocab_size: usize,
    pub vocab_sha256: String,
    pub shuffle_seed: Option<u64>,
}

impl FinetuneManifest {
    pub fn new(max_len: usize, vocab: &WordPieceVocab) -> Self {
        FinetuneManifest {
            batch_size: 32,
            learning_rate: 2e-5,
            epochs: 4,
            max_len,
            labels: TechniqueLabel::ALL.iter().map(|l| l.to_string()).collect(),
            checkpoint: DEFAULT_CHECKPOINT.to_string(),
            n_examples: 0,
            vocab_size: vocab.len(),
            vocab_sha256: vocab.sha256().to_string(),
            shuffle_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportOptions {
    pub max_len: usize,
    pub checkpoint: String,
    /// Shuffle example order with this seed; `None` keeps fragment order.
    pub shuffle_seed: Option<u64>,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            max_len: DEFAULT_MAX_LEN,
            checkpoint: DEFAULT_CHECKPOINT.to_string(),
            shuffle_seed: None,
        }
    }
}

pub const EXAMPLES_FILE: &str = "examples.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Span of each example, in example order, as the 4-column annotation TSV.
/// Predictions are written in the same format with the label replaced.
pub const SPANS_FILE: &str = "spans.tsv";

/// Write `examples.jsonl`, `spans.tsv` and `manifest.json` into `out_dir`.
pub fn export_dataset(
    fragments: &[LabeledFragment],
    vocab: &WordPieceVocab,
    options: &ExportOptions,
    out_dir: impl AsRef<Path>,
) -> Result<FinetuneManifest> {
    let out_dir = out_dir.as_ref();
    if fragments.is_empty() {
        return Err(Error::Config("no fragments to export".into()));
    }
    let mut order: Vec<usize> = (0..fragments.len()).collect();
    if let Some(seed) = options.shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut body = Vec::new();
    let mut spans = Vec::with_capacity(fragments.len());
    for &i in &order {
        let f = &fragments[i];
        spans.push(SpanRecord::from(f));
        let ex = encode_label(&f.text, f.label, vocab, options.max_len)?;
        serde_json::to_writer(&mut body, &ex).expect("serializing to memory");
        body.push(b'\n');
    }

    let mut manifest = FinetuneManifest::new(options.max_len, vocab);
    manifest.checkpoint = options.checkpoint.clone();
    manifest.n_examples = fragments.len();
    manifest.shuffle_seed = options.shuffle_seed;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let examples_path = out_dir.join(EXAMPLES_FILE);
    fs::File::create(&examples_path)
        .and_then(|mut f| f.write_all(&body))
        .map_err(|e| Error::io(&examples_path, e))?;
    let spans_path = out_dir.join(SPANS_FILE);
    fs::write(&spans_path, corpus::format_annotations(&spans)).map_err(|e| Error::io(&spans_path, e))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}
