//! Shallow text normalization: URL replacement, removal of numbers,
//! punctuation and symbols, and lowercasing. Stopwords are kept.
//!
//! Entity tags inserted by the mapping stages (`NATION`, `PERSON`, ...) are
//! protected: a whitespace-delimited token equal to a protected tag is left
//! untouched by every stage. Protection is re-evaluated before each stage, so
//! `NATION,` loses its comma in the punctuation stage and is then protected
//! from lowercasing.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

/// Tags that survive preprocessing by default.
pub const DEFAULT_PROTECTED_TAGS: [&str; 6] =
    ["NATION", "RELIGION", "POLITICS", "SLOGANS", "PERSON", "URL"];

pub const URL_TOKEN: &str = "URL";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub remove_numbers: bool,
    pub remove_punctuation: bool,
    pub remove_symbols: bool,
    pub lowercase: bool,
    pub replace_urls: bool,
    pub protected_tags: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            remove_numbers: true,
            remove_punctuation: true,
            remove_symbols: true,
            lowercase: true,
            replace_urls: true,
            protected_tags: DEFAULT_PROTECTED_TAGS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl PreprocessConfig {
    pub fn protect(mut self, tags: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.protected_tags.extend(tags.into_iter().map(Into::into));
        self
    }
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:\b[A-Za-z][A-Za-z0-9+.\-]*://|\b(?i:www)\.)\S+").expect("valid URL regex")
    })
}

/// Replace every URL-like token (`scheme://...` or `www....`) with `URL`.
pub fn replace_urls(text: &str) -> String {
    url_regex().replace_all(text, URL_TOKEN).into_owned()
}

pub fn is_number(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

pub fn is_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        MathSymbol | CurrencySymbol | ModifierSymbol | OtherSymbol
    )
}

/// Apply `f` to each whitespace-delimited token that is not protected,
/// leaving whitespace and protected tokens as they are.
fn map_unprotected(
    text: &str,
    protected: &BTreeSet<String>,
    mut f: impl FnMut(&str, &mut String),
) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        let ws_len = rest
            .find(|c: char| !c.is_whitespace())
            .unwrap_or(rest.len());
        out.push_str(&rest[..ws_len]);
        rest = &rest[ws_len..];
        let tok_len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let token = &rest[..tok_len];
        if protected.contains(token) {
            out.push_str(token);
        } else {
            f(token, &mut out);
        }
        rest = &rest[tok_len..];
    }
    out
}

fn blank_chars(text: &str, protected: &BTreeSet<String>, pred: fn(char) -> bool) -> String {
    map_unprotected(text, protected, |token, out| {
        out.extend(token.chars().map(|c| if pred(c) { ' ' } else { c }))
    })
}

pub fn preprocess(text: &str, config: &PreprocessConfig) -> String {
    let protected = &config.protected_tags;
    let mut text = if config.replace_urls {
        replace_urls(text)
    } else {
        text.to_string()
    };
    if config.remove_numbers {
        text = blank_chars(&text, protected, is_number);
    }
    if config.remove_punctuation {
        text = blank_chars(&text, protected, is_punctuation);
    }
    if config.remove_symbols {
        text = blank_chars(&text, protected, is_symbol);
    }
    if config.lowercase {
        text = map_unprotected(&text, protected, |token, out| {
            out.push_str(&token.to_lowercase())
        });
    }
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
