//! Named-entity mapping: replace entity mentions with their type tag.
//!
//! Entity spans come either from an external recognizer, exported as
//! JSON lines (`{"doc_key": "111", "begin": 0, "end": 5, "type": "PERSON"}`),
//! or from [`heuristic_person_tagger`], a capitalization-based fallback.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::{word_flags, Gazetteer};
use crate::rewrite::{rewrite_chars, select_leftmost_longest, Replacement, RewriteResult};

pub const PERSON: &str = "PERSON";

/// Entity types standing in for "persons, nationalities, organisations,
/// countries, cities and locations".
pub const VARIOUS_ENTITY_TYPES: [&str; 6] = ["PERSON", "NORP", "ORG", "GPE", "LOC", "FAC"];

const HONORIFICS: [&str; 5] = ["Mr", "Mrs", "Dr", "President", "Senator"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityAnnotation {
    pub doc_key: String,
    pub begin: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub entity_type: String,
}

pub fn person_types() -> BTreeSet<String> {
    BTreeSet::from([PERSON.to_string()])
}

pub fn various_entity_types() -> BTreeSet<String> {
    VARIOUS_ENTITY_TYPES.iter().map(|s| s.to_string()).collect()
}

/// Parse JSON-lines entity output. Result is sorted by `(doc_key, begin)`.
pub fn parse_entities_str(content: &str, source: &str) -> Result<Vec<EntityAnnotation>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let location = || format!("{source}:{}", i + 1);
        let ann: EntityAnnotation =
            serde_json::from_str(line).map_err(|e| Error::format(location(), e.to_string()))?;
        if ann.begin >= ann.end {
            return Err(Error::format(
                location(),
                format!("entity span [{}, {}) is empty or inverted", ann.begin, ann.end),
            ));
        }
        if ann.entity_type.is_empty() {
            return Err(Error::format(location(), "entity type is empty"));
        }
        out.push(ann);
    }
    out.sort_by(|a, b| (&a.doc_key, a.begin, a.end).cmp(&(&b.doc_key, b.begin, b.end)));
    Ok(out)
}

pub fn ingest_entities(path: impl AsRef<Path>) -> Result<Vec<EntityAnnotation>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_entities_str(&content, &path.display().to_string())
}

/// Replace spans whose type is in `types_to_map` by the type name.
/// Overlapping spans are resolved leftmost-longest.
pub fn apply_person_tags(
    text: &str,
    annotations: &[EntityAnnotation],
    types_to_map: &BTreeSet<String>,
) -> Result<RewriteResult> {
    let chars: Vec<char> = text.chars().collect();
    let mut candidates = Vec::new();
    for a in annotations {
        if a.end > chars.len() || a.begin >= a.end {
            return Err(Error::Span {
                article_id: a.doc_key.clone(),
                begin: a.begin,
                end: a.end,
                len: chars.len(),
            });
        }
        if types_to_map.contains(&a.entity_type) {
            candidates.push(Replacement {
                begin: a.begin,
                end: a.end,
                tag: a.entity_type.clone(),
            });
        }
    }
    Ok(rewrite_chars(&chars, select_leftmost_longest(candidates)))
}

/// Shift article-level annotations into the coordinates of the fragment
/// `[begin, end)`, keeping only those wholly inside it.
pub fn project_to_fragment(
    annotations: &[EntityAnnotation],
    doc_key: &str,
    begin: usize,
    end: usize,
) -> Vec<EntityAnnotation> {
    annotations
        .iter()
        .filter(|a| a.doc_key == doc_key && a.begin >= begin && a.end <= end)
        .map(|a| EntityAnnotation {
            doc_key: a.doc_key.clone(),
            begin: a.begin - begin,
            end: a.end - begin,
            entity_type: a.entity_type.clone(),
        })
        .collect()
}

struct Token {
    begin: usize,
    end: usize,
    capitalized: bool,
    honorific: bool,
    sentence_initial: bool,
}

/// Tag maximal runs of capitalized tokens as PERSON.
///
/// A run may start with an honorific (`Mr.`, `President`, ...). Runs made of
/// a single sentence-initial token, runs of honorifics alone, and tokens
/// covered by a gazetteer match are skipped. All-caps tokens such as tags and
/// acronyms never count as capitalized.
pub fn heuristic_person_tagger(
    text: &str,
    doc_key: &str,
    gazetteer: Option<&Gazetteer>,
) -> Vec<EntityAnnotation> {
    let chars: Vec<char> = text.chars().collect();
    let word = word_flags(&chars);
    let excluded: Vec<(usize, usize)> = gazetteer
        .map(|g| {
            g.find_matches(text)
                .into_iter()
                .map(|m| (m.begin, m.end))
                .collect()
        })
        .unwrap_or_default();

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !word[i] {
            i += 1;
            continue;
        }
        let begin = i;
        while i < chars.len() && word[i] {
            i += 1;
        }
        let tok = &chars[begin..i];
        let s: String = tok.iter().collect();
        let in_gazetteer = excluded.iter().any(|&(b, e)| begin < e && b < i);
        let capitalized =
            !in_gazetteer && tok[0].is_uppercase() && tok[1..].iter().any(|c| c.is_lowercase());
        let mut back = begin;
        let mut saw_newline = false;
        while back > 0 && chars[back - 1].is_whitespace() {
            saw_newline |= chars[back - 1] == '\n';
            back -= 1;
        }
        let sentence_initial =
            back == 0 || saw_newline || matches!(chars[back - 1], '.' | '!' | '?');
        tokens.push(Token {
            begin,
            end: i,
            capitalized,
            honorific: HONORIFICS.contains(&s.as_str()),
            sentence_initial,
        });
    }

    let joinable = |prev: &Token, next: &Token| -> bool {
        let gap: String = chars[prev.end..next.begin].iter().collect();
        let spaces = |g: &str| !g.is_empty() && g.chars().all(|c| c == ' ' || c == '\t');
        spaces(&gap) || (prev.honorific && gap.strip_prefix('.').is_some_and(spaces))
    };

    let mut out = Vec::new();
    let mut t = 0;
    while t < tokens.len() {
        if !tokens[t].capitalized {
            t += 1;
            continue;
        }
        let start = t;
        while t + 1 < tokens.len() && tokens[t + 1].capitalized && joinable(&tokens[t], &tokens[t + 1])
        {
            t += 1;
        }
        let run = &tokens[start..=t];
        t += 1;
        if run.len() == 1 && run[0].sentence_initial {
            continue;
        }
        if run.iter().all(|tok| tok.honorific) {
            continue;
        }
        out.push(EntityAnnotation {
            doc_key: doc_key.to_string(),
            begin: run[0].begin,
            end: run[run.len() - 1].end,
            entity_type: PERSON.to_string(),
        });
    }
    out
}
