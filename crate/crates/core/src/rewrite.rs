//! Span replacement with an offset map back to the original coordinates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// A replaced character span of the original text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub begin: usize,
    pub end: usize,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteResult {
    pub text: String,
    /// `offset_map[i]` is the rewritten char index for original char index
    /// `i`, for every `i` in `0..=original_len`. Indices inside a replaced
    /// span map to the start of its tag.
    pub offset_map: Vec<usize>,
    /// Sorted, pairwise disjoint.
    pub replacements: Vec<Replacement>,
}

impl RewriteResult {
    pub fn identity(text: &str) -> Self {
        let n = text.chars().count();
        RewriteResult {
            text: text.to_string(),
            offset_map: (0..=n).collect(),
            replacements: Vec::new(),
        }
    }

    /// Map an original `[begin, end)` char span into rewritten coordinates.
    pub fn map_span(&self, begin: usize, end: usize) -> Option<(usize, usize)> {
        Some((*self.offset_map.get(begin)?, *self.offset_map.get(end)?))
    }

    /// Replacement audit as a 3-column TSV (`begin`, `end`, `tag`).
    pub fn audit_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.replacements {
            let _ = writeln!(out, "{}\t{}\t{}", r.begin, r.end, r.tag);
        }
        out
    }
}

/// Build the rewritten text for sorted, disjoint `replacements` over `chars`.
///
/// Panics if the replacements are unsorted, overlapping or out of range.
pub(crate) fn rewrite_chars(chars: &[char], replacements: Vec<Replacement>) -> RewriteResult {
    let mut text = String::with_capacity(chars.len());
    let mut offset_map = Vec::with_capacity(chars.len() + 1);
    let mut out_len = 0usize;
    let mut pos = 0usize;
    for r in &replacements {
        assert!(
            pos <= r.begin && r.begin < r.end && r.end <= chars.len(),
            "replacements must be sorted, disjoint and in range"
        );
        for &c in &chars[pos..r.begin] {
            offset_map.push(out_len);
            text.push(c);
            out_len += 1;
        }
        offset_map.extend(std::iter::repeat_n(out_len, r.end - r.begin));
        text.push_str(&r.tag);
        out_len += r.tag.chars().count();
        pos = r.end;
    }
    for &c in &chars[pos..] {
        offset_map.push(out_len);
        text.push(c);
        out_len += 1;
    }
    offset_map.push(out_len);
    RewriteResult {
        text,
        offset_map,
        replacements,
    }
}

/// Re-apply `replacements` to `original`; reproduces [`RewriteResult::text`].
pub fn apply_replacements(original: &str, replacements: &[Replacement]) -> String {
    let chars: Vec<char> = original.chars().collect();
    rewrite_chars(&chars, replacements.to_vec()).text
}

/// Choose a leftmost-longest, non-overlapping subset of candidate spans.
/// Candidates starting at the same position prefer the longer span, then the
/// earlier candidate.
pub(crate) fn select_leftmost_longest(mut candidates: Vec<Replacement>) -> Vec<Replacement> {
    // stable sort keeps input order among equal (begin, len)
    candidates.sort_by(|a, b| a.begin.cmp(&b.begin).then((b.end - b.begin).cmp(&(a.end - a.begin))));
    let mut chosen: Vec<Replacement> = Vec::new();
    let mut frontier = 0usize;
    for c in candidates {
        if c.begin >= frontier {
            frontier = c.end;
            chosen.push(c);
        }
    }
    chosen
}
