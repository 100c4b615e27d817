//! Dictionary-based entity mapping.
//!
//! Phrases from the country, religion, politics and slogan lists are located
//! with a character trie and replaced by their list's tag. At every word
//! boundary the longest matching phrase wins; scanning resumes after it, so
//! replacements never overlap and inserted tags are never rescanned.
//!
//! Case policy: phrases of four or more characters match case-insensitively,
//! except all-uppercase acronyms (`UK`, `USSR`), which, like every shorter
//! phrase, must match exactly.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rewrite::{rewrite_chars, Replacement, RewriteResult};
use crate::textprep::DEFAULT_PROTECTED_TAGS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityTag {
    Nation,
    Religion,
    Politics,
    Slogans,
}

impl EntityTag {
    pub const ALL: [EntityTag; 4] = [
        EntityTag::Nation,
        EntityTag::Religion,
        EntityTag::Politics,
        EntityTag::Slogans,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityTag::Nation => "NATION",
            EntityTag::Religion => "RELIGION",
            EntityTag::Politics => "POLITICS",
            EntityTag::Slogans => "SLOGANS",
        }
    }

    /// Tie-break order when two lists match the same span.
    pub const DEFAULT_PRIORITY: [EntityTag; 4] = [
        EntityTag::Slogans,
        EntityTag::Nation,
        EntityTag::Religion,
        EntityTag::Politics,
    ];
}

impl fmt::Display for EntityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntityTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown gazetteer tag {s:?}")))
    }
}

/// The four lists bundled with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinList {
    Countries,
    Religion,
    Politics,
    Slogans,
}

impl BuiltinList {
    pub const ALL: [BuiltinList; 4] = [
        BuiltinList::Countries,
        BuiltinList::Religion,
        BuiltinList::Politics,
        BuiltinList::Slogans,
    ];

    pub fn tag(self) -> EntityTag {
        match self {
            BuiltinList::Countries => EntityTag::Nation,
            BuiltinList::Religion => EntityTag::Religion,
            BuiltinList::Politics => EntityTag::Politics,
            BuiltinList::Slogans => EntityTag::Slogans,
        }
    }

    pub fn for_tag(tag: EntityTag) -> Self {
        match tag {
            EntityTag::Nation => BuiltinList::Countries,
            EntityTag::Religion => BuiltinList::Religion,
            EntityTag::Politics => BuiltinList::Politics,
            EntityTag::Slogans => BuiltinList::Slogans,
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            BuiltinList::Countries => "countries.txt",
            BuiltinList::Religion => "religion.txt",
            BuiltinList::Politics => "politics.txt",
            BuiltinList::Slogans => "slogans.txt",
        }
    }

    pub fn contents(self) -> &'static str {
        match self {
            BuiltinList::Countries => include_str!("../data/lists/countries.txt"),
            BuiltinList::Religion => include_str!("../data/lists/religion.txt"),
            BuiltinList::Politics => include_str!("../data/lists/politics.txt"),
            BuiltinList::Slogans => include_str!("../data/lists/slogans.txt"),
        }
    }

    pub fn entries(self) -> Vec<GazetteerEntry> {
        parse_list(self.contents(), self.tag(), Path::new(self.file_name()))
            .expect("bundled lists are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub phrase: String,
    pub tag: EntityTag,
}

/// Parse list content: one phrase per line, `#` comments and blank lines skipped.
pub fn parse_list(content: &str, tag: EntityTag, source: &Path) -> Result<Vec<GazetteerEntry>> {
    let entries: Vec<GazetteerEntry> = content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| GazetteerEntry {
            phrase: l.to_string(),
            tag,
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyList {
            path: source.to_path_buf(),
        });
    }
    Ok(entries)
}

pub fn load_list(path: impl AsRef<Path>, tag: EntityTag) -> Result<Vec<GazetteerEntry>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_list(&content, tag, path)
}

/// Letters and digits are word characters; so is a hyphen between two of them.
pub(crate) fn word_flags(chars: &[char]) -> Vec<bool> {
    (0..chars.len())
        .map(|i| {
            let c = chars[i];
            c.is_alphanumeric()
                || (c == '-'
                    && i > 0
                    && i + 1 < chars.len()
                    && chars[i - 1].is_alphanumeric()
                    && chars[i + 1].is_alphanumeric())
        })
        .collect()
}

/// Whether char index `pos` (in `0..=len`) sits on a word boundary.
pub(crate) fn is_boundary(word: &[bool], pos: usize) -> bool {
    pos == 0 || pos == word.len() || !(word[pos - 1] && word[pos])
}

fn fold(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

fn is_all_uppercase(phrase: &str) -> bool {
    phrase.chars().any(char::is_alphabetic) && !phrase.chars().any(char::is_lowercase)
}

/// Whether a phrase matches text case-insensitively under the case policy.
pub fn matches_case_insensitively(phrase: &str) -> bool {
    phrase.chars().count() >= 4 && !is_all_uppercase(phrase)
}

#[derive(Debug, Clone)]
struct Pattern {
    chars: Vec<char>,
    tag: EntityTag,
    case_insensitive: bool,
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<char, usize>,
    /// Patterns ending at this node.
    terminals: Vec<usize>,
}

/// An immutable set of tagged phrases with a leftmost-longest matcher.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    patterns: Vec<Pattern>,
    nodes: Vec<Node>,
    rank: HashMap<EntityTag, usize>,
}

/// A phrase occurrence in char coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GazetteerMatch {
    pub begin: usize,
    pub end: usize,
    pub tag: EntityTag,
    /// Index into [`Gazetteer::entries`].
    pub entry: usize,
}

impl Gazetteer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self> {
        Self::with_priority(entries, &EntityTag::DEFAULT_PRIORITY)
    }

    /// Build with an explicit tie-break order; tags missing from `priority`
    /// rank after those listed.
    pub fn with_priority(entries: Vec<GazetteerEntry>, priority: &[EntityTag]) -> Result<Self> {
        let mut rank: HashMap<EntityTag, usize> = HashMap::new();
        for t in priority.iter().chain(EntityTag::ALL.iter()) {
            let next = rank.len();
            rank.entry(*t).or_insert(next);
        }

        let mut gaz = Gazetteer {
            entries: Vec::with_capacity(entries.len()),
            patterns: Vec::with_capacity(entries.len()),
            nodes: vec![Node::default()],
            rank,
        };
        for entry in entries {
            gaz.insert(entry)?;
        }
        Ok(gaz)
    }

    /// All four bundled lists.
    pub fn builtin() -> Self {
        Self::from_builtin(&BuiltinList::ALL)
    }

    pub fn from_builtin(lists: &[BuiltinList]) -> Self {
        let entries = lists.iter().flat_map(|l| l.entries()).collect();
        Self::new(entries).expect("bundled lists contain no reserved phrases")
    }

    fn insert(&mut self, entry: GazetteerEntry) -> Result<()> {
        let chars: Vec<char> = entry.phrase.chars().collect();
        if chars.is_empty() {
            return Err(Error::Config("empty gazetteer phrase".into()));
        }
        check_reserved(&entry.phrase)?;

        let id = self.patterns.len();
        let mut node = 0usize;
        for &c in &chars {
            let key = fold(c);
            node = match self.nodes[node].children.get(&key) {
                Some(&n) => n,
                None => {
                    self.nodes.push(Node::default());
                    let n = self.nodes.len() - 1;
                    self.nodes[node].children.insert(key, n);
                    n
                }
            };
        }
        self.nodes[node].terminals.push(id);
        self.patterns.push(Pattern {
            case_insensitive: matches_case_insensitively(&entry.phrase),
            chars,
            tag: entry.tag,
        });
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Best match starting at `start`, if any.
    fn longest_at(&self, chars: &[char], word: &[bool], start: usize) -> Option<GazetteerMatch> {
        let mut node = 0usize;
        let mut best: Option<(usize, usize, usize)> = None; // (len, rank, pattern)
        for (depth, &c) in chars[start..].iter().enumerate() {
            node = match self.nodes[node].children.get(&fold(c)) {
                Some(&n) => n,
                None => break,
            };
            let end = start + depth + 1;
            if self.nodes[node].terminals.is_empty() || !is_boundary(word, end) {
                continue;
            }
            for &pid in &self.nodes[node].terminals {
                let pat = &self.patterns[pid];
                if !pat.case_insensitive && pat.chars[..] != chars[start..end] {
                    continue;
                }
                let key = (end - start, self.rank[&pat.tag], pid);
                let better = match best {
                    None => true,
                    Some((len, rank, p)) => {
                        key.0 > len || (key.0 == len && (key.1, key.2) < (rank, p))
                    }
                };
                if better {
                    best = Some(key);
                }
            }
        }
        best.map(|(len, _, pid)| GazetteerMatch {
            begin: start,
            end: start + len,
            tag: self.patterns[pid].tag,
            entry: pid,
        })
    }

    /// Leftmost-longest, non-overlapping matches in `text` (char offsets).
    pub fn find_matches(&self, text: &str) -> Vec<GazetteerMatch> {
        let chars: Vec<char> = text.chars().collect();
        self.find_matches_in(&chars)
    }

    fn find_matches_in(&self, chars: &[char]) -> Vec<GazetteerMatch> {
        let word = word_flags(chars);
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if is_boundary(&word, i) {
                if let Some(m) = self.longest_at(chars, &word, i) {
                    i = m.end;
                    out.push(m);
                    continue;
                }
            }
            i += 1;
        }
        out
    }

    /// Replace every matched phrase with its tag.
    pub fn map_entities(&self, text: &str) -> RewriteResult {
        let chars: Vec<char> = text.chars().collect();
        let replacements = self
            .find_matches_in(&chars)
            .into_iter()
            .map(|m| Replacement {
                begin: m.begin,
                end: m.end,
                tag: m.tag.as_str().to_string(),
            })
            .collect();
        rewrite_chars(&chars, replacements)
    }
}

/// Reject phrases containing a tag word, so mapped text never rematches.
fn check_reserved(phrase: &str) -> Result<()> {
    let chars: Vec<char> = phrase.chars().collect();
    let word = word_flags(&chars);
    let mut i = 0;
    while i < chars.len() {
        if !word[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && word[i] {
            i += 1;
        }
        let token: String = chars[start..i].iter().collect();
        if let Some(tag) = DEFAULT_PROTECTED_TAGS
            .iter()
            .find(|t| t.eq_ignore_ascii_case(&token))
        {
            return Err(Error::ReservedPhrase {
                phrase: phrase.to_string(),
                tag: tag.to_string(),
            });
        }
    }
    Ok(())
}
