//! Article and span-annotation ingestion.
//!
//! Articles are UTF-8 files named `article<id>.txt`. Annotations are a
//! headerless 4-column TSV (`article_id`, `label`, `begin`, `end`) where the
//! offsets are character indices into the article text. The same layout is
//! used for prediction output, with the predicted label in column 2.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 14 technique classes, in the order the task's score tables list them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TechniqueLabel {
    LoadedLanguage,
    NameCallingLabeling,
    Repetition,
    Doubt,
    ExaggerationMinimisation,
    AppealToFearPrejudice,
    FlagWaving,
    CausalOversimplification,
    AppealToAuthority,
    Slogans,
    BlackAndWhiteFallacy,
    WhataboutismStrawMen,
    ThoughtTerminatingCliches,
    BandwagonReductioAdHitlerum,
}

impl TechniqueLabel {
    pub const ALL: [TechniqueLabel; 14] = [
        TechniqueLabel::LoadedLanguage,
        TechniqueLabel::NameCallingLabeling,
        TechniqueLabel::Repetition,
        TechniqueLabel::Doubt,
        TechniqueLabel::ExaggerationMinimisation,
        TechniqueLabel::AppealToFearPrejudice,
        TechniqueLabel::FlagWaving,
        TechniqueLabel::CausalOversimplification,
        TechniqueLabel::AppealToAuthority,
        TechniqueLabel::Slogans,
        TechniqueLabel::BlackAndWhiteFallacy,
        TechniqueLabel::WhataboutismStrawMen,
        TechniqueLabel::ThoughtTerminatingCliches,
        TechniqueLabel::BandwagonReductioAdHitlerum,
    ];

    /// Canonical spelling used in the task's data files.
    pub fn as_str(self) -> &'static str {
        match self {
            TechniqueLabel::LoadedLanguage => "Loaded_Language",
            TechniqueLabel::NameCallingLabeling => "Name_Calling,Labeling",
            TechniqueLabel::Repetition => "Repetition",
            TechniqueLabel::Doubt => "Doubt",
            TechniqueLabel::ExaggerationMinimisation => "Exaggeration,Minimisation",
            TechniqueLabel::AppealToFearPrejudice => "Appeal_to_fear-prejudice",
            TechniqueLabel::FlagWaving => "Flag-Waving",
            TechniqueLabel::CausalOversimplification => "Causal_Oversimplification",
            TechniqueLabel::AppealToAuthority => "Appeal_to_Authority",
            TechniqueLabel::Slogans => "Slogans",
            TechniqueLabel::BlackAndWhiteFallacy => "Black-and-White_Fallacy",
            TechniqueLabel::WhataboutismStrawMen => "Whataboutism,Straw_Men",
            TechniqueLabel::ThoughtTerminatingCliches => "Thought-terminating_Cliches",
            TechniqueLabel::BandwagonReductioAdHitlerum => "Bandwagon,Reductio_ad_hitlerum",
        }
    }

    /// Position in [`TechniqueLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for TechniqueLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TechniqueLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Label(s.to_string()))
    }
}

impl TryFrom<String> for TechniqueLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TechniqueLabel> for String {
    fn from(l: TechniqueLabel) -> String {
        l.as_str().to_string()
    }
}

/// A news article. Offsets into it are character (scalar value) indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub id: String,
    pub text: String,
    /// Byte offset of every char index, plus the total byte length at the end.
    char_starts: Vec<usize>,
}

impl Article {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let mut char_starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        char_starts.push(text.len());
        Article {
            id: id.into(),
            text,
            char_starts,
        }
    }

    /// Length in characters.
    pub fn char_len(&self) -> usize {
        self.char_starts.len() - 1
    }

    /// The text between two character offsets, if in range.
    pub fn slice_chars(&self, begin: usize, end: usize) -> Option<&str> {
        if begin > end || end > self.char_len() {
            return None;
        }
        Some(&self.text[self.char_starts[begin]..self.char_starts[end]])
    }
}

/// A propaganda fragment: the unit of classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledFragment {
    pub article_id: String,
    pub label: TechniqueLabel,
    pub begin: usize,
    pub end: usize,
    pub text: String,
}

/// One row of an annotation or prediction TSV.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanRecord {
    pub article_id: String,
    pub label: TechniqueLabel,
    pub begin: usize,
    pub end: usize,
}

impl fmt::Display for SpanRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.article_id, self.label, self.begin, self.end
        )
    }
}

impl From<&LabeledFragment> for SpanRecord {
    fn from(f: &LabeledFragment) -> Self {
        SpanRecord {
            article_id: f.article_id.clone(),
            label: f.label,
            begin: f.begin,
            end: f.end,
        }
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| Error::Encoding {
        path: path.to_path_buf(),
    })
}

/// Extract the id from a file name of the form `article<digits>.txt`.
pub fn article_id_from_filename(name: &str) -> Option<&str> {
    let digits = name.strip_prefix("article")?.strip_suffix(".txt")?;
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        Some(digits)
    } else {
        None
    }
}

pub fn parse_article(path: impl AsRef<Path>) -> Result<Article> {
    let path = path.as_ref();
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let id = article_id_from_filename(name).ok_or_else(|| {
        Error::format(
            path.display().to_string(),
            "expected a file named article<digits>.txt",
        )
    })?;
    let text = read_utf8(path)?;
    Ok(Article::new(id, text))
}

/// Parse annotation TSV content. `source` names the input in error messages.
pub fn parse_annotations_str(content: &str, source: &str) -> Result<Vec<SpanRecord>> {
    let mut records = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let location = || format!("{source}:{lineno}");
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::format(
                location(),
                format!("expected 4 tab-separated columns, found {}", cols.len()),
            ));
        }
        let article_id = cols[0];
        if article_id.is_empty() {
            return Err(Error::format(location(), "empty article id"));
        }
        let label: TechniqueLabel = cols[1].parse()?;
        let offset = |s: &str, what: &str| -> Result<usize> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::format(
                    location(),
                    format!("{what} offset {s:?} is not a non-negative integer"),
                ));
            }
            s.parse::<usize>()
                .map_err(|e| Error::format(location(), format!("{what} offset {s:?}: {e}")))
        };
        let begin = offset(cols[2], "begin")?;
        let end = offset(cols[3], "end")?;
        if begin >= end {
            return Err(Error::Span {
                article_id: article_id.to_string(),
                begin,
                end,
                len: 0,
            });
        }
        records.push(SpanRecord {
            article_id: article_id.to_string(),
            label,
            begin,
            end,
        });
    }
    Ok(records)
}

pub fn parse_annotations(path: impl AsRef<Path>) -> Result<Vec<SpanRecord>> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    parse_annotations_str(&content, &path.display().to_string())
}

/// Serialize records as TSV, one per line, newline-terminated.
pub fn format_annotations<'a>(records: impl IntoIterator<Item = &'a SpanRecord>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Drop repeated identical rows, keeping the first occurrence.
pub fn dedup_annotations(records: Vec<SpanRecord>) -> Vec<SpanRecord> {
    let mut seen = std::collections::HashSet::new();
    records
        .into_iter()
        .filter(|r| seen.insert(r.clone()))
        .collect()
}

pub fn extract_fragment(
    article: &Article,
    begin: usize,
    end: usize,
    label: TechniqueLabel,
) -> Result<LabeledFragment> {
    let span_err = || Error::Span {
        article_id: article.id.clone(),
        begin,
        end,
        len: article.char_len(),
    };
    if begin >= end {
        return Err(span_err());
    }
    let text = article.slice_chars(begin, end).ok_or_else(span_err)?;
    Ok(LabeledFragment {
        article_id: article.id.clone(),
        label,
        begin,
        end,
        text: text.to_string(),
    })
}

pub fn article_path(articles_dir: &Path, id: &str) -> std::path::PathBuf {
    articles_dir.join(format!("article{id}.txt"))
}

/// Load every article referenced by `records` from `articles_dir`.
pub fn load_articles(
    articles_dir: impl AsRef<Path>,
    records: &[SpanRecord],
) -> Result<HashMap<String, Article>> {
    let dir = articles_dir.as_ref();
    let ids: BTreeSet<&str> = records.iter().map(|r| r.article_id.as_str()).collect();
    let missing: Vec<String> = ids
        .iter()
        .filter(|id| !article_path(dir, id).is_file())
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingArticle(missing));
    }
    ids.into_iter()
        .map(|id| parse_article(article_path(dir, id)).map(|a| (a.id.clone(), a)))
        .collect()
}

/// Extract fragments for annotation records, in record order.
pub fn fragments_from_records(
    articles: &HashMap<String, Article>,
    records: &[SpanRecord],
) -> Result<Vec<LabeledFragment>> {
    records
        .iter()
        .map(|r| {
            let article = articles
                .get(&r.article_id)
                .ok_or_else(|| Error::MissingArticle(vec![r.article_id.clone()]))?;
            extract_fragment(article, r.begin, r.end, r.label)
        })
        .collect()
}

pub fn load_corpus(
    articles_dir: impl AsRef<Path>,
    annotations_path: impl AsRef<Path>,
) -> Result<Vec<LabeledFragment>> {
    let records = parse_annotations(annotations_path)?;
    let articles = load_articles(articles_dir, &records)?;
    fragments_from_records(&articles, &records)
}

/// One JSON object per line.
pub fn fragments_to_jsonl(fragments: &[LabeledFragment]) -> String {
    let mut out = String::new();
    for f in fragments {
        out.push_str(&serde_json::to_string(f).expect("fragment serializes"));
        out.push('\n');
    }
    out
}

pub fn fragments_from_jsonl(content: &str, source: &str) -> Result<Vec<LabeledFragment>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::format(format!("{source}:{}", i + 1), e.to_string()))
        })
        .collect()
}

pub fn read_fragments(path: impl AsRef<Path>) -> Result<Vec<LabeledFragment>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    fragments_from_jsonl(&content, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, content: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(content).unwrap();
        p
    }

    #[test]
    fn parses_article_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = parse_article(write(dir.path(), "article111.txt", b"Hello.")).unwrap();
        assert_eq!((a.id.as_str(), a.text.as_str()), ("111", "Hello."));

        let empty = parse_article(write(dir.path(), "article7.txt", b"")).unwrap();
        assert_eq!(empty.id, "7");
        assert_eq!(empty.text, "");
        assert_eq!(empty.char_len(), 0);

        let notes = parse_article(write(dir.path(), "notes.txt", b"x"));
        assert!(matches!(notes, Err(Error::Format { .. })));

        let bad = parse_article(write(dir.path(), "article8.txt", &[0xff, 0xfe]));
        assert!(matches!(bad, Err(Error::Encoding { .. })));
    }

    #[test]
    fn article_newlines_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let a = parse_article(write(dir.path(), "article1.txt", b"a\r\nb\n\n")).unwrap();
        assert_eq!(a.text, "a\r\nb\n\n");
    }

    #[test]
    fn annotation_lines() {
        let recs = parse_annotations_str("111\tSlogans\t10\t25\n", "t").unwrap();
        assert_eq!(
            recs,
            vec![SpanRecord {
                article_id: "111".into(),
                label: TechniqueLabel::Slogans,
                begin: 10,
                end: 25
            }]
        );
        assert!(matches!(
            parse_annotations_str("111\tSlogans\t25\t10", "t"),
            Err(Error::Span { .. })
        ));
        assert!(matches!(
            parse_annotations_str("111\tFoo\t0\t5", "t"),
            Err(Error::Label(l)) if l == "Foo"
        ));
        assert!(matches!(
            parse_annotations_str("111\t Slogans\t0\t5", "t"),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn column_count_error_names_line() {
        let err = parse_annotations_str("1\tDoubt\t0\t1\n\n1\tDoubt\t0\n", "ann.tsv").unwrap_err();
        match err {
            Error::Format { location, .. } => assert_eq!(location, "ann.tsv:3"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_annotations_str("1\tDoubt\t-1\t4", "t").is_err());
    }

    #[test]
    fn fragments_slice_characters() {
        let a = Article::new("1", "Make America Great Again");
        let f = extract_fragment(&a, 0, 24, TechniqueLabel::Slogans).unwrap();
        assert_eq!(f.text, "Make America Great Again");

        let abc = Article::new("2", "abc");
        assert_eq!(
            extract_fragment(&abc, 0, 1, TechniqueLabel::Doubt).unwrap().text,
            "a"
        );
        match extract_fragment(&abc, 2, 9, TechniqueLabel::Doubt) {
            Err(Error::Span {
                article_id,
                begin,
                end,
                ..
            }) => assert_eq!((article_id.as_str(), begin, end), ("2", 2, 9)),
            other => panic!("unexpected {other:?}"),
        }

        let uni = Article::new("3", "Ça va – très bien");
        let f = extract_fragment(&uni, 8, 12, TechniqueLabel::Doubt).unwrap();
        assert_eq!(f.text, "très");
    }

    #[test]
    fn label_spellings_round_trip() {
        for l in TechniqueLabel::ALL {
            assert_eq!(l.as_str().parse::<TechniqueLabel>().unwrap(), l);
            assert_eq!(TechniqueLabel::from_index(l.index()), Some(l));
        }
        assert!("Loaded_language".parse::<TechniqueLabel>().is_err());
    }

    #[test]
    fn load_corpus_and_missing_articles() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "article1.txt", b"Build the wall now.");
        write(dir.path(), "article2.txt", b"fascist propaganda tropes.");
        let ann = write(
            dir.path(),
            "ann.tsv",
            b"1\tSlogans\t0\t14\n2\tName_Calling,Labeling\t0\t7\n1\tSlogans\t0\t14\n",
        );
        let frags = load_corpus(dir.path(), &ann).unwrap();
        assert_eq!(frags.len(), 3);
        assert_eq!(frags[1].text, "fascist");

        let ann2 = write(dir.path(), "ann2.tsv", b"999\tDoubt\t0\t1\n1\tDoubt\t0\t1\n");
        match load_corpus(dir.path(), &ann2) {
            Err(Error::MissingArticle(ids)) => assert_eq!(ids, vec!["999".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dedup_keeps_first() {
        let recs = parse_annotations_str("1\tDoubt\t0\t1\n1\tDoubt\t0\t1\n2\tDoubt\t0\t1\n", "t")
            .unwrap();
        assert_eq!(dedup_annotations(recs).len(), 2);
    }
}
