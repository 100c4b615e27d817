//! Train/dev splitting, precision/recall/F1 scoring and score tables.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{SpanRecord, TechniqueLabel};
use crate::error::{Error, Result};

/// Seeded shuffle, then the first `floor(2n/3)` items become the training
/// set (shuffled once more) and the rest the development set.
pub fn split_2_1<T: Clone>(items: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (train, dev) = split_indices_2_1(items.len(), seed)?;
    Ok((
        train.iter().map(|&i| items[i].clone()).collect(),
        dev.iter().map(|&i| items[i].clone()).collect(),
    ))
}

/// Index form of [`split_2_1`].
pub fn split_indices_2_1(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 3 {
        return Err(Error::Split(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let dev = order.split_off(2 * n / 3);
    order.shuffle(&mut rng);
    Ok((order, dev))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Labels occurring in the gold or predicted sequence.
    pub per_label: BTreeMap<TechniqueLabel, LabelScore>,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub overall_micro_f1: f64,
    pub n_instances: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 as `2TP / (2TP + FP + FN)`, 0 when undefined.
fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    ratio(2 * tp, 2 * tp + fp + fn_)
}

pub fn micro_f1(gold: &[TechniqueLabel], pred: &[TechniqueLabel]) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(Error::Shape(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Shape("cannot score an empty prediction set".into()));
    }
    // (tp, fp, fn)
    let mut counts: BTreeMap<TechniqueLabel, (usize, usize, usize)> = BTreeMap::new();
    for (&g, &p) in gold.iter().zip(pred) {
        if g == p {
            counts.entry(g).or_default().0 += 1;
        } else {
            counts.entry(p).or_default().1 += 1;
            counts.entry(g).or_default().2 += 1;
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let per_label = counts
        .into_iter()
        .map(|(label, (t, f, n))| {
            tp += t;
            fp += f;
            fn_ += n;
            let score = LabelScore {
                precision: ratio(t, t + f),
                recall: ratio(t, t + n),
                f1: f1_from_counts(t, f, n),
                support: t + n,
            };
            (label, score)
        })
        .collect();
    Ok(ScoreReport {
        per_label,
        micro_precision: ratio(tp, tp + fp),
        micro_recall: ratio(tp, tp + fn_),
        overall_micro_f1: f1_from_counts(tp, fp, fn_),
        n_instances: gold.len(),
    })
}

/// Pair gold and predicted records on `(article_id, begin, end)`, in file
/// order for repeated spans. Every gold span needs exactly one prediction.
pub fn align_predictions(
    gold: &[SpanRecord],
    pred: &[SpanRecord],
) -> Result<(Vec<TechniqueLabel>, Vec<TechniqueLabel>)> {
    let mut by_span: HashMap<(&str, usize, usize), VecDeque<TechniqueLabel>> = HashMap::new();
    for p in pred {
        by_span
            .entry((p.article_id.as_str(), p.begin, p.end))
            .or_default()
            .push_back(p.label);
    }
    let mut predicted = Vec::with_capacity(gold.len());
    for g in gold {
        let label = by_span
            .get_mut(&(g.article_id.as_str(), g.begin, g.end))
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| {
                Error::Shape(format!("no prediction for span {} {}-{}", g.article_id, g.begin, g.end))
            })?;
        predicted.push(label);
    }
    let extra: usize = by_span.values().map(VecDeque::len).sum();
    if extra > 0 {
        return Err(Error::Shape(format!("{extra} predictions match no gold span")));
    }
    Ok((gold.iter().map(|g| g.label).collect(), predicted))
}

/// Context printed above a rendered report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub name: String,
    /// Which data the scores were computed on, e.g. `internal 2:1 split (seed 1)`.
    pub split: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub tsv: String,
    pub text: String,
}

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

/// One row per scored label plus a final `Overall` row; scores ×100, 2 decimals.
pub fn report(meta: &RunMetadata, scores: &ScoreReport) -> RenderedReport {
    let mut rows: Vec<[String; 5]> = scores
        .per_label
        .iter()
        .map(|(label, s)| {
            [
                label.to_string(),
                pct(s.precision),
                pct(s.recall),
                pct(s.f1),
                s.support.to_string(),
            ]
        })
        .collect();
    rows.push([
        "Overall".to_string(),
        pct(scores.micro_precision),
        pct(scores.micro_recall),
        pct(scores.overall_micro_f1),
        scores.n_instances.to_string(),
    ]);
    let header = ["label", "precision", "recall", "f1", "support"].map(String::from);

    let mut tsv = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        tsv.push_str(&row.join("\t"));
        tsv.push('\n');
    }

    let mut text = String::new();
    if !meta.name.is_empty() {
        let _ = writeln!(text, "run:   {}", meta.name);
    }
    if !meta.split.is_empty() {
        let _ = writeln!(text, "split: {}", meta.split);
    }
    text.push_str(&align(&header, &rows));
    RenderedReport { tsv, text }
}

/// Two-column `name`/`F1` table, as used for ablation summaries.
pub fn render_f1_table(title: &str, rows: &[(String, f64)]) -> RenderedReport {
    let header = [title.to_string(), "F1".to_string()];
    let body: Vec<[String; 2]> = rows
        .iter()
        .map(|(name, f1)| [name.clone(), format!("{f1:.2}")])
        .collect();
    let mut tsv = header.join("\t") + "\n";
    for r in &body {
        tsv.push_str(&r.join("\t"));
        tsv.push('\n');
    }
    RenderedReport {
        text: align(&header, &body),
        tsv,
    }
}

fn align<const N: usize>(header: &[String; N], rows: &[[String; N]]) -> String {
    let mut widths = [0usize; N];
    for row in std::iter::once(header).chain(rows) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |row: &[String; N]| {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    };
    line(header);
    for r in rows {
        line(r);
    }
    out
}

/// Scores published for the original system, kept for side-by-side reporting.
pub mod published {
    use crate::corpus::TechniqueLabel::{self, *};

    /// Per-label test-set F1 of the final submission.
    pub const TEST_F1: [(TechniqueLabel, f64); 14] = [
        (LoadedLanguage, 73.70),
        (NameCallingLabeling, 71.40),
        (Repetition, 20.10),
        (Doubt, 59.15),
        (ExaggerationMinimisation, 28.23),
        (AppealToFearPrejudice, 33.33),
        (FlagWaving, 58.94),
        (CausalOversimplification, 26.23),
        (AppealToAuthority, 44.44),
        (Slogans, 34.78),
        (BlackAndWhiteFallacy, 33.33),
        (WhataboutismStrawMen, 17.77),
        (ThoughtTerminatingCliches, 27.02),
        (BandwagonReductioAdHitlerum, 9.30),
    ];

    pub const TEST_OVERALL_F1: f64 = 57.20;

    /// Development-set F1 of the ridge baseline per mapping configuration.
    pub const BASELINE_DEV_F1: [(&str, f64); 8] = [
        ("Baseline Model", 46.37),
        ("NATION", 47.13),
        ("RELIGION", 47.13),
        ("POLITICS", 47.22),
        ("SLOGANS", 47.13),
        ("Combined Lists", 47.03),
        ("PERSON", 46.09),
        ("Various Entities", 45.71),
    ];

    /// Development-set F1 of the fine-tuned transformer per dataset variant.
    pub const BERT_DEV_F1: [(&str, f64); 8] = [
        ("Baseline Model", 46.37),
        ("BERT raw", 51.14),
        ("BERT Pre-processed", 56.44),
        ("BERT Various Entities", 54.09),
        ("BERT Entity Person", 56.91),
        ("BERT Entity Person Pre-processed", 52.39),
        ("BERT Lists", 57.85),
        ("BERT Lists Pre-processed", 55.03),
    ];
}

#[cfg(test)]
mod tests {
    use super::*;
    use TechniqueLabel::{Doubt as A, Slogans as B};

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<usize> = (0..6).collect();
        let (train, dev) = split_2_1(&items, 7).unwrap();
        assert_eq!((train.len(), dev.len()), (4, 2));
        assert_eq!(split_2_1(&items, 7).unwrap(), (train.clone(), dev.clone()));
        let mut all: Vec<usize> = train.into_iter().chain(dev).collect();
        all.sort();
        assert_eq!(all, items);

        let (t, d) = split_indices_2_1(6129, 1).unwrap();
        assert_eq!((t.len(), d.len()), (4086, 2043));
        assert!(matches!(split_2_1(&[1, 2], 0), Err(Error::Split(2))));
    }

    #[test]
    fn hand_counted_example() {
        let r = micro_f1(&[A, A, B], &[A, B, B]).unwrap();
        assert_eq!(r.overall_micro_f1, 2.0 / 3.0);
        let a = r.per_label[&A];
        assert_eq!((a.precision, a.recall), (1.0, 0.5));
        assert!((a.f1 - 2.0 / 3.0).abs() < 1e-15);
        let b = r.per_label[&B];
        assert_eq!((b.precision, b.recall), (0.5, 1.0));
        assert!((b.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.support + b.support, r.n_instances);
    }

    #[test]
    fn perfect_and_wrong() {
        let g = [A, B, B, A];
        let r = micro_f1(&g, &g).unwrap();
        assert_eq!(r.overall_micro_f1, 1.0);
        assert!(r.per_label.values().all(|s| s.f1 == 1.0));
        let w = micro_f1(&[A], &[B]).unwrap();
        assert_eq!(w.overall_micro_f1, 0.0);
        assert_eq!(w.per_label[&B].precision, 0.0);
        assert_eq!(w.per_label[&B].support, 0);
        assert!(matches!(micro_f1(&[A], &[A, B]), Err(Error::Shape(_))));
    }

    #[test]
    fn alignment_by_span() {
        let rec = |id: &str, label, b| SpanRecord { article_id: id.into(), label, begin: b, end: b + 5 };
        let gold = [rec("1", A, 0), rec("1", B, 0), rec("2", A, 3)];
        let pred = [rec("2", B, 3), rec("1", A, 0), rec("1", A, 0)];
        let (g, p) = align_predictions(&gold, &pred).unwrap();
        assert_eq!(g, vec![A, B, A]);
        assert_eq!(p, vec![A, A, B]);
        assert!(align_predictions(&gold, &pred[..2]).is_err());
        assert!(align_predictions(&gold[..2], &pred).is_err());
    }

    #[test]
    fn report_rendering() {
        let g = [A, B];
        let r = report(&RunMetadata::default(), &micro_f1(&g, &g).unwrap());
        let lines: Vec<&str> = r.tsv.lines().collect();
        assert_eq!(lines[0], "label\tprecision\trecall\tf1\tsupport");
        assert_eq!(lines[1], "Doubt\t100.00\t100.00\t100.00\t1");
        assert_eq!(lines[3], "Overall\t100.00\t100.00\t100.00\t2");

        let empty = ScoreReport {
            per_label: BTreeMap::new(),
            micro_precision: 0.0,
            micro_recall: 0.0,
            overall_micro_f1: 0.0,
            n_instances: 0,
        };
        let r = report(&RunMetadata::default(), &empty);
        assert_eq!(r.tsv.lines().count(), 2);
        assert!(r.text.lines().last().unwrap().starts_with("Overall"));
    }

    #[test]
    fn published_table_renders_overall() {
        let mut rows: Vec<(String, f64)> = published::TEST_F1
            .iter()
            .map(|(l, f)| (l.to_string(), *f))
            .collect();
        rows.push(("Overall".into(), published::TEST_OVERALL_F1));
        let r = render_f1_table("Label", &rows);
        assert_eq!(r.tsv.lines().count(), 16);
        assert_eq!(r.tsv.lines().last().unwrap(), "Overall\t57.20");
        assert_eq!(r.tsv.lines().nth(14).unwrap(), "Bandwagon,Reductio_ad_hitlerum\t9.30");
    }
}
