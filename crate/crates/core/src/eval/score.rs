//! Exact-match scoring: a prediction counts only if label, start and end all
//! equal a gold mention. Counts are summed over documents before dividing
//! (micro averaging).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use thiserror::Error;

use crate::bio::Track;
use crate::brat::{AnnotatedDocument, EntityMention, Language};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot compare {left} with {right}")]
    TrackMismatch { left: String, right: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl Counts {
    pub fn metrics(&self) -> Metrics {
        micro_metrics(self)
    }

    /// Gold and prediction swapped.
    pub fn swapped(self) -> Counts {
        Counts {
            true_pos: self.true_pos,
            false_pos: self.false_neg,
            false_neg: self.false_pos,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.true_pos += rhs.true_pos;
        self.false_pos += rhs.false_pos;
        self.false_neg += rhs.false_neg;
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(mut self, rhs: Counts) -> Counts {
        self += rhs;
        self
    }
}

/// Overall and per-label tallies. Merging with `+` is associative and
/// commutative, so per-document counts can be combined in any grouping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub total: Counts,
    pub per_label: BTreeMap<String, Counts>,
    /// Repeated `(label, start, end)` entries collapsed before matching.
    pub duplicates: usize,
}

impl AddAssign<&EvalCounts> for EvalCounts {
    fn add_assign(&mut self, rhs: &EvalCounts) {
        self.total += rhs.total;
        for (label, c) in &rhs.per_label {
            *self.per_label.entry(label.clone()).or_default() += *c;
        }
        self.duplicates += rhs.duplicates;
    }
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(mut self, rhs: EvalCounts) -> EvalCounts {
        self += &rhs;
        self
    }
}

impl Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

type SpanKey<'a> = (&'a str, usize, usize);

fn span_set(mentions: &[EntityMention]) -> (BTreeSet<SpanKey<'_>>, usize) {
    let set: BTreeSet<SpanKey<'_>> = mentions.iter().map(|m| (m.label.as_str(), m.start, m.end)).collect();
    let duplicates = mentions.len() - set.len();
    (set, duplicates)
}

/// Exact-match counts for one document. Duplicates within either list are
/// collapsed and tallied in [`EvalCounts::duplicates`].
pub fn match_exact(gold: &[EntityMention], pred: &[EntityMention]) -> EvalCounts {
    let (gold, gold_dups) = span_set(gold);
    let (pred, pred_dups) = span_set(pred);

    let mut per_label: BTreeMap<String, Counts> = BTreeMap::new();
    for key in gold.union(&pred) {
        let c = per_label.entry(key.0.to_string()).or_default();
        match (gold.contains(key), pred.contains(key)) {
            (true, true) => c.true_pos += 1,
            (false, true) => c.false_pos += 1,
            (true, false) => c.false_neg += 1,
            (false, false) => unreachable!(),
        }
    }
    let total = per_label.values().fold(Counts::default(), |acc, c| acc + *c);
    EvalCounts {
        total,
        per_label,
        duplicates: gold_dups + pred_dups,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    /// `precision recall f1` at four decimals, half-up.
    pub fn display(&self) -> String {
        format!("{}\t{}\t{}", fmt4(self.precision), fmt4(self.recall), fmt4(self.f1))
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); each 0 when its
/// denominator is 0.
pub fn micro_metrics(counts: &Counts) -> Metrics {
    let precision = ratio(counts.true_pos, counts.true_pos + counts.false_pos);
    let recall = ratio(counts.true_pos, counts.true_pos + counts.false_neg);
    Metrics {
        precision,
        recall,
        f1: f1_from_pr(precision, recall),
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Half-up rounding to `decimals` places for display.
///
/// Values such as 0.65935 have no exact binary form and may sit a hair below
/// the half; a relative nudge of 1e-9 puts them back on the intended side.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    let nudged = scaled + scaled.abs().max(1.0) * 1e-9;
    (nudged + 0.5).floor() / scale
}

/// Four-decimal display form.
pub fn fmt4(x: f64) -> String {
    format!("{:.4}", round_half_up(x, 4))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocRow {
    pub doc_id: String,
    pub counts: EvalCounts,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub split: String,
    pub language: Option<Language>,
    pub track: Track,
    pub counts: EvalCounts,
    pub metrics: Metrics,
    /// One row per document, ordered by id.
    pub rows: Vec<DocRow>,
    /// Ids with predictions but no gold document; their predictions count as false positives.
    pub pred_only: Vec<String>,
}

impl EvalReport {
    /// A report carrying only published scores, without counts.
    pub fn from_scores(
        split: &str,
        language: Option<Language>,
        track: Track,
        precision: f64,
        recall: f64,
        f1: f64,
    ) -> Self {
        EvalReport {
            split: split.to_string(),
            language,
            track,
            counts: EvalCounts::default(),
            metrics: Metrics { precision, recall, f1 },
            rows: Vec::new(),
            pred_only: Vec::new(),
        }
    }

    fn subject(&self) -> String {
        match self.language {
            Some(l) => format!("{}/{}", self.track, l),
            None => self.track.to_string(),
        }
    }
}

/// Micro-averaged scores of `pred` against `gold` over the union of document
/// ids. With `language` set, only documents in that language take part.
pub fn evaluate_corpus(
    gold: &[AnnotatedDocument],
    pred: &[AnnotatedDocument],
    language: Option<Language>,
    track: Track,
    split: &str,
) -> EvalReport {
    let keep = |d: &&AnnotatedDocument| language.is_none_or(|l| d.document.language() == l);
    let gold: BTreeMap<&str, &AnnotatedDocument> = gold.iter().filter(keep).map(|d| (d.doc_id(), d)).collect();
    let pred: BTreeMap<&str, &AnnotatedDocument> = pred.iter().filter(keep).map(|d| (d.doc_id(), d)).collect();

    let ids: BTreeSet<&str> = gold.keys().chain(pred.keys()).copied().collect();
    let rows: Vec<DocRow> = ids
        .into_iter()
        .map(|id| {
            let g = gold.get(id).map_or(&[][..], |d| &d.mentions[..]);
            let p = pred.get(id).map_or(&[][..], |d| &d.mentions[..]);
            let counts = match_exact(g, p);
            DocRow {
                doc_id: id.to_string(),
                metrics: counts.total.metrics(),
                counts,
            }
        })
        .collect();

    let counts: EvalCounts = rows.iter().map(|r| r.counts.clone()).sum();
    EvalReport {
        split: split.to_string(),
        language,
        track,
        metrics: counts.total.metrics(),
        counts,
        rows,
        pred_only: pred
            .keys()
            .filter(|id| !gold.contains_key(*id))
            .map(|id| id.to_string())
            .collect(),
    }
}

/// Default dev−test F1 gap (percentage points) above which a model is
/// flagged as overfitting.
pub const DEFAULT_OVERFIT_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub track: Track,
    pub language: Option<Language>,
    /// Dev minus test, in percentage points, rounded to four decimals.
    pub precision_gap: f64,
    pub recall_gap: f64,
    pub f1_gap: f64,
    pub threshold: f64,
    pub flagged: bool,
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            self.track,
            self.language.map_or("all".to_string(), |l| l.to_string()),
            self.precision_gap,
            self.recall_gap,
            self.f1_gap,
            if self.flagged { "overfit" } else { "ok" }
        )
    }
}

/// Dev−test deltas in percentage points; flags an F1 gap above `threshold`.
pub fn compare_splits(dev: &EvalReport, test: &EvalReport, threshold: f64) -> Result<GapReport, EvalError> {
    if dev.track != test.track || dev.language != test.language {
        return Err(EvalError::TrackMismatch {
            left: dev.subject(),
            right: test.subject(),
        });
    }
    let points = |a: f64, b: f64| round_half_up((a - b) * 100.0, 4);
    let f1_gap = points(dev.metrics.f1, test.metrics.f1);
    Ok(GapReport {
        track: dev.track,
        language: dev.language,
        precision_gap: points(dev.metrics.precision, test.metrics.precision),
        recall_gap: points(dev.metrics.recall, test.metrics.recall),
        f1_gap,
        threshold,
        flagged: f1_gap > threshold,
    })
}

pub const REPORT_HEADER: &str = "split\tlanguage\ttrack\tprecision\trecall\tf1\ttp\tfp\tfn";

/// Summary TSV, one row per report.
pub fn report_tsv(reports: &[EvalReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.split,
            r.language.map_or("all".to_string(), |l| l.to_string()),
            r.track,
            r.metrics.display(),
            r.counts.total.true_pos,
            r.counts.total.false_pos,
            r.counts.total.false_neg
        ));
    }
    out
}

/// Per-document TSV.
pub fn per_document_tsv(report: &EvalReport) -> String {
    let mut out = String::from("doc_id\ttp\tfp\tfn\tprecision\trecall\tf1\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            row.doc_id,
            row.counts.total.true_pos,
            row.counts.total.false_pos,
            row.counts.total.false_neg,
            row.metrics.display()
        ));
    }
    out
}
