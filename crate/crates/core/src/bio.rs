//! BIO encoding of character-span mentions over word tokens, and back.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::brat::{AnnotatedDocument, EntityMention};
use crate::segment::Sentence;
use crate::text::CharIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BioError {
    #[error("label {0:?} is not in the tag set")]
    UnknownLabel(String),
    #[error("invalid tag set: {0}")]
    InvalidTagSet(String),
    #[error("sentence {sentence}, token {token}: {label} does not continue an entity")]
    InvalidSequence {
        sentence: usize,
        token: usize,
        label: String,
    },
    #[error("{labels} labels for {tokens} tokens")]
    LengthMismatch { tokens: usize, labels: usize },
    #[error("{0} is a framing label and cannot label a word")]
    SpecialLabel(String),
    #[error("token span {start}..{end} is outside the document text")]
    OffsetMismatch { start: usize, end: usize },
}

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// One per-token label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BioLabel {
    O,
    B(String),
    I(String),
    Cls,
    Sep,
}

impl BioLabel {
    pub fn entity(&self) -> Option<&str> {
        match self {
            BioLabel::B(x) | BioLabel::I(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_special(&self) -> bool {
        matches!(self, BioLabel::Cls | BioLabel::Sep)
    }

    /// Whether `self` may follow `prev` (`None` = sentence start).
    pub fn may_follow(&self, prev: Option<&BioLabel>) -> bool {
        match self {
            BioLabel::I(x) => matches!(prev, Some(BioLabel::B(y) | BioLabel::I(y)) if x == y),
            _ => true,
        }
    }
}

impl fmt::Display for BioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioLabel::O => f.write_str("O"),
            BioLabel::B(x) => write!(f, "B-{x}"),
            BioLabel::I(x) => write!(f, "I-{x}"),
            BioLabel::Cls => f.write_str(CLS),
            BioLabel::Sep => f.write_str(SEP),
        }
    }
}

impl FromStr for BioLabel {
    type Err = BioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "O" => Ok(BioLabel::O),
            CLS => Ok(BioLabel::Cls),
            SEP => Ok(BioLabel::Sep),
            _ => match s.split_once('-') {
                Some(("B", x)) if !x.is_empty() => Ok(BioLabel::B(x.to_string())),
                Some(("I", x)) if !x.is_empty() => Ok(BioLabel::I(x.to_string())),
                _ => Err(BioError::UnknownLabel(s.to_string())),
            },
        }
    }
}

/// Label alphabet of one track: `O`, `B-X`/`I-X` per entity label, and the
/// `[CLS]`/`[SEP]` framing specials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSet {
    entity_labels: Vec<String>,
}

impl TagSet {
    pub fn new<I, S>(labels: I) -> Result<Self, BioError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entity_labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if entity_labels.is_empty() {
            return Err(BioError::InvalidTagSet("no entity labels".into()));
        }
        for (i, label) in entity_labels.iter().enumerate() {
            let ok = label.chars().next().is_some_and(|c| c.is_ascii_uppercase())
                && label
                    .chars()
                    .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
            if !ok {
                return Err(BioError::InvalidTagSet(format!(
                    "{label:?} is not an uppercase identifier"
                )));
            }
            if entity_labels[..i].contains(label) {
                return Err(BioError::InvalidTagSet(format!("duplicate label {label}")));
            }
        }
        Ok(TagSet { entity_labels })
    }

    /// `{ENFERMEDAD}`
    pub fn diseases() -> Self {
        TagSet::new(["ENFERMEDAD"]).expect("valid label")
    }

    /// `{FARMACO}`
    pub fn medications() -> Self {
        TagSet::new(["FARMACO"]).expect("valid label")
    }

    pub fn entity_labels(&self) -> &[String] {
        &self.entity_labels
    }

    pub fn contains_entity(&self, label: &str) -> bool {
        self.entity_rank(label).is_some()
    }

    pub fn entity_rank(&self, label: &str) -> Option<usize> {
        self.entity_labels.iter().position(|l| l == label)
    }

    /// Word labels in canonical order: `O`, then `B-X`, `I-X` per entity label.
    /// Every tie-break in the crate follows this order.
    pub fn word_labels(&self) -> Vec<BioLabel> {
        let mut out = vec![BioLabel::O];
        for x in &self.entity_labels {
            out.push(BioLabel::B(x.clone()));
            out.push(BioLabel::I(x.clone()));
        }
        out
    }

    /// The whole alphabet, framing specials last.
    pub fn alphabet(&self) -> Vec<BioLabel> {
        let mut out = self.word_labels();
        out.push(BioLabel::Cls);
        out.push(BioLabel::Sep);
        out
    }

    /// Position of a word label in [`TagSet::word_labels`].
    pub fn word_index(&self, label: &BioLabel) -> Option<usize> {
        match label {
            BioLabel::O => Some(0),
            BioLabel::B(x) => self.entity_rank(x).map(|r| 1 + 2 * r),
            BioLabel::I(x) => self.entity_rank(x).map(|r| 2 + 2 * r),
            BioLabel::Cls | BioLabel::Sep => None,
        }
    }

    /// Parses a label string and checks it belongs to the alphabet.
    pub fn parse_label(&self, s: &str) -> Result<BioLabel, BioError> {
        let label: BioLabel = s.parse()?;
        match label.entity() {
            Some(x) if !self.contains_entity(x) => Err(BioError::UnknownLabel(s.to_string())),
            _ => Ok(label),
        }
    }
}

/// Which entity type a corpus is annotated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Diseases,
    Medications,
}

impl Track {
    pub fn name(self) -> &'static str {
        match self {
            Track::Diseases => "diseases",
            Track::Medications => "medications",
        }
    }

    pub fn entity_label(self) -> &'static str {
        match self {
            Track::Diseases => "ENFERMEDAD",
            Track::Medications => "FARMACO",
        }
    }

    pub fn tagset(self) -> TagSet {
        TagSet::new([self.entity_label()]).expect("valid label")
    }

    /// The track whose entity label is `label`.
    pub fn from_entity_label(label: &str) -> Option<Track> {
        [Track::Diseases, Track::Medications]
            .into_iter()
            .find(|t| t.entity_label() == label)
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Track {
    type Err = BioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "diseases" | "enfermedad" => Ok(Track::Diseases),
            "medications" | "farmaco" => Ok(Track::Medications),
            _ => Err(BioError::UnknownLabel(s.to_string())),
        }
    }
}

/// A sentence with one word label per token. Never holds `[CLS]`/`[SEP]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    sentence: Sentence,
    labels: Vec<BioLabel>,
}

impl LabeledSentence {
    pub fn new(sentence: Sentence, labels: Vec<BioLabel>) -> Result<Self, BioError> {
        if sentence.len() != labels.len() {
            return Err(BioError::LengthMismatch {
                tokens: sentence.len(),
                labels: labels.len(),
            });
        }
        if let Some(special) = labels.iter().find(|l| l.is_special()) {
            return Err(BioError::SpecialLabel(special.to_string()));
        }
        Ok(LabeledSentence { sentence, labels })
    }

    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn labels(&self) -> &[BioLabel] {
        &self.labels
    }
}

/// Corpus-noise tallies from [`encode_bio`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AlignmentWarnings {
    /// Mention boundary fell inside a token; expanded to the covering tokens.
    pub misaligned: usize,
    /// Lost an overlap against a longer (or earlier) mention.
    pub overlap_dropped: usize,
    /// Spanned a sentence or window boundary; split there.
    pub crossing_boundary: usize,
    /// Covered no token at all (whitespace-only span).
    pub uncovered: usize,
}

impl AlignmentWarnings {
    pub fn total(&self) -> usize {
        self.misaligned + self.overlap_dropped + self.crossing_boundary + self.uncovered
    }
}

impl std::ops::AddAssign for AlignmentWarnings {
    fn add_assign(&mut self, rhs: Self) {
        self.misaligned += rhs.misaligned;
        self.overlap_dropped += rhs.overlap_dropped;
        self.crossing_boundary += rhs.crossing_boundary;
        self.uncovered += rhs.uncovered;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub sentences: Vec<LabeledSentence>,
    pub warnings: AlignmentWarnings,
}

/// Labels the tokens of `sentences` from the mentions of `doc`.
///
/// The first covered token of a mention gets `B-X`, the rest `I-X`. Overlaps
/// keep the longest mention (earliest start on ties). A mention that runs
/// across a sentence boundary restarts with `B-X` in the next sentence.
pub fn encode_bio(doc: &AnnotatedDocument, sentences: &[Sentence], tagset: &TagSet) -> Result<Encoded, BioError> {
    // Flat token view: (sentence index, start, end).
    let flat: Vec<(usize, usize, usize)> = sentences
        .iter()
        .enumerate()
        .flat_map(|(si, s)| s.tokens().iter().map(move |t| (si, t.start, t.end)))
        .collect();

    let mut warnings = AlignmentWarnings::default();
    let mut candidates = Vec::with_capacity(doc.mentions.len());
    for m in &doc.mentions {
        let rank = tagset
            .entity_rank(&m.label)
            .ok_or_else(|| BioError::UnknownLabel(m.label.clone()))?;
        let first = flat.partition_point(|&(_, _, end)| end <= m.start);
        let last = flat.partition_point(|&(_, start, _)| start < m.end);
        if first >= last {
            warnings.uncovered += 1;
            continue;
        }
        if flat[first].1 != m.start || flat[last - 1].2 != m.end {
            warnings.misaligned += 1;
        }
        candidates.push((m, rank, first, last));
    }

    candidates.sort_by(|a, b| {
        let len = |m: &EntityMention| m.end - m.start;
        len(b.0)
            .cmp(&len(a.0))
            .then(a.0.start.cmp(&b.0.start))
            .then(a.0.end.cmp(&b.0.end))
            .then(a.1.cmp(&b.1))
    });

    let mut labels: Vec<BioLabel> = vec![BioLabel::O; flat.len()];
    let mut taken = vec![false; flat.len()];
    for (m, _, first, last) in candidates {
        if taken[first..last].iter().any(|&t| t) {
            warnings.overlap_dropped += 1;
            continue;
        }
        if flat[first].0 != flat[last - 1].0 {
            warnings.crossing_boundary += 1;
        }
        for k in first..last {
            taken[k] = true;
            let starts_sentence = k == 0 || flat[k - 1].0 != flat[k].0;
            labels[k] = if k == first || starts_sentence {
                BioLabel::B(m.label.clone())
            } else {
                BioLabel::I(m.label.clone())
            };
        }
    }

    let mut labels = labels.into_iter();
    let sentences = sentences
        .iter()
        .map(|s| {
            let own: Vec<BioLabel> = labels.by_ref().take(s.len()).collect();
            LabeledSentence::new(s.clone(), own)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Encoded { sentences, warnings })
}

/// Turns each maximal `B-X (I-X)*` run into a mention sliced from `text`.
/// Mentions come back in document order, numbered `T1..Tn`.
pub fn decode_bio(text: &str, labeled: &[LabeledSentence]) -> Result<Vec<EntityMention>, BioError> {
    let index = CharIndex::new(text);
    let mut spans: Vec<(String, usize, usize)> = Vec::new();

    for (si, ls) in labeled.iter().enumerate() {
        let tokens = ls.sentence().tokens();
        let mut open: Option<(String, usize, usize)> = None;
        for (ti, (token, label)) in tokens.iter().zip(ls.labels()).enumerate() {
            match label {
                BioLabel::B(x) => {
                    spans.extend(open.take());
                    open = Some((x.clone(), token.start, token.end));
                }
                BioLabel::I(x) => match open.as_mut() {
                    Some((y, _, end)) if y == x => *end = token.end,
                    _ => {
                        return Err(BioError::InvalidSequence {
                            sentence: si,
                            token: ti,
                            label: label.to_string(),
                        })
                    }
                },
                _ => spans.extend(open.take()),
            }
        }
        spans.extend(open);
    }

    spans
        .into_iter()
        .enumerate()
        .map(|(k, (label, start, end))| {
            EntityMention::from_span(format!("T{}", k + 1), label, start, end, &index)
                .ok_or(BioError::OffsetMismatch { start, end })
        })
        .collect()
}

/// Valid iff it holds no framing specials and every `I-X` continues a
/// `B-X`/`I-X`.
pub fn is_valid_sequence(labels: &[BioLabel]) -> bool {
    let mut prev: Option<&BioLabel> = None;
    for label in labels {
        if label.is_special() || !label.may_follow(prev) {
            return false;
        }
        prev = Some(label);
    }
    true
}

/// Repair policy: an `I-X` that does not continue `X` becomes `B-X`, and
/// stray `[CLS]`/`[SEP]` become `O`. Identity on valid input, idempotent.
pub fn repair_labels(raw: &[BioLabel]) -> Vec<BioLabel> {
    let mut out: Vec<BioLabel> = Vec::with_capacity(raw.len());
    for label in raw {
        let fixed = match label {
            BioLabel::Cls | BioLabel::Sep => BioLabel::O,
            BioLabel::I(x) if !label.may_follow(out.last()) => BioLabel::B(x.clone()),
            other => other.clone(),
        };
        out.push(fixed);
    }
    out
}

/// CoNLL-style dump: `surface<TAB>start<TAB>end<TAB>label` per token, a blank
/// line between sentences.
pub fn to_conll(labeled: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for (i, ls) in labeled.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (t, l) in ls.sentence().tokens().iter().zip(ls.labels()) {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", t.surface, t.start, t.end, l));
        }
    }
    out
}
