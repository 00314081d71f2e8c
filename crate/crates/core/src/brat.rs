//! BRAT stand-off annotations: `.txt` documents paired with `.ann` files.
//!
//! Only text-bound entity lines are read:
//!
//! ```text
//! T1<TAB>FARMACO 20 28<TAB>aspirina
//! ```
//!
//! Offsets are code points into the untouched `.txt` file, end exclusive.
//! Attribute, relation, event and note lines are skipped and tallied.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::text::CharIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Es,
    En,
    It,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Es, Language::En, Language::It];

    pub fn code(self) -> &'static str {
        match self {
            Language::Es => "es",
            Language::En => "en",
            Language::It => "it",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = BratError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "es" => Ok(Language::Es),
            "en" => Ok(Language::En),
            "it" => Ok(Language::It),
            _ => Err(BratError::UnknownLanguage(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BratError {
    #[error("line {line}: span {start}..{end} exceeds document length {len}")]
    OffsetOutOfRange {
        line: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("line {line}: surface {found:?} does not match text {expected:?}")]
    SurfaceMismatch {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: malformed entity line ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: duplicate identifier {id}")]
    DuplicateId { line: usize, id: String },
    #[error("annotation content is not valid UTF-8 (byte {valid_up_to})")]
    InvalidUtf8 { valid_up_to: usize },
    #[error("invalid document id {0:?}")]
    InvalidDocId(String),
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
}

impl BratError {
    /// 1-based `.ann` line the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            BratError::OffsetOutOfRange { line, .. }
            | BratError::SurfaceMismatch { line, .. }
            | BratError::MalformedLine { line, .. }
            | BratError::DuplicateId { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Raw text of one report. Offsets elsewhere always index `text` by code point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextDocument {
    doc_id: String,
    text: String,
    language: Language,
}

impl TextDocument {
    /// `doc_id` is a file stem. The one permitted separator is a leading
    /// language prefix (`es/d1`) used by aggregated multilingual corpora.
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>, language: Language) -> Result<Self, BratError> {
        let doc_id = doc_id.into();
        if !valid_doc_id(&doc_id) {
            return Err(BratError::InvalidDocId(doc_id));
        }
        Ok(TextDocument {
            doc_id,
            text: text.into(),
            language,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Same document with its id prefixed by its language code.
    pub fn with_language_prefix(&self) -> TextDocument {
        let stem = self.doc_id.rsplit('/').next().unwrap_or(&self.doc_id);
        TextDocument {
            doc_id: format!("{}/{}", self.language, stem),
            text: self.text.clone(),
            language: self.language,
        }
    }
}

fn valid_doc_id(id: &str) -> bool {
    let plain = |s: &str| !s.is_empty() && !s.contains(['/', '\\']) && s != "." && s != "..";
    match id.split_once('/') {
        None => plain(id),
        Some((lang, stem)) => lang.parse::<Language>().is_ok() && plain(stem),
    }
}

/// A contiguous entity span. `surface` is always `text[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityMention {
    pub id: String,
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl EntityMention {
    /// Builds a mention whose surface is sliced from `text`. `None` for empty
    /// or out-of-range spans.
    pub fn from_span(
        id: impl Into<String>,
        label: impl Into<String>,
        start: usize,
        end: usize,
        text: &CharIndex<'_>,
    ) -> Option<Self> {
        if start >= end {
            return None;
        }
        let surface = text.slice(start, end)?;
        Some(EntityMention {
            id: id.into(),
            label: label.into(),
            start,
            end,
            surface: surface.to_string(),
        })
    }

    /// `(start, end, label)`, the canonical ordering key.
    pub fn sort_key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.label)
    }

    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub document: TextDocument,
    pub mentions: Vec<EntityMention>,
}

impl AnnotatedDocument {
    pub fn new(document: TextDocument, mentions: Vec<EntityMention>) -> Self {
        AnnotatedDocument { document, mentions }
    }

    pub fn unannotated(document: TextDocument) -> Self {
        AnnotatedDocument {
            document,
            mentions: Vec::new(),
        }
    }

    pub fn doc_id(&self) -> &str {
        self.document.doc_id()
    }

    /// Mentions sorted by `(start, end, label)`.
    pub fn canonical_mentions(&self) -> Vec<&EntityMention> {
        let mut sorted: Vec<&EntityMention> = self.mentions.iter().collect();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        sorted
    }
}

/// Everything learned from one `.ann` file, errors included.
#[derive(Debug, Clone, Default)]
pub struct AnnScan {
    pub mentions: Vec<EntityMention>,
    pub violations: Vec<BratError>,
    /// Non-entity lines (A, R, E, #, *, ...).
    pub skipped_lines: usize,
}

/// Reads every line of `ann_content`, collecting violations instead of
/// stopping at the first one.
pub fn scan_ann(document: &TextDocument, ann_content: &str) -> AnnScan {
    let index = CharIndex::new(document.text());
    let mut scan = AnnScan::default();
    let mut seen_ids = HashSet::new();

    for (i, raw) in ann_content.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if !line.starts_with('T') {
            scan.skipped_lines += 1;
            continue;
        }
        match parse_entity_line(line, line_no, &index) {
            Ok(mention) => {
                if !seen_ids.insert(mention.id.clone()) {
                    scan.violations.push(BratError::DuplicateId {
                        line: line_no,
                        id: mention.id,
                    });
                } else {
                    scan.mentions.push(mention);
                }
            }
            Err(e) => scan.violations.push(e),
        }
    }
    scan
}

fn parse_entity_line(line: &str, line_no: usize, index: &CharIndex<'_>) -> Result<EntityMention, BratError> {
    let malformed = |reason: &str| BratError::MalformedLine {
        line: line_no,
        reason: reason.to_string(),
    };

    let mut fields = line.splitn(3, '\t');
    let id = fields.next().unwrap_or_default();
    let middle = fields.next().ok_or_else(|| malformed("missing type and offsets"))?;
    let surface = fields.next().ok_or_else(|| malformed("missing surface text"))?;

    let digits = &id[1..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.trim_start_matches('0').is_empty() {
        return Err(malformed("identifier must be T followed by a positive integer"));
    }
    if middle.contains(';') {
        return Err(malformed("discontinuous spans are not supported"));
    }

    let parts: Vec<&str> = middle.split(' ').collect();
    let [label, start, end] = parts[..] else {
        return Err(malformed("expected `LABEL start end`"));
    };
    if label.is_empty() {
        return Err(malformed("empty label"));
    }
    let start: usize = start.parse().map_err(|_| malformed("start offset is not an integer"))?;
    let end: usize = end.parse().map_err(|_| malformed("end offset is not an integer"))?;
    if start >= end {
        return Err(malformed("span is empty or inverted"));
    }
    let expected = index.slice(start, end).ok_or(BratError::OffsetOutOfRange {
        line: line_no,
        start,
        end,
        len: index.len(),
    })?;
    if expected != surface {
        return Err(BratError::SurfaceMismatch {
            line: line_no,
            expected: expected.to_string(),
            found: surface.to_string(),
        });
    }
    Ok(EntityMention {
        id: id.to_string(),
        label: label.to_string(),
        start,
        end,
        surface: surface.to_string(),
    })
}

/// Parses a `.ann` file against its text, failing on the first violation.
pub fn parse_ann(document: &TextDocument, ann_content: &str) -> Result<AnnotatedDocument, BratError> {
    let scan = scan_ann(document, ann_content);
    if let Some(first) = scan.violations.into_iter().next() {
        return Err(first);
    }
    Ok(AnnotatedDocument::new(document.clone(), scan.mentions))
}

/// [`parse_ann`] over raw bytes; invalid UTF-8 is an error, never a panic.
pub fn parse_ann_bytes(document: &TextDocument, bytes: &[u8]) -> Result<AnnotatedDocument, BratError> {
    let content = std::str::from_utf8(bytes).map_err(|e| BratError::InvalidUtf8 {
        valid_up_to: e.valid_up_to(),
    })?;
    parse_ann(document, content)
}

/// Canonical `.ann` output: sorted by `(start, end, label)`, renumbered
/// `T1..Tn`, one `\n`-terminated line per mention.
pub fn serialize_ann(doc: &AnnotatedDocument) -> String {
    let mut out = String::new();
    for (k, m) in doc.canonical_mentions().into_iter().enumerate() {
        out.push_str(&format!(
            "T{}\t{} {} {}\t{}\n",
            k + 1,
            m.label,
            m.start,
            m.end,
            m.surface
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentValidation {
    pub doc_id: String,
    pub violations: Vec<BratError>,
    pub skipped_lines: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub documents: Vec<DocumentValidation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.documents.iter().all(|d| d.violations.is_empty())
    }

    pub fn violation_count(&self) -> usize {
        self.documents.iter().map(|d| d.violations.len()).sum()
    }

    pub fn skipped_lines(&self) -> usize {
        self.documents.iter().map(|d| d.skipped_lines).sum()
    }

    pub fn failing(&self) -> impl Iterator<Item = &DocumentValidation> {
        self.documents.iter().filter(|d| !d.violations.is_empty())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for doc in self.failing() {
            for v in &doc.violations {
                writeln!(f, "{}: {}", doc.doc_id, v)?;
            }
        }
        write!(
            f,
            "{} documents, {} violations, {} non-entity lines skipped",
            self.documents.len(),
            self.violation_count(),
            self.skipped_lines()
        )
    }
}

/// Checks every pair without aborting on the first bad document.
pub fn validate_corpus<'a, I>(pairs: I) -> ValidationReport
where
    I: IntoIterator<Item = (&'a TextDocument, &'a str)>,
{
    let documents = pairs
        .into_iter()
        .map(|(doc, ann)| {
            let scan = scan_ann(doc, ann);
            DocumentValidation {
                doc_id: doc.doc_id().to_string(),
                violations: scan.violations,
                skipped_lines: scan.skipped_lines,
            }
        })
        .collect();
    ValidationReport { documents }
}
