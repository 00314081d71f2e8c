//! Line-oriented, sorted text format for trained models.
//!
//! ```text
//! ner-model v1 perceptron
//! labels  FARMACO
//! meta  epochs  5
//! trans  <s>  B-FARMACO  0.25
//! feat  lower=aspirina  B-FARMACO  3.5
//! ```
//!
//! Fields are tab-separated. Zero weights and −∞ transitions are left out.
//! Identical models serialize to identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::gazetteer::GazetteerModel;
use super::perceptron::{PerceptronModel, TrainingMeta};
use super::{Tagger, TaggerError};
use crate::bio::{BioLabel, TagSet};
use crate::segment::Sentence;

const MAGIC: &str = "ner-model v1";
const START: &str = "<s>";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("not a model file (expected `{MAGIC} <kind>` header)")]
    MissingHeader,
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gazetteer(GazetteerModel),
    Perceptron(PerceptronModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Gazetteer(_) => "gazetteer",
            Model::Perceptron(_) => "perceptron",
        }
    }

    pub fn tagset(&self) -> &TagSet {
        match self {
            Model::Gazetteer(m) => m.tagset(),
            Model::Perceptron(m) => m.tagset(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} {}\nlabels\t{}\n",
            self.kind(),
            self.tagset().entity_labels().join("\t")
        );
        match self {
            Model::Gazetteer(m) => {
                let mut lines: Vec<String> = m
                    .phrases()
                    .iter()
                    .map(|(phrase, label)| format!("phrase\t{label}\t{}", phrase.join(" ")))
                    .collect();
                lines.sort();
                for line in lines {
                    out.push_str(&line);
                    out.push('\n');
                }
            }
            Model::Perceptron(m) => write_perceptron(m, &mut out),
        }
        out
    }

    /// Hex SHA-256 of [`Model::to_text`].
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let kind = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix(MAGIC))
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or(ModelError::MissingHeader)?
            .to_string();

        let (label_line, labels) = lines.next().ok_or(ModelError::Format {
            line: 2,
            reason: "missing labels line".into(),
        })?;
        let labels: Vec<&str> = labels.split('\t').collect();
        if labels.first() != Some(&"labels") {
            return Err(format_err(label_line, "expected labels line"));
        }
        let tagset = TagSet::new(labels[1..].iter().copied()).map_err(|e| format_err(label_line, &e.to_string()))?;

        let body: Vec<(usize, Vec<&str>)> = lines
            .filter(|(_, l)| !l.is_empty())
            .map(|(n, l)| (n, l.split('\t').collect()))
            .collect();
        match kind.as_str() {
            "gazetteer" => read_gazetteer(tagset, &body).map(Model::Gazetteer),
            "perceptron" => read_perceptron(tagset, &body).map(Model::Perceptron),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

impl From<GazetteerModel> for Model {
    fn from(m: GazetteerModel) -> Self {
        Model::Gazetteer(m)
    }
}

impl From<PerceptronModel> for Model {
    fn from(m: PerceptronModel) -> Self {
        Model::Perceptron(m)
    }
}

impl Tagger for Model {
    fn tagset(&self) -> &TagSet {
        Model::tagset(self)
    }

    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        match self {
            Model::Gazetteer(m) => m.tag(sentences),
            Model::Perceptron(m) => m.tag(sentences),
        }
    }
}

fn format_err(line: usize, reason: &str) -> ModelError {
    ModelError::Format {
        line,
        reason: reason.to_string(),
    }
}

fn write_perceptron(m: &PerceptronModel, out: &mut String) {
    let meta = m.meta();
    for (key, value) in [
        ("epochs", meta.epochs as u64),
        ("seed", meta.seed),
        ("sentences", meta.sentences as u64),
        ("updates", meta.updates as u64),
    ] {
        let _ = writeln!(out, "meta\t{key}\t{value}");
    }
    let labels = m.tagset().word_labels();
    let prevs = std::iter::once(None).chain(labels.iter().map(Some));
    for prev in prevs {
        for next in &labels {
            let w = m.transition_weight(prev, next);
            if w.is_finite() && w != 0.0 {
                let from = prev.map_or(START.to_string(), ToString::to_string);
                let _ = writeln!(out, "trans\t{from}\t{next}\t{w}");
            }
        }
    }
    for (feature, weights) in m.feature_weights() {
        for (label, w) in labels.iter().zip(weights) {
            if *w != 0.0 {
                let _ = writeln!(out, "feat\t{feature}\t{label}\t{w}");
            }
        }
    }
}

fn read_gazetteer(tagset: TagSet, body: &[(usize, Vec<&str>)]) -> Result<GazetteerModel, ModelError> {
    let mut phrases = Vec::new();
    for (n, fields) in body {
        match fields.as_slice() {
            ["phrase", label, phrase] => phrases.push((
                phrase.split(' ').map(str::to_string).collect::<Vec<_>>(),
                label.to_string(),
            )),
            _ => return Err(format_err(*n, "expected `phrase<TAB>LABEL<TAB>tokens`")),
        }
    }
    GazetteerModel::from_phrases(tagset, phrases).map_err(|e| format_err(0, &e.to_string()))
}

fn read_perceptron(tagset: TagSet, body: &[(usize, Vec<&str>)]) -> Result<PerceptronModel, ModelError> {
    let word_labels = tagset.word_labels();
    let n = word_labels.len();
    let label_index = |line: usize, s: &str| -> Result<usize, ModelError> {
        tagset
            .parse_label(s)
            .ok()
            .and_then(|l| tagset.word_index(&l))
            .ok_or_else(|| format_err(line, &format!("unknown label {s:?}")))
    };
    let weight = |line: usize, s: &str| -> Result<f64, ModelError> {
        s.parse::<f64>()
            .ok()
            .filter(|w| w.is_finite())
            .ok_or_else(|| format_err(line, &format!("bad weight {s:?}")))
    };

    let mut meta = TrainingMeta::default();
    let mut transitions: BTreeMap<(Option<usize>, usize), f64> = BTreeMap::new();
    let mut features: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (line, fields) in body {
        let line = *line;
        match fields.as_slice() {
            ["meta", key, value] => {
                let v: u64 = value.parse().map_err(|_| format_err(line, "bad meta value"))?;
                match *key {
                    "epochs" => meta.epochs = v as usize,
                    "seed" => meta.seed = v,
                    "sentences" => meta.sentences = v as usize,
                    "updates" => meta.updates = v as usize,
                    _ => return Err(format_err(line, &format!("unknown meta key {key:?}"))),
                }
            }
            ["trans", from, to, w] => {
                let from = if *from == START {
                    None
                } else {
                    Some(label_index(line, from)?)
                };
                transitions.insert((from, label_index(line, to)?), weight(line, w)?);
            }
            ["feat", feature, label, w] => {
                let y = label_index(line, label)?;
                features.entry(feature.to_string()).or_insert_with(|| vec![0.0; n])[y] = weight(line, w)?;
            }
            _ => return Err(format_err(line, "unrecognized record")),
        }
    }

    PerceptronModel::from_weights(
        tagset.clone(),
        features,
        |prev, next| {
            let p = prev.and_then(|l| tagset.word_index(l));
            let key = (p, tagset.word_index(next).unwrap_or(0));
            transitions.get(&key).copied().unwrap_or(0.0)
        },
        meta,
    )
    .map_err(|e| format_err(0, &e.to_string()))
}
