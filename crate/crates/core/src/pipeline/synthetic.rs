//! Deterministic synthetic Spanish medication corpus.
//!
//! Sentences come from fixed templates with slots filled from a closed list
//! of ten drug names, two of them multi-word. The same spec always yields the
//! same documents.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{write_documents, Split};
use super::PipelineError;
use crate::bio::Track;
use crate::brat::{AnnotatedDocument, EntityMention, Language, TextDocument};
use crate::text::char_len;

pub const DRUGS: [&str; 10] = [
    "aspirina",
    "enalapril",
    "atorvastatina",
    "bisoprolol",
    "furosemida",
    "clopidogrel",
    "amiodarona",
    "warfarina",
    "ácido acetilsalicílico",
    "sulfato ferroso",
];

/// `{d}` is a drug mention, `{n}` a number.
const TEMPLATES: [&str; 12] = [
    "Paciente de {n} años en tratamiento con {d}.",
    "Se inicia {d} {n} mg cada {n} horas.",
    "Se suspende {d} por mala tolerancia.",
    "Al alta se pauta {d} y {d}.",
    "Refiere dolor torácico de {n} días de evolución.",
    "Tensión arterial de {n}/{n} mmHg.",
    "Mantiene {d} a dosis de {n} mg.",
    "No toma {d} desde hace {n} semanas.",
    "Ecocardiograma sin alteraciones relevantes.",
    "Se ajusta la dosis de {d}, {d} y {d}.",
    "Antecedentes de hipertensión arterial y diabetes.",
    "Alergia conocida a {d}.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub train_docs: usize,
    pub dev_docs: usize,
    pub test_docs: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            train_docs: 200,
            dev_docs: 50,
            test_docs: 50,
            seed: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub train: Vec<AnnotatedDocument>,
    pub dev: Vec<AnnotatedDocument>,
    pub test: Vec<AnnotatedDocument>,
}

impl SyntheticCorpus {
    /// Writes the corpus under `root` in the standard layout.
    pub fn write(&self, root: &Path) -> Result<(), PipelineError> {
        for (split, docs) in [
            (Split::Train, &self.train),
            (Split::Dev, &self.dev),
            (Split::Test, &self.test),
        ] {
            std::fs::create_dir_all(root.join(split.name())).map_err(super::io_err(root))?;
            write_documents(root, split, docs)?;
        }
        Ok(())
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn sentence(rng: &mut ChaCha8Rng, text: &mut String, mentions: &mut Vec<(usize, usize)>) {
    let template = TEMPLATES.choose(rng).expect("templates");
    let mut out = String::new();
    let mut rest = *template;
    while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        let slot = &rest[pos..pos + 3];
        rest = &rest[pos + 3..];
        match slot {
            "{d}" => {
                let drug = *DRUGS.choose(rng).expect("drugs");
                let drug = if out.is_empty() {
                    capitalize(drug)
                } else {
                    drug.to_string()
                };
                let start = char_len(text) + char_len(&out);
                out.push_str(&drug);
                mentions.push((start, start + char_len(&drug)));
            }
            _ => out.push_str(&rng.gen_range(1..300).to_string()),
        }
    }
    out.push_str(rest);
    text.push_str(&out);
}

fn document(rng: &mut ChaCha8Rng, id: String) -> AnnotatedDocument {
    let mut text = String::new();
    let mut spans = Vec::new();
    let sentences = rng.gen_range(2..=5);
    for i in 0..sentences {
        if i > 0 {
            text.push(if rng.gen_bool(0.2) { '\n' } else { ' ' });
        }
        sentence(rng, &mut text, &mut spans);
    }
    text.push('\n');
    let chars: Vec<char> = text.chars().collect();
    let mentions = spans
        .into_iter()
        .enumerate()
        .map(|(k, (start, end))| EntityMention {
            id: format!("T{}", k + 1),
            label: Track::Medications.entity_label().to_string(),
            start,
            end,
            surface: chars[start..end].iter().collect(),
        })
        .collect();
    AnnotatedDocument::new(
        TextDocument::new(id, text, Language::Es).expect("generated ids are valid"),
        mentions,
    )
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut split = |prefix: &str, n: usize| -> Vec<AnnotatedDocument> {
        (0..n).map(|i| document(&mut rng, format!("{prefix}-{i:04}"))).collect()
    };
    SyntheticCorpus {
        train: split("train", spec.train_docs),
        dev: split("dev", spec.dev_docs),
        test: split("test", spec.test_docs),
    }
}
