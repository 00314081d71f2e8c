use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{RunConfig, TaggerKind};
use super::corpus::{load_corpus, load_predictions, Corpus, LoadOptions, Split};
use super::{io_err, PipelineError};
use crate::bio::{decode_bio, encode_bio, repair_labels, AlignmentWarnings, BioLabel, LabeledSentence, TagSet, Track};
use crate::brat::{parse_ann, serialize_ann, AnnotatedDocument, Language, TextDocument};
use crate::eval::{compare_splits, evaluate_corpus, per_document_tsv, report_tsv, EvalReport, GapReport};
use crate::segment::{segment_text, Sentence};
use crate::taggers::{train_gazetteer, train_perceptron, BridgeClient, BridgeConfig, Model, Tagger, TaggerError};

/// Segments and encodes `docs` into training sentences.
pub fn labeled_sentences(
    docs: &[AnnotatedDocument],
    tagset: &TagSet,
    max_tokens: usize,
) -> Result<(Vec<LabeledSentence>, AlignmentWarnings), PipelineError> {
    let mut sentences = Vec::new();
    let mut warnings = AlignmentWarnings::default();
    for doc in docs {
        let segmented = segment_text(doc.document.text(), doc.document.language(), max_tokens);
        let encoded = encode_bio(doc, &segmented, tagset).map_err(|source| PipelineError::Encoding {
            doc_id: doc.doc_id().to_string(),
            source,
        })?;
        sentences.extend(encoded.sentences);
        warnings += encoded.warnings;
    }
    Ok((sentences, warnings))
}

/// Trains a gazetteer or perceptron on `docs`.
pub fn train_model(
    kind: TaggerKind,
    docs: &[AnnotatedDocument],
    tagset: &TagSet,
    max_tokens: usize,
    epochs: usize,
    seed: u64,
) -> Result<Model, PipelineError> {
    match kind {
        TaggerKind::Gazetteer => Ok(train_gazetteer(docs, tagset)?.into()),
        TaggerKind::Perceptron => {
            let (sentences, _) = labeled_sentences(docs, tagset, max_tokens)?;
            Ok(train_perceptron(&sentences, tagset, epochs, seed)?.into())
        }
        TaggerKind::Bridge => {
            Err(TaggerError::InvalidConfig("external taggers are trained outside this tool".into()).into())
        }
    }
}

/// A trained model or a running external tagger.
pub enum Predictor {
    Model(Model),
    Bridge(BridgeClient),
}

impl Predictor {
    pub fn launch_bridge(config: BridgeConfig, track: Track) -> Result<Self, PipelineError> {
        Ok(Predictor::Bridge(BridgeClient::launch(config, track.tagset())?))
    }

    /// What produced the predictions: the model kind and checksum, or the
    /// name the external tagger reported.
    pub fn provenance(&self) -> ModelProvenance {
        match self {
            Predictor::Model(m) => ModelProvenance {
                kind: m.kind().to_string(),
                checksum: Some(m.checksum()),
                name: None,
            },
            Predictor::Bridge(b) => ModelProvenance {
                kind: "bridge".to_string(),
                checksum: None,
                name: Some(b.name().to_string()),
            },
        }
    }

    /// Closes an external tagger cleanly.
    pub fn finish(self) -> Result<(), PipelineError> {
        match self {
            Predictor::Model(_) => Ok(()),
            Predictor::Bridge(b) => Ok(b.shutdown()?),
        }
    }
}

impl Tagger for Predictor {
    fn tagset(&self) -> &TagSet {
        match self {
            Predictor::Model(m) => Tagger::tagset(m),
            Predictor::Bridge(b) => Tagger::tagset(b),
        }
    }

    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        match self {
            Predictor::Model(m) => m.tag(sentences),
            Predictor::Bridge(b) => b.tag(sentences),
        }
    }
}

/// segment → tag → repair → decode for one document.
pub fn predict_document(
    tagger: &mut dyn Tagger,
    doc: &TextDocument,
    max_tokens: usize,
) -> Result<AnnotatedDocument, PipelineError> {
    let doc_id = doc.doc_id().to_string();
    let sentences = segment_text(doc.text(), doc.language(), max_tokens);
    let labels = tagger.tag(&sentences).map_err(|source| PipelineError::Tagging {
        doc_id: doc_id.clone(),
        source,
    })?;
    let encoding = |source| PipelineError::Encoding {
        doc_id: doc_id.clone(),
        source,
    };
    let labeled = sentences
        .into_iter()
        .zip(labels)
        .map(|(s, l)| LabeledSentence::new(s, repair_labels(&l)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(encoding)?;
    let mentions = decode_bio(doc.text(), &labeled).map_err(encoding)?;
    Ok(AnnotatedDocument::new(doc.clone(), mentions))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelProvenance {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSummary {
    pub documents: usize,
    pub mentions: usize,
}

/// Written next to the predictions as `run_manifest.json`. Contains no
/// timestamps, so identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub model: ModelProvenance,
    pub track: Track,
    pub language: Option<Language>,
    pub max_tokens: usize,
    pub splits: BTreeMap<Split, SplitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
}

impl Serialize for Split {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

pub struct PredictOutcome {
    pub predictions: BTreeMap<Split, Vec<AnnotatedDocument>>,
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

/// Predicts every document of `splits` and writes
/// `<out>/<split>/<doc_id>.ann` plus `<out>/run_manifest.json`.
///
/// Every written file is read back and parsed against its text before
/// returning. The corpus root is never written to.
pub fn run_predict(
    predictor: &mut Predictor,
    corpus: &Corpus,
    splits: &[Split],
    out: &Path,
    max_tokens: usize,
    config: Option<&RunConfig>,
) -> Result<PredictOutcome, PipelineError> {
    let mut predictions = BTreeMap::new();
    for &split in splits {
        let docs = corpus.split(split)?;
        let mut predicted = Vec::with_capacity(docs.len());
        for doc in docs {
            predicted.push(predict_document(predictor, &doc.document, max_tokens)?);
        }
        predictions.insert(split, predicted);
    }

    for (split, docs) in &predictions {
        for doc in docs {
            let path = out.join(split.name()).join(format!("{}.ann", doc.doc_id()));
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(&path, serialize_ann(doc)).map_err(io_err(&path))?;
        }
    }

    // Self-consistency sweep over what was just written.
    for (split, docs) in &predictions {
        for doc in docs {
            let path = out.join(split.name()).join(format!("{}.ann", doc.doc_id()));
            let content = fs::read_to_string(&path).map_err(io_err(&path))?;
            parse_ann(&doc.document, &content).map_err(|source| PipelineError::InvalidPrediction {
                path: path.clone(),
                source,
            })?;
        }
    }

    let manifest = RunManifest {
        tool: format!("clinical-ner {}", env!("CARGO_PKG_VERSION")),
        model: predictor.provenance(),
        track: corpus.track(),
        language: corpus.manifest.language,
        max_tokens,
        splits: predictions
            .iter()
            .map(|(s, docs)| {
                (
                    *s,
                    SplitSummary {
                        documents: docs.len(),
                        mentions: docs.iter().map(|d| d.mentions.len()).sum(),
                    },
                )
            })
            .collect(),
        config: config.cloned(),
    };
    let manifest_path = out.join("run_manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&manifest_path, json).map_err(io_err(&manifest_path))?;

    Ok(PredictOutcome {
        predictions,
        manifest,
        manifest_path,
    })
}

pub struct ExperimentOutcome {
    pub dev: EvalReport,
    pub test: EvalReport,
    pub gap: GapReport,
    /// Per-language reports when the corpus is multilingual.
    pub by_language: Vec<(EvalReport, EvalReport)>,
    pub manifest: RunManifest,
}

/// Trains on `train` (unless the tagger is external), predicts `dev` and
/// `test`, scores both and compares them.
///
/// Writes under `config.output`: `model.txt`, `predictions/`,
/// `report.tsv`, `gap.tsv` and per-document TSVs.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutcome, PipelineError> {
    config.validate()?;
    let options = LoadOptions {
        language: config.language,
        track: config.track,
        lenient: config.lenient,
    };
    let corpus = load_corpus(&config.root, &options)?;
    let dev_gold = corpus.nonempty_split(Split::Dev)?;
    let test_gold = corpus.nonempty_split(Split::Test)?;
    let out = &config.output;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let mut predictor = match config.bridge_config()? {
        Some(bridge) if config.tagger == TaggerKind::Bridge => Predictor::launch_bridge(bridge, corpus.track())?,
        _ => {
            let train = corpus.nonempty_split(Split::Train)?;
            let tagset = corpus.track().tagset();
            let model = train_model(
                config.tagger,
                train,
                &tagset,
                config.max_tokens,
                config.epochs,
                config.seed,
            )?;
            let path = out.join("model.txt");
            fs::write(&path, model.to_text()).map_err(io_err(&path))?;
            Predictor::Model(model)
        }
    };

    let pred_root = out.join("predictions");
    let outcome = run_predict(
        &mut predictor,
        &corpus,
        &[Split::Dev, Split::Test],
        &pred_root,
        config.max_tokens,
        Some(config),
    )?;
    predictor.finish()?;

    let score = |split: Split, gold: &[AnnotatedDocument], language: Option<Language>| {
        evaluate_corpus(
            gold,
            &outcome.predictions[&split],
            language,
            corpus.track(),
            split.name(),
        )
    };
    let language = corpus.manifest.language;
    let dev = score(Split::Dev, dev_gold, language);
    let test = score(Split::Test, test_gold, language);
    let gap = compare_splits(&dev, &test, config.overfit_threshold)?;

    let mut by_language = Vec::new();
    if language.is_none() {
        for l in Language::ALL {
            let d = score(Split::Dev, dev_gold, Some(l));
            let t = score(Split::Test, test_gold, Some(l));
            if !d.rows.is_empty() || !t.rows.is_empty() {
                by_language.push((d, t));
            }
        }
    }

    let mut reports = vec![dev.clone(), test.clone()];
    for (d, t) in &by_language {
        reports.push(d.clone());
        reports.push(t.clone());
    }
    write(out.join("report.tsv"), &report_tsv(&reports))?;
    write(
        out.join("gap.tsv"),
        &format!("track\tlanguage\tprecision_gap\trecall_gap\tf1_gap\tstatus\n{gap}\n"),
    )?;
    write(out.join("per_document_dev.tsv"), &per_document_tsv(&dev))?;
    write(out.join("per_document_test.tsv"), &per_document_tsv(&test))?;

    Ok(ExperimentOutcome {
        dev,
        test,
        gap,
        by_language,
        manifest: outcome.manifest,
    })
}

fn write(path: PathBuf, content: &str) -> Result<(), PipelineError> {
    fs::write(&path, content).map_err(io_err(&path))
}

/// Predictions under `pred_root/<split>` read back against the gold split.
pub fn read_split_predictions(
    corpus: &Corpus,
    split: Split,
    pred_root: &Path,
) -> Result<(Vec<AnnotatedDocument>, Vec<String>), PipelineError> {
    load_predictions(corpus.split(split)?, &pred_root.join(split.name()))
}
