//! Corpus loading, prediction runs and dev/test experiments over the
//! `<root>/<split>/<doc_id>.txt|.ann` layout.

mod config;
mod corpus;
mod run;
pub mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

use crate::bio::{BioError, Track};
use crate::brat::{BratError, ValidationReport};
use crate::eval::EvalError;
use crate::taggers::{ModelError, TaggerError};

pub use config::{RunConfig, TaggerKind};
pub use corpus::{
    aggregate_corpora, load_corpus, load_predictions, write_documents, Corpus, CorpusManifest, LoadOptions, Split,
};
pub use run::{
    labeled_sentences, predict_document, read_split_predictions, run_experiment, run_predict, train_model,
    ExperimentOutcome, ModelProvenance, PredictOutcome, Predictor, RunManifest, SplitSummary,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{root}: no `{split}` split")]
    MissingSplit { root: PathBuf, split: Split },
    #[error("{0}: no train/dev/test/background directories")]
    NoSplits(PathBuf),
    #[error("corpus failed validation:\n{0}")]
    ValidationFailure(ValidationReport),
    #[error("{split}/{doc_id}: missing .ann file")]
    MissingAnnotation { split: Split, doc_id: String },
    #[error("{split}/{doc_id}: .ann file without .txt")]
    OrphanAnnotation { split: Split, doc_id: String },
    #[error("document {doc_id} appears in both {first} and {second}")]
    OverlappingSplits {
        doc_id: String,
        first: Split,
        second: Split,
    },
    #[error("track mismatch: expected {expected}, found {found}")]
    TrackMismatch { expected: Track, found: String },
    #[error("{0}: cannot infer the track from the annotations; pass it explicitly")]
    UnknownTrack(PathBuf),
    #[error("document {doc_id}: {source}")]
    Tagging {
        doc_id: String,
        #[source]
        source: TaggerError,
    },
    #[error("document {doc_id}: {source}")]
    Encoding {
        doc_id: String,
        #[source]
        source: BioError,
    },
    #[error("{path}: {source}")]
    InvalidPrediction {
        path: PathBuf,
        #[source]
        source: BratError,
    },
    #[error(transparent)]
    Training(#[from] TaggerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let path = path.into();
    move |source| PipelineError::Io { path, source }
}
