//! Sentence-labeling engines behind one contract.
//!
//! Every tagger returns one label per token, drawn from the tag set's word
//! labels, as a valid BIO sequence.

use std::io;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::bio::{BioError, BioLabel, TagSet};
use crate::segment::Sentence;

pub mod bridge;
pub mod features;
pub mod gazetteer;
pub mod model;
pub mod perceptron;

pub use bridge::{external_tag, BridgeClient, BridgeConfig};
pub use gazetteer::{train_gazetteer, GazetteerModel};
pub use model::{Model, ModelError};
pub use perceptron::{train_perceptron, viterbi_decode, PerceptronModel, TrainingMeta};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("label {0:?} is not in the tag set")]
    UnknownLabel(String),
    #[error("invalid training data: {0}")]
    InvalidTrainingData(#[from] BioError),
    #[error("invalid bridge configuration: {0}")]
    InvalidConfig(String),
    #[error("could not launch external tagger: {0}")]
    BridgeLaunchFailure(String),
    #[error("external tagger did not answer the handshake within {0:?}")]
    HandshakeTimeout(std::time::Duration),
    #[error("external tagger did not answer batch {batch_id} within {timeout:?}")]
    BatchTimeout {
        batch_id: u64,
        timeout: std::time::Duration,
    },
    #[error("bridge protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("bridge I/O: {0}")]
    Io(#[from] io::Error),
}

pub trait Tagger {
    fn tagset(&self) -> &TagSet;

    /// One label sequence per sentence, each as long as the sentence.
    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError>;
}

/// Lowercase of the NFC form, the key used for lexical lookups.
pub fn normalize(surface: &str) -> String {
    surface.nfc().collect::<String>().to_lowercase()
}
