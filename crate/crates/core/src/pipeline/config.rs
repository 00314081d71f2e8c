use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use super::PipelineError;
use crate::bio::Track;
use crate::brat::Language;
use crate::eval::DEFAULT_OVERFIT_THRESHOLD;
use crate::segment::DEFAULT_MAX_TOKENS;
use crate::taggers::BridgeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggerKind {
    Gazetteer,
    Perceptron,
    Bridge,
}

impl fmt::Display for TaggerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaggerKind::Gazetteer => "gazetteer",
            TaggerKind::Perceptron => "perceptron",
            TaggerKind::Bridge => "bridge",
        })
    }
}

impl FromStr for TaggerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gazetteer" => Ok(TaggerKind::Gazetteer),
            "perceptron" => Ok(TaggerKind::Perceptron),
            "bridge" => Ok(TaggerKind::Bridge),
            _ => Err(format!(
                "unknown tagger {s:?} (expected gazetteer, perceptron or bridge)"
            )),
        }
    }
}

/// Settings for one experiment, read from `key = value` lines.
///
/// ```text
/// # perceptron on the Spanish medications corpus
/// tagger = perceptron
/// root = corpora/es
/// output = runs/es-meds
/// epochs = 5
/// seed = 13
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub tagger: TaggerKind,
    pub root: PathBuf,
    pub output: PathBuf,
    pub track: Option<Track>,
    pub language: Option<Language>,
    pub max_tokens: usize,
    pub seed: u64,
    pub epochs: usize,
    pub bridge_cmd: Option<String>,
    /// Passed to the external tagger as `NER_BATCH_SIZE`; also the number of
    /// sentences per request.
    pub batch_size: usize,
    /// Passed to the external tagger as `NER_LEARNING_RATE`.
    pub learning_rate: f64,
    pub handshake_timeout_secs: u64,
    pub batch_timeout_secs: u64,
    pub overfit_threshold: f64,
    pub lenient: bool,
}

impl RunConfig {
    pub fn new(tagger: TaggerKind, root: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            tagger,
            root: root.into(),
            output: output.into(),
            track: None,
            language: None,
            max_tokens: DEFAULT_MAX_TOKENS,
            seed: 13,
            epochs: 5,
            bridge_cmd: None,
            batch_size: 8,
            learning_rate: 9e-6,
            handshake_timeout_secs: 60,
            batch_timeout_secs: 120,
            overfit_threshold: DEFAULT_OVERFIT_THRESHOLD,
            lenient: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| PipelineError::Config {
                line: i + 1,
                reason: "expected key = value".into(),
            })?;
            pairs.push((i + 1, key.trim(), value.trim()));
        }

        let find = |name: &str| pairs.iter().find(|(_, k, _)| *k == name).map(|(n, _, v)| (*n, *v));
        let required = |name: &str| {
            find(name).ok_or_else(|| PipelineError::Config {
                line: 0,
                reason: format!("missing required key `{name}`"),
            })
        };
        let (n, tagger) = required("tagger")?;
        let tagger = tagger
            .parse()
            .map_err(|reason| PipelineError::Config { line: n, reason })?;
        let mut config = RunConfig::new(tagger, required("root")?.1, required("output")?.1);

        for &(line, key, value) in &pairs {
            let bad = |reason: String| PipelineError::Config { line, reason };
            fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
                value
                    .parse()
                    .map_err(|_| format!("`{key}` must be a number, got {value:?}"))
            }
            match key {
                "tagger" | "root" | "output" => {}
                "track" | "labels" => {
                    config.track = Some(value.parse().map_err(|e: crate::bio::BioError| bad(e.to_string()))?)
                }
                "language" => {
                    config.language = Some(value.parse().map_err(|e: crate::brat::BratError| bad(e.to_string()))?)
                }
                "max_tokens" => config.max_tokens = num(key, value).map_err(bad)?,
                "seed" => config.seed = num(key, value).map_err(bad)?,
                "epochs" => config.epochs = num(key, value).map_err(bad)?,
                "bridge_cmd" => config.bridge_cmd = Some(value.to_string()),
                "batch_size" => config.batch_size = num(key, value).map_err(bad)?,
                "learning_rate" => config.learning_rate = num(key, value).map_err(bad)?,
                "handshake_timeout" => config.handshake_timeout_secs = num(key, value).map_err(bad)?,
                "batch_timeout" => config.batch_timeout_secs = num(key, value).map_err(bad)?,
                "overfit_threshold" => config.overfit_threshold = num(key, value).map_err(bad)?,
                "lenient" => {
                    config.lenient = value
                        .parse()
                        .map_err(|_| bad(format!("`lenient` must be true or false, got {value:?}")))?
                }
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |reason: &str| {
            Err(PipelineError::Config {
                line: 0,
                reason: reason.to_string(),
            })
        };
        if self.max_tokens < 2 {
            return bad("max_tokens must be at least 2");
        }
        if self.tagger == TaggerKind::Perceptron && self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.tagger == TaggerKind::Bridge && self.bridge_cmd.is_none() {
            return bad("tagger = bridge requires bridge_cmd");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }

    /// Bridge settings with the hyperparameters exported to the child.
    pub fn bridge_config(&self) -> Result<Option<BridgeConfig>, PipelineError> {
        let Some(cmd) = &self.bridge_cmd else { return Ok(None) };
        let mut config = BridgeConfig::from_command_line(cmd)?;
        config.handshake_timeout = Duration::from_secs(self.handshake_timeout_secs);
        config.batch_timeout = Duration::from_secs(self.batch_timeout_secs);
        config.max_batch_sentences = self.batch_size;
        config.env = vec![
            ("NER_BATCH_SIZE".into(), self.batch_size.to_string()),
            ("NER_LEARNING_RATE".into(), self.learning_rate.to_string()),
            ("NER_MAX_SEQUENCE_LENGTH".into(), (self.max_tokens + 2).to_string()),
            ("NER_SEED".into(), self.seed.to_string()),
        ];
        config.validate()?;
        Ok(Some(config))
    }
}
