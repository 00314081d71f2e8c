//! Client for external taggers speaking line-delimited JSON over stdio.
//!
//! ```text
//! -> {"type":"hello","protocol":1,"labels":["O","B-FARMACO","I-FARMACO","[CLS]","[SEP]"]}
//! <- {"type":"ready","name":"..."}
//! -> {"type":"tag","batch_id":0,"sentences":[{"tokens":[{"text":"aspirina","start":20,"end":28}]}]}
//! <- {"type":"labels","batch_id":0,"labels":[["B-FARMACO"]]}
//! -> {"type":"bye"}
//! ```
//!
//! One request is in flight at a time. Every returned sequence is checked
//! against the tag set and passed through [`repair_labels`].

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Tagger, TaggerError};
use crate::bio::{repair_labels, BioLabel, TagSet};
use crate::segment::Sentence;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig {
    /// Program and arguments.
    pub command: Vec<String>,
    pub handshake_timeout: Duration,
    pub batch_timeout: Duration,
    pub max_batch_sentences: usize,
    /// Extra environment for the child (e.g. training hyperparameters).
    pub env: Vec<(String, String)>,
}

impl BridgeConfig {
    pub fn new(command: Vec<String>) -> Self {
        BridgeConfig {
            command,
            handshake_timeout: Duration::from_secs(60),
            batch_timeout: Duration::from_secs(120),
            max_batch_sentences: 8,
            env: Vec::new(),
        }
    }

    /// Splits a shell-style command line (`python serve.py --model "m dir"`).
    pub fn from_command_line(line: &str) -> Result<Self, TaggerError> {
        let argv =
            shlex::split(line).ok_or_else(|| TaggerError::InvalidConfig(format!("cannot parse command {line:?}")))?;
        let config = BridgeConfig::new(argv);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), TaggerError> {
        if self.command.is_empty() {
            return Err(TaggerError::InvalidConfig("empty bridge command".into()));
        }
        if self.handshake_timeout.is_zero() || self.batch_timeout.is_zero() {
            return Err(TaggerError::InvalidConfig("timeouts must be positive".into()));
        }
        if self.max_batch_sentences == 0 {
            return Err(TaggerError::InvalidConfig("max batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Request<'a> {
    Hello {
        protocol: u32,
        labels: Vec<String>,
    },
    Tag {
        batch_id: u64,
        sentences: Vec<WireSentence<'a>>,
    },
    Bye,
}

#[derive(Debug, Serialize)]
struct WireSentence<'a> {
    tokens: Vec<WireToken<'a>>,
}

#[derive(Debug, Serialize)]
struct WireToken<'a> {
    text: &'a str,
    start: usize,
    end: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Reply {
    Ready { name: String },
    Labels { batch_id: u64, labels: Vec<Vec<String>> },
}

/// A running external tagger. Dropping it kills the child.
pub struct BridgeClient {
    config: BridgeConfig,
    tagset: TagSet,
    child: Child,
    stdin: Option<ChildStdin>,
    replies: Receiver<std::io::Result<String>>,
    name: String,
    next_batch: u64,
}

impl BridgeClient {
    /// Starts the process and completes the handshake.
    pub fn launch(config: BridgeConfig, tagset: TagSet) -> Result<Self, TaggerError> {
        config.validate()?;
        let mut child = Command::new(&config.command[0])
            .args(&config.command[1..])
            .envs(config.env.iter().map(|(k, v)| (k, v)))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| TaggerError::BridgeLaunchFailure(format!("{}: {e}", config.command[0])))?;

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let stdin = child.stdin.take();
        let mut client = BridgeClient {
            config,
            tagset,
            child,
            stdin,
            replies,
            name: String::new(),
            next_batch: 0,
        };
        client.handshake()?;
        Ok(client)
    }

    /// Name announced by the tagger in its `ready` reply.
    pub fn name(&self) -> &str {
        &self.name
    }

    fn send(&mut self, request: &Request<'_>) -> Result<(), TaggerError> {
        let mut line = serde_json::to_string(request).expect("requests serialize");
        line.push('\n');
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| TaggerError::ProtocolViolation("bridge already shut down".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|()| stdin.flush())
            .map_err(|e| TaggerError::ProtocolViolation(format!("tagger stopped reading: {e}")))
    }

    fn receive(&mut self, timeout: Duration, on_timeout: TaggerError) -> Result<Reply, TaggerError> {
        match self.replies.recv_timeout(timeout) {
            Ok(Ok(line)) => serde_json::from_str(&line)
                .map_err(|e| TaggerError::ProtocolViolation(format!("malformed reply {line:?}: {e}"))),
            Ok(Err(e)) => Err(TaggerError::ProtocolViolation(format!("unreadable reply: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                Err(on_timeout)
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(TaggerError::ProtocolViolation("tagger closed its output".into()))
            }
        }
    }

    fn handshake(&mut self) -> Result<(), TaggerError> {
        let labels = self.tagset.alphabet().iter().map(ToString::to_string).collect();
        self.send(&Request::Hello {
            protocol: PROTOCOL_VERSION,
            labels,
        })
        .map_err(|e| TaggerError::BridgeLaunchFailure(e.to_string()))?;
        let timeout = self.config.handshake_timeout;
        match self.receive(timeout, TaggerError::HandshakeTimeout(timeout)) {
            Ok(Reply::Ready { name }) => {
                self.name = name;
                Ok(())
            }
            Ok(other) => Err(TaggerError::ProtocolViolation(format!("expected ready, got {other:?}"))),
            Err(TaggerError::ProtocolViolation(msg)) if msg.contains("closed") => Err(
                TaggerError::BridgeLaunchFailure("tagger exited before the handshake".into()),
            ),
            Err(e) => Err(e),
        }
    }

    /// Tags one batch. The whole batch is rejected on any length or label error.
    pub fn tag_batch(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        let batch_id = self.next_batch;
        self.next_batch += 1;
        let wire = sentences
            .iter()
            .map(|s| WireSentence {
                tokens: s
                    .tokens()
                    .iter()
                    .map(|t| WireToken {
                        text: &t.surface,
                        start: t.start,
                        end: t.end,
                    })
                    .collect(),
            })
            .collect();
        self.send(&Request::Tag {
            batch_id,
            sentences: wire,
        })?;

        let timeout = self.config.batch_timeout;
        let reply = self.receive(timeout, TaggerError::BatchTimeout { batch_id, timeout })?;
        let Reply::Labels { batch_id: got, labels } = reply else {
            return Err(TaggerError::ProtocolViolation(format!(
                "expected labels for batch {batch_id}, got {reply:?}"
            )));
        };
        if got != batch_id {
            return Err(TaggerError::ProtocolViolation(format!(
                "reply for batch {got} while waiting for {batch_id}"
            )));
        }
        if labels.len() != sentences.len() {
            return Err(TaggerError::ProtocolViolation(format!(
                "batch {batch_id}: {} label sequences for {} sentences",
                labels.len(),
                sentences.len()
            )));
        }
        sentences
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (sentence, raw))| {
                if raw.len() != sentence.len() {
                    return Err(TaggerError::ProtocolViolation(format!(
                        "batch {batch_id}, sentence {i}: {} labels for {} tokens",
                        raw.len(),
                        sentence.len()
                    )));
                }
                let parsed = raw
                    .iter()
                    .map(|s| {
                        self.tagset
                            .parse_label(s)
                            .map_err(|_| TaggerError::UnknownLabel(s.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(repair_labels(&parsed))
            })
            .collect()
    }

    /// Sends `bye` and waits for the process to exit.
    pub fn shutdown(mut self) -> Result<(), TaggerError> {
        self.send(&Request::Bye)?;
        self.stdin = None;
        let status = self.child.wait()?;
        if status.success() {
            Ok(())
        } else {
            Err(TaggerError::ProtocolViolation(format!("tagger exited with {status}")))
        }
    }

    fn kill(&mut self) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        if matches!(self.child.try_wait(), Ok(None)) {
            self.kill();
        }
    }
}

impl Tagger for BridgeClient {
    fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        let mut out = Vec::with_capacity(sentences.len());
        for batch in sentences.chunks(self.config.max_batch_sentences) {
            out.extend(self.tag_batch(batch)?);
        }
        Ok(out)
    }
}

/// Launches the tagger, labels `sentences`, and shuts it down.
pub fn external_tag(
    config: &BridgeConfig,
    sentences: &[Sentence],
    tagset: &TagSet,
) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
    let mut client = BridgeClient::launch(config.clone(), tagset.clone())?;
    let labels = client.tag(sentences)?;
    client.shutdown()?;
    Ok(labels)
}
