use std::time::{Duration, Instant};

use clinical_ner::bio::{BioLabel, TagSet};
use clinical_ner::segment::{Sentence, Token};
use clinical_ner::taggers::{external_tag, BridgeClient, BridgeConfig, Tagger, TaggerError};

fn config(mode: &str) -> BridgeConfig {
    let mut c = BridgeConfig::new(vec![
        env!("CARGO_BIN_EXE_scripted-tagger").to_string(),
        mode.to_string(),
    ]);
    c.handshake_timeout = Duration::from_secs(5);
    c.batch_timeout = Duration::from_millis(500);
    c
}

fn sentence(words: &[&str]) -> Sentence {
    let mut pos = 0;
    let tokens = words
        .iter()
        .map(|w| {
            let t = Token {
                surface: w.to_string(),
                start: pos,
                end: pos + w.chars().count(),
            };
            pos = t.end + 1;
            t
        })
        .collect();
    Sentence::new(tokens).unwrap()
}

fn l(s: &str) -> BioLabel {
    s.parse().unwrap()
}

#[test]
fn echo_returns_all_o() {
    let labels = external_tag(&config("echo"), &[sentence(&["a", "b"])], &TagSet::medications()).unwrap();
    assert_eq!(labels, vec![vec![BioLabel::O, BioLabel::O]]);
}

#[test]
fn invalid_sequences_are_repaired() {
    let labels = external_tag(&config("invalid"), &[sentence(&["a", "b", "c"])], &TagSet::diseases()).unwrap();
    assert_eq!(
        labels,
        vec![vec![l("B-ENFERMEDAD"), l("I-ENFERMEDAD"), l("I-ENFERMEDAD")]]
    );
}

#[test]
fn lexicon_double_over_many_batches() {
    let sentences: Vec<Sentence> = (0..21)
        .map(|i| {
            if i % 2 == 0 {
                sentence(&["Toma", "aspirina"])
            } else {
                sentence(&["nada"])
            }
        })
        .collect();
    let mut cfg = config("match:aspirina");
    cfg.max_batch_sentences = 4;
    let labels = external_tag(&cfg, &sentences, &TagSet::medications()).unwrap();
    assert_eq!(labels.len(), 21);
    assert_eq!(labels[0], vec![BioLabel::O, l("B-FARMACO")]);
    assert_eq!(labels[1], vec![BioLabel::O]);
}

#[test]
fn wrong_length_is_a_protocol_violation() {
    let err = external_tag(
        &config("wrong-length"),
        &[sentence(&["a", "b"])],
        &TagSet::medications(),
    );
    assert!(matches!(err, Err(TaggerError::ProtocolViolation(_))), "{err:?}");
}

#[test]
fn garbage_is_a_protocol_violation() {
    let err = external_tag(&config("garbage"), &[sentence(&["a"])], &TagSet::medications());
    assert!(matches!(err, Err(TaggerError::ProtocolViolation(_))), "{err:?}");
}

#[test]
fn unknown_label_is_rejected() {
    let err = external_tag(&config("unknown-label"), &[sentence(&["a"])], &TagSet::medications());
    assert!(
        matches!(err, Err(TaggerError::UnknownLabel(ref s)) if s == "B-NOPE"),
        "{err:?}"
    );
}

#[test]
fn crash_mid_batch_is_reported() {
    let err = external_tag(&config("crash"), &[sentence(&["a"])], &TagSet::medications());
    assert!(matches!(err, Err(TaggerError::ProtocolViolation(_))), "{err:?}");
}

#[test]
fn hang_times_out() {
    let started = Instant::now();
    let err = external_tag(&config("hang"), &[sentence(&["a"])], &TagSet::medications());
    assert!(
        matches!(err, Err(TaggerError::BatchTimeout { batch_id: 0, .. })),
        "{err:?}"
    );
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn silent_child_fails_the_handshake() {
    let mut cfg = config("silent");
    cfg.handshake_timeout = Duration::from_millis(300);
    let err = BridgeClient::launch(cfg, TagSet::medications()).err();
    assert!(matches!(err, Some(TaggerError::HandshakeTimeout(_))), "{err:?}");
}

#[test]
fn missing_program_fails_to_launch() {
    let cfg = BridgeConfig::new(vec!["/nonexistent/tagger-binary".into()]);
    let err = BridgeClient::launch(cfg, TagSet::medications()).err();
    assert!(matches!(err, Some(TaggerError::BridgeLaunchFailure(_))), "{err:?}");
}

#[test]
fn client_reports_name_and_shuts_down() {
    let mut client = BridgeClient::launch(config("echo"), TagSet::medications()).unwrap();
    assert_eq!(client.name(), "scripted-echo");
    assert_eq!(client.tag(&[]).unwrap(), Vec::<Vec<BioLabel>>::new());
    client.shutdown().unwrap();
}
