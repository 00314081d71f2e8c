//! Scripted stand-in for an external tagger, for exercising the bridge.
//!
//! Usage: `scripted-tagger <mode>` where mode is one of
//! `echo`, `invalid`, `wrong-length`, `hang`, `silent`, `unknown-label`,
//! `garbage`, `crash`, or `match:word1,word2` (single-token lexicon lookup).

use std::io::{self, BufRead, Write};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "echo".to_string());
    if mode == "silent" {
        loop {
            thread::sleep(Duration::from_secs(3600));
        }
    }

    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut entity = "X".to_string();

    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let Ok(msg) = serde_json::from_str::<Value>(&line) else {
            eprintln!("scripted-tagger: unparseable request");
            std::process::exit(2);
        };
        match msg["type"].as_str() {
            Some("hello") => {
                if let Some(label) = msg["labels"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .filter_map(Value::as_str)
                    .find_map(|l| l.strip_prefix("B-"))
                {
                    entity = label.to_string();
                }
                reply(&mut out, &json!({"type": "ready", "name": format!("scripted-{mode}")}));
            }
            Some("tag") => {
                let batch_id = msg["batch_id"].clone();
                let sentences: Vec<Vec<String>> = msg["sentences"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|s| {
                        s["tokens"]
                            .as_array()
                            .into_iter()
                            .flatten()
                            .map(|t| t["text"].as_str().unwrap_or_default().to_string())
                            .collect()
                    })
                    .collect();
                match mode.as_str() {
                    "hang" => loop {
                        thread::sleep(Duration::from_secs(3600));
                    },
                    "garbage" => {
                        let _ = writeln!(out, "this is not json");
                        let _ = out.flush();
                        continue;
                    }
                    "crash" => std::process::exit(3),
                    _ => {}
                }
                let labels: Vec<Vec<String>> = sentences
                    .iter()
                    .map(|tokens| label_sentence(&mode, &entity, tokens))
                    .collect();
                reply(
                    &mut out,
                    &json!({"type": "labels", "batch_id": batch_id, "labels": labels}),
                );
            }
            Some("bye") => return,
            _ => {
                eprintln!("scripted-tagger: unexpected message type");
                std::process::exit(2);
            }
        }
    }
}

fn label_sentence(mode: &str, entity: &str, tokens: &[String]) -> Vec<String> {
    let mut labels: Vec<String> = match mode {
        "invalid" => tokens.iter().map(|_| format!("I-{entity}")).collect(),
        "unknown-label" => tokens.iter().map(|_| "B-NOPE".to_string()).collect(),
        m if m.starts_with("match:") => {
            let words: Vec<String> = m["match:".len()..].split(',').map(str::to_lowercase).collect();
            tokens
                .iter()
                .map(|t| {
                    if words.contains(&t.to_lowercase()) {
                        format!("B-{entity}")
                    } else {
                        "O".to_string()
                    }
                })
                .collect()
        }
        _ => tokens.iter().map(|_| "O".to_string()).collect(),
    };
    if mode == "wrong-length" {
        labels.pop();
    }
    labels
}

fn reply(out: &mut impl Write, value: &Value) {
    let _ = writeln!(out, "{value}");
    let _ = out.flush();
}
