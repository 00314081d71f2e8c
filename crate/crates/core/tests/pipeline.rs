use std::fs;
use std::time::Duration;

use clinical_ner::brat::parse_ann;
use clinical_ner::pipeline::synthetic::{generate, SyntheticSpec};
use clinical_ner::pipeline::{
    load_corpus, run_experiment, run_predict, train_model, LoadOptions, Predictor, RunConfig, Split, TaggerKind,
};
use clinical_ner::segment::DEFAULT_MAX_TOKENS;
use clinical_ner::taggers::BridgeConfig;

fn setup() -> (tempfile::TempDir, clinical_ner::pipeline::Corpus) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("es");
    generate(&SyntheticSpec {
        train_docs: 20,
        dev_docs: 5,
        test_docs: 5,
        seed: 7,
    })
    .write(&root)
    .unwrap();
    fs::create_dir_all(root.join("background")).unwrap();
    for i in 0..3 {
        fs::write(
            root.join(format!("background/bg{i}.txt")),
            "Se pauta furosemida.\nSin otros cambios.\n",
        )
        .unwrap();
    }
    let corpus = load_corpus(&root, &LoadOptions::default()).unwrap();
    (dir, corpus)
}

#[test]
fn gazetteer_predictions_satisfy_the_slice_law() {
    let (dir, corpus) = setup();
    let model = train_model(
        TaggerKind::Gazetteer,
        corpus.split(Split::Train).unwrap(),
        &corpus.track().tagset(),
        DEFAULT_MAX_TOKENS,
        1,
        0,
    )
    .unwrap();
    let out = dir.path().join("pred");
    let mut predictor = Predictor::Model(model);
    let outcome = run_predict(
        &mut predictor,
        &corpus,
        &[Split::Dev, Split::Background],
        &out,
        DEFAULT_MAX_TOKENS,
        None,
    )
    .unwrap();

    for doc in corpus.split(Split::Dev).unwrap() {
        let ann = fs::read_to_string(out.join("dev").join(format!("{}.ann", doc.doc_id()))).unwrap();
        let parsed = parse_ann(&doc.document, &ann).unwrap();
        let chars: Vec<char> = doc.document.text().chars().collect();
        for m in &parsed.mentions {
            assert_eq!(chars[m.start..m.end].iter().collect::<String>(), m.surface);
        }
    }
    for i in 0..3 {
        let ann = fs::read_to_string(out.join(format!("background/bg{i}.ann"))).unwrap();
        assert_eq!(ann, "T1\tFARMACO 9 19\tfurosemida\n");
    }
    assert_eq!(outcome.manifest.splits[&Split::Background].documents, 3);
}

#[test]
fn echo_bridge_produces_empty_annotations() {
    let (dir, corpus) = setup();
    let config = BridgeConfig::new(vec![env!("CARGO_BIN_EXE_scripted-tagger").into(), "echo".into()]);
    let mut predictor = Predictor::launch_bridge(config, corpus.track()).unwrap();
    let out = dir.path().join("pred");
    let outcome = run_predict(&mut predictor, &corpus, &[Split::Test], &out, DEFAULT_MAX_TOKENS, None).unwrap();
    predictor.finish().unwrap();
    assert_eq!(outcome.manifest.model.name.as_deref(), Some("scripted-echo"));
    let files: Vec<_> = fs::read_dir(out.join("test")).unwrap().collect();
    assert_eq!(files.len(), 5);
    for f in files {
        assert_eq!(fs::read_to_string(f.unwrap().path()).unwrap(), "");
    }
}

#[test]
fn bridge_experiment_scores_lexicon_double() {
    let (dir, corpus) = setup();
    let lexicon = "match:aspirina,enalapril,atorvastatina,bisoprolol,furosemida,clopidogrel,amiodarona,warfarina";
    let mut config = RunConfig::new(TaggerKind::Bridge, &corpus.manifest.root, dir.path().join("run"));
    config.bridge_cmd = Some(format!("{} {lexicon}", env!("CARGO_BIN_EXE_scripted-tagger")));
    config.batch_timeout_secs = 10;
    let outcome = run_experiment(&config).unwrap();
    // Single-word drugs are found; the two multi-word ones are not.
    assert!(outcome.test.metrics.precision > 0.99, "{:?}", outcome.test.metrics);
    assert!(outcome.test.metrics.recall > 0.3 && outcome.test.metrics.recall < 1.0);
    let bridge = config.bridge_config().unwrap().unwrap();
    assert_eq!(bridge.batch_timeout, Duration::from_secs(10));
    assert!(!dir.path().join("run/model.txt").exists());
}

#[test]
fn perceptron_dev_tracks_test() {
    let (dir, corpus) = setup();
    let config = RunConfig::new(TaggerKind::Perceptron, &corpus.manifest.root, dir.path().join("run"));
    let outcome = run_experiment(&config).unwrap();
    assert!(outcome.dev.metrics.f1 >= outcome.test.metrics.f1 - 0.05);
    assert!(!outcome.gap.flagged);
}
