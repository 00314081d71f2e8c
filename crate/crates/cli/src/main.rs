use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use clinical_ner::bio::{to_conll, Track};
use clinical_ner::brat::Language;
use clinical_ner::eval::{evaluate_corpus, per_document_tsv, render_diff, report_tsv};
use clinical_ner::pipeline::{
    labeled_sentences, load_corpus, read_split_predictions, run_experiment, run_predict, train_model, LoadOptions,
    PipelineError, Predictor, RunConfig, Split, TaggerKind,
};
use clinical_ner::segment::{segment_text, DEFAULT_MAX_TOKENS};
use clinical_ner::taggers::{BridgeConfig, Model};

#[derive(Parser)]
#[command(
    name = "clinical-ner",
    version,
    about = "Clinical named-entity recognition over BRAT corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Override the language inferred from the directory name.
    #[arg(long)]
    language: Option<Language>,
    /// diseases or medications; inferred from the labels when omitted.
    #[arg(long)]
    track: Option<Track>,
    /// Skip invalid documents instead of failing.
    #[arg(long)]
    lenient: bool,
}

impl CorpusArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            language: self.language,
            track: self.track,
            lenient: self.lenient,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate every `.txt`/`.ann` pair under a corpus root.
    Check {
        root: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Print the tokens of a text file as `surface<TAB>start<TAB>end`.
    Segment {
        file: PathBuf,
        #[arg(long, default_value = "es")]
        language: Language,
        #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
        max_tokens: usize,
    },
    /// Print one split as CoNLL: surface, start, end, label.
    Encode {
        root: PathBuf,
        #[arg(long)]
        split: Split,
        #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
        max_tokens: usize,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Train on the `train` split and write a model file.
    Train {
        #[arg(long)]
        tagger: TaggerKind,
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 13)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
        max_tokens: usize,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Write predicted `.ann` files for the given splits.
    Predict {
        #[arg(long, required_unless_present = "bridge_cmd")]
        model: Option<PathBuf>,
        #[arg(long)]
        root: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "test")]
        splits: Vec<Split>,
        #[arg(long)]
        out: PathBuf,
        /// Command line of an external tagger speaking the bridge protocol.
        #[arg(long, conflicts_with = "model")]
        bridge_cmd: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
        max_tokens: usize,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Score predictions against gold with exact-match micro P/R/F1.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        split: Split,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write one row per document here.
        #[arg(long)]
        per_doc: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Write one colour-coded HTML page per document.
    RenderDiff {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Train, predict dev and test, score both and compare them.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(root: &Path, args: &CorpusArgs) -> Result<clinical_ner::pipeline::Corpus> {
    let corpus = load_corpus(root, &args.options()).with_context(|| format!("loading {}", root.display()))?;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    Ok(corpus)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { root, corpus } => match load_corpus(&root, &corpus.options()) {
            Ok(c) => {
                for w in &c.warnings {
                    eprintln!("warning: {w}");
                }
                for (split, docs) in c.splits() {
                    let mentions: usize = docs.iter().map(|d| d.mentions.len()).sum();
                    println!("{split}\t{} documents\t{mentions} mentions", docs.len());
                }
                println!("track {}: ok", c.track());
                Ok(ExitCode::SUCCESS)
            }
            Err(PipelineError::ValidationFailure(report)) => {
                println!("{report}");
                Ok(ExitCode::FAILURE)
            }
            Err(e) => Err(e.into()),
        },

        Command::Segment {
            file,
            language,
            max_tokens,
        } => {
            if max_tokens < 2 {
                bail!("--max-tokens must be at least 2");
            }
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let mut out = String::new();
            for (i, sentence) in segment_text(&text, language, max_tokens).iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                for t in sentence.tokens() {
                    out.push_str(&format!("{}\t{}\t{}\n", t.surface, t.start, t.end));
                }
            }
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Encode {
            root,
            split,
            max_tokens,
            corpus,
        } => {
            let c = load(&root, &corpus)?;
            let (sentences, warnings) = labeled_sentences(c.split(split)?, &c.track().tagset(), max_tokens)?;
            if warnings.total() > 0 {
                eprintln!("warning: {warnings:?}");
            }
            print!("{}", to_conll(&sentences));
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            tagger,
            root,
            out,
            epochs,
            seed,
            max_tokens,
            corpus,
        } => {
            let c = load(&root, &corpus)?;
            let train = c.nonempty_split(Split::Train)?;
            let model = train_model(tagger, train, &c.track().tagset(), max_tokens, epochs, seed)?;
            write_file(&out, &model.to_text())?;
            println!("{}\t{}\t{}", model.kind(), model.checksum(), out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Predict {
            model,
            root,
            splits,
            out,
            bridge_cmd,
            max_tokens,
            corpus,
        } => {
            let c = load(&root, &corpus)?;
            let mut predictor = match (model, bridge_cmd) {
                (_, Some(cmd)) => Predictor::launch_bridge(BridgeConfig::from_command_line(&cmd)?, c.track())?,
                (Some(path), None) => {
                    let text =
                        fs::read_to_string(&path).with_context(|| format!("reading model {}", path.display()))?;
                    let model = Model::from_text(&text).with_context(|| format!("loading model {}", path.display()))?;
                    if model.tagset() != &c.track().tagset() {
                        bail!(
                            "model labels {:?} do not match the {} corpus",
                            model.tagset().entity_labels(),
                            c.track()
                        );
                    }
                    Predictor::Model(model)
                }
                (None, None) => bail!("either --model or --bridge-cmd is required"),
            };
            let outcome = run_predict(&mut predictor, &c, &splits, &out, max_tokens, None)?;
            predictor.finish()?;
            for (split, summary) in &outcome.manifest.splits {
                println!(
                    "{split}\t{} documents\t{} mentions",
                    summary.documents, summary.mentions
                );
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Evaluate {
            gold,
            pred,
            split,
            report,
            per_doc,
            corpus,
        } => {
            let c = load(&gold, &corpus)?;
            let (predictions, orphans) = read_split_predictions(&c, split, &pred)?;
            let mut r = evaluate_corpus(
                c.split(split)?,
                &predictions,
                c.manifest.language,
                c.track(),
                split.name(),
            );
            for id in &orphans {
                eprintln!("warning: prediction {id} has no gold document");
            }
            r.pred_only.extend(orphans);
            let tsv = report_tsv(std::slice::from_ref(&r));
            print!("{tsv}");
            if let Some(path) = report {
                write_file(&path, &tsv)?;
            }
            if let Some(path) = per_doc {
                write_file(&path, &per_document_tsv(&r))?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::RenderDiff {
            gold,
            pred,
            out,
            split,
            corpus,
        } => {
            let c = load(&gold, &corpus)?;
            let (predictions, _) = read_split_predictions(&c, split, &pred)?;
            let mut written = 0;
            for doc in c.split(split)? {
                let predicted = predictions
                    .iter()
                    .find(|p| p.doc_id() == doc.doc_id())
                    .map_or(&[][..], |p| &p.mentions[..]);
                let html = render_diff(&doc.document, &doc.mentions, predicted);
                write_file(&out.join(format!("{}.html", doc.doc_id())), &html)?;
                written += 1;
            }
            println!("{written} pages written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Experiment { config } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let config = RunConfig::parse(&text)?;
            let outcome = run_experiment(&config)?;
            print!("{}", report_tsv(&[outcome.dev, outcome.test]));
            println!("{}", outcome.gap);
            Ok(ExitCode::SUCCESS)
        }
    }
}
