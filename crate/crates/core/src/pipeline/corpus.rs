use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{io_err, PipelineError};
use crate::bio::Track;
use crate::brat::{
    parse_ann, scan_ann, serialize_ann, AnnotatedDocument, BratError, DocumentValidation, Language, TextDocument,
    ValidationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
    Background,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Dev, Split::Test, Split::Background];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
            Split::Background => "background",
        }
    }

    /// Background documents may come without `.ann` files.
    pub fn is_annotated(self) -> bool {
        self != Split::Background
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown split {s:?} (expected train, dev, test or background)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub root: PathBuf,
    /// `None` for an aggregated multilingual corpus.
    pub language: Option<Language>,
    pub track: Track,
    pub splits: BTreeMap<Split, Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub language: Option<Language>,
    pub track: Option<Track>,
    /// Skip invalid documents with a warning instead of failing.
    pub lenient: bool,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    documents: BTreeMap<Split, Vec<AnnotatedDocument>>,
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn track(&self) -> Track {
        self.manifest.track
    }

    pub fn has_split(&self, split: Split) -> bool {
        self.documents.contains_key(&split)
    }

    /// Documents of `split`, ordered by id. Absent splits are an error.
    pub fn split(&self, split: Split) -> Result<&[AnnotatedDocument], PipelineError> {
        self.documents
            .get(&split)
            .map(Vec::as_slice)
            .ok_or_else(|| PipelineError::MissingSplit {
                root: self.manifest.root.clone(),
                split,
            })
    }

    /// Like [`Corpus::split`] but also rejects an empty split.
    pub fn nonempty_split(&self, split: Split) -> Result<&[AnnotatedDocument], PipelineError> {
        let docs = self.split(split)?;
        if docs.is_empty() {
            return Err(PipelineError::MissingSplit {
                root: self.manifest.root.clone(),
                split,
            });
        }
        Ok(docs)
    }

    pub fn splits(&self) -> impl Iterator<Item = (Split, &[AnnotatedDocument])> {
        self.documents.iter().map(|(s, d)| (*s, d.as_slice()))
    }

    /// Builds a corpus from in-memory documents, checking split disjointness.
    pub fn from_documents(
        root: impl Into<PathBuf>,
        language: Option<Language>,
        track: Track,
        documents: BTreeMap<Split, Vec<AnnotatedDocument>>,
    ) -> Result<Self, PipelineError> {
        let mut documents = documents;
        for docs in documents.values_mut() {
            docs.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
        }
        let splits: BTreeMap<Split, Vec<String>> = documents
            .iter()
            .map(|(s, docs)| (*s, docs.iter().map(|d| d.doc_id().to_string()).collect()))
            .collect();
        check_disjoint(&splits)?;
        for doc in documents.values().flatten() {
            if let Some(m) = doc.mentions.iter().find(|m| m.label != track.entity_label()) {
                return Err(PipelineError::TrackMismatch {
                    expected: track,
                    found: format!("label {} in {}", m.label, doc.doc_id()),
                });
            }
        }
        Ok(Corpus {
            manifest: CorpusManifest {
                root: root.into(),
                language,
                track,
                splits,
            },
            documents,
            warnings: Vec::new(),
        })
    }
}

fn check_disjoint(splits: &BTreeMap<Split, Vec<String>>) -> Result<(), PipelineError> {
    let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
    for (split, ids) in splits {
        for id in ids {
            if let Some(first) = seen.insert(id, *split) {
                return Err(PipelineError::OverlappingSplits {
                    doc_id: id.clone(),
                    first,
                    second: *split,
                });
            }
        }
    }
    Ok(())
}

fn language_from_dir(root: &Path) -> Option<Language> {
    root.file_name()?.to_str()?.parse().ok()
}

fn list_dir(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        entries.push(entry.map_err(io_err(dir))?.path());
    }
    entries.sort();
    Ok(entries)
}

/// Loads `<root>/<split>/<doc_id>.txt|.ann`.
///
/// If `root` holds `es/`, `en/` or `it/` subdirectories instead of split
/// directories, each is loaded as its own corpus and the results are
/// aggregated with language-prefixed ids.
///
/// The language defaults to the directory name (`.../es` → Spanish), falling
/// back to Spanish. The track comes from `options.track` or, failing that,
/// from the labels found in the annotations.
pub fn load_corpus(root: &Path, options: &LoadOptions) -> Result<Corpus, PipelineError> {
    let has_split_dirs = Split::ALL.iter().any(|s| root.join(s.name()).is_dir());
    if !has_split_dirs {
        let language_dirs: Vec<Language> = Language::ALL
            .into_iter()
            .filter(|l| root.join(l.code()).is_dir())
            .collect();
        if language_dirs.is_empty() {
            return Err(PipelineError::NoSplits(root.to_path_buf()));
        }
        let mut corpora = Vec::new();
        for language in language_dirs {
            let sub = LoadOptions {
                language: Some(language),
                ..options.clone()
            };
            corpora.push(load_corpus(&root.join(language.code()), &sub)?);
        }
        let mut merged = aggregate_corpora(corpora)?;
        merged.manifest.root = root.to_path_buf();
        return Ok(merged);
    }

    let language = options
        .language
        .or_else(|| language_from_dir(root))
        .unwrap_or(Language::Es);

    let mut warnings = Vec::new();
    let mut report = ValidationReport::default();
    let mut documents: BTreeMap<Split, Vec<AnnotatedDocument>> = BTreeMap::new();

    for split in Split::ALL {
        let dir = root.join(split.name());
        if !dir.is_dir() {
            continue;
        }
        let files = list_dir(&dir)?;
        let stems = |ext: &str| -> BTreeSet<String> {
            files
                .iter()
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
                .filter_map(|p| p.file_stem()?.to_str().map(str::to_string))
                .collect()
        };
        let txt = stems("txt");
        let ann = stems("ann");

        for orphan in ann.difference(&txt) {
            let err = PipelineError::OrphanAnnotation {
                split,
                doc_id: orphan.clone(),
            };
            if !options.lenient {
                return Err(err);
            }
            warnings.push(err.to_string());
        }

        let docs = documents.entry(split).or_default();
        for stem in &txt {
            let bytes = fs::read(dir.join(format!("{stem}.txt"))).map_err(io_err(dir.join(stem)))?;
            let text = match String::from_utf8(bytes) {
                Ok(t) => t,
                Err(e) => {
                    report.documents.push(DocumentValidation {
                        doc_id: format!("{split}/{stem}"),
                        violations: vec![BratError::InvalidUtf8 {
                            valid_up_to: e.utf8_error().valid_up_to(),
                        }],
                        skipped_lines: 0,
                    });
                    continue;
                }
            };
            let document = match TextDocument::new(stem.clone(), text, language) {
                Ok(d) => d,
                Err(e) => {
                    report.documents.push(DocumentValidation {
                        doc_id: format!("{split}/{stem}"),
                        violations: vec![e],
                        skipped_lines: 0,
                    });
                    continue;
                }
            };

            if !ann.contains(stem) {
                if split.is_annotated() {
                    let err = PipelineError::MissingAnnotation {
                        split,
                        doc_id: stem.clone(),
                    };
                    if !options.lenient {
                        return Err(err);
                    }
                    warnings.push(err.to_string());
                    continue;
                }
                docs.push(AnnotatedDocument::unannotated(document));
                continue;
            }

            let ann_path = dir.join(format!("{stem}.ann"));
            let bytes = fs::read(&ann_path).map_err(io_err(&ann_path))?;
            let scan = match std::str::from_utf8(&bytes) {
                Ok(content) => scan_ann(&document, content),
                Err(e) => crate::brat::AnnScan {
                    violations: vec![BratError::InvalidUtf8 {
                        valid_up_to: e.valid_up_to(),
                    }],
                    ..Default::default()
                },
            };
            let clean = scan.violations.is_empty();
            report.documents.push(DocumentValidation {
                doc_id: format!("{split}/{stem}"),
                violations: scan.violations,
                skipped_lines: scan.skipped_lines,
            });
            if clean {
                docs.push(AnnotatedDocument::new(document, scan.mentions));
            }
        }
    }

    if !report.is_clean() {
        if !options.lenient {
            return Err(PipelineError::ValidationFailure(report));
        }
        for doc in report.failing() {
            warnings.push(format!(
                "skipping {}: {}",
                doc.doc_id,
                doc.violations.first().map(ToString::to_string).unwrap_or_default()
            ));
        }
    }

    let track = match options.track {
        Some(t) => t,
        None => infer_track(&documents).ok_or_else(|| PipelineError::UnknownTrack(root.to_path_buf()))??,
    };

    if options.lenient {
        for (split, docs) in documents.iter_mut() {
            docs.retain(|d| {
                let bad = d.mentions.iter().find(|m| m.label != track.entity_label());
                if let Some(m) = bad {
                    warnings.push(format!(
                        "skipping {split}/{}: label {} is not {track}",
                        d.doc_id(),
                        m.label
                    ));
                }
                bad.is_none()
            });
        }
    }

    let mut corpus = Corpus::from_documents(root, Some(language), track, documents)?;
    corpus.warnings = warnings;
    Ok(corpus)
}

fn infer_track(documents: &BTreeMap<Split, Vec<AnnotatedDocument>>) -> Option<Result<Track, PipelineError>> {
    let labels: BTreeSet<&str> = documents
        .values()
        .flatten()
        .flat_map(|d| d.mentions.iter().map(|m| m.label.as_str()))
        .collect();
    let mut tracks = labels.iter().map(|l| (l, Track::from_entity_label(l)));
    let (first_label, first) = tracks.next()?;
    let Some(track) = first else {
        return Some(Err(PipelineError::TrackMismatch {
            expected: Track::Diseases,
            found: format!("unrecognised label {first_label}"),
        }));
    };
    for (label, t) in tracks {
        if t != Some(track) {
            return Some(Err(PipelineError::TrackMismatch {
                expected: track,
                found: format!("label {label}"),
            }));
        }
    }
    Some(Ok(track))
}

/// Concatenates corpora of one track, prefixing every id with its language
/// code (`es/d1`). Documents keep their own language.
pub fn aggregate_corpora(corpora: Vec<Corpus>) -> Result<Corpus, PipelineError> {
    let Some(track) = corpora.first().map(Corpus::track) else {
        return Err(PipelineError::NoSplits(PathBuf::new()));
    };
    let mut documents: BTreeMap<Split, Vec<AnnotatedDocument>> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut languages = BTreeSet::new();
    let mut root = PathBuf::new();
    for corpus in corpora {
        if corpus.track() != track {
            return Err(PipelineError::TrackMismatch {
                expected: track,
                found: corpus.track().to_string(),
            });
        }
        if root.as_os_str().is_empty() {
            root = corpus.manifest.root.parent().map(Path::to_path_buf).unwrap_or_default();
        }
        languages.extend(corpus.manifest.language);
        warnings.extend(corpus.warnings);
        for (split, docs) in corpus.documents {
            documents.entry(split).or_default().extend(
                docs.into_iter()
                    .map(|d| AnnotatedDocument::new(d.document.with_language_prefix(), d.mentions)),
            );
        }
    }
    let language = if languages.len() == 1 {
        languages.into_iter().next()
    } else {
        None
    };
    let mut corpus = Corpus::from_documents(root, language, track, documents)?;
    corpus.warnings = warnings;
    Ok(corpus)
}

/// Writes `<root>/<split>/<doc_id>.txt` and `.ann` for every document.
pub fn write_documents(root: &Path, split: Split, docs: &[AnnotatedDocument]) -> Result<(), PipelineError> {
    for doc in docs {
        let base = root.join(split.name()).join(doc.doc_id());
        if let Some(parent) = base.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let txt = base.with_extension("txt");
        fs::write(&txt, doc.document.text()).map_err(io_err(&txt))?;
        let ann = base.with_extension("ann");
        fs::write(&ann, serialize_ann(doc)).map_err(io_err(&ann))?;
    }
    Ok(())
}

fn collect_ann(dir: &Path, prefix: &str, out: &mut Vec<String>) -> Result<(), PipelineError> {
    if !dir.is_dir() {
        return Ok(());
    }
    for path in list_dir(dir)? {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if path.is_dir() {
            collect_ann(&path, &format!("{prefix}{name}/"), out)?;
        } else if let Some(stem) = name.strip_suffix(".ann") {
            out.push(format!("{prefix}{stem}"));
        }
    }
    Ok(())
}

/// Reads predicted `.ann` files from `pred_dir` against the gold texts.
///
/// Gold documents without a prediction file are left out (they then score as
/// all false negatives). Returns the predictions plus the ids of `.ann` files
/// that have no gold document.
pub fn load_predictions(
    gold: &[AnnotatedDocument],
    pred_dir: &Path,
) -> Result<(Vec<AnnotatedDocument>, Vec<String>), PipelineError> {
    let mut predictions = Vec::new();
    for doc in gold {
        let path = pred_dir.join(format!("{}.ann", doc.doc_id()));
        if !path.is_file() {
            continue;
        }
        let content = fs::read_to_string(&path).map_err(io_err(&path))?;
        let parsed =
            parse_ann(&doc.document, &content).map_err(|source| PipelineError::InvalidPrediction { path, source })?;
        predictions.push(parsed);
    }
    let gold_ids: BTreeSet<&str> = gold.iter().map(AnnotatedDocument::doc_id).collect();
    let mut found = Vec::new();
    collect_ann(pred_dir, "", &mut found)?;
    let orphans = found.into_iter().filter(|id| !gold_ids.contains(id.as_str())).collect();
    Ok((predictions, orphans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brat::EntityMention;
    use crate::text::CharIndex;

    fn doc(id: &str, text: &str, language: Language, spans: &[(usize, usize)], label: &str) -> AnnotatedDocument {
        let index = CharIndex::new(text);
        let mentions = spans
            .iter()
            .enumerate()
            .map(|(i, (s, e))| EntityMention::from_span(format!("T{}", i + 1), label, *s, *e, &index).unwrap())
            .collect();
        AnnotatedDocument::new(TextDocument::new(id, text, language).unwrap(), mentions)
    }

    fn fixture(root: &Path) {
        let train = [
            doc("d1", "Toma aspirina.", Language::Es, &[(5, 13)], "FARMACO"),
            doc("d2", "Sin tratamiento.", Language::Es, &[], "FARMACO"),
        ];
        write_documents(root, Split::Train, &train).unwrap();
        write_documents(
            root,
            Split::Dev,
            &[doc("d3", "Inicia enalapril.", Language::Es, &[(7, 16)], "FARMACO")],
        )
        .unwrap();
        fs::create_dir_all(root.join("background")).unwrap();
        fs::write(root.join("background/b1.txt"), "Texto sin anotar.").unwrap();
    }

    #[test]
    fn loads_layout() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let corpus = load_corpus(dir.path(), &LoadOptions::default()).unwrap();
        assert_eq!(corpus.track(), Track::Medications);
        assert_eq!(corpus.manifest.language, Some(Language::Es));
        assert_eq!(corpus.manifest.splits[&Split::Train], ["d1", "d2"]);
        assert_eq!(corpus.split(Split::Background).unwrap()[0].mentions.len(), 0);
        assert!(matches!(
            corpus.split(Split::Test),
            Err(PipelineError::MissingSplit { .. })
        ));
    }

    #[test]
    fn strict_rejects_surface_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        fs::write(dir.path().join("train/d1.ann"), "T1\tFARMACO 5 13\taspirinx\n").unwrap();
        match load_corpus(dir.path(), &LoadOptions::default()) {
            Err(PipelineError::ValidationFailure(report)) => {
                assert_eq!(report.failing().next().unwrap().doc_id, "train/d1");
            }
            other => panic!("{other:?}"),
        }
        let lenient = LoadOptions {
            lenient: true,
            ..Default::default()
        };
        let corpus = load_corpus(dir.path(), &lenient).unwrap();
        assert_eq!(corpus.manifest.splits[&Split::Train], ["d2"]);
        assert_eq!(corpus.warnings.len(), 1);
    }

    #[test]
    fn missing_ann_in_annotated_split() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        fs::remove_file(dir.path().join("dev/d3.ann")).unwrap();
        assert!(matches!(
            load_corpus(dir.path(), &LoadOptions::default()),
            Err(PipelineError::MissingAnnotation { .. })
        ));
    }

    #[test]
    fn splits_must_be_disjoint() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write_documents(
            dir.path(),
            Split::Dev,
            &[doc("d1", "Otro.", Language::Es, &[], "FARMACO")],
        )
        .unwrap();
        assert!(matches!(
            load_corpus(dir.path(), &LoadOptions::default()),
            Err(PipelineError::OverlappingSplits { .. })
        ));
    }

    #[test]
    fn language_from_directory_name() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("it");
        fixture(&root);
        let corpus = load_corpus(&root, &LoadOptions::default()).unwrap();
        assert_eq!(corpus.manifest.language, Some(Language::It));
        let forced = LoadOptions {
            language: Some(Language::En),
            ..Default::default()
        };
        assert_eq!(
            load_corpus(&root, &forced).unwrap().manifest.language,
            Some(Language::En)
        );
    }

    #[test]
    fn aggregates_languages() {
        let dir = tempfile::tempdir().unwrap();
        for lang in ["es", "en", "it"] {
            let root = dir.path().join(lang);
            let docs = [
                doc("d1", "aspirina", Language::Es, &[(0, 8)], "FARMACO"),
                doc("d2", "nada", Language::Es, &[], "FARMACO"),
            ];
            write_documents(&root, Split::Test, &docs).unwrap();
        }
        let corpus = load_corpus(dir.path(), &LoadOptions::default()).unwrap();
        assert_eq!(
            corpus.manifest.splits[&Split::Test],
            ["en/d1", "en/d2", "es/d1", "es/d2", "it/d1", "it/d2"]
        );
        assert_eq!(corpus.manifest.language, None);
        let en = &corpus.split(Split::Test).unwrap()[0];
        assert_eq!(en.document.language(), Language::En);
    }

    #[test]
    fn aggregate_rejects_mixed_tracks() {
        let meds = Corpus::from_documents(
            "es",
            Some(Language::Es),
            Track::Medications,
            BTreeMap::from([(
                Split::Test,
                vec![doc("d1", "aspirina", Language::Es, &[(0, 8)], "FARMACO")],
            )]),
        )
        .unwrap();
        let dis = Corpus::from_documents(
            "en",
            Some(Language::En),
            Track::Diseases,
            BTreeMap::from([(
                Split::Test,
                vec![doc("d1", "asthma", Language::En, &[(0, 6)], "ENFERMEDAD")],
            )]),
        )
        .unwrap();
        let single = aggregate_corpora(vec![meds.clone()]).unwrap();
        assert_eq!(single.manifest.splits[&Split::Test], ["es/d1"]);
        assert!(matches!(
            aggregate_corpora(vec![meds, dis]),
            Err(PipelineError::TrackMismatch { .. })
        ));
    }

    #[test]
    fn reads_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let gold = vec![
            doc("d1", "Toma aspirina.", Language::Es, &[(5, 13)], "FARMACO"),
            doc("d2", "Nada.", Language::Es, &[], "FARMACO"),
        ];
        fs::write(dir.path().join("d1.ann"), "T1\tFARMACO 5 13\taspirina\n").unwrap();
        fs::write(dir.path().join("zz.ann"), "").unwrap();
        let (pred, orphans) = load_predictions(&gold, dir.path()).unwrap();
        assert_eq!(pred.len(), 1);
        assert_eq!(orphans, ["zz"]);
    }
}
