//! Dictionary tagger: greedy longest match over normalized tokens.

use std::collections::BTreeMap;

use super::{normalize, Tagger, TaggerError};
use crate::bio::{BioLabel, TagSet};
use crate::brat::AnnotatedDocument;
use crate::segment::{tokenize, Sentence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerModel {
    tagset: TagSet,
    phrases: BTreeMap<Vec<String>, String>,
    max_phrase_len: usize,
}

impl GazetteerModel {
    /// Builds a model from explicit phrases. Labels must belong to `tagset`.
    pub fn from_phrases<I>(tagset: TagSet, phrases: I) -> Result<Self, TaggerError>
    where
        I: IntoIterator<Item = (Vec<String>, String)>,
    {
        let mut map = BTreeMap::new();
        for (tokens, label) in phrases {
            if !tagset.contains_entity(&label) {
                return Err(TaggerError::UnknownLabel(label));
            }
            if tokens.is_empty() {
                continue;
            }
            map.insert(tokens.iter().map(|t| normalize(t)).collect(), label);
        }
        let max_phrase_len = map.keys().map(Vec::len).max().unwrap_or(0);
        Ok(GazetteerModel {
            tagset,
            phrases: map,
            max_phrase_len,
        })
    }

    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    pub fn phrases(&self) -> &BTreeMap<Vec<String>, String> {
        &self.phrases
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn lookup(&self, normalized_tokens: &[String]) -> Option<&str> {
        self.phrases.get(normalized_tokens).map(String::as_str)
    }

    /// Left to right, the longest phrase starting at each position wins.
    pub fn tag_sentence(&self, sentence: &Sentence) -> Vec<BioLabel> {
        let keys: Vec<String> = sentence.tokens().iter().map(|t| normalize(&t.surface)).collect();
        let mut labels = vec![BioLabel::O; keys.len()];
        let mut i = 0;
        while i < keys.len() {
            let longest = (1..=self.max_phrase_len.min(keys.len() - i))
                .rev()
                .find_map(|n| self.lookup(&keys[i..i + n]).map(|label| (n, label)));
            match longest {
                Some((n, label)) => {
                    labels[i] = BioLabel::B(label.to_string());
                    for l in &mut labels[i + 1..i + n] {
                        *l = BioLabel::I(label.to_string());
                    }
                    i += n;
                }
                None => i += 1,
            }
        }
        labels
    }
}

impl Tagger for GazetteerModel {
    fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        Ok(sentences.iter().map(|s| self.tag_sentence(s)).collect())
    }
}

/// Collects every gold mention's normalized token sequence. A phrase seen
/// with several labels keeps the most frequent one, ties going to the label
/// listed first in the tag set.
pub fn train_gazetteer(corpus: &[AnnotatedDocument], tagset: &TagSet) -> Result<GazetteerModel, TaggerError> {
    if corpus.is_empty() {
        return Err(TaggerError::EmptyCorpus);
    }
    let n_labels = tagset.entity_labels().len();
    let mut counts: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for doc in corpus {
        for m in &doc.mentions {
            let rank = tagset
                .entity_rank(&m.label)
                .ok_or_else(|| TaggerError::UnknownLabel(m.label.clone()))?;
            let phrase: Vec<String> = tokenize(doc.document.text(), (m.start, m.end))
                .iter()
                .map(|t| normalize(&t.surface))
                .collect();
            if phrase.is_empty() {
                continue;
            }
            counts.entry(phrase).or_insert_with(|| vec![0; n_labels])[rank] += 1;
        }
    }

    let phrases = counts.into_iter().map(|(phrase, per_label)| {
        // max_by_key keeps the last maximum; scan in reverse so the first label wins ties.
        let (rank, _) = per_label
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|&(_, c)| *c)
            .expect("non-empty tag set");
        (phrase, tagset.entity_labels()[rank].clone())
    });
    GazetteerModel::from_phrases(tagset.clone(), phrases)
}
