//! Structured averaged perceptron with first-order Viterbi decoding.
//!
//! Labels are the tag set's word labels in canonical order (`O`, `B-X`,
//! `I-X`, ...). Transitions that would break BIO validity score −∞ and are
//! never learned, so decoded sequences are always valid.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::extract_features;
use super::{Tagger, TaggerError};
use crate::bio::{repair_labels, BioLabel, LabeledSentence, TagSet};
use crate::segment::Sentence;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub seed: u64,
    pub sentences: usize,
    /// Sentences whose prediction differed from gold, summed over epochs.
    pub updates: usize,
}

/// Label-transition scores, with an extra row for the sentence start.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Transitions {
    n: usize,
    // Row 0 is the start state; row p + 1 is "previous label was p".
    scores: Vec<f64>,
}

impl Transitions {
    fn zeros(n: usize) -> Self {
        let mut t = Transitions {
            n,
            scores: vec![0.0; (n + 1) * n],
        };
        for prev in 0..=n {
            for next in 0..n {
                if !allowed(prev.checked_sub(1), next) {
                    t.scores[prev * n + next] = f64::NEG_INFINITY;
                }
            }
        }
        t
    }

    fn get(&self, prev: Option<usize>, next: usize) -> f64 {
        self.scores[prev.map_or(0, |p| p + 1) * self.n + next]
    }

    fn add(&mut self, prev: Option<usize>, next: usize, delta: f64) {
        let i = prev.map_or(0, |p| p + 1) * self.n + next;
        if self.scores[i].is_finite() {
            self.scores[i] += delta;
        }
    }
}

/// BIO validity on canonical label indices: `I-X` (even, non-zero) may only
/// follow `B-X` or `I-X`.
fn allowed(prev: Option<usize>, next: usize) -> bool {
    if next == 0 || next % 2 == 1 {
        return true;
    }
    let entity = (next - 1) / 2;
    matches!(prev, Some(p) if p != 0 && (p - 1) / 2 == entity)
}

/// Highest-scoring label path. Among equal-scoring paths the
/// lexicographically smallest one (by label index) wins.
pub(crate) fn best_path(emissions: &[Vec<f64>], transitions: &Transitions) -> Vec<usize> {
    let len = emissions.len();
    if len == 0 {
        return Vec::new();
    }
    let n = transitions.n;
    // suffix[t][y]: best score of positions t.. given label y at t.
    let mut suffix = vec![vec![0.0; n]; len];
    suffix[len - 1].clone_from(&emissions[len - 1]);
    for t in (0..len - 1).rev() {
        for y in 0..n {
            let best = (0..n)
                .map(|z| transitions.get(Some(y), z) + suffix[t + 1][z])
                .fold(f64::NEG_INFINITY, f64::max);
            suffix[t][y] = emissions[t][y] + best;
        }
    }

    let mut path = Vec::with_capacity(len);
    let mut prev = None;
    for row in &suffix {
        let scores: Vec<f64> = (0..n).map(|y| transitions.get(prev, y) + row[y]).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = scores.iter().position(|&s| s == best).expect("some label is reachable");
        path.push(y);
        prev = Some(y);
    }
    path
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    tagset: TagSet,
    labels: Vec<BioLabel>,
    weights: BTreeMap<String, Vec<f64>>,
    transitions: Transitions,
    meta: TrainingMeta,
}

impl PerceptronModel {
    /// A model with explicit weights. `feature_weights` maps a feature to one
    /// weight per word label; `transition` is queried for every valid
    /// `(previous, next)` pair, `None` meaning sentence start.
    pub fn from_weights<F>(
        tagset: TagSet,
        feature_weights: BTreeMap<String, Vec<f64>>,
        mut transition: F,
        meta: TrainingMeta,
    ) -> Result<Self, TaggerError>
    where
        F: FnMut(Option<&BioLabel>, &BioLabel) -> f64,
    {
        let labels = tagset.word_labels();
        let n = labels.len();
        if let Some((f, w)) = feature_weights.iter().find(|(_, w)| w.len() != n) {
            return Err(TaggerError::InvalidConfig(format!(
                "feature {f:?} has {} weights for {n} labels",
                w.len()
            )));
        }
        let mut transitions = Transitions::zeros(n);
        for prev in std::iter::once(None).chain((0..n).map(Some)) {
            for next in 0..n {
                let w = transition(prev.map(|p| &labels[p]), &labels[next]);
                transitions.add(prev, next, w);
            }
        }
        Ok(PerceptronModel {
            tagset,
            labels,
            weights: feature_weights,
            transitions,
            meta,
        })
    }

    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    pub fn meta(&self) -> TrainingMeta {
        self.meta
    }

    pub fn feature_weights(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.weights
    }

    /// Transition score; −∞ for transitions that break BIO.
    pub fn transition_weight(&self, prev: Option<&BioLabel>, next: &BioLabel) -> f64 {
        let p = prev.map(|l| self.tagset.word_index(l));
        match (p, self.tagset.word_index(next)) {
            (Some(None), _) | (_, None) => f64::NEG_INFINITY,
            (p, Some(n)) => self.transitions.get(p.flatten(), n),
        }
    }

    fn emissions(&self, sentence: &Sentence) -> Vec<Vec<f64>> {
        let n = self.labels.len();
        (0..sentence.len())
            .map(|i| {
                let mut scores = vec![0.0; n];
                for f in extract_features(sentence, i) {
                    if let Some(w) = self.weights.get(&f) {
                        for (s, w) in scores.iter_mut().zip(w) {
                            *s += w;
                        }
                    }
                }
                scores
            })
            .collect()
    }

    pub fn decode(&self, sentence: &Sentence) -> Vec<BioLabel> {
        best_path(&self.emissions(sentence), &self.transitions)
            .into_iter()
            .map(|y| self.labels[y].clone())
            .collect()
    }
}

/// Best-scoring valid BIO sequence for `sentence` under `model`.
pub fn viterbi_decode(model: &PerceptronModel, sentence: &Sentence) -> Vec<BioLabel> {
    model.decode(sentence)
}

impl Tagger for PerceptronModel {
    fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    fn tag(&mut self, sentences: &[Sentence]) -> Result<Vec<Vec<BioLabel>>, TaggerError> {
        Ok(sentences.iter().map(|s| self.decode(s)).collect())
    }
}

/// Running weights plus the accumulators for averaging.
struct Trainer {
    n: usize,
    weights: Vec<f64>,
    weight_acc: Vec<f64>,
    transitions: Transitions,
    transition_acc: Vec<f64>,
    step: f64,
}

impl Trainer {
    fn emissions(&self, feats: &[Vec<usize>]) -> Vec<Vec<f64>> {
        feats
            .iter()
            .map(|ids| {
                let mut scores = vec![0.0; self.n];
                for &f in ids {
                    for (s, w) in scores.iter_mut().zip(&self.weights[f * self.n..(f + 1) * self.n]) {
                        *s += w;
                    }
                }
                scores
            })
            .collect()
    }

    fn bump_feature(&mut self, f: usize, y: usize, delta: f64) {
        self.weights[f * self.n + y] += delta;
        self.weight_acc[f * self.n + y] += self.step * delta;
    }

    fn bump_transition(&mut self, prev: Option<usize>, next: usize, delta: f64) {
        if self.transitions.get(prev, next).is_finite() {
            self.transitions.add(prev, next, delta);
            self.transition_acc[prev.map_or(0, |p| p + 1) * self.n + next] += self.step * delta;
        }
    }

    fn update(&mut self, feats: &[Vec<usize>], gold: &[usize], pred: &[usize]) {
        for t in 0..gold.len() {
            if gold[t] != pred[t] {
                for &f in &feats[t] {
                    self.bump_feature(f, gold[t], 1.0);
                    self.bump_feature(f, pred[t], -1.0);
                }
            }
            let gp = t.checked_sub(1).map(|p| gold[p]);
            let pp = t.checked_sub(1).map(|p| pred[p]);
            if (gp, gold[t]) != (pp, pred[t]) {
                self.bump_transition(gp, gold[t], 1.0);
                self.bump_transition(pp, pred[t], -1.0);
            }
        }
    }
}

/// Trains on `corpus` for `epochs` passes, visiting sentences in an order
/// reshuffled each epoch from `seed`. The returned model holds averaged
/// weights. Identical inputs give bit-identical models.
pub fn train_perceptron(
    corpus: &[LabeledSentence],
    tagset: &TagSet,
    epochs: usize,
    seed: u64,
) -> Result<PerceptronModel, TaggerError> {
    if corpus.is_empty() {
        return Err(TaggerError::EmptyCorpus);
    }
    if epochs == 0 {
        return Err(TaggerError::InvalidConfig("epochs must be at least 1".into()));
    }
    let labels = tagset.word_labels();
    let n = labels.len();

    let mut feature_ids: HashMap<String, usize> = HashMap::new();
    let mut feature_names: Vec<String> = Vec::new();
    let mut examples: Vec<(Vec<Vec<usize>>, Vec<usize>)> = Vec::with_capacity(corpus.len());
    for ls in corpus {
        let sentence = ls.sentence();
        let feats = (0..sentence.len())
            .map(|i| {
                extract_features(sentence, i)
                    .into_iter()
                    .map(|f| {
                        *feature_ids.entry(f.clone()).or_insert_with(|| {
                            feature_names.push(f);
                            feature_names.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let gold = repair_labels(ls.labels())
            .iter()
            .map(|l| {
                tagset
                    .word_index(l)
                    .ok_or_else(|| TaggerError::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        examples.push((feats, gold));
    }

    let mut trainer = Trainer {
        n,
        weights: vec![0.0; feature_names.len() * n],
        weight_acc: vec![0.0; feature_names.len() * n],
        transitions: Transitions::zeros(n),
        transition_acc: vec![0.0; (n + 1) * n],
        step: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut updates = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (feats, gold) = &examples[i];
            let pred = best_path(&trainer.emissions(feats), &trainer.transitions);
            if &pred != gold {
                trainer.update(feats, gold, &pred);
                updates += 1;
            }
            trainer.step += 1.0;
        }
    }

    // Averaged weight = w - acc / step (accumulator holds step-weighted updates).
    let step = trainer.step;
    let mut weights = BTreeMap::new();
    for (f, name) in feature_names.into_iter().enumerate() {
        let avg: Vec<f64> = (0..n)
            .map(|y| trainer.weights[f * n + y] - trainer.weight_acc[f * n + y] / step)
            .collect();
        if avg.iter().any(|&w| w != 0.0) {
            weights.insert(name, avg);
        }
    }
    let mut transitions = trainer.transitions.clone();
    for (s, acc) in transitions.scores.iter_mut().zip(&trainer.transition_acc) {
        if s.is_finite() {
            *s -= acc / step;
        }
    }

    Ok(PerceptronModel {
        tagset: tagset.clone(),
        labels,
        weights,
        transitions,
        meta: TrainingMeta {
            epochs,
            seed,
            sentences: corpus.len(),
            updates,
        },
    })
}
