//! The bi-pos model: a class-based bigram that predicts the next tag from the
//! previous tag and the word from its tag, summed over the word's possible
//! tags, with a fixed vocabulary and a configurable unknown-word regime.
//!
//! For a seen vocabulary word the probability is
//!
//! ```text
//! p(w | g') = (1 - u*d1 - d2) * sum_g (c1 * f(g|g') + c2) * f(w|g)
//! ```
//!
//! with `c1 = 1 - |G|*c2`, `u` the number of unseen vocabulary words, `d1`
//! their probability and `d2` the Turing estimate for the unknown symbol.
//! Under the per-tag regime the constant factor becomes `1 - u*d1 - d_g`
//! inside the sum and an unknown word scores
//! `sum_g d_g * (c1 * f(g|g') + c2)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{TaggedCorpus, Tagset, Vocabulary};
use crate::models::{
    CharUnknownModel, FactorTerm, ModelError, Scored, UnknownRegime, WordClass,
};
use crate::{num, Scalar};

/// The conditioning context of a prediction: the distinguished sentence-start
/// context or the tag of the previous word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrevTag {
    Begin,
    Tag(u32),
}

impl PrevTag {
    pub const BEGIN_NAME: &'static str = "BEGIN";

    fn row(self) -> usize {
        match self {
            PrevTag::Begin => 0,
            PrevTag::Tag(g) => g as usize + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct BiposModel<T> {
    tagset_name: String,
    /// The tag inventory the model was asked to use.
    declared_tags: Vec<String>,
    /// The tags actually observed in training, in declared order. These are
    /// the model's classes; a declared tag that never occurs carries no word
    /// mass and would break the normalization identities, so it is dropped.
    tags: Vec<String>,
    tag_index: BTreeMap<String, u32>,
    vocab: Vocabulary,
    /// Transition counts, row 0 = BEGIN, row g+1 = tag g.
    trans_counts: Vec<Vec<u64>>,
    trans_totals: Vec<u64>,
    /// Occurrences of each tag in training.
    tag_totals: Vec<u64>,
    /// Distinct words observed with each tag.
    tag_distinct: Vec<u64>,
    /// Per word id: the tags it occurred with and their counts.
    word_tag_counts: BTreeMap<u32, BTreeMap<u32, u64>>,
    train_tokens: u64,
    train_distinct: u64,
    c1: T,
    c2: T,
    d1: T,
    d2: T,
    d_g: Vec<T>,
    u: u64,
    regime: UnknownRegime,
    char_model: CharUnknownModel<T>,
}

/// Trains a bi-pos model by MLE from a tagged corpus.
///
/// The vocabulary must cover the training text (words in the vocabulary that
/// never occur become the `u` unseen words). `d2` is the Turing estimate
/// (distinct words over total words) taken from the text the vocabulary was
/// fixed on, so a model retrained on a prefix under a fixed vocabulary keeps
/// the same unknown-word probability. The per-tag estimates `d_g` always
/// come from the training text itself.
pub fn train_bipos<T: Scalar>(
    train: &TaggedCorpus,
    vocab: &Vocabulary,
    tagset: &Tagset,
    c2: T,
    d1: T,
) -> Result<BiposModel<T>, ModelError> {
    if train.n() == 0 {
        return Err(ModelError::EmptyTrainingText);
    }
    if !(c2 >= T::zero()) || c2 * T::from(tagset.len()).unwrap() >= T::one() {
        return Err(ModelError::SmoothingFloorTooLarge {
            c2: c2.to_f64().unwrap_or(f64::NAN),
            tags: tagset.len(),
        });
    }
    if !(d1 > T::zero()) {
        return Err(ModelError::InvalidConstants("d1 must be positive".into()));
    }

    // Effective tag inventory: declared tags that occur in training.
    let mut observed: BTreeSet<&str> = BTreeSet::new();
    for tok in &train.tokens {
        if !tagset.contains(&tok.tag) {
            return Err(ModelError::TagOutsideTagset { tag: tok.tag.clone() });
        }
        observed.insert(tok.tag.as_str());
    }
    let tags: Vec<String> =
        tagset.tags().iter().filter(|t| observed.contains(t.as_str())).cloned().collect();
    let tag_index: BTreeMap<String, u32> =
        tags.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    let g = tags.len();

    let mut trans_counts = vec![vec![0u64; g]; g + 1];
    let mut tag_totals = vec![0u64; g];
    let mut word_tag_counts: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
    let mut train_words: BTreeSet<u32> = BTreeSet::new();

    let mut prev = PrevTag::Begin;
    for (i, tok) in train.tokens.iter().enumerate() {
        if train.is_sentence_start(i) {
            prev = PrevTag::Begin;
        }
        let tag = tag_index[&tok.tag];
        let word = vocab
            .id(&tok.surface)
            .ok_or_else(|| ModelError::WordOutsideVocabulary { word: tok.surface.clone() })?;
        trans_counts[prev.row()][tag as usize] += 1;
        tag_totals[tag as usize] += 1;
        *word_tag_counts.entry(word).or_default().entry(tag).or_insert(0) += 1;
        train_words.insert(word);
        prev = PrevTag::Tag(tag);
    }
    let trans_totals: Vec<u64> = trans_counts.iter().map(|row| row.iter().sum()).collect();

    let mut tag_distinct = vec![0u64; g];
    for tags_of_word in word_tag_counts.values() {
        for &tag in tags_of_word.keys() {
            tag_distinct[tag as usize] += 1;
        }
    }

    let c1 = T::one() - T::from(g).unwrap() * c2;
    let d2 = if vocab.source_tokens > 0 {
        T::from(vocab.source_distinct).unwrap() / T::from(vocab.source_tokens).unwrap()
    } else {
        T::from(train_words.len()).unwrap() / T::from(train.n()).unwrap()
    };
    if !(d2 > T::zero() && d2 < T::one()) {
        return Err(ModelError::InvalidConstants(format!(
            "Turing estimate d2 = {} outside (0, 1)",
            d2.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let d_g: Vec<T> = (0..g)
        .map(|j| {
            if tag_totals[j] > 0 {
                T::from(tag_distinct[j]).unwrap() / T::from(tag_totals[j]).unwrap()
            } else {
                d2
            }
        })
        .collect();
    let u = (vocab.len() - train_words.len()) as u64;

    let model = BiposModel {
        tagset_name: tagset.name.clone(),
        declared_tags: tagset.tags().to_vec(),
        tags,
        tag_index,
        vocab: vocab.clone(),
        trans_counts,
        trans_totals,
        tag_totals,
        tag_distinct,
        word_tag_counts,
        train_tokens: train.n() as u64,
        train_distinct: train_words.len() as u64,
        c1,
        c2,
        d1,
        d2,
        d_g,
        u,
        regime: UnknownRegime::M1,
        char_model: CharUnknownModel::from_corpus(train, num(1e-9)),
    };
    model.validate(UnknownRegime::M1)?;
    Ok(model)
}

impl<T: Scalar> BiposModel<T> {
    fn validate(&self, regime: UnknownRegime) -> Result<(), ModelError> {
        let ud1 = T::from(self.u).unwrap() * self.d1;
        if ud1 + self.d2 >= T::one() {
            return Err(ModelError::InvalidConstants(
                "u*d1 + d2 must be below 1".into(),
            ));
        }
        if regime == UnknownRegime::New {
            let max_dg = self.d_g.iter().cloned().fold(T::zero(), T::max);
            if ud1 + max_dg >= T::one() {
                return Err(ModelError::InvalidConstants(
                    "u*d1 + max_g d_g must be below 1 for the per-tag regime".into(),
                ));
            }
        }
        Ok(())
    }

    /// Switches the unknown-word regime, revalidating the constants.
    pub fn with_regime(mut self, regime: UnknownRegime) -> Result<Self, ModelError> {
        self.validate(regime)?;
        self.regime = regime;
        Ok(self)
    }

    pub fn regime(&self) -> UnknownRegime {
        self.regime
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn declared_tags(&self) -> &[String] {
        &self.declared_tags
    }

    pub fn tagset_name(&self) -> &str {
        &self.tagset_name
    }

    pub fn tag_name(&self, id: u32) -> &str {
        &self.tags[id as usize]
    }

    pub fn tag_id(&self, name: &str) -> Option<u32> {
        self.tag_index.get(name).copied()
    }

    pub fn prev_tag(&self, name: &str) -> Result<PrevTag, ModelError> {
        if name == PrevTag::BEGIN_NAME {
            return Ok(PrevTag::Begin);
        }
        self.tag_id(name).map(PrevTag::Tag).ok_or_else(|| ModelError::UnknownTag(name.into()))
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    pub fn c2(&self) -> T {
        self.c2
    }

    pub fn d1(&self) -> T {
        self.d1
    }

    pub fn d2(&self) -> T {
        self.d2
    }

    pub fn d_g(&self) -> &[T] {
        &self.d_g
    }

    pub fn unseen_words(&self) -> u64 {
        self.u
    }

    pub fn train_tokens(&self) -> u64 {
        self.train_tokens
    }

    pub fn train_distinct(&self) -> u64 {
        self.train_distinct
    }

    pub fn char_model(&self) -> &CharUnknownModel<T> {
        &self.char_model
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.vocab.id(word)
    }

    /// Tags a word occurred with in training, with counts.
    pub fn word_tags(&self, word: &str) -> Option<&BTreeMap<u32, u64>> {
        self.vocab.id(word).and_then(|id| self.word_tag_counts.get(&id))
    }

    /// Training occurrence counts of the distinct words bearing `tag`.
    pub fn word_counts_for_tag(&self, tag: &str) -> Result<Vec<u64>, ModelError> {
        let id = self.tag_id(tag).ok_or_else(|| ModelError::UnknownTag(tag.into()))?;
        let mut counts = Vec::new();
        for per_word in self.word_tag_counts.values() {
            if let Some(&n) = per_word.get(&id) {
                counts.push(n);
            }
        }
        Ok(counts)
    }

    pub fn tag_total(&self, tag_id: u32) -> u64 {
        self.tag_totals[tag_id as usize]
    }

    /// The raw transition frequency `f(g | prev)`. A context that never
    /// occurred (possible only for the tag of a text-final token) falls back
    /// to the uniform distribution so every row stays normalized.
    pub fn trans_freq(&self, prev: PrevTag, tag: u32) -> T {
        let row = prev.row();
        let total = self.trans_totals[row];
        if total == 0 {
            return T::one() / T::from(self.tags.len()).unwrap();
        }
        T::from(self.trans_counts[row][tag as usize]).unwrap() / T::from(total).unwrap()
    }

    /// The smoothed tag factor `c1 * f(g | prev) + c2`.
    pub fn tag_factor(&self, prev: PrevTag, tag: u32) -> T {
        self.c1 * self.trans_freq(prev, tag) + self.c2
    }

    /// The word factor `f(w | g)`.
    fn word_factor(&self, word_id: u32, tag: u32) -> T {
        let count = self
            .word_tag_counts
            .get(&word_id)
            .and_then(|m| m.get(&tag))
            .copied()
            .unwrap_or(0);
        T::from(count).unwrap() / T::from(self.tag_totals[tag as usize]).unwrap()
    }

    fn classify(&self, word: &str, overlay: Option<&BTreeSet<String>>) -> WordClass {
        if let Some(id) = self.vocab.id(word) {
            if self.word_tag_counts.contains_key(&id) {
                WordClass::Seen
            } else {
                WordClass::Unseen
            }
        } else if overlay.map(|o| o.contains(word)).unwrap_or(false) {
            WordClass::Unseen
        } else {
            WordClass::Unknown
        }
    }

    fn seen_scale(&self, u_extra: u64) -> T {
        T::one() - T::from(self.u + u_extra).unwrap() * self.d1 - self.d2
    }

    /// Probability of `word` after `prev`, with the word's vocabulary class
    /// and the factor terms of the bi-pos sum.
    pub fn prob_word(&self, word: &str, prev: PrevTag) -> Result<Scored<T>, ModelError> {
        self.prob_word_with(word, prev, self.regime, None, 0)
    }

    /// As [`BiposModel::prob_word`] under an explicit regime.
    pub fn prob_word_in_regime(
        &self,
        word: &str,
        prev: PrevTag,
        regime: UnknownRegime,
    ) -> Result<Scored<T>, ModelError> {
        self.prob_word_with(word, prev, regime, None, 0)
    }

    /// Core scoring routine. `overlay` holds out-of-vocabulary words promoted
    /// to unseen status during evaluation (regimes M2/M3) and `u_extra` their
    /// count, which joins `u` in the free-mass constant.
    pub(crate) fn prob_word_with(
        &self,
        word: &str,
        prev: PrevTag,
        regime: UnknownRegime,
        overlay: Option<&BTreeSet<String>>,
        u_extra: u64,
    ) -> Result<Scored<T>, ModelError> {
        match self.classify(word, overlay) {
            WordClass::Seen => {
                let id = self.vocab.id(word).expect("seen word is in vocabulary");
                Ok(self.score_seen(id, prev, regime, u_extra, |_, _| None))
            }
            WordClass::Unseen => Ok(Scored {
                prob: self.d1,
                class: WordClass::Unseen,
                factors: Vec::new(),
            }),
            WordClass::Unknown => self.score_unknown(word, prev, regime, u_extra),
        }
    }

    /// Scores a seen word. `substitute` may replace the word factor of a tag
    /// (used by the generalized model); returning `None` keeps `f(w|g)`.
    pub(crate) fn score_seen(
        &self,
        word_id: u32,
        prev: PrevTag,
        regime: UnknownRegime,
        u_extra: u64,
        substitute: impl Fn(u32, T) -> Option<T>,
    ) -> Scored<T> {
        let mut factors = Vec::new();
        let mut prob = T::zero();
        for (&tag, _) in &self.word_tag_counts[&word_id] {
            let a = self.tag_factor(prev, tag);
            let mut b = self.word_factor(word_id, tag);
            if let Some(replacement) = substitute(tag, b) {
                b = replacement;
            }
            let k = match regime {
                UnknownRegime::New => T::one() - T::from(self.u + u_extra).unwrap() * self.d1 - self.d_g[tag as usize],
                _ => self.seen_scale(u_extra),
            };
            let term = k * a * b;
            prob = prob + term;
            if a > T::zero() && b > T::zero() && k > T::zero() {
                factors.push(FactorTerm { scale: k, tag_factor: a, word_factor: b });
            }
        }
        Scored { prob, class: WordClass::Seen, factors }
    }

    fn score_unknown(
        &self,
        word: &str,
        prev: PrevTag,
        regime: UnknownRegime,
        _u_extra: u64,
    ) -> Result<Scored<T>, ModelError> {
        match regime {
            UnknownRegime::M1 | UnknownRegime::M2 | UnknownRegime::M3 => Ok(Scored {
                prob: self.d2,
                class: WordClass::Unknown,
                factors: Vec::new(),
            }),
            UnknownRegime::M4 => {
                let char_prob = self.char_model.word_prob(word)?;
                Ok(Scored {
                    prob: self.d2 * char_prob,
                    class: WordClass::Unknown,
                    factors: Vec::new(),
                })
            }
            UnknownRegime::New => {
                let mut prob = T::zero();
                let mut factors = Vec::new();
                for tag in 0..self.tags.len() as u32 {
                    let a = self.tag_factor(prev, tag);
                    let dg = self.d_g[tag as usize];
                    prob = prob + dg * a;
                    if dg > T::zero() && a > T::zero() {
                        factors.push(FactorTerm { scale: dg, tag_factor: a, word_factor: T::one() });
                    }
                }
                Ok(Scored { prob, class: WordClass::Unknown, factors })
            }
        }
    }

    /// Assigns a tag to a word in context, without consulting provided tags:
    /// an unobserved word gets the tag most likely to follow `prev`, a word
    /// with a unique training tag gets that tag, and a word with several tags
    /// gets the tag contributing the largest term to the bi-pos sum. Ties go
    /// to the earlier tag in tagset order.
    pub fn assign_tag(&self, word: &str, prev: PrevTag) -> u32 {
        self.assign_tag_in_regime(word, prev, self.regime)
    }

    pub fn assign_tag_in_regime(&self, word: &str, prev: PrevTag, regime: UnknownRegime) -> u32 {
        let id = self.vocab.id(word);
        let tags_of_word = id.and_then(|id| self.word_tag_counts.get(&id));
        match tags_of_word {
            None => self.argmax_following(prev),
            Some(m) if m.len() == 1 => *m.keys().next().expect("nonempty map"),
            Some(m) => {
                let id = id.expect("word with tags is in vocabulary");
                let mut best = (T::neg_infinity(), 0u32);
                for &tag in m.keys() {
                    let k = match regime {
                        UnknownRegime::New => {
                            T::one() - T::from(self.u).unwrap() * self.d1 - self.d_g[tag as usize]
                        }
                        _ => self.seen_scale(0),
                    };
                    let term = k * self.tag_factor(prev, tag) * self.word_factor(id, tag);
                    if term > best.0 {
                        best = (term, tag);
                    }
                }
                best.1
            }
        }
    }

    fn argmax_following(&self, prev: PrevTag) -> u32 {
        let mut best = (T::neg_infinity(), 0u32);
        for tag in 0..self.tags.len() as u32 {
            let f = self.trans_freq(prev, tag);
            if f > best.0 {
                best = (f, tag);
            }
        }
        best.1
    }

    /// Total probability mass the model puts on the sample space for the
    /// given context: all vocabulary words plus the unknown symbol, with
    /// `extra_unseen` evaluation-time vocabulary additions each carrying
    /// `d1`. Returns the absolute deviation from 1.
    ///
    /// Under M4 the unknown symbol stands for the whole string space whose
    /// declared budget is `d2`; the check uses that budget directly.
    pub fn check_normalization(&self, prev: PrevTag, extra_unseen: u64) -> T {
        let mut total = T::from(self.u + extra_unseen).unwrap() * self.d1;
        for &word_id in self.word_tag_counts.keys() {
            total = total + self.score_seen(word_id, prev, self.regime, extra_unseen, |_, _| None).prob;
        }
        total = total
            + match self.regime {
                UnknownRegime::New => {
                    let mut p = T::zero();
                    for tag in 0..self.tags.len() as u32 {
                        p = p + self.d_g[tag as usize] * self.tag_factor(prev, tag);
                    }
                    p
                }
                _ => self.d2,
            };
        (T::one() - total).abs()
    }

    /// Word ids observed in training.
    pub(crate) fn seen_word_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.word_tag_counts.keys().copied()
    }

    /// All contexts: BEGIN plus every tag.
    pub fn contexts(&self) -> impl Iterator<Item = PrevTag> + '_ {
        std::iter::once(PrevTag::Begin).chain((0..self.tags.len() as u32).map(PrevTag::Tag))
    }
}
