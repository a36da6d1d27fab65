//! The generalized model: the word-given-tag factor may condition on a
//! context variable computed from the preceding words. Where the variable is
//! in a specific state, the word factor becomes an interpolation of the
//! normal distribution with one estimated only from specific positions:
//!
//! ```text
//! p_comb(w|g) = lambda * f(w|g) + (1 - lambda) * f(w|g, X = specific)
//! ```
//!
//! Variables carry per-stream state and must be reset between streams; the
//! random variable draws from a seeded generator so evaluation stays
//! deterministic.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TaggedCorpus;
use crate::models::{BiposModel, ModelError, PrevTag, Scored, WordClass};
use crate::Scalar;

/// Value of a context variable before a prediction. Specific states carry a
/// key so a variable may distinguish many specific contexts (the built-in
/// variables use a single, empty key).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarValue {
    General,
    Specific(String),
}

impl std::fmt::Display for VarValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarValue::General => write!(f, "general"),
            VarValue::Specific(key) if key.is_empty() => write!(f, "specific"),
            VarValue::Specific(key) => write!(f, "specific:{key}"),
        }
    }
}

/// A deterministic state machine over the token stream. `value_for_next` is
/// called exactly once before each prediction; `consume` is fed the word just
/// scored together with the tag in force for it (the gold tag during
/// training, the assigned tag during evaluation).
pub trait ContextVariable: Send {
    fn name(&self) -> &str;
    /// Back to the initial state (reseeds the random variable).
    fn reset(&mut self);
    fn begin_sentence(&mut self);
    fn value_for_next(&mut self) -> VarValue;
    fn consume(&mut self, surface: &str, tag: &str);
}

/// Noun-phrase continuation: adjectives, adverbs and nouns keep the phrase
/// open. Judged by the merged tag's leading letter.
fn continues_noun_phrase(tag: &str) -> bool {
    matches!(tag.chars().next(), Some('N') | Some('J') | Some('R'))
}

/// Specific after a trigger word, for as long as the noun phrase continues.
struct TriggeredVariable {
    name: String,
    triggers: Vec<String>,
    active: bool,
}

impl TriggeredVariable {
    fn new(name: &str, triggers: &[&str]) -> Self {
        TriggeredVariable {
            name: name.to_string(),
            triggers: triggers.iter().map(|t| t.to_lowercase()).collect(),
            active: false,
        }
    }
}

impl ContextVariable for TriggeredVariable {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.active = false;
    }

    fn begin_sentence(&mut self) {
        self.active = false;
    }

    fn value_for_next(&mut self) -> VarValue {
        if self.active {
            VarValue::Specific(String::new())
        } else {
            VarValue::General
        }
    }

    fn consume(&mut self, surface: &str, tag: &str) {
        if self.triggers.iter().any(|t| t.eq_ignore_ascii_case(surface)) {
            self.active = true;
        } else if self.active && !continues_noun_phrase(tag) {
            self.active = false;
        }
    }
}

/// Specific with probability `p` at every position, from a seeded stream.
struct RandomVariable {
    name: String,
    p: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl ContextVariable for RandomVariable {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn begin_sentence(&mut self) {}

    fn value_for_next(&mut self) -> VarValue {
        if self.rng.gen::<f64>() < self.p {
            VarValue::Specific(String::new())
        } else {
            VarValue::General
        }
    }

    fn consume(&mut self, _surface: &str, _tag: &str) {}
}

/// The identity of the previous word, as a keyed specific state. With one
/// tag per context this conditions the word factor on the preceding word,
/// which is exactly the bigram dependency.
struct PrevWordVariable {
    prev: Option<String>,
}

impl ContextVariable for PrevWordVariable {
    fn name(&self) -> &str {
        "prev-word"
    }

    fn reset(&mut self) {
        self.prev = None;
    }

    fn begin_sentence(&mut self) {
        self.prev = None;
    }

    fn value_for_next(&mut self) -> VarValue {
        match &self.prev {
            Some(w) => VarValue::Specific(w.clone()),
            None => VarValue::General,
        }
    }

    fn consume(&mut self, surface: &str, _tag: &str) {
        self.prev = Some(surface.to_string());
    }
}

/// Specific after "this"/"a"/"an", while the noun phrase continues.
pub fn singular_variable() -> Box<dyn ContextVariable> {
    Box::new(TriggeredVariable::new("singular", &["this", "a", "an"]))
}

/// Specific inside a noun phrase introduced by "during".
pub fn during_variable() -> Box<dyn ContextVariable> {
    Box::new(TriggeredVariable::new("during", &["during"]))
}

/// Specific with probability `p`, drawn from a stream seeded with `seed`.
/// The name records `p` (`random:0.05`) so the variable can be rebuilt from
/// a stored model.
pub fn random_variable(p: f64, seed: u64) -> Box<dyn ContextVariable> {
    Box::new(RandomVariable {
        name: format!("random:{p}"),
        p,
        seed,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

/// The previous word's identity as the specific key.
pub fn prev_word_variable() -> Box<dyn ContextVariable> {
    Box::new(PrevWordVariable { prev: None })
}

/// The three built-in variables: singular, during, random(p).
pub fn builtin_variables(random_p: f64, seed: u64) -> Vec<Box<dyn ContextVariable>> {
    vec![singular_variable(), during_variable(), random_variable(random_p, seed)]
}

/// Word-given-tag counts restricted to one specific state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct SpecificTable {
    word_tag_counts: BTreeMap<u32, BTreeMap<u32, u64>>,
    tag_totals: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct GeneralizedModel<T> {
    base: BiposModel<T>,
    variable_name: String,
    lambda: T,
    specific: BTreeMap<String, SpecificTable>,
}

/// Estimates the specific word-given-tag distributions by one pass over the
/// training corpus, driving the variable with the gold tags.
pub fn train_generalized<T: Scalar>(
    base: BiposModel<T>,
    train: &TaggedCorpus,
    variable: &mut dyn ContextVariable,
    lambda: T,
) -> Result<GeneralizedModel<T>, ModelError> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(ModelError::InvalidConstants("lambda must lie in [0, 1]".into()));
    }
    let tag_count = base.tags().len();
    let mut specific: BTreeMap<String, SpecificTable> = BTreeMap::new();
    variable.reset();
    for (i, tok) in train.tokens.iter().enumerate() {
        if train.is_sentence_start(i) {
            variable.begin_sentence();
        }
        let value = variable.value_for_next();
        if let VarValue::Specific(key) = value {
            let word = base
                .word_id(&tok.surface)
                .ok_or_else(|| ModelError::WordOutsideVocabulary { word: tok.surface.clone() })?;
            let tag = base
                .tag_id(&tok.tag)
                .ok_or_else(|| ModelError::TagOutsideTagset { tag: tok.tag.clone() })?;
            let table = specific
                .entry(key)
                .or_insert_with(|| SpecificTable { word_tag_counts: BTreeMap::new(), tag_totals: vec![0; tag_count] });
            *table.word_tag_counts.entry(word).or_default().entry(tag).or_insert(0) += 1;
            table.tag_totals[tag as usize] += 1;
        }
        variable.consume(&tok.surface, &tok.tag);
    }
    Ok(GeneralizedModel { base, variable_name: variable.name().to_string(), lambda, specific })
}

impl<T: Scalar> GeneralizedModel<T> {
    pub fn base(&self) -> &BiposModel<T> {
        &self.base
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: T) {
        self.lambda = lambda;
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }

    /// Switches the unknown-word regime of the underlying bi-pos model.
    pub fn with_base_regime(mut self, regime: crate::models::UnknownRegime) -> Result<Self, ModelError> {
        self.base = self.base.with_regime(regime)?;
        Ok(self)
    }

    /// The combined word factor for a tag under a variable value. A tag with
    /// no specific observations for the key keeps the normal distribution,
    /// so the factor stays normalized over the seen words.
    fn combined_word_factor(&self, word_id: u32, tag: u32, b_general: T, x: &VarValue) -> T {
        let VarValue::Specific(key) = x else { return b_general };
        let Some(table) = self.specific.get(key) else { return b_general };
        let total = table.tag_totals[tag as usize];
        if total == 0 {
            return b_general;
        }
        let count =
            table.word_tag_counts.get(&word_id).and_then(|m| m.get(&tag)).copied().unwrap_or(0);
        let b_specific = T::from(count).unwrap() / T::from(total).unwrap();
        self.lambda * b_general + (T::one() - self.lambda) * b_specific
    }

    /// Probability of `word` after `prev` under variable value `x`. Only the
    /// word factor of seen words differs from the base model; unseen and
    /// unknown words follow the base regime.
    pub fn prob_word(&self, word: &str, prev: PrevTag, x: &VarValue) -> Result<Scored<T>, ModelError> {
        self.prob_word_with(word, prev, self.base.regime(), None, 0, x)
    }

    pub(crate) fn prob_word_with(
        &self,
        word: &str,
        prev: PrevTag,
        regime: crate::models::UnknownRegime,
        overlay: Option<&std::collections::BTreeSet<String>>,
        u_extra: u64,
        x: &VarValue,
    ) -> Result<Scored<T>, ModelError> {
        let base_scored = self.base.prob_word_with(word, prev, regime, overlay, u_extra)?;
        if base_scored.class != WordClass::Seen {
            return Ok(base_scored);
        }
        let id = self.base.word_id(word).expect("seen word is in vocabulary");
        Ok(self.base.score_seen(id, prev, regime, u_extra, |tag, b| {
            Some(self.combined_word_factor(id, tag, b, x))
        }))
    }

    /// Absolute deviation from 1 of the total mass over the sample space for
    /// a context and variable value.
    pub fn check_normalization(&self, prev: PrevTag, x: &VarValue) -> T {
        let regime = self.base.regime();
        let mut total = T::from(self.base.unseen_words()).unwrap() * self.base.d1();
        for word in self.seen_words() {
            let scored = self
                .base
                .score_seen(word, prev, regime, 0, |tag, b| Some(self.combined_word_factor(word, tag, b, x)));
            total = total + scored.prob;
        }
        total = total + self.unknown_mass(prev, regime);
        (T::one() - total).abs()
    }

    fn unknown_mass(&self, prev: PrevTag, regime: crate::models::UnknownRegime) -> T {
        use crate::models::UnknownRegime::*;
        match regime {
            New => {
                let mut p = T::zero();
                for tag in 0..self.base.tags().len() as u32 {
                    p = p + self.base.d_g()[tag as usize] * self.base.tag_factor(prev, tag);
                }
                p
            }
            _ => self.base.d2(),
        }
    }

    fn seen_words(&self) -> Vec<u32> {
        self.base.seen_word_ids().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, read_lob, TagMap};
    use crate::models::train_bipos;
    use std::io::Cursor;

    fn toy() -> (TaggedCorpus, BiposModel<f64>) {
        let text = "^ this_DT old_JJ house_N fell_V ^ the_AT old_JJ dog_N fell_V \
                    ^ this_DT dog_N ran_V ^ the_AT house_N fell_V ^ the_AT cat_N fell_V";
        let map = TagMap::identity("id", &["DT", "AT", "JJ", "N", "V"]);
        let corpus = read_lob(Cursor::new(text), &map).unwrap().corpus;
        let vocab = build_vocabulary(&corpus);
        let model = train_bipos(&corpus, &vocab, &map.image_tagset(), 1e-4, 1e-6).unwrap();
        (corpus, model)
    }

    #[test]
    fn singular_variable_traces_noun_phrase() {
        let mut var = singular_variable();
        var.reset();
        let stream = [("this", "DT"), ("old", "JJ"), ("house", "N"), ("fell", "V"), ("x", "N")];
        let mut values = Vec::new();
        for (w, t) in stream {
            values.push(var.value_for_next());
            var.consume(w, t);
        }
        use VarValue::*;
        assert_eq!(
            values,
            vec![General, Specific(String::new()), Specific(String::new()), Specific(String::new()), General]
        );
    }

    #[test]
    fn no_trigger_means_general() {
        let mut var = singular_variable();
        var.reset();
        for (w, t) in [("the", "AT"), ("house", "N")] {
            assert_eq!(var.value_for_next(), VarValue::General);
            var.consume(w, t);
        }
    }

    #[test]
    fn random_zero_probability_never_fires() {
        let mut var = random_variable(0.0, 7);
        var.reset();
        for _ in 0..100 {
            assert_eq!(var.value_for_next(), VarValue::General);
        }
    }

    #[test]
    fn random_is_reproducible() {
        let mut a = random_variable(0.4, 99);
        let mut b = random_variable(0.4, 99);
        a.reset();
        b.reset();
        for _ in 0..50 {
            assert_eq!(a.value_for_next(), b.value_for_next());
        }
    }

    #[test]
    fn lambda_one_collapses_to_base() {
        let (corpus, model) = toy();
        let mut var = singular_variable();
        let gen =
            train_generalized(model.clone(), &corpus, var.as_mut(), 1.0).unwrap();
        let prev = PrevTag::Tag(model.tag_id("JJ").unwrap());
        let x = VarValue::Specific(String::new());
        let a = gen.prob_word("house", prev, &x).unwrap();
        let b = model.prob_word("house", prev).unwrap();
        assert_eq!(a.prob, b.prob);
    }

    #[test]
    fn interpolated_word_factor_matches_hand_computation() {
        let (corpus, model) = toy();
        let mut var = singular_variable();
        let gen = train_generalized(model.clone(), &corpus, var.as_mut(), 0.5).unwrap();
        let prev = PrevTag::Tag(model.tag_id("JJ").unwrap());
        let x = VarValue::Specific(String::new());
        let scored = gen.prob_word("house", prev, &x).unwrap();
        // Specific N occurrences: house and dog (after "this"), so
        // f_spec(house|N) = 1/2 while f(house|N) = 2/5.
        let b_comb = 0.5 * (2.0 / 5.0) + 0.5 * (1.0 / 2.0);
        let a = model.c1() * 1.0 + model.c2(); // JJ is always followed by N
        let k = 1.0 - model.d2();
        assert!((scored.prob - k * a * b_comb).abs() < 1e-12);
    }

    #[test]
    fn specific_zero_count_halves_general_probability() {
        let (corpus, model) = toy();
        let mut var = singular_variable();
        let gen = train_generalized(model.clone(), &corpus, var.as_mut(), 0.5).unwrap();
        // "cat" is seen (tag N) but never at a specific position, so its
        // specific frequency is zero and the combined factor is half the
        // general one.
        let prev = PrevTag::Tag(model.tag_id("AT").unwrap());
        let x = VarValue::Specific(String::new());
        let specific = gen.prob_word("cat", prev, &x).unwrap();
        let general = model.prob_word("cat", prev).unwrap();
        assert!((specific.prob - general.prob / 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_holds_per_value() {
        let (corpus, model) = toy();
        let mut var = singular_variable();
        let gen = train_generalized(model.clone(), &corpus, var.as_mut(), 0.3).unwrap();
        for prev in model.contexts().collect::<Vec<_>>() {
            for x in [VarValue::General, VarValue::Specific(String::new())] {
                assert!(gen.check_normalization(prev, &x) < 1e-9);
            }
        }
    }
}
