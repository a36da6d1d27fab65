//! Scoring a model over a test stream and deriving the quality measures:
//! total probability (TP), its logarithm (LTP), perplexity (PP = 2^(-LTP/n))
//! and the adjusted variants (ALTP, APP) that divide unknown-word mass by the
//! number of distinct unknown words. Also the training-size sweep and the
//! lambda grid search.
//!
//! Probabilities are accumulated in log space; TP itself is materialized only
//! for very short texts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{build_vocabulary, split_corpus, TaggedCorpus, Tagset, Vocabulary};
use crate::models::{
    BiposModel, ContextVariable, FactorTerm, GeneralizedModel, ModelError, PrevTag, UniformModel,
    UnigramModel, UnknownRegime, VarValue, WordClass,
};
use crate::{num, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("test text is empty")]
    EmptyTest,
    #[error("word {word:?} received probability {prob}, outside (0, 1]")]
    ProbabilityOutOfRange { word: String, prob: f64 },
    #[error("distinct unknown words r = {r} cannot exceed occurrences s = {s}")]
    AdjustPrecondition { s: u64, r: u64 },
    #[error("n must be at least 1")]
    EmptyLength,
    #[error("sweep size {size} exceeds the training portion ({available} tokens)")]
    SweepSizeTooLarge { size: usize, available: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// The outcome of scoring one position.
#[derive(Debug, Clone)]
pub struct StepScore<T> {
    pub prob: T,
    pub class: WordClass,
    pub prev_tag: Option<String>,
    pub assigned_tag: Option<String>,
    pub factors: Vec<FactorTerm<T>>,
    pub variable: Option<VarValue>,
}

/// Anything that can score a token stream position by position. State is
/// order-dependent (previous tag, context variables, evolving vocabularies),
/// so one scorer serves one stream at a time.
pub trait SequenceModel<T> {
    fn begin_stream(&mut self);
    fn begin_sentence(&mut self);
    fn score(&mut self, surface: &str) -> Result<StepScore<T>, ModelError>;
}

/// Drives a bi-pos model over a stream: tracks the previous tag (assigned by
/// the model, never taken from the test annotation) and, under M2/M3, the
/// out-of-vocabulary words promoted to unseen status.
pub struct BiposScorer<'m, T> {
    model: &'m BiposModel<T>,
    regime: UnknownRegime,
    prev: PrevTag,
    preloaded: BTreeSet<String>,
    overlay: BTreeSet<String>,
}

impl<'m, T: Scalar> BiposScorer<'m, T> {
    pub fn new(model: &'m BiposModel<T>, regime: UnknownRegime) -> Self {
        BiposScorer {
            model,
            regime,
            prev: PrevTag::Begin,
            preloaded: BTreeSet::new(),
            overlay: BTreeSet::new(),
        }
    }

    /// For M3: add every test-only word to the vocabulary as unseen before
    /// scoring starts.
    pub fn preload_unknowns(&mut self, test: &TaggedCorpus) {
        for tok in &test.tokens {
            if self.model.word_id(&tok.surface).is_none() {
                self.preloaded.insert(tok.surface.clone());
            }
        }
        self.overlay = self.preloaded.clone();
    }
}

impl<T: Scalar> SequenceModel<T> for BiposScorer<'_, T> {
    fn begin_stream(&mut self) {
        self.prev = PrevTag::Begin;
        self.overlay = self.preloaded.clone();
    }

    fn begin_sentence(&mut self) {
        self.prev = PrevTag::Begin;
    }

    fn score(&mut self, surface: &str) -> Result<StepScore<T>, ModelError> {
        let scored = self.model.prob_word_with(
            surface,
            self.prev,
            self.regime,
            Some(&self.overlay),
            self.overlay.len() as u64,
        )?;
        let prev_name = match self.prev {
            PrevTag::Begin => PrevTag::BEGIN_NAME.to_string(),
            PrevTag::Tag(g) => self.model.tag_name(g).to_string(),
        };
        let assigned = self.model.assign_tag_in_regime(surface, self.prev, self.regime);
        let step = StepScore {
            prob: scored.prob,
            class: scored.class,
            prev_tag: Some(prev_name),
            assigned_tag: Some(self.model.tag_name(assigned).to_string()),
            factors: scored.factors,
            variable: None,
        };
        if self.regime == UnknownRegime::M2 && scored.class == WordClass::Unknown {
            self.overlay.insert(surface.to_string());
        }
        self.prev = PrevTag::Tag(assigned);
        Ok(step)
    }
}

/// Drives a generalized model: like [`BiposScorer`] plus the context
/// variable, which is fed the model-assigned tags.
pub struct GeneralizedScorer<'m, T> {
    model: &'m GeneralizedModel<T>,
    variable: &'m mut dyn ContextVariable,
    regime: UnknownRegime,
    prev: PrevTag,
    preloaded: BTreeSet<String>,
    overlay: BTreeSet<String>,
}

impl<'m, T: Scalar> GeneralizedScorer<'m, T> {
    pub fn new(model: &'m GeneralizedModel<T>, variable: &'m mut dyn ContextVariable) -> Self {
        let regime = model.base().regime();
        GeneralizedScorer {
            model,
            variable,
            regime,
            prev: PrevTag::Begin,
            preloaded: BTreeSet::new(),
            overlay: BTreeSet::new(),
        }
    }

    pub fn preload_unknowns(&mut self, test: &TaggedCorpus) {
        for tok in &test.tokens {
            if self.model.base().word_id(&tok.surface).is_none() {
                self.preloaded.insert(tok.surface.clone());
            }
        }
        self.overlay = self.preloaded.clone();
    }
}

impl<T: Scalar> SequenceModel<T> for GeneralizedScorer<'_, T> {
    fn begin_stream(&mut self) {
        self.prev = PrevTag::Begin;
        self.overlay = self.preloaded.clone();
        self.variable.reset();
    }

    fn begin_sentence(&mut self) {
        self.prev = PrevTag::Begin;
        self.variable.begin_sentence();
    }

    fn score(&mut self, surface: &str) -> Result<StepScore<T>, ModelError> {
        let value = self.variable.value_for_next();
        let scored = self.model.prob_word_with(
            surface,
            self.prev,
            self.regime,
            Some(&self.overlay),
            self.overlay.len() as u64,
            &value,
        )?;
        let base = self.model.base();
        let prev_name = match self.prev {
            PrevTag::Begin => PrevTag::BEGIN_NAME.to_string(),
            PrevTag::Tag(g) => base.tag_name(g).to_string(),
        };
        let assigned = base.assign_tag_in_regime(surface, self.prev, self.regime);
        let assigned_name = base.tag_name(assigned).to_string();
        self.variable.consume(surface, &assigned_name);
        if self.regime == UnknownRegime::M2 && scored.class == WordClass::Unknown {
            self.overlay.insert(surface.to_string());
        }
        self.prev = PrevTag::Tag(assigned);
        Ok(StepScore {
            prob: scored.prob,
            class: scored.class,
            prev_tag: Some(prev_name),
            assigned_tag: Some(assigned_name),
            factors: scored.factors,
            variable: Some(value),
        })
    }
}

/// Context-free scorer for the uniform and unigram baselines.
pub enum SimpleScorer<'m, T> {
    Uniform(&'m UniformModel),
    Unigram(&'m UnigramModel<T>),
}

impl<T: Scalar> SequenceModel<T> for SimpleScorer<'_, T> {
    fn begin_stream(&mut self) {}

    fn begin_sentence(&mut self) {}

    fn score(&mut self, surface: &str) -> Result<StepScore<T>, ModelError> {
        let scored = match self {
            SimpleScorer::Uniform(m) => m.prob_word::<T>(surface)?,
            SimpleScorer::Unigram(m) => m.prob_word(surface)?,
        };
        Ok(StepScore {
            prob: scored.prob,
            class: scored.class,
            prev_tag: None,
            assigned_tag: None,
            factors: scored.factors,
            variable: None,
        })
    }
}

/// One scored test position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct EvalRecord<T> {
    pub index: usize,
    pub surface: String,
    pub class: WordClass,
    pub prev_tag: Option<String>,
    pub assigned_tag: Option<String>,
    pub prob: T,
    pub log2p: T,
    pub factors: Vec<FactorTerm<T>>,
    pub variable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct EvalResult<T> {
    pub n: usize,
    pub ltp: T,
    pub lp: T,
    pub pp: T,
    /// Total probability; only materialized for n <= 64.
    pub tp: Option<T>,
    pub ltp_known: T,
    pub ltp_unseen: T,
    pub ltp_unknown: T,
    /// Occurrences of unknown words.
    pub s: u64,
    /// Distinct unknown surfaces.
    pub r: u64,
    pub altp: T,
    pub app: T,
    pub records: Vec<EvalRecord<T>>,
}

/// Walks the test stream through a scorer and accumulates every measure.
pub fn evaluate<T: Scalar>(
    scorer: &mut dyn SequenceModel<T>,
    test: &TaggedCorpus,
) -> Result<EvalResult<T>, EvalError> {
    if test.n() == 0 {
        return Err(EvalError::EmptyTest);
    }
    scorer.begin_stream();
    let mut records = Vec::with_capacity(test.n());
    let mut ltp_known = T::zero();
    let mut ltp_unseen = T::zero();
    let mut ltp_unknown = T::zero();
    let mut s = 0u64;
    let mut distinct_unknown: BTreeSet<String> = BTreeSet::new();

    for (i, tok) in test.tokens.iter().enumerate() {
        if test.is_sentence_start(i) {
            scorer.begin_sentence();
        }
        let step = scorer.score(&tok.surface)?;
        if !(step.prob > T::zero() && step.prob <= T::one()) {
            return Err(EvalError::ProbabilityOutOfRange {
                word: tok.surface.clone(),
                prob: step.prob.to_f64().unwrap_or(f64::NAN),
            });
        }
        let log2p = step.prob.log2();
        match step.class {
            WordClass::Seen => ltp_known = ltp_known + log2p,
            WordClass::Unseen => ltp_unseen = ltp_unseen + log2p,
            WordClass::Unknown => {
                ltp_unknown = ltp_unknown + log2p;
                s += 1;
                distinct_unknown.insert(tok.surface.clone());
            }
        }
        records.push(EvalRecord {
            index: i,
            surface: tok.surface.clone(),
            class: step.class,
            prev_tag: step.prev_tag,
            assigned_tag: step.assigned_tag,
            prob: step.prob,
            log2p,
            factors: step.factors,
            variable: step.variable.map(|v| v.to_string()),
        });
    }

    let n = test.n();
    let r = distinct_unknown.len() as u64;
    let ltp = ltp_known + ltp_unseen + ltp_unknown;
    let lp = -ltp / T::from(n).unwrap();
    let pp = lp.exp2();
    let tp = (n <= 64).then(|| records.iter().fold(T::one(), |acc, rec| acc * rec.prob));
    let (altp, app) = adjust(ltp, s, r, n)?;
    Ok(EvalResult {
        n,
        ltp,
        lp,
        pp,
        tp,
        ltp_known,
        ltp_unseen,
        ltp_unknown,
        s,
        r,
        altp,
        app,
        records,
    })
}

/// Convenience wrapper: evaluates a bi-pos model under a regime, taking care
/// of the M3 preload.
pub fn evaluate_bipos<T: Scalar>(
    model: &BiposModel<T>,
    regime: UnknownRegime,
    test: &TaggedCorpus,
) -> Result<EvalResult<T>, EvalError> {
    let mut scorer = BiposScorer::new(model, regime);
    if regime == UnknownRegime::M3 {
        scorer.preload_unknowns(test);
    }
    evaluate(&mut scorer, test)
}

pub fn evaluate_generalized<T: Scalar>(
    model: &GeneralizedModel<T>,
    variable: &mut dyn ContextVariable,
    test: &TaggedCorpus,
) -> Result<EvalResult<T>, EvalError> {
    let mut scorer = GeneralizedScorer::new(model, variable);
    if model.base().regime() == UnknownRegime::M3 {
        scorer.preload_unknowns(test);
    }
    evaluate(&mut scorer, test)
}

/// The adjusted measures: `ALTP = LTP - s * log2(r)` (with `log2` of 0 or 1
/// taken as 0) and `APP = 2^(-ALTP/n)`.
pub fn adjust<T: Scalar>(ltp: T, s: u64, r: u64, n: usize) -> Result<(T, T), EvalError> {
    if n == 0 {
        return Err(EvalError::EmptyLength);
    }
    if r > s {
        return Err(EvalError::AdjustPrecondition { s, r });
    }
    let altp = if r > 1 { ltp - T::from(s).unwrap() * T::from(r).unwrap().log2() } else { ltp };
    let app = (-altp / T::from(n).unwrap()).exp2();
    Ok((altp, app))
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig<T> {
    pub c2: T,
    pub d1: T,
    pub regime: UnknownRegime,
    /// Fix the vocabulary on the full training portion instead of the prefix
    /// being trained on.
    pub fixed_vocab: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct SweepRow<T> {
    pub size: usize,
    pub ltp: T,
    pub ltp_known: T,
    pub ltp_unseen: T,
    pub ltp_unknown: T,
    pub pp: T,
    pub altp: T,
}

/// Retrains on each prefix of the training portion and evaluates on the
/// fixed test set, one row per size.
pub fn sweep_training_size<T: Scalar>(
    train: &TaggedCorpus,
    test: &TaggedCorpus,
    tagset: &Tagset,
    sizes: &[usize],
    config: SweepConfig<T>,
) -> Result<Vec<SweepRow<T>>, EvalError> {
    let fixed: Option<Vocabulary> = config.fixed_vocab.then(|| build_vocabulary(train));
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        if size > train.n() {
            return Err(EvalError::SweepSizeTooLarge { size, available: train.n() });
        }
        let (prefix, _) = split_corpus(train, size)?;
        let vocab = match &fixed {
            Some(v) => v.clone(),
            None => build_vocabulary(&prefix),
        };
        let model = crate::models::train_bipos(&prefix, &vocab, tagset, config.c2, config.d1)?
            .with_regime(config.regime)?;
        let result = evaluate_bipos(&model, config.regime, test)?;
        rows.push(SweepRow {
            size,
            ltp: result.ltp,
            ltp_known: result.ltp_known,
            ltp_unseen: result.ltp_unseen,
            ltp_unknown: result.ltp_unknown,
            pp: result.pp,
            altp: result.altp,
        });
    }
    Ok(rows)
}

/// Evaluates lambda in {0.1, ..., 0.9} and returns the value maximizing LTP
/// together with its result. Ties go to the smaller lambda.
pub fn grid_search_lambda<T: Scalar>(
    model: &mut GeneralizedModel<T>,
    variable: &mut dyn ContextVariable,
    test: &TaggedCorpus,
) -> Result<(T, EvalResult<T>), EvalError> {
    let mut best: Option<(T, EvalResult<T>)> = None;
    for step in 1..=9u32 {
        let lambda: T = num(f64::from(step) / 10.0);
        model.set_lambda(lambda);
        let result = evaluate_generalized(&*model, variable, test)?;
        let better = match &best {
            Some((_, b)) => result.ltp > b.ltp,
            None => true,
        };
        if better {
            best = Some((lambda, result));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl<T: Scalar> EvalResult<T> {
    /// One row per record. Factor terms are carried by the JSON form only.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("index,surface,class,prev_tag,assigned_tag,variable,probability,log2p\n");
        for rec in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                rec.index,
                csv_field(&rec.surface),
                rec.class,
                csv_field(rec.prev_tag.as_deref().unwrap_or("")),
                csv_field(rec.assigned_tag.as_deref().unwrap_or("")),
                csv_field(rec.variable.as_deref().unwrap_or("")),
                rec.prob,
                rec.log2p,
            ));
        }
        out
    }
}

pub fn sweep_csv<T: Scalar>(rows: &[SweepRow<T>]) -> String {
    let mut out = String::from("size,ltp,ltp_known,ltp_unseen,ltp_unknown,pp,altp\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.size, row.ltp, row.ltp_known, row.ltp_unseen, row.ltp_unknown, row.pp, row.altp
        ));
    }
    out
}
