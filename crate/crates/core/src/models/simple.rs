//! Context-independent baseline models: equiprobable words and unigram
//! frequencies.

use serde::{Deserialize, Serialize};

use crate::corpus::{TaggedCorpus, Vocabulary};
use crate::models::{ModelError, Scored, WordClass};
use crate::Scalar;

/// Every vocabulary word is equally likely. The model is closed: words
/// outside the vocabulary cannot be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformModel {
    vocab: Vocabulary,
}

impl UniformModel {
    pub fn new(vocab: Vocabulary) -> Self {
        UniformModel { vocab }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn prob_word<T: Scalar>(&self, word: &str) -> Result<Scored<T>, ModelError> {
        if !self.vocab.contains(word) {
            return Err(ModelError::OutsideClosedVocabulary { word: word.to_string() });
        }
        Ok(Scored {
            prob: T::one() / T::from(self.vocab.len()).unwrap(),
            class: WordClass::Seen,
            factors: Vec::new(),
        })
    }
}

/// Word frequencies independent of context, with the Turing estimate `d2`
/// reserved for out-of-vocabulary words: seen words score `(1 - d2) * f(w)`,
/// unknown words score `d2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct UnigramModel<T> {
    vocab: Vocabulary,
    counts: Vec<u64>,
    total: u64,
    d2: T,
}

impl<T: Scalar> UnigramModel<T> {
    pub fn train(train: &TaggedCorpus, vocab: &Vocabulary) -> Result<Self, ModelError> {
        if train.n() == 0 {
            return Err(ModelError::EmptyTrainingText);
        }
        let mut counts = vec![0u64; vocab.len()];
        for tok in &train.tokens {
            let id = vocab
                .id(&tok.surface)
                .ok_or_else(|| ModelError::WordOutsideVocabulary { word: tok.surface.clone() })?;
            counts[id as usize] += 1;
        }
        let d2 = if vocab.source_tokens > 0 {
            T::from(vocab.source_distinct).unwrap() / T::from(vocab.source_tokens).unwrap()
        } else {
            T::from(counts.iter().filter(|&&c| c > 0).count()).unwrap()
                / T::from(train.n()).unwrap()
        };
        if !(d2 > T::zero() && d2 < T::one()) {
            return Err(ModelError::InvalidConstants("unigram d2 outside (0, 1)".into()));
        }
        Ok(UnigramModel { vocab: vocab.clone(), counts, total: train.n() as u64, d2 })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn d2(&self) -> T {
        self.d2
    }

    pub fn prob_word(&self, word: &str) -> Result<Scored<T>, ModelError> {
        match self.vocab.id(word) {
            Some(id) => {
                let count = self.counts[id as usize];
                if count == 0 {
                    return Err(ModelError::ZeroProbability { word: word.to_string() });
                }
                let f = T::from(count).unwrap() / T::from(self.total).unwrap();
                Ok(Scored {
                    prob: (T::one() - self.d2) * f,
                    class: WordClass::Seen,
                    factors: Vec::new(),
                })
            }
            None => Ok(Scored { prob: self.d2, class: WordClass::Unknown, factors: Vec::new() }),
        }
    }
}
