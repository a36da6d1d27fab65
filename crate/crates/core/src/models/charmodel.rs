//! Character-by-character scoring of unknown words: a distribution over the
//! 95 printable ASCII characters plus an end-of-word symbol. The probability
//! of a word is the product of its character probabilities times the
//! end-of-word probability, so longer words are strictly less likely.

use serde::{Deserialize, Serialize};

use crate::corpus::TaggedCorpus;
use crate::models::ModelError;
use crate::Scalar;

pub const ALPHABET_SIZE: usize = 95; // ASCII 0x20..=0x7E
const SYMBOLS: usize = ALPHABET_SIZE + 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharUnknownModel<T> {
    char_counts: Vec<u64>,
    end_count: u64,
    /// Additive floor over the 96 symbols; keeps every probability positive.
    floor: T,
}

fn char_slot(ch: char) -> Option<usize> {
    let code = ch as u32;
    (0x20..=0x7E).contains(&code).then(|| (code - 0x20) as usize)
}

impl<T: Scalar> CharUnknownModel<T> {
    /// Uniform distribution over the 96 symbols.
    pub fn uniform() -> Self {
        CharUnknownModel { char_counts: vec![1; ALPHABET_SIZE], end_count: 1, floor: T::zero() }
    }

    /// Estimates the distribution from the surfaces of a corpus. Characters
    /// outside the printable range are ignored during counting; each token
    /// contributes one end-of-word event. The floor must be positive so no
    /// symbol ends up with probability zero.
    pub fn from_corpus(corpus: &TaggedCorpus, floor: T) -> Self {
        let mut char_counts = vec![0u64; ALPHABET_SIZE];
        let mut end_count = 0u64;
        for tok in &corpus.tokens {
            for ch in tok.surface.chars() {
                if let Some(slot) = char_slot(ch) {
                    char_counts[slot] += 1;
                }
            }
            end_count += 1;
        }
        CharUnknownModel { char_counts, end_count, floor }
    }

    fn total(&self) -> u64 {
        self.char_counts.iter().sum::<u64>() + self.end_count
    }

    fn smoothed(&self, count: u64) -> T {
        let total = self.total();
        if total == 0 {
            return T::one() / T::from(SYMBOLS).unwrap();
        }
        let raw = T::from(count).unwrap() / T::from(total).unwrap();
        let v2 = T::one() - T::from(SYMBOLS).unwrap() * self.floor;
        v2 * raw + self.floor
    }

    pub fn char_prob(&self, ch: char) -> Result<T, ModelError> {
        let slot = char_slot(ch).ok_or(ModelError::CharOutsideAlphabet { ch })?;
        Ok(self.smoothed(self.char_counts[slot]))
    }

    pub fn end_prob(&self) -> T {
        self.smoothed(self.end_count)
    }

    /// Product over the word's characters times the end-of-word probability.
    pub fn word_prob(&self, word: &str) -> Result<T, ModelError> {
        if word.is_empty() {
            return Err(ModelError::EmptyWord);
        }
        let mut p = T::one();
        for ch in word.chars() {
            p = p * self.char_prob(ch)?;
        }
        Ok(p * self.end_prob())
    }
}
