//! The model family: uniform and unigram baselines, the bi-pos model with its
//! unknown-word regimes, the character-level unknown-word model and the
//! generalized model with pluggable context variables.

mod bipos;
mod charmodel;
mod generalized;
mod io;
mod simple;

pub use bipos::{train_bipos, BiposModel, PrevTag};
pub use charmodel::CharUnknownModel;
pub use generalized::{
    builtin_variables, during_variable, prev_word_variable, random_variable, singular_variable,
    train_generalized, ContextVariable, GeneralizedModel, VarValue,
};
pub use io::{load_model, save_model, ModelFile, ModelKind};
pub use simple::{UniformModel, UnigramModel};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training text is empty")]
    EmptyTrainingText,
    #[error("smoothing floor c2 = {c2} must be below 1/|G| = 1/{tags}")]
    SmoothingFloorTooLarge { c2: f64, tags: usize },
    #[error("training token {word:?} is not in the vocabulary; the vocabulary must cover the training text")]
    WordOutsideVocabulary { word: String },
    #[error("training token carries tag {tag:?} which is not in the tagset")]
    TagOutsideTagset { tag: String },
    #[error("tag {0:?} unknown to this model")]
    UnknownTag(String),
    #[error("invalid model constants: {0}")]
    InvalidConstants(String),
    #[error("character {ch:?} outside the printable alphabet of the unknown-word model")]
    CharOutsideAlphabet { ch: char },
    #[error("cannot score an empty word")]
    EmptyWord,
    #[error("word {word:?} is outside the vocabulary of a closed model")]
    OutsideClosedVocabulary { word: String },
    #[error("word {word:?} has probability zero under this model")]
    ZeroProbability { word: String },
    #[error("variable value {0:?} not recognised")]
    UnknownVariableValue(String),
    #[error("model file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported model file: {0}")]
    UnsupportedFile(String),
}

/// How a test word relates to the model's vocabulary and training text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordClass {
    /// In the vocabulary and observed in training.
    Seen,
    /// In the vocabulary but never observed in training.
    Unseen,
    /// Outside the vocabulary.
    Unknown,
}

impl std::fmt::Display for WordClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WordClass::Seen => write!(f, "seen"),
            WordClass::Unseen => write!(f, "unseen"),
            WordClass::Unknown => write!(f, "unknown"),
        }
    }
}

/// Sample-space regimes for out-of-vocabulary words.
///
/// * `M1`: one generic unknown symbol with constant probability `d2`.
/// * `M2`: like `M1`, but an unknown word joins the vocabulary (as an unseen
///   word) after its first occurrence.
/// * `M3`: every test-only word is added to the vocabulary up front and
///   scored as unseen.
/// * `M4`: unknown words are scored character by character; the unknown
///   budget `d2` is spread over the infinite space of strings.
/// * `New`: the per-tag unknown model: the unknown word behaves like a
///   vocabulary word that can appear with every tag, with per-tag Turing
///   estimates `d_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownRegime {
    M1,
    M2,
    M3,
    M4,
    New,
}

impl std::fmt::Display for UnknownRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnknownRegime::M1 => write!(f, "m1"),
            UnknownRegime::M2 => write!(f, "m2"),
            UnknownRegime::M3 => write!(f, "m3"),
            UnknownRegime::M4 => write!(f, "m4"),
            UnknownRegime::New => write!(f, "new"),
        }
    }
}

impl std::str::FromStr for UnknownRegime {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(UnknownRegime::M1),
            "m2" => Ok(UnknownRegime::M2),
            "m3" => Ok(UnknownRegime::M3),
            "m4" => Ok(UnknownRegime::M4),
            "new" => Ok(UnknownRegime::New),
            other => Err(ModelError::UnknownVariableValue(other.to_string())),
        }
    }
}

/// One term of the bi-pos sum: `scale * tag_factor * word_factor`.
///
/// For seen words the scale is the free-mass constant, the tag factor is the
/// smoothed transition probability and the word factor is `f(w|g)`. For
/// unknown words under the per-tag regime the scale is `d_g`, the tag factor
/// the smoothed transition and the word factor 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorTerm<T> {
    pub scale: T,
    pub tag_factor: T,
    pub word_factor: T,
}

/// A scored word: its probability, vocabulary class and per-term factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored<T> {
    pub prob: T,
    pub class: WordClass,
    pub factors: Vec<FactorTerm<T>>,
}
