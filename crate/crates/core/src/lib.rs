//! Class-based bigram (bi-pos) language models over tagged text, with
//! perplexity-style evaluation and log-probability attribution.
//!
//! The crate is organised around five layers:
//!
//! * [`corpus`]: tagged-corpus parsing, tagset merging, vocabularies.
//! * [`distributions`]: frequency counting, MLE, additive smoothing and
//!   information measures. Generic over the scalar type.
//! * [`models`]: the model family: uniform/unigram baselines, the bi-pos
//!   model with its unknown-word regimes, the character-level unknown model
//!   and the generalized model with pluggable context variables.
//! * [`evaluation`]: scoring a model over a test stream: LTP/PP, the
//!   seen/unseen/unknown split, adjusted measures, training-size sweeps and
//!   the lambda grid search.
//! * [`analysis`]: attributing log-probability mass to contexts, model
//!   components and word classes.
//!
//! All numeric code is generic over [`Scalar`] (any `num_traits::Float` that
//! can be serialized); [`Real`] is the concrete alias used by the CLI and by
//! most tests.

pub mod analysis;
pub mod corpus;
pub mod distributions;
pub mod evaluation;
pub mod models;

use std::fmt::{Debug, Display};

use num_traits::Float;
use serde::{de::DeserializeOwned, Serialize};

/// Scalar type the model and evaluation layers are generic over.
pub trait Scalar:
    Float + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
}

/// Default scalar used by the CLI and most tests.
pub type Real = f64;

pub(crate) fn num<T: Float>(x: f64) -> T {
    T::from(x).expect("constant representable in scalar type")
}
