//! Model persistence: a versioned, self-describing JSON layout. All tables
//! are stored as integer counts and all constants with round-tripping float
//! encoding, so save/load is bit-exact and identical runs produce identical
//! files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::models::{BiposModel, GeneralizedModel, ModelError, UniformModel, UnigramModel};
use crate::Scalar;

pub const MODEL_FORMAT: &str = "bipos-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub enum ModelKind<T> {
    Bipos(BiposModel<T>),
    Generalized(GeneralizedModel<T>),
    Uniform(UniformModel),
    Unigram(UnigramModel<T>),
}

impl<T> ModelKind<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelKind::Bipos(_) => "bipos",
            ModelKind::Generalized(_) => "generalized",
            ModelKind::Uniform(_) => "uniform",
            ModelKind::Unigram(_) => "unigram",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ModelFile<T> {
    pub format: String,
    pub version: u32,
    pub metadata: BTreeMap<String, String>,
    pub model: ModelKind<T>,
}

impl<T: Scalar> ModelFile<T> {
    pub fn new(model: ModelKind<T>, metadata: BTreeMap<String, String>) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            metadata,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let file: ModelFile<T> = serde_json::from_str(json)?;
        if file.format != MODEL_FORMAT {
            return Err(ModelError::UnsupportedFile(format!(
                "expected format {MODEL_FORMAT:?}, found {:?}",
                file.format
            )));
        }
        if file.version > MODEL_FORMAT_VERSION {
            return Err(ModelError::UnsupportedFile(format!(
                "file version {} is newer than supported version {MODEL_FORMAT_VERSION}",
                file.version
            )));
        }
        Ok(file)
    }
}

pub fn save_model<T: Scalar>(file: &ModelFile<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    std::fs::write(path, file.to_json()?)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<ModelFile<T>, ModelError> {
    let json = std::fs::read_to_string(path)?;
    ModelFile::from_json(&json)
}
