//! On-disk corpus format (JSON).
//!
//! ```json
//! {"schema_version": 1, "kind": "segmentation", "seed": 0, "slices": [...], "held_out": [...]}
//! {"schema_version": 1, "kind": "scripted", "seed": 0, "corpus": {...}}
//! ```
//!
//! Floats are written with round-trip precision, so a read returns the exact
//! corpus that was written.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::reward_model::LabeledSlice;
use crate::testbed::ScriptedCorpus;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetBody {
    Segmentation {
        slices: Vec<LabeledSlice>,
        held_out: Vec<LabeledSlice>,
    },
    Scripted {
        corpus: ScriptedCorpus,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub body: DatasetBody,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot access dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed dataset: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported dataset schema_version {0}")]
    Version(u32),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl DatasetFile {
    pub fn segmentation(seed: u64, slices: Vec<LabeledSlice>, held_out: Vec<LabeledSlice>) -> Self {
        Self {
            schema_version: DATASET_SCHEMA_VERSION,
            seed,
            body: DatasetBody::Segmentation { slices, held_out },
        }
    }

    pub fn scripted(seed: u64, corpus: ScriptedCorpus) -> Self {
        Self {
            schema_version: DATASET_SCHEMA_VERSION,
            seed,
            body: DatasetBody::Scripted { corpus },
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.schema_version != DATASET_SCHEMA_VERSION {
            return Err(DatasetError::Version(self.schema_version));
        }
        match &self.body {
            DatasetBody::Segmentation { slices, held_out } => {
                if slices.is_empty() {
                    return Err(
                        Error::InvalidArgument("dataset has no training slices".into()).into(),
                    );
                }
                let first = &slices[0];
                for s in slices.iter().chain(held_out) {
                    s.validate()?;
                    if (s.height, s.width, s.feature_dim, s.num_classes)
                        != (
                            first.height,
                            first.width,
                            first.feature_dim,
                            first.num_classes,
                        )
                    {
                        return Err(
                            Error::DimensionMismatch("slices disagree on shape".into()).into()
                        );
                    }
                }
            }
            DatasetBody::Scripted { corpus } => {
                let l = &corpus.learner;
                if l.is_empty() || corpus.corrupted.len() != l.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} difficulties, {} corruption flags",
                        l.len(),
                        corpus.corrupted.len()
                    ))
                    .into());
                }
                if l.difficulty.iter().any(|d| !d.is_finite() || *d < 0.0)
                    || !(l.decay > 0.0 && l.decay <= 1.0)
                    || !(l.noise >= 0.0 && l.noise < 1.0)
                {
                    return Err(Error::InvalidArgument(
                        "scripted learner parameters out of range".into(),
                    )
                    .into());
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }
}

pub fn write_dataset(path: &Path, file: &DatasetFile) -> Result<(), DatasetError> {
    file.validate()?;
    fs::write(path, file.to_json()).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_dataset(path: &Path) -> Result<DatasetFile, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    DatasetFile::from_json(&text)
}
