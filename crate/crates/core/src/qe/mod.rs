//! Word-level quality estimation: OK/BAD tagging of target tokens, the
//! projection of tags onto source tokens, and the WMT tag file format.

mod estimate;
mod project;
mod remote;
mod wmt;

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::text::TokenSequence;

pub use estimate::{estimate_lexical, LexicalEstimator, WordEstimator, DEFAULT_THRESHOLD};
pub use project::project_to_source;
pub use remote::RemoteEstimator;
pub use wmt::{
    parse_wmt_tags, read_wmt_triplets, serialize_wmt_tags, write_wmt_triplets, TagLineMode,
};

#[derive(Debug, thiserror::Error)]
pub enum QeError {
    #[error("{tokens} tokens but {tags} tags")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("unknown tag literal {0:?}")]
    UnknownTag(String),
    #[error("link {link:?} out of range (source length {source_len}, target length {target_len})")]
    IndexOutOfRange {
        link: (Option<usize>, usize),
        source_len: usize,
        target_len: usize,
    },
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("source and target must be non-empty")]
    EmptyInput,
    #[error("intensity {0} outside [0, 1]")]
    InvalidIntensity(f64),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<QeError>,
    },
    #[error("files differ in line count: {0}")]
    LineCountMismatch(String),
    #[error("remote estimator failed: {0}")]
    Remote(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QeTag {
    #[serde(rename = "OK")]
    Ok,
    #[serde(rename = "BAD")]
    Bad,
}

impl QeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            QeTag::Ok => "OK",
            QeTag::Bad => "BAD",
        }
    }
}

impl fmt::Display for QeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QeTag {
    type Err = QeError;

    fn from_str(s: &str) -> Result<Self, QeError> {
        match s {
            "OK" => Ok(QeTag::Ok),
            "BAD" => Ok(QeTag::Bad),
            other => Err(QeError::UnknownTag(other.to_owned())),
        }
    }
}

/// One tag per target token.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QeTagging(pub Vec<QeTag>);

impl QeTagging {
    pub fn bad_count(&self) -> usize {
        self.0.iter().filter(|t| **t == QeTag::Bad).count()
    }
}

impl Deref for QeTagging {
    type Target = [QeTag];

    fn deref(&self) -> &[QeTag] {
        &self.0
    }
}

impl FromIterator<QeTag> for QeTagging {
    fn from_iter<I: IntoIterator<Item = QeTag>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Highlight intensity in `[0, 1]` per source token.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SourceHighlight<F>(Vec<F>);

impl<F: Scalar> SourceHighlight<F> {
    pub fn new(intensities: Vec<F>) -> Result<Self, QeError> {
        if let Some(bad) = intensities
            .iter()
            .find(|v| !(**v >= F::zero() && **v <= F::one()))
        {
            return Err(QeError::InvalidIntensity(bad.to_f64_lossy()));
        }
        Ok(Self(intensities))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![F::zero(); len])
    }

    pub fn intensities(&self) -> &[F] {
        &self.0
    }
}

impl<F> Deref for SourceHighlight<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.0
    }
}

/// A source sentence, its translation, and the translation's tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QeTriple {
    source: TokenSequence,
    target: TokenSequence,
    tagging: QeTagging,
}

impl QeTriple {
    pub fn new(
        source: TokenSequence,
        target: TokenSequence,
        tagging: QeTagging,
    ) -> Result<Self, QeError> {
        if target.len() != tagging.len() {
            return Err(QeError::LengthMismatch {
                tokens: target.len(),
                tags: tagging.len(),
            });
        }
        Ok(Self {
            source,
            target,
            tagging,
        })
    }

    pub fn source(&self) -> &TokenSequence {
        &self.source
    }

    pub fn target(&self) -> &TokenSequence {
        &self.target
    }

    pub fn tagging(&self) -> &QeTagging {
        &self.tagging
    }

    /// Same target and tags with a different source side.
    pub fn with_source(&self, source: TokenSequence) -> Self {
        Self {
            source,
            target: self.target.clone(),
            tagging: self.tagging.clone(),
        }
    }
}
