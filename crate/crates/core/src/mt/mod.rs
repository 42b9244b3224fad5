//! Machine translation engines behind one interface: remote HTTP adapters,
//! a reversible dictionary mock, a registry, and round-trip composition.

mod mock;
mod registry;
mod remote;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

pub use mock::{make_reversible_mock, DictionaryBackend};
pub use registry::EngineRegistry;
pub use remote::RemoteBackend;

pub const DEFAULT_TOKEN_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MtError {
    #[error("engine {engine} does not support {src}->{tgt}")]
    UnsupportedPair {
        engine: String,
        src: String,
        tgt: String,
    },
    #[error("input has {actual} tokens, limit is {limit}")]
    LengthLimitExceeded { actual: usize, limit: usize },
    #[error("remote engine failed (status {status:?}): {detail}")]
    RemoteFailure { status: Option<u16>, detail: String },
    #[error("dictionary is not bijective: {0}")]
    NonBijectiveDictionary(String),
    #[error("unknown engine {0:?}")]
    UnknownEngine(String),
    #[error("engine id {0:?} registered twice")]
    DuplicateEngine(String),
    #[error("invalid engine descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("input text is empty")]
    EmptyInput,
}

/// Ordered `(source, target)` language codes, serialized as `["cs", "de"]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct LangPair {
    pub src: String,
    pub tgt: String,
}

impl LangPair {
    pub fn new(src: impl Into<String>, tgt: impl Into<String>) -> Self {
        Self {
            src: src.into(),
            tgt: tgt.into(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.tgt.clone(), self.src.clone())
    }
}

impl From<(String, String)> for LangPair {
    fn from((src, tgt): (String, String)) -> Self {
        Self { src, tgt }
    }
}

impl From<LangPair> for (String, String) {
    fn from(p: LangPair) -> Self {
        (p.src, p.tgt)
    }
}

impl fmt::Display for LangPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Remote,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineDescriptor {
    pub id: String,
    pub kind: EngineKind,
    pub supported_pairs: BTreeSet<LangPair>,
    pub token_limit: usize,
}

/// Produces a translation; the caller has already checked pair and length.
pub trait TranslationBackend: Send + Sync {
    fn translate(&self, pair: &LangPair, text: &str) -> Result<String, MtError>;
}

/// A descriptor together with the backend that serves it.
#[derive(Clone)]
pub struct Engine {
    descriptor: EngineDescriptor,
    backend: Arc<dyn TranslationBackend>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("descriptor", &self.descriptor)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(
        descriptor: EngineDescriptor,
        backend: Arc<dyn TranslationBackend>,
    ) -> Result<Self, MtError> {
        if descriptor.token_limit == 0 {
            return Err(MtError::InvalidDescriptor(format!(
                "{}: token_limit must be at least 1",
                descriptor.id
            )));
        }
        if descriptor.id.is_empty() {
            return Err(MtError::InvalidDescriptor("empty engine id".into()));
        }
        Ok(Self {
            descriptor,
            backend,
        })
    }

    pub fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    pub fn id(&self) -> &str {
        &self.descriptor.id
    }

    pub fn supports(&self, pair: &LangPair) -> bool {
        self.descriptor.supported_pairs.contains(pair)
    }
}

/// Translates `text` from `src` to `tgt`. Inputs longer than the engine's
/// token limit (counted with [`tokenize`]) are rejected, never truncated.
pub fn translate(engine: &Engine, src: &str, tgt: &str, text: &str) -> Result<String, MtError> {
    let pair = LangPair::new(src, tgt);
    if !engine.supports(&pair) {
        return Err(MtError::UnsupportedPair {
            engine: engine.id().to_owned(),
            src: pair.src,
            tgt: pair.tgt,
        });
    }
    let actual = tokenize(text).len();
    let limit = engine.descriptor.token_limit;
    if actual > limit {
        return Err(MtError::LengthLimitExceeded { actual, limit });
    }
    engine.backend.translate(&pair, text)
}

/// Source input, its forward translation, and the backward translation of
/// that.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationTriplet {
    pub txt1: String,
    pub txt2: String,
    pub txt3: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Forward,
    Backward,
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::Forward => "forward",
            Leg::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{leg} translation failed: {error}")]
pub struct RoundTripError {
    pub leg: Leg,
    pub error: MtError,
}

/// Forward translation of `text` over `pair`, then the backward translation
/// of the result. Either leg failing fails the whole call.
pub fn round_trip(
    forward: &Engine,
    backward: &Engine,
    pair: &LangPair,
    text: &str,
) -> Result<TranslationTriplet, RoundTripError> {
    if text.trim().is_empty() {
        return Err(RoundTripError {
            leg: Leg::Forward,
            error: MtError::EmptyInput,
        });
    }
    let txt2 = translate(forward, &pair.src, &pair.tgt, text).map_err(|error| RoundTripError {
        leg: Leg::Forward,
        error,
    })?;
    let txt3 =
        translate(backward, &pair.tgt, &pair.src, &txt2).map_err(|error| RoundTripError {
            leg: Leg::Backward,
            error,
        })?;
    Ok(TranslationTriplet {
        txt1: text.to_owned(),
        txt2,
        txt3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs_de() -> LangPair {
        LangPair::new("cs", "de")
    }

    fn mock(dict: &[(&str, &str)], limit: usize) -> (Engine, Engine) {
        make_reversible_mock(
            dict.iter().map(|(a, b)| (a.to_string(), b.to_string())),
            &cs_de(),
            limit,
        )
        .unwrap()
    }

    #[test]
    fn dictionary_translation() {
        let (fwd, _) = mock(&[("hello", "HALLO")], 100);
        assert_eq!(translate(&fwd, "cs", "de", "hello").unwrap(), "HALLO");
    }

    #[test]
    fn over_limit_is_rejected() {
        let (fwd, _) = mock(&[], 100);
        let text = vec!["w"; 101].join(" ");
        assert_eq!(
            translate(&fwd, "cs", "de", &text),
            Err(MtError::LengthLimitExceeded {
                actual: 101,
                limit: 100
            })
        );
        let text = vec!["w"; 100].join(" ");
        assert!(translate(&fwd, "cs", "de", &text).is_ok());
    }

    #[test]
    fn unsupported_pair() {
        let (fwd, _) = mock(&[], 100);
        assert!(matches!(
            translate(&fwd, "cs", "fr", "a"),
            Err(MtError::UnsupportedPair { .. })
        ));
    }

    #[test]
    fn round_trip_with_mock() {
        let (fwd, bwd) = mock(&[("a", "X"), ("b", "Y")], 100);
        let t = round_trip(&fwd, &bwd, &cs_de(), "a b").unwrap();
        assert_eq!(
            t,
            TranslationTriplet {
                txt1: "a b".into(),
                txt2: "X Y".into(),
                txt3: "a b".into()
            }
        );
    }

    #[test]
    fn round_trip_reports_failing_leg() {
        let (fwd, bwd) = mock(&[], 2);
        let err = round_trip(&fwd, &bwd, &cs_de(), "a b c").unwrap_err();
        assert_eq!(err.leg, Leg::Forward);
        assert_eq!(
            err.error,
            MtError::LengthLimitExceeded {
                actual: 3,
                limit: 2
            }
        );
        let (fwd, _) = mock(&[], 100);
        let (_, tight_bwd) = mock(&[], 1);
        let err = round_trip(&fwd, &tight_bwd, &cs_de(), "a b").unwrap_err();
        assert_eq!(err.leg, Leg::Backward);
        assert!(matches!(err.error, MtError::LengthLimitExceeded { .. }));
    }

    #[test]
    fn identity_mock_round_trip() {
        let (fwd, bwd) = mock(&[], 100);
        let t = round_trip(&fwd, &bwd, &cs_de(), "ahoj světe").unwrap();
        assert_eq!(t.txt1, t.txt2);
        assert_eq!(t.txt2, t.txt3);
    }

    #[test]
    fn descriptor_rejects_zero_limit() {
        let (fwd, _) = mock(&[], 1);
        let mut d = fwd.descriptor().clone();
        d.token_limit = 0;
        assert!(Engine::new(d, fwd.backend.clone()).is_err());
    }
}
