//! Round-trip translation assistance: word alignment, word-level quality
//! estimation with source highlighting, machine translation engines,
//! interaction logging and the analyses run over the logs.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod aligner;
pub mod analytics;
pub mod config;
pub mod events;
pub mod mt;
pub mod qe;
pub mod scalar;
pub mod session;
pub mod synthesis;
pub mod text;

pub type Lexicon = aligner::LexiconModel<f64>;
pub type Highlight = qe::SourceHighlight<f64>;
pub type Service = session::AssistService<f64>;
pub type Response = session::AssistResponse<f64>;
pub type Similarity = text::SimilarityRatio<f64>;
