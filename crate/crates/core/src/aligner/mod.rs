//! Probabilistic bilingual lexicon (IBM Model 1 EM) and word alignment.

mod align;
mod corpus;
mod lexicon;

pub use align::{align, AlignmentLink};
pub use corpus::{mix_with_baseline, ParallelCorpus, SentencePair};
pub use lexicon::{refine_lexicon, train_lexicon, EmTrainer, LexiconModel, NULL_TOKEN};

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
    #[error("corpus has no sentence pairs")]
    EmptyCorpus,
    #[error("query pair has an empty side")]
    EmptyQuery,
    #[error("sentence pair {0} has an empty side")]
    EmptyPairSide(usize),
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("corpus files differ in line count: source {source_lines}, target {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("distribution for source {word:?} is not normalized (sum {sum})")]
    InvalidDistribution { word: String, sum: f64 },
    #[error("probability {value} for ({word:?}, {target:?}) outside [0, 1]")]
    InvalidProbability {
        word: String,
        target: String,
        value: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
