use std::fs;
use std::path::Path;

use tracing::warn;

use super::AlignError;
use crate::text::{tokenize, TokenSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: TokenSequence,
    pub target: TokenSequence,
}

impl SentencePair {
    pub fn new(source: TokenSequence, target: TokenSequence) -> Self {
        Self { source, target }
    }
}

/// Sentence-aligned parallel text. Every pair has two non-empty sides; the
/// corpus itself may be empty (an absent baseline).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<SentencePair>) -> Result<Self, AlignError> {
        if let Some(idx) = pairs
            .iter()
            .position(|p| p.source.is_empty() || p.target.is_empty())
        {
            return Err(AlignError::EmptyPairSide(idx));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Reads two line-parallel UTF-8 files. Files of unequal line count are
    /// rejected; pairs where either line is blank are skipped with a warning.
    pub fn load(source: impl AsRef<Path>, target: impl AsRef<Path>) -> Result<Self, AlignError> {
        let src = fs::read_to_string(source)?;
        let tgt = fs::read_to_string(target)?;
        Self::from_lines(&src, &tgt)
    }

    pub fn from_lines(source: &str, target: &str) -> Result<Self, AlignError> {
        let src: Vec<&str> = source.lines().collect();
        let tgt: Vec<&str> = target.lines().collect();
        if src.len() != tgt.len() {
            return Err(AlignError::LineCountMismatch {
                source_lines: src.len(),
                target_lines: tgt.len(),
            });
        }
        let mut pairs = Vec::with_capacity(src.len());
        for (line_no, (s, t)) in src.iter().zip(&tgt).enumerate() {
            let (s, t) = (tokenize(s), tokenize(t));
            if s.is_empty() || t.is_empty() {
                warn!(line = line_no + 1, "skipping corpus line with an empty side");
                continue;
            }
            pairs.push(SentencePair::new(s, t));
        }
        Ok(Self { pairs })
    }
}

/// The baseline pairs in order, followed by the query pair. No deduplication.
pub fn mix_with_baseline(
    query: (TokenSequence, TokenSequence),
    baseline: &ParallelCorpus,
) -> Result<ParallelCorpus, AlignError> {
    let (source, target) = query;
    if source.is_empty() || target.is_empty() {
        return Err(AlignError::EmptyQuery);
    }
    let mut pairs = Vec::with_capacity(baseline.len() + 1);
    pairs.extend_from_slice(baseline.pairs());
    pairs.push(SentencePair::new(source, target));
    Ok(ParallelCorpus { pairs })
}
