use serde::{Deserialize, Serialize};

use super::{AlignError, LexiconModel};
use crate::scalar::Scalar;
use crate::text::TokenSequence;

/// Link from a target token to a source token, or to NULL when `src` is
/// `None`. Serialized as a `[src, tgt]` pair with `null` for NULL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(Option<usize>, usize)", into = "(Option<usize>, usize)")]
pub struct AlignmentLink {
    pub src: Option<usize>,
    pub tgt: usize,
}

impl AlignmentLink {
    pub fn new(src: usize, tgt: usize) -> Self {
        Self {
            src: Some(src),
            tgt,
        }
    }

    pub fn null(tgt: usize) -> Self {
        Self { src: None, tgt }
    }
}

impl From<(Option<usize>, usize)> for AlignmentLink {
    fn from((src, tgt): (Option<usize>, usize)) -> Self {
        Self { src, tgt }
    }
}

impl From<AlignmentLink> for (Option<usize>, usize) {
    fn from(link: AlignmentLink) -> Self {
        (link.src, link.tgt)
    }
}

/// One link per target token: the source token maximizing
/// `t(target | source)`, smallest index on ties. Links to NULL when the
/// target is out of vocabulary, when no source token gives it positive
/// probability, or when `t(target | NULL)` is strictly larger than every
/// source candidate.
pub fn align<F: Scalar>(
    model: &LexiconModel<F>,
    source: &TokenSequence,
    target: &TokenSequence,
) -> Result<Vec<AlignmentLink>, AlignError> {
    if source.is_empty() || target.is_empty() {
        return Err(AlignError::EmptyQuery);
    }
    let links = target
        .iter()
        .enumerate()
        .map(|(j, t)| {
            if !model.knows_target(t) {
                return AlignmentLink::null(j);
            }
            let mut best: Option<(usize, F)> = None;
            for (i, s) in source.iter().enumerate() {
                let p = model.prob(Some(s), t);
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((i, p));
                }
            }
            match best {
                Some((i, p)) if p > F::zero() && p >= model.prob(None, t) => {
                    AlignmentLink::new(i, j)
                }
                _ => AlignmentLink::null(j),
            }
        })
        .collect();
    Ok(links)
}
