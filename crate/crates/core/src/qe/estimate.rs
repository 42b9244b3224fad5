use super::{QeError, QeTag, QeTagging};
use crate::aligner::LexiconModel;
use crate::scalar::Scalar;
use crate::text::TokenSequence;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Anything that tags target tokens OK/BAD given the source sentence.
pub trait WordEstimator: Send + Sync {
    fn estimate(&self, source: &TokenSequence, target: &TokenSequence)
        -> Result<QeTagging, QeError>;
}

/// Target token `j` is OK iff some source token (or NULL) translates to it
/// with probability at least `threshold`. Unknown target tokens are BAD.
pub fn estimate_lexical<F: Scalar>(
    model: &LexiconModel<F>,
    source: &TokenSequence,
    target: &TokenSequence,
    threshold: F,
) -> Result<QeTagging, QeError> {
    if !(threshold > F::zero() && threshold < F::one()) {
        return Err(QeError::InvalidThreshold(threshold.to_f64_lossy()));
    }
    if source.is_empty() || target.is_empty() {
        return Err(QeError::EmptyInput);
    }
    Ok(target
        .iter()
        .map(|t| {
            if !model.knows_target(t) {
                return QeTag::Bad;
            }
            let best = source
                .iter()
                .map(|s| model.prob(Some(s), t))
                .fold(model.prob(None, t), F::max);
            if best >= threshold {
                QeTag::Ok
            } else {
                QeTag::Bad
            }
        })
        .collect())
}

/// [`estimate_lexical`] bound to a model and threshold.
#[derive(Debug, Clone)]
pub struct LexicalEstimator<F> {
    pub model: LexiconModel<F>,
    pub threshold: F,
}

impl<F: Scalar> WordEstimator for LexicalEstimator<F> {
    fn estimate(
        &self,
        source: &TokenSequence,
        target: &TokenSequence,
    ) -> Result<QeTagging, QeError> {
        estimate_lexical(&self.model, source, target, self.threshold)
    }
}
