use super::{QeError, QeTag, QeTagging, SourceHighlight};
use crate::aligner::AlignmentLink;
use crate::scalar::Scalar;

/// Carries target tags over alignment links onto the source: BAD is 1.0,
/// OK is 0.0, and each source token takes the maximum over the target
/// tokens linked to it. NULL links contribute nothing.
pub fn project_to_source<F: Scalar>(
    tagging: &QeTagging,
    links: &[AlignmentLink],
    source_len: usize,
) -> Result<SourceHighlight<F>, QeError> {
    let mut intensities = vec![F::zero(); source_len];
    for link in links {
        let out_of_range = link.tgt >= tagging.len() || link.src.is_some_and(|s| s >= source_len);
        if out_of_range {
            return Err(QeError::IndexOutOfRange {
                link: (link.src, link.tgt),
                source_len,
                target_len: tagging.len(),
            });
        }
        let Some(src) = link.src else { continue };
        let value = match tagging[link.tgt] {
            QeTag::Bad => F::one(),
            QeTag::Ok => F::zero(),
        };
        intensities[src] = intensities[src].max(value);
    }
    Ok(SourceHighlight(intensities))
}
