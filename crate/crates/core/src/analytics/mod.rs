//! Measurements over replayed study logs: segment reconstruction and
//! taxonomy, durations, first-viable similarity, ratings, paired t-test
//! and annotation agreement.

mod reports;
mod segments;
mod stats;

pub use reports::{
    duration_report, load_ratings, load_ratings_path, load_stimuli, load_stimuli_path, paired_ratings, rating_report,
    segment_counts, segments_with_domains, similarity_report, DurationRow, LengthBucket,
    RatingRecord, RatingReport, RatingSummary, RatingVariant, SegmentCounts, SimilarityRow,
    Stimulus, Stimuli, Table, ALL_DOMAINS, UNKNOWN_DOMAIN,
};
pub use segments::{
    classify_segment, first_viable, segment_events, Outcome, Segment, SegmentClass,
    SegmentDiagnostic, SENTENCE_FINAL,
};
pub use stats::{confusion_matrix, mean_variance, paired_t_test, ConfusionMatrix, TTest};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("length mismatch{}: {left} vs {right}", index.map(|i| format!(" at sentence {i}")).unwrap_or_default())]
    LengthMismatch {
        index: Option<usize>,
        left: usize,
        right: usize,
    },
    #[error("need at least 2 paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("zero variance in differences: t = {t}, p = {p_two_sided} (dof {dof})")]
    ZeroVariance { t: f64, dof: usize, p_two_sided: f64 },
    #[error("{0}")]
    Empty(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
