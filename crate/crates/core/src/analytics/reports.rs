use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::segments::{classify_segment, first_viable, segment_events, Outcome, Segment};
use super::stats::mean_variance;
use super::AnalyticsError;
use crate::events::Replay;
use crate::scalar::Scalar;
use crate::text::{gestalt_similarity, tokenize};

pub const ALL_DOMAINS: &str = "All";
pub const UNKNOWN_DOMAIN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Stimulus {
    pub sid: String,
    pub domain: String,
    pub text: String,
}

/// Stimulus id to domain and text.
#[derive(Debug, Clone, Default)]
pub struct Stimuli(HashMap<String, Stimulus>);

impl Stimuli {
    pub fn get(&self, sid: &str) -> Option<&Stimulus> {
        self.0.get(sid)
    }

    pub fn domain(&self, sid: &str) -> &str {
        self.0.get(sid).map_or(UNKNOWN_DOMAIN, |s| s.domain.as_str())
    }

    pub fn text(&self, sid: &str) -> &str {
        self.0.get(sid).map_or("", |s| s.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Stimulus> for Stimuli {
    fn from_iter<I: IntoIterator<Item = Stimulus>>(iter: I) -> Self {
        Stimuli(iter.into_iter().map(|s| (s.sid.clone(), s)).collect())
    }
}

fn csv_error(e: csv::Error) -> AnalyticsError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    AnalyticsError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Reads a tab-separated `sid, domain, text` file with a header row.
pub fn load_stimuli<R: Read>(reader: R) -> Result<Stimuli, AnalyticsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_reader(reader);
    rdr.deserialize::<Stimulus>()
        .map(|r| r.map_err(csv_error))
        .collect()
}

pub fn load_stimuli_path(path: &Path) -> Result<Stimuli, AnalyticsError> {
    load_stimuli(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingVariant {
    FirstViable,
    Final,
}

impl RatingVariant {
    pub const ALL: [RatingVariant; 2] = [RatingVariant::FirstViable, RatingVariant::Final];

    pub fn as_str(self) -> &'static str {
        match self {
            RatingVariant::FirstViable => "first_viable",
            RatingVariant::Final => "final",
        }
    }
}

impl fmt::Display for RatingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RatingVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first_viable" => Ok(RatingVariant::FirstViable),
            "final" => Ok(RatingVariant::Final),
            other => Err(format!("unknown rating variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub sid: String,
    pub domain: String,
    pub variant: RatingVariant,
    pub rating: u8,
    pub source_length: usize,
}

/// Reads a `sid, domain, variant, rating, source_length` CSV with a header
/// row. Ratings outside 1..=5 are rejected.
pub fn load_ratings<R: Read>(reader: R) -> Result<Vec<RatingRecord>, AnalyticsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<RatingRecord>() {
        let rec = rec.map_err(csv_error)?;
        if !(1..=5).contains(&rec.rating) {
            return Err(AnalyticsError::Parse {
                line: out.len() + 2,
                message: format!("rating {} outside 1..=5", rec.rating),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_ratings_path(path: &Path) -> Result<Vec<RatingRecord>, AnalyticsError> {
    load_ratings(std::fs::File::open(path)?)
}

/// A rendered report: header plus string cells, written as CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

fn fmt_opt<F: Scalar>(v: Option<F>, decimals: usize) -> String {
    v.map_or_else(String::new, |v| format!("{:.*}", decimals, v.to_f64_lossy()))
}

/// Every segment of every session, labelled with its stimulus domain.
pub fn segments_with_domains(replay: &Replay, stimuli: &Stimuli) -> Vec<(Segment, String)> {
    replay
        .sessions
        .iter()
        .flat_map(|s| segment_events(s).0)
        .map(|seg| {
            let domain = stimuli.domain(&seg.sid).to_owned();
            (seg, domain)
        })
        .collect()
}

/// Domains in name order followed by the all-domain row.
fn domain_keys<'a, I: IntoIterator<Item = &'a str>>(domains: I) -> Vec<String> {
    let mut keys: Vec<String> = domains.into_iter().map(str::to_owned).collect();
    keys.sort();
    keys.dedup();
    keys.push(ALL_DOMAINS.to_owned());
    keys
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SegmentCounts {
    pub domain: String,
    pub segments: usize,
    pub skipped: usize,
    pub finished: usize,
    pub abandoned: usize,
    pub linear: usize,
    pub with_edits: usize,
    pub init_copy: usize,
    pub copy_submit: usize,
}

impl SegmentCounts {
    pub fn table(rows: &[SegmentCounts]) -> Table {
        let mut t = Table::new(&[
            "domain", "segments", "skipped", "finished", "abandoned", "linear", "with_edits",
            "init_copy", "copy_submit",
        ]);
        for r in rows {
            t.push(vec![
                r.domain.clone(),
                r.segments.to_string(),
                r.skipped.to_string(),
                r.finished.to_string(),
                r.abandoned.to_string(),
                r.linear.to_string(),
                r.with_edits.to_string(),
                r.init_copy.to_string(),
                r.copy_submit.to_string(),
            ]);
        }
        t
    }
}

pub fn segment_counts(segments: &[(Segment, String)], stimuli: &Stimuli) -> Vec<SegmentCounts> {
    domain_keys(segments.iter().map(|(_, d)| d.as_str()))
        .into_iter()
        .map(|domain| {
            let mut c = SegmentCounts {
                domain: domain.clone(),
                ..Default::default()
            };
            for (seg, d) in segments {
                if domain != ALL_DOMAINS && *d != domain {
                    continue;
                }
                c.segments += 1;
                let Some(class) = classify_segment(seg, stimuli.text(&seg.sid)) else {
                    c.abandoned += 1;
                    continue;
                };
                c.skipped += usize::from(class.skipped);
                c.finished += usize::from(class.finished);
                c.linear += usize::from(class.linear);
                c.with_edits += usize::from(class.with_edits);
                c.init_copy += usize::from(class.init_copy);
                c.copy_submit += usize::from(class.copy_submit);
            }
            c
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DurationRow<F> {
    pub domain: String,
    pub count: usize,
    /// Unrounded mean in seconds; `None` for an empty domain.
    pub mean_seconds: Option<F>,
}

impl<F: Scalar> DurationRow<F> {
    pub fn table(rows: &[DurationRow<F>]) -> Table {
        let mut t = Table::new(&["domain", "segments", "mean_seconds"]);
        for r in rows {
            t.push(vec![r.domain.clone(), r.count.to_string(), fmt_opt(r.mean_seconds, 0)]);
        }
        t
    }
}

/// Mean time from NEXT to the segment's last event; abandoned segments
/// are left out.
pub fn duration_report<F: Scalar>(segments: &[(Segment, String)]) -> Vec<DurationRow<F>> {
    domain_keys(segments.iter().map(|(_, d)| d.as_str()))
        .into_iter()
        .map(|domain| {
            let durations: Vec<F> = segments
                .iter()
                .filter(|(s, d)| {
                    s.outcome != Outcome::Abandoned && (domain == ALL_DOMAINS || *d == domain)
                })
                .map(|(s, _)| F::from_f64_lossy(s.duration()))
                .collect();
            DurationRow {
                domain,
                count: durations.len(),
                mean_seconds: mean_variance(&durations).map(|(m, _)| m),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityRow<F> {
    pub domain: String,
    /// Segments that contributed.
    pub count: usize,
    /// Finished, edited segments with no first-viable snapshot.
    pub excluded: usize,
    pub input_similarity: Option<F>,
    pub translation_similarity: Option<F>,
}

impl<F: Scalar> SimilarityRow<F> {
    pub fn table(rows: &[SimilarityRow<F>]) -> Table {
        let mut t = Table::new(&[
            "domain",
            "segments",
            "excluded",
            "input_similarity",
            "translation_similarity",
        ]);
        for r in rows {
            t.push(vec![
                r.domain.clone(),
                r.count.to_string(),
                r.excluded.to_string(),
                fmt_opt(r.input_similarity, 4),
                fmt_opt(r.translation_similarity, 4),
            ]);
        }
        t
    }
}

fn token_similarity<F: Scalar>(a: &str, b: &str) -> F {
    gestalt_similarity::<String, F>(tokenize(a).tokens(), tokenize(b).tokens()).value()
}

/// First-viable versus final similarity over finished segments with edits.
pub fn similarity_report<F: Scalar>(segments: &[(Segment, String)]) -> Vec<SimilarityRow<F>> {
    domain_keys(segments.iter().map(|(_, d)| d.as_str()))
        .into_iter()
        .map(|domain| {
            let mut inputs = Vec::new();
            let mut translations = Vec::new();
            let mut excluded = 0;
            for (seg, d) in segments {
                if (domain != ALL_DOMAINS && *d != domain) || !seg.has_edits() {
                    continue;
                }
                let Some((fv_in, fv_tr)) = first_viable(seg) else {
                    excluded += 1;
                    continue;
                };
                let final_in = seg.input_snapshots.last().expect("finished segment has input");
                let final_tr = seg.translation_snapshots.last().expect("parallel lists");
                inputs.push(token_similarity::<F>(fv_in, final_in));
                translations.push(token_similarity::<F>(fv_tr, final_tr));
            }
            SimilarityRow {
                domain,
                count: inputs.len(),
                excluded,
                input_similarity: mean_variance(&inputs).map(|(m, _)| m),
                translation_similarity: mean_variance(&translations).map(|(m, _)| m),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LengthBucket {
    UpTo5,
    UpTo10,
    UpTo15,
    UpTo20,
    UpTo25,
    Over25,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 6] = [
        LengthBucket::UpTo5,
        LengthBucket::UpTo10,
        LengthBucket::UpTo15,
        LengthBucket::UpTo20,
        LengthBucket::UpTo25,
        LengthBucket::Over25,
    ];

    /// Zero-length inputs fall in the first bucket.
    pub fn of(tokens: usize) -> Self {
        match tokens {
            0..=5 => LengthBucket::UpTo5,
            6..=10 => LengthBucket::UpTo10,
            11..=15 => LengthBucket::UpTo15,
            16..=20 => LengthBucket::UpTo20,
            21..=25 => LengthBucket::UpTo25,
            _ => LengthBucket::Over25,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LengthBucket::UpTo5 => "1-5",
            LengthBucket::UpTo10 => "6-10",
            LengthBucket::UpTo15 => "11-15",
            LengthBucket::UpTo20 => "16-20",
            LengthBucket::UpTo25 => "21-25",
            LengthBucket::Over25 => ">25",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingSummary<F> {
    pub domain: String,
    pub variant: RatingVariant,
    pub count: usize,
    pub mean: Option<F>,
    /// Population variance.
    pub variance: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingReport<F> {
    pub summaries: Vec<RatingSummary<F>>,
    /// `(variant, rating 1..=5, count)`.
    pub histogram: Vec<(RatingVariant, u8, usize)>,
    /// `(variant, bucket, count, mean)`.
    pub by_length: Vec<(RatingVariant, LengthBucket, usize, Option<F>)>,
}

impl<F: Scalar> RatingReport<F> {
    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&["domain", "variant", "count", "mean", "variance"]);
        for s in &self.summaries {
            t.push(vec![
                s.domain.clone(),
                s.variant.to_string(),
                s.count.to_string(),
                fmt_opt(s.mean, 2),
                fmt_opt(s.variance, 2),
            ]);
        }
        t
    }

    pub fn histogram_table(&self) -> Table {
        let mut t = Table::new(&["bucket", "variant", "value"]);
        for (v, rating, n) in &self.histogram {
            t.push(vec![rating.to_string(), v.to_string(), n.to_string()]);
        }
        t
    }

    pub fn length_table(&self) -> Table {
        let mut t = Table::new(&["bucket", "variant", "value"]);
        for (v, b, _, mean) in &self.by_length {
            t.push(vec![b.label().to_owned(), v.to_string(), fmt_opt(*mean, 2)]);
        }
        t
    }
}

fn ratings_as<F: Scalar>(records: &[&RatingRecord]) -> Vec<F> {
    records.iter().map(|r| F::from_usize_lossy(r.rating as usize)).collect()
}

pub fn rating_report<F: Scalar>(ratings: &[RatingRecord]) -> RatingReport<F> {
    let mut summaries = Vec::new();
    for domain in domain_keys(ratings.iter().map(|r| r.domain.as_str())) {
        for variant in RatingVariant::ALL {
            let chosen: Vec<&RatingRecord> = ratings
                .iter()
                .filter(|r| r.variant == variant && (domain == ALL_DOMAINS || r.domain == domain))
                .collect();
            let mv = mean_variance(&ratings_as::<F>(&chosen));
            summaries.push(RatingSummary {
                domain: domain.clone(),
                variant,
                count: chosen.len(),
                mean: mv.map(|(m, _)| m),
                variance: mv.map(|(_, v)| v),
            });
        }
    }
    let mut histogram = Vec::new();
    let mut by_length = Vec::new();
    for variant in RatingVariant::ALL {
        for rating in 1..=5u8 {
            let n = ratings
                .iter()
                .filter(|r| r.variant == variant && r.rating == rating)
                .count();
            histogram.push((variant, rating, n));
        }
        for bucket in LengthBucket::ALL {
            let chosen: Vec<&RatingRecord> = ratings
                .iter()
                .filter(|r| r.variant == variant && LengthBucket::of(r.source_length) == bucket)
                .collect();
            let mean = mean_variance(&ratings_as::<F>(&chosen)).map(|(m, _)| m);
            by_length.push((variant, bucket, chosen.len(), mean));
        }
    }
    RatingReport {
        summaries,
        histogram,
        by_length,
    }
}

/// Pairs the k-th first-viable rating of each `(sid, domain)` with its k-th
/// final rating, in file order. Unmatched ratings are dropped.
pub fn paired_ratings<F: Scalar>(ratings: &[RatingRecord]) -> (Vec<F>, Vec<F>) {
    let mut groups: BTreeMap<(&str, &str), [Vec<u8>; 2]> = BTreeMap::new();
    for r in ratings {
        let slot = match r.variant {
            RatingVariant::FirstViable => 0,
            RatingVariant::Final => 1,
        };
        groups.entry((&r.sid, &r.domain)).or_default()[slot].push(r.rating);
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for [fv, fin] in groups.values() {
        for (a, b) in fv.iter().zip(fin) {
            x.push(F::from_usize_lossy(*a as usize));
            y.push(F::from_usize_lossy(*b as usize));
        }
    }
    (x, y)
}
