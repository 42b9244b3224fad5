use serde::Serialize;

use crate::events::{EventPayload, LoggedEvent, Session};
use crate::text::normalize_whitespace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Confirmed,
    Skipped,
    Abandoned,
}

/// The events for one stimulus: from its NEXT up to the next NEXT or the
/// end of the session.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub session: String,
    pub sid: String,
    pub events: Vec<LoggedEvent>,
    /// Inputs seen by the backend (TRANSLATE1) and the confirmed input;
    /// consecutive equal inputs are collapsed into one entry.
    pub input_snapshots: Vec<String>,
    /// Translation shown for each input snapshot.
    pub translation_snapshots: Vec<String>,
    pub outcome: Outcome,
}

impl Segment {
    pub fn start_ts(&self) -> f64 {
        self.events[0].record.ts
    }

    pub fn end_ts(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.record.ts)
    }

    pub fn duration(&self) -> f64 {
        self.end_ts() - self.start_ts()
    }

    pub fn is_finished(&self) -> bool {
        self.outcome == Outcome::Confirmed
    }

    /// Every input snapshot is a prefix of the next one (trailing
    /// whitespace of the earlier snapshot ignored).
    pub fn is_prefix_chain(&self) -> bool {
        self.input_snapshots
            .windows(2)
            .all(|w| w[1].starts_with(w[0].trim_end()))
    }

    pub fn has_edits(&self) -> bool {
        self.is_finished() && !self.is_prefix_chain()
    }

    fn push_snapshot(&mut self, input: &str, translation: &str) {
        if self.input_snapshots.last().is_some_and(|last| last == input) {
            *self.translation_snapshots.last_mut().expect("parallel lists") =
                translation.to_owned();
        } else {
            self.input_snapshots.push(input.to_owned());
            self.translation_snapshots.push(translation.to_owned());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentDiagnostic {
    /// CONFIRM or SKIP before any NEXT in the session.
    DanglingConfirm { session: String, seq: u64 },
    /// A second CONFIRM/SKIP inside one segment; the first one decides the
    /// outcome.
    ExtraTerminal { session: String, sid: String, seq: u64 },
}

/// Splits a session at each NEXT. Events before the first NEXT belong to
/// no segment. Snapshots recorded after the segment's CONFIRM/SKIP are not
/// added, though the events stay in the segment.
pub fn segment_events(session: &Session) -> (Vec<Segment>, Vec<SegmentDiagnostic>) {
    let mut segments: Vec<Segment> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut terminal_seen = false;
    for ev in &session.events {
        if let EventPayload::Next { sid, .. } = &ev.record.payload {
            segments.push(Segment {
                session: session.id.clone(),
                sid: sid.clone(),
                events: vec![ev.clone()],
                input_snapshots: Vec::new(),
                translation_snapshots: Vec::new(),
                outcome: Outcome::Abandoned,
            });
            terminal_seen = false;
            continue;
        }
        let Some(seg) = segments.last_mut() else {
            if matches!(
                ev.record.payload,
                EventPayload::Confirm { .. } | EventPayload::Skip { .. }
            ) {
                diagnostics.push(SegmentDiagnostic::DanglingConfirm {
                    session: session.id.clone(),
                    seq: ev.seq,
                });
            }
            continue;
        };
        seg.events.push(ev.clone());
        match &ev.record.payload {
            EventPayload::Translate1 { txt1, txt2 } if !terminal_seen => {
                seg.push_snapshot(txt1, txt2);
            }
            EventPayload::Confirm { .. } | EventPayload::Skip { .. } if terminal_seen => {
                diagnostics.push(SegmentDiagnostic::ExtraTerminal {
                    session: session.id.clone(),
                    sid: seg.sid.clone(),
                    seq: ev.seq,
                });
            }
            EventPayload::Confirm { txt1, txt2, .. } => {
                seg.push_snapshot(txt1, txt2);
                seg.outcome = Outcome::Confirmed;
                terminal_seen = true;
            }
            EventPayload::Skip { .. } => {
                seg.outcome = Outcome::Skipped;
                terminal_seen = true;
            }
            _ => {}
        }
    }
    (segments, diagnostics)
}

/// Outcome flags for a non-abandoned segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SegmentClass {
    pub skipped: bool,
    pub finished: bool,
    pub linear: bool,
    pub with_edits: bool,
    pub init_copy: bool,
    pub copy_submit: bool,
}

/// Classifies a confirmed or skipped segment; abandoned segments yield
/// `None`. `stimulus_text` may be empty when unknown, in which case the
/// copy flags are false.
pub fn classify_segment(segment: &Segment, stimulus_text: &str) -> Option<SegmentClass> {
    let finished = match segment.outcome {
        Outcome::Abandoned => return None,
        Outcome::Confirmed => true,
        Outcome::Skipped => false,
    };
    let stimulus = normalize_whitespace(stimulus_text);
    let matches_stimulus = |s: &str| !stimulus.is_empty() && normalize_whitespace(s) == stimulus;
    let linear = finished && segment.is_prefix_chain();
    let init_copy = segment
        .input_snapshots
        .iter()
        .find(|s| !s.trim().is_empty())
        .is_some_and(|s| matches_stimulus(s));
    let copy_submit = finished
        && segment
            .input_snapshots
            .last()
            .is_some_and(|s| matches_stimulus(s));
    Some(SegmentClass {
        skipped: !finished,
        finished,
        linear,
        with_edits: finished && !linear,
        init_copy,
        copy_submit,
    })
}

/// Characters that make an input count as a complete attempt.
pub const SENTENCE_FINAL: [char; 4] = ['.', '!', '?', '…'];

/// The longest non-final input snapshot ending (ignoring trailing
/// whitespace) in a sentence-final mark, paired with its translation.
/// Ties go to the earliest snapshot.
pub fn first_viable(segment: &Segment) -> Option<(&str, &str)> {
    let n = segment.input_snapshots.len();
    if n < 2 {
        return None;
    }
    let mut best: Option<usize> = None;
    for i in 0..n - 1 {
        let input = &segment.input_snapshots[i];
        let qualifies = input
            .trim_end()
            .chars()
            .last()
            .is_some_and(|c| SENTENCE_FINAL.contains(&c));
        if !qualifies {
            continue;
        }
        let len = input.chars().count();
        if best.is_none_or(|b| len > segment.input_snapshots[b].chars().count()) {
            best = Some(i);
        }
    }
    best.map(|i| {
        (
            segment.input_snapshots[i].as_str(),
            segment.translation_snapshots[i].as_str(),
        )
    })
}
