use std::collections::HashMap;
use std::io::BufRead;

use super::EventRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedEvent {
    /// 0-based line index in the log.
    pub seq: u64,
    pub record: EventRecord,
}

/// Events of one session ordered by `(ts, seq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub events: Vec<LoggedEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Result of replaying a log: sessions in order of first appearance plus
/// one diagnostic per malformed line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replay {
    pub sessions: Vec<Session>,
    pub diagnostics: Vec<LineDiagnostic>,
}

impl Replay {
    /// Valid events back in log order, one JSON line each.
    pub fn to_jsonl(&self) -> String {
        let mut all: Vec<&LoggedEvent> =
            self.sessions.iter().flat_map(|s| s.events.iter()).collect();
        all.sort_by_key(|e| e.seq);
        let mut out = String::new();
        for e in all {
            out.push_str(&e.record.to_json());
            out.push('\n');
        }
        out
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.iter().find(|s| s.id == id)
    }

    pub fn event_count(&self) -> usize {
        self.sessions.iter().map(|s| s.events.len()).sum()
    }
}

fn replay_lines<I>(lines: I) -> Replay
where
    I: IntoIterator<Item = Result<String, String>>,
{
    let mut sessions: Vec<Session> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut diagnostics = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(message) => {
                diagnostics.push(LineDiagnostic { line: i + 1, message });
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match EventRecord::from_json(&line) {
            Ok(record) => {
                let slot = *index.entry(record.session.clone()).or_insert_with(|| {
                    sessions.push(Session {
                        id: record.session.clone(),
                        events: Vec::new(),
                    });
                    sessions.len() - 1
                });
                sessions[slot].events.push(LoggedEvent {
                    seq: i as u64,
                    record,
                });
            }
            Err(e) => diagnostics.push(LineDiagnostic {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    for s in &mut sessions {
        s.events.sort_by(|a, b| {
            a.record
                .ts
                .total_cmp(&b.record.ts)
                .then(a.seq.cmp(&b.seq))
        });
    }
    Replay {
        sessions,
        diagnostics,
    }
}

/// Replays a log stream. Malformed lines become diagnostics; valid lines
/// still replay.
pub fn replay_log<R: BufRead>(reader: R) -> Replay {
    replay_lines(reader.lines().map(|l| l.map_err(|e| e.to_string())))
}

pub fn replay_str(text: &str) -> Replay {
    replay_lines(text.lines().map(|l| Ok(l.to_owned())))
}
