//! Interaction events: the record schema, the append-only JSON Lines log,
//! and replay of a log into per-session event streams.

mod log;
mod replay;

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::aligner::AlignmentLink;
use crate::qe::QeTagging;

pub use log::EventLog;
pub use replay::{replay_log, replay_str, LineDiagnostic, LoggedEvent, Replay, Session};

#[derive(Debug, thiserror::Error)]
pub enum EventError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("storage failure: {0}")]
    StorageFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventCode {
    Start,
    Next,
    Confirm,
    Skip,
    Translate1,
    Translate2,
    Estimate,
    Align,
}

impl EventCode {
    pub const ALL: [EventCode; 8] = [
        EventCode::Start,
        EventCode::Next,
        EventCode::Confirm,
        EventCode::Skip,
        EventCode::Translate1,
        EventCode::Translate2,
        EventCode::Estimate,
        EventCode::Align,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventCode::Start => "START",
            EventCode::Next => "NEXT",
            EventCode::Confirm => "CONFIRM",
            EventCode::Skip => "SKIP",
            EventCode::Translate1 => "TRANSLATE1",
            EventCode::Translate2 => "TRANSLATE2",
            EventCode::Estimate => "ESTIMATE",
            EventCode::Align => "ALIGN",
        }
    }

    /// Payload field names, in serialization order.
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            EventCode::Start => &["queue"],
            EventCode::Next => &["sid", "reason"],
            EventCode::Confirm => &["sid", "txt1", "txt2"],
            EventCode::Skip => &["reason"],
            EventCode::Translate1 => &["txt1", "txt2"],
            EventCode::Translate2 => &["txt2", "txt3"],
            EventCode::Estimate => &["estimation"],
            EventCode::Align => &["alignment"],
        }
    }
}

impl fmt::Display for EventCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventCode {
    type Err = EventError;

    fn from_str(s: &str) -> Result<Self, EventError> {
        EventCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| EventError::SchemaViolation(format!("unknown event code {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Start { queue: String },
    Next { sid: String, reason: String },
    Confirm { sid: String, txt1: String, txt2: String },
    Skip { reason: String },
    Translate1 { txt1: String, txt2: String },
    Translate2 { txt2: String, txt3: String },
    Estimate { estimation: QeTagging },
    Align { alignment: Vec<AlignmentLink> },
}

impl EventPayload {
    pub fn code(&self) -> EventCode {
        match self {
            EventPayload::Start { .. } => EventCode::Start,
            EventPayload::Next { .. } => EventCode::Next,
            EventPayload::Confirm { .. } => EventCode::Confirm,
            EventPayload::Skip { .. } => EventCode::Skip,
            EventPayload::Translate1 { .. } => EventCode::Translate1,
            EventPayload::Translate2 { .. } => EventCode::Translate2,
            EventPayload::Estimate { .. } => EventCode::Estimate,
            EventPayload::Align { .. } => EventCode::Align,
        }
    }
}

/// One logged user or server action.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    /// Unix time in seconds.
    pub ts: f64,
    pub session: String,
    pub payload: EventPayload,
}

fn violation(msg: impl Into<String>) -> EventError {
    EventError::SchemaViolation(msg.into())
}

fn take_string(obj: &mut Map<String, Value>, key: &str) -> Result<String, EventError> {
    match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(other) => Err(violation(format!("field {key:?} must be a string, got {other}"))),
        None => Err(violation(format!("missing field {key:?}"))),
    }
}

impl EventRecord {
    pub fn new(ts: f64, session: impl Into<String>, payload: EventPayload) -> Self {
        Self {
            ts,
            session: session.into(),
            payload,
        }
    }

    pub fn code(&self) -> EventCode {
        self.payload.code()
    }

    pub fn validate(&self) -> Result<(), EventError> {
        if !(self.ts.is_finite() && self.ts > 0.0) {
            return Err(violation(format!("ts must be a positive number, got {}", self.ts)));
        }
        Ok(())
    }

    /// Parses and validates a JSON object: exactly `ts`, `session`, `code`
    /// and the code's payload fields, with the right types.
    pub fn from_value(value: Value) -> Result<Self, EventError> {
        let Value::Object(mut obj) = value else {
            return Err(violation("record must be a JSON object"));
        };
        let ts = match obj.remove("ts") {
            Some(Value::Number(n)) => n
                .as_f64()
                .ok_or_else(|| violation("ts is not representable as f64"))?,
            Some(other) => return Err(violation(format!("ts must be a number, got {other}"))),
            None => return Err(violation("missing field \"ts\"")),
        };
        let session = take_string(&mut obj, "session")?;
        let code: EventCode = take_string(&mut obj, "code")?.parse()?;
        let payload = match code {
            EventCode::Start => EventPayload::Start {
                queue: take_string(&mut obj, "queue")?,
            },
            EventCode::Next => EventPayload::Next {
                sid: take_string(&mut obj, "sid")?,
                reason: take_string(&mut obj, "reason")?,
            },
            EventCode::Confirm => EventPayload::Confirm {
                sid: take_string(&mut obj, "sid")?,
                txt1: take_string(&mut obj, "txt1")?,
                txt2: take_string(&mut obj, "txt2")?,
            },
            EventCode::Skip => EventPayload::Skip {
                reason: take_string(&mut obj, "reason")?,
            },
            EventCode::Translate1 => EventPayload::Translate1 {
                txt1: take_string(&mut obj, "txt1")?,
                txt2: take_string(&mut obj, "txt2")?,
            },
            EventCode::Translate2 => EventPayload::Translate2 {
                txt2: take_string(&mut obj, "txt2")?,
                txt3: take_string(&mut obj, "txt3")?,
            },
            EventCode::Estimate => {
                let v = obj
                    .remove("estimation")
                    .ok_or_else(|| violation("missing field \"estimation\""))?;
                EventPayload::Estimate {
                    estimation: serde_json::from_value(v)
                        .map_err(|e| violation(format!("estimation: {e}")))?,
                }
            }
            EventCode::Align => {
                let v = obj
                    .remove("alignment")
                    .ok_or_else(|| violation("missing field \"alignment\""))?;
                EventPayload::Align {
                    alignment: serde_json::from_value(v)
                        .map_err(|e| violation(format!("alignment: {e}")))?,
                }
            }
        };
        if let Some(extra) = obj.keys().next() {
            return Err(violation(format!("unexpected field {extra:?} for {code}")));
        }
        let record = Self {
            ts,
            session,
            payload,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn from_json(line: &str) -> Result<Self, EventError> {
        let value: Value =
            serde_json::from_str(line).map_err(|e| violation(format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    /// One JSON line, without the trailing newline. Field order is fixed:
    /// `ts`, `session`, `code`, then the payload fields.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("event records always serialize")
    }
}

impl Serialize for EventRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("ts", &self.ts)?;
        map.serialize_entry("session", &self.session)?;
        map.serialize_entry("code", self.code().as_str())?;
        match &self.payload {
            EventPayload::Start { queue } => map.serialize_entry("queue", queue)?,
            EventPayload::Next { sid, reason } => {
                map.serialize_entry("sid", sid)?;
                map.serialize_entry("reason", reason)?;
            }
            EventPayload::Confirm { sid, txt1, txt2 } => {
                map.serialize_entry("sid", sid)?;
                map.serialize_entry("txt1", txt1)?;
                map.serialize_entry("txt2", txt2)?;
            }
            EventPayload::Skip { reason } => map.serialize_entry("reason", reason)?,
            EventPayload::Translate1 { txt1, txt2 } => {
                map.serialize_entry("txt1", txt1)?;
                map.serialize_entry("txt2", txt2)?;
            }
            EventPayload::Translate2 { txt2, txt3 } => {
                map.serialize_entry("txt2", txt2)?;
                map.serialize_entry("txt3", txt3)?;
            }
            EventPayload::Estimate { estimation } => {
                map.serialize_entry("estimation", estimation)?
            }
            EventPayload::Align { alignment } => map.serialize_entry("alignment", alignment)?,
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EventRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        EventRecord::from_value(value).map_err(serde::de::Error::custom)
    }
}
