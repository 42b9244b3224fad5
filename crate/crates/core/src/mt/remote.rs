use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{LangPair, MtError, TranslationBackend};

#[derive(Serialize)]
struct TranslateRequest<'a> {
    src: &'a str,
    tgt: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct TranslateResponse {
    text: String,
}

/// Counting gate limiting concurrent requests.
#[derive(Debug)]
struct InFlight {
    cap: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().expect("in-flight lock poisoned");
        while *active >= self.cap {
            active = self.freed.wait(active).expect("in-flight lock poisoned");
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().expect("in-flight lock poisoned");
        *active -= 1;
        self.0.freed.notify_one();
    }
}

/// JSON-over-HTTP engine: POST `{"src","tgt","text"}` to the base URL,
/// expecting `{"text"}` back. Connection errors, timeouts, 429 and 5xx are
/// retried once; any other non-2xx fails immediately.
#[derive(Debug)]
pub struct RemoteBackend {
    url: String,
    client: reqwest::blocking::Client,
    in_flight: InFlight,
}

enum Attempt {
    Done(String),
    Transient(MtError),
    Fatal(MtError),
}

impl RemoteBackend {
    pub fn new(url: impl Into<String>, max_in_flight: usize, timeout: Duration) -> Result<Self, MtError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| MtError::RemoteFailure {
                status: None,
                detail: e.to_string(),
            })?;
        Ok(Self {
            url: url.into(),
            client,
            in_flight: InFlight {
                cap: max_in_flight.max(1),
                active: Mutex::new(0),
                freed: Condvar::new(),
            },
        })
    }

    fn attempt(&self, pair: &LangPair, text: &str) -> Attempt {
        let body = TranslateRequest {
            src: &pair.src,
            tgt: &pair.tgt,
            text,
        };
        let resp = match self.client.post(&self.url).json(&body).send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Transient(MtError::RemoteFailure {
                    status: None,
                    detail: e.to_string(),
                })
            }
        };
        let status = resp.status();
        if !status.is_success() {
            let err = MtError::RemoteFailure {
                status: Some(status.as_u16()),
                detail: resp.text().unwrap_or_default(),
            };
            return if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Transient(err)
            } else {
                Attempt::Fatal(err)
            };
        }
        match resp.json::<TranslateResponse>() {
            Ok(r) => Attempt::Done(r.text),
            Err(e) => Attempt::Fatal(MtError::RemoteFailure {
                status: Some(status.as_u16()),
                detail: format!("malformed response: {e}"),
            }),
        }
    }
}

impl TranslationBackend for RemoteBackend {
    fn translate(&self, pair: &LangPair, text: &str) -> Result<String, MtError> {
        let _permit = self.in_flight.acquire();
        match self.attempt(pair, text) {
            Attempt::Done(out) => return Ok(out),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Transient(e) => debug!(url = %self.url, error = %e, "retrying remote engine"),
        }
        match self.attempt(pair, text) {
            Attempt::Done(out) => Ok(out),
            Attempt::Fatal(e) | Attempt::Transient(e) => Err(e),
        }
    }
}
