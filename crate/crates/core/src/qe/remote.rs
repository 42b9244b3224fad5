use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{QeError, QeTagging, WordEstimator};
use crate::text::TokenSequence;

#[derive(Serialize)]
struct EstimateRequest<'a> {
    source: &'a [String],
    target: &'a [String],
}

#[derive(Deserialize)]
struct EstimateResponse {
    tags: QeTagging,
}

/// Word-level estimator backed by an external HTTP service.
///
/// POSTs `{"source": [...], "target": [...]}` and expects
/// `{"tags": ["OK", "BAD", ...]}` with one tag per target token.
#[derive(Debug, Clone)]
pub struct RemoteEstimator {
    url: String,
    client: reqwest::blocking::Client,
}

impl RemoteEstimator {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Result<Self, QeError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| QeError::Remote(e.to_string()))?;
        Ok(Self {
            url: url.into(),
            client,
        })
    }
}

impl WordEstimator for RemoteEstimator {
    fn estimate(
        &self,
        source: &TokenSequence,
        target: &TokenSequence,
    ) -> Result<QeTagging, QeError> {
        let resp = self
            .client
            .post(&self.url)
            .json(&EstimateRequest {
                source: source.tokens(),
                target: target.tokens(),
            })
            .send()
            .map_err(|e| QeError::Remote(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(QeError::Remote(format!("status {}", resp.status().as_u16())));
        }
        let body: EstimateResponse = resp.json().map_err(|e| QeError::Remote(e.to_string()))?;
        if body.tags.len() != target.len() {
            return Err(QeError::LengthMismatch {
                tokens: target.len(),
                tags: body.tags.len(),
            });
        }
        Ok(body.tags)
    }
}
