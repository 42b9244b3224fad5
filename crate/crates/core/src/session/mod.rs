//! The assist backend: round-trip translation, word-level estimation,
//! alignment and source highlighting for one query, with the resulting
//! events written to the log.

mod queue;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::aligner::{
    align, mix_with_baseline, refine_lexicon, AlignError, AlignmentLink, LexiconModel,
    ParallelCorpus,
};
use crate::events::{EventError, EventLog, EventPayload, EventRecord};
use crate::mt::{round_trip, Engine, EngineRegistry, LangPair, MtError, RoundTripError, TranslationTriplet};
use crate::qe::{estimate_lexical, project_to_source, QeError, QeTagging, SourceHighlight, WordEstimator};
use crate::scalar::Scalar;
use crate::text::tokenize;

pub use queue::{AssistQueue, QueueError};

#[derive(Debug, thiserror::Error)]
pub enum AssistError {
    #[error("input text is empty")]
    EmptyInput,
    #[error(transparent)]
    Translation(#[from] RoundTripError),
    #[error(transparent)]
    Engine(#[from] MtError),
    #[error(transparent)]
    Alignment(#[from] AlignError),
    #[error(transparent)]
    Estimation(#[from] QeError),
    #[error(transparent)]
    Log(#[from] EventError),
}

#[derive(Debug, Clone, Serialize)]
pub struct AssistResponse<F> {
    pub triplet: TranslationTriplet,
    pub tagging: QeTagging,
    pub links: Vec<AlignmentLink>,
    pub highlight: SourceHighlight<F>,
    pub request_serial: u64,
}

/// The trained lexicon for one language pair and the baseline corpus it
/// came from.
#[derive(Debug, Clone)]
pub struct PairLexicon<F> {
    pub model: LexiconModel<F>,
    pub baseline: ParallelCorpus,
}

#[derive(Debug, Clone, Copy)]
pub struct AssistSettings<F> {
    pub threshold: F,
    /// EM passes over baseline + query before estimating; 0 uses the
    /// trained model unchanged.
    pub refine_passes: usize,
    pub null_prob_floor: F,
}

impl<F: Scalar> Default for AssistSettings<F> {
    fn default() -> Self {
        Self {
            threshold: F::from_f64_lossy(crate::qe::DEFAULT_THRESHOLD),
            refine_passes: 1,
            null_prob_floor: F::zero(),
        }
    }
}

pub type Clock = Arc<dyn Fn() -> f64 + Send + Sync>;

fn system_clock() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(f64::MIN_POSITIVE)
}

/// Shared state of the assist backend. Immutable after construction apart
/// from the event log, so one instance serves all request handlers.
pub struct AssistService<F> {
    registry: EngineRegistry,
    lexicons: HashMap<LangPair, Arc<PairLexicon<F>>>,
    estimator: Option<Arc<dyn WordEstimator>>,
    settings: AssistSettings<F>,
    log: Arc<EventLog>,
    clock: Clock,
}

impl<F: Scalar> AssistService<F> {
    pub fn new(registry: EngineRegistry, log: Arc<EventLog>, settings: AssistSettings<F>) -> Self {
        Self {
            registry,
            lexicons: HashMap::new(),
            estimator: None,
            settings,
            log,
            clock: Arc::new(system_clock),
        }
    }

    pub fn with_lexicon(mut self, pair: LangPair, lexicon: PairLexicon<F>) -> Self {
        self.lexicons.insert(pair, Arc::new(lexicon));
        self
    }

    /// Replaces the lexical estimator, e.g. with a remote service.
    pub fn with_estimator(mut self, estimator: Arc<dyn WordEstimator>) -> Self {
        self.estimator = Some(estimator);
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn registry(&self) -> &EngineRegistry {
        &self.registry
    }

    pub fn log(&self) -> &Arc<EventLog> {
        &self.log
    }

    /// Resolves `engine_id` (and the optional pair) through the registry
    /// and runs [`AssistService::handle_query`].
    pub fn handle_request(
        &self,
        session: &str,
        text: &str,
        engine_id: &str,
        pair: Option<&LangPair>,
        serial: u64,
    ) -> Result<AssistResponse<F>, AssistError> {
        if text.split_whitespace().next().is_none() {
            return Err(AssistError::EmptyInput);
        }
        let (forward, backward, pair) = self.registry.route(engine_id, pair)?;
        self.handle_query(session, text, (forward, backward), &pair, serial)
    }

    /// Translates forward and back, tags the translation, aligns it to the
    /// input and projects the tags onto the input. On success the four
    /// events TRANSLATE1, TRANSLATE2, ESTIMATE, ALIGN are appended as one
    /// contiguous batch; on any failure nothing is logged.
    pub fn handle_query(
        &self,
        session: &str,
        source_text: &str,
        engines: (&Engine, &Engine),
        pair: &LangPair,
        serial: u64,
    ) -> Result<AssistResponse<F>, AssistError> {
        if source_text.split_whitespace().next().is_none() {
            return Err(AssistError::EmptyInput);
        }
        let triplet = round_trip(engines.0, engines.1, pair, source_text)?;
        let source = tokenize(&triplet.txt1);
        let target = tokenize(&triplet.txt2);

        let (tagging, links) = if target.is_empty() {
            (QeTagging::default(), Vec::new())
        } else {
            let model = self.query_model(pair, &source, &target)?;
            let tagging = match &self.estimator {
                Some(est) => est.estimate(&source, &target)?,
                None => estimate_lexical(&model, &source, &target, self.settings.threshold)?,
            };
            (tagging, align(&model, &source, &target)?)
        };
        let highlight = project_to_source(&tagging, &links, source.len())?;

        let ts = (self.clock)();
        let records = [
            EventPayload::Translate1 {
                txt1: triplet.txt1.clone(),
                txt2: triplet.txt2.clone(),
            },
            EventPayload::Translate2 {
                txt2: triplet.txt2.clone(),
                txt3: triplet.txt3.clone(),
            },
            EventPayload::Estimate {
                estimation: tagging.clone(),
            },
            EventPayload::Align {
                alignment: links.clone(),
            },
        ]
        .map(|payload| EventRecord::new(ts, session, payload));
        self.log.append_batch(&records)?;

        Ok(AssistResponse {
            triplet,
            tagging,
            links,
            highlight,
            request_serial: serial,
        })
    }

    /// The pair's trained lexicon refined over baseline + query. A new model
    /// is built per query; the shared one is never mutated.
    fn query_model(
        &self,
        pair: &LangPair,
        source: &crate::text::TokenSequence,
        target: &crate::text::TokenSequence,
    ) -> Result<LexiconModel<F>, AssistError> {
        let empty;
        let lexicon = match self.lexicons.get(pair) {
            Some(l) => l.as_ref(),
            None => {
                empty = PairLexicon {
                    model: LexiconModel::from_entries(std::iter::empty())?,
                    baseline: ParallelCorpus::default(),
                };
                &empty
            }
        };
        if source.is_empty() || self.settings.refine_passes == 0 {
            return Ok(lexicon.model.clone());
        }
        let mixed = mix_with_baseline((source.clone(), target.clone()), &lexicon.baseline)?;
        Ok(refine_lexicon(
            &lexicon.model,
            &mixed,
            self.settings.refine_passes,
            self.settings.null_prob_floor,
        )?)
    }
}
