//! Service configuration file (TOML) and construction of the engine
//! registry and assist service from it. Relative paths resolve against
//! the directory holding the file.
//!
//! ```toml
//! [qe]
//! threshold = 0.1
//!
//! [aligner]
//! iterations = 5
//!
//! [[engines]]
//! id = "cs-de"
//! kind = "remote"
//! base_url = "http://127.0.0.1:9000/translate"
//! pairs = [["cs", "de"]]
//! backward = "de-cs"
//!
//! [[engines]]
//! id = "de-cs"
//! kind = "mock"
//! dictionary = "dict.tsv"
//! invert = true
//! pairs = [["de", "cs"]]
//!
//! [[corpora]]
//! pair = ["cs", "de"]
//! source = "train.cs"
//! target = "train.de"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use crate::aligner::{train_lexicon, AlignError, ParallelCorpus};
use crate::events::{EventError, EventLog};
use crate::mt::{
    DictionaryBackend, Engine, EngineDescriptor, EngineKind, EngineRegistry, LangPair, MtError,
    RemoteBackend, TranslationBackend, DEFAULT_TOKEN_LIMIT,
};
use crate::qe::{QeError, RemoteEstimator, DEFAULT_THRESHOLD};
use crate::scalar::Scalar;
use crate::session::{AssistService, AssistSettings, PairLexicon};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] MtError),
    #[error(transparent)]
    Corpus(#[from] AlignError),
    #[error(transparent)]
    Estimator(#[from] QeError),
    #[error(transparent)]
    Log(#[from] EventError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub id: String,
    pub kind: EngineKind,
    pub pairs: Vec<LangPair>,
    #[serde(default = "default_token_limit")]
    pub token_limit: usize,
    /// Remote engines: endpoint receiving the POST.
    pub base_url: Option<String>,
    /// Mock engines: tab-separated `source<TAB>target` word list.
    pub dictionary: Option<PathBuf>,
    /// Mock engines: apply the dictionary right to left.
    #[serde(default)]
    pub invert: bool,
    /// Engine used to translate this engine's output back.
    pub backward: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_token_limit() -> usize {
    DEFAULT_TOKEN_LIMIT
}

fn default_in_flight() -> usize {
    4
}

fn default_timeout_ms() -> u64 {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub pair: LangPair,
    pub source: PathBuf,
    pub target: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QeConfig {
    pub threshold: f64,
    pub remote_url: Option<String>,
    pub timeout_ms: u64,
}

impl Default for QeConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            remote_url: None,
            timeout_ms: default_timeout_ms(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignerConfig {
    pub iterations: usize,
    pub null_prob_floor: f64,
    pub refine_passes: usize,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        Self {
            iterations: 5,
            null_prob_floor: 0.0,
            refine_passes: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueConfig {
    pub capacity: usize,
    pub workers: usize,
}

impl Default for QueueConfig {
    fn default() -> Self {
        Self {
            capacity: 256,
            workers: 4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    /// Event log path; the command line may override it.
    pub event_log: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            event_log: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default)]
    pub server: ServerConfig,
    #[serde(default)]
    pub engines: Vec<EngineConfig>,
    #[serde(default)]
    pub corpora: Vec<CorpusConfig>,
    #[serde(default)]
    pub qe: QeConfig,
    #[serde(default)]
    pub aligner: AlignerConfig,
    #[serde(default)]
    pub queue: QueueConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut cfg: ServiceConfig = toml::from_str(text)?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().map(Path::to_owned).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_owned()
        } else {
            self.base_dir.join(path)
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let t = self.qe.threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(ConfigError::Invalid(format!("qe.threshold {t} not in (0, 1)")));
        }
        let f = self.aligner.null_prob_floor;
        if !(0.0..1.0).contains(&f) {
            return Err(ConfigError::Invalid(format!(
                "aligner.null_prob_floor {f} not in [0, 1)"
            )));
        }
        if self.aligner.iterations == 0 {
            return Err(ConfigError::Invalid("aligner.iterations must be at least 1".into()));
        }
        for e in &self.engines {
            if e.pairs.is_empty() {
                return Err(ConfigError::Invalid(format!("engine {}: no pairs", e.id)));
            }
            match e.kind {
                EngineKind::Remote if e.base_url.is_none() => {
                    return Err(ConfigError::Invalid(format!("engine {}: missing base_url", e.id)))
                }
                EngineKind::Mock if e.dictionary.is_none() => {
                    return Err(ConfigError::Invalid(format!("engine {}: missing dictionary", e.id)))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn build_engine(&self, e: &EngineConfig) -> Result<Engine, ConfigError> {
        let backend: Arc<dyn TranslationBackend> = match e.kind {
            EngineKind::Remote => Arc::new(RemoteBackend::new(
                e.base_url.clone().expect("validated"),
                e.max_in_flight,
                Duration::from_millis(e.timeout_ms),
            )?),
            EngineKind::Mock => {
                let path = self.resolve(e.dictionary.as_deref().expect("validated"));
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| ConfigError::Io { path, source })?;
                let dict = DictionaryBackend::from_tsv(&text)?;
                Arc::new(if e.invert { dict.inverse() } else { dict })
            }
        };
        let descriptor = EngineDescriptor {
            id: e.id.clone(),
            kind: e.kind,
            supported_pairs: e.pairs.iter().cloned().collect::<BTreeSet<_>>(),
            token_limit: e.token_limit,
        };
        Ok(Engine::new(descriptor, backend)?)
    }

    pub fn build_registry(&self) -> Result<EngineRegistry, ConfigError> {
        let mut reg = EngineRegistry::new();
        for e in &self.engines {
            reg.register(self.build_engine(e)?)?;
        }
        for e in &self.engines {
            if let Some(b) = &e.backward {
                reg.set_backward(&e.id, b)?;
            }
        }
        Ok(reg)
    }

    /// Loads and trains a lexicon for every configured corpus.
    pub fn build_lexicons<F: Scalar>(&self) -> Result<Vec<(LangPair, PairLexicon<F>)>, ConfigError> {
        let floor = F::from_f64_lossy(self.aligner.null_prob_floor);
        self.corpora
            .iter()
            .map(|c| {
                let baseline = ParallelCorpus::load(self.resolve(&c.source), self.resolve(&c.target))?;
                tracing::info!(pair = %c.pair, pairs = baseline.len(), "training lexicon");
                let model = train_lexicon(&baseline, self.aligner.iterations, floor)?;
                Ok((c.pair.clone(), PairLexicon { model, baseline }))
            })
            .collect()
    }

    pub fn settings<F: Scalar>(&self) -> AssistSettings<F> {
        AssistSettings {
            threshold: F::from_f64_lossy(self.qe.threshold),
            refine_passes: self.aligner.refine_passes,
            null_prob_floor: F::from_f64_lossy(self.aligner.null_prob_floor),
        }
    }

    /// Builds the assist service writing to `log_path`, or to
    /// `server.event_log` when no path is given, or to memory.
    pub fn build_service<F: Scalar>(
        &self,
        log_path: Option<&Path>,
    ) -> Result<AssistService<F>, ConfigError> {
        let log = match log_path
            .map(Path::to_owned)
            .or_else(|| self.server.event_log.as_deref().map(|p| self.resolve(p)))
        {
            Some(p) => EventLog::open(p)?,
            None => EventLog::in_memory(),
        };
        let mut svc = AssistService::new(self.build_registry()?, Arc::new(log), self.settings());
        for (pair, lex) in self.build_lexicons()? {
            svc = svc.with_lexicon(pair, lex);
        }
        if let Some(url) = &self.qe.remote_url {
            let est = RemoteEstimator::new(url.clone(), Duration::from_millis(self.qe.timeout_ms))?;
            svc = svc.with_estimator(Arc::new(est));
        }
        Ok(svc)
    }
}
