use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::{Engine, EngineDescriptor, EngineKind, LangPair, MtError, TranslationBackend};

/// Maps whitespace tokens through a dictionary; unknown tokens pass
/// through unchanged. Output tokens are joined with single spaces.
#[derive(Debug, Clone, Default)]
pub struct DictionaryBackend {
    map: HashMap<String, String>,
}

impl DictionaryBackend {
    /// Fails unless `entries` is a bijection between whitespace-free tokens.
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self, MtError> {
        let mut map = HashMap::new();
        let mut range = BTreeSet::new();
        for (from, to) in entries {
            if from.is_empty() || to.is_empty() || from.contains(char::is_whitespace) || to.contains(char::is_whitespace) {
                return Err(MtError::NonBijectiveDictionary(format!(
                    "entry {from:?} -> {to:?} is not a single token pair"
                )));
            }
            if !range.insert(to.clone()) {
                return Err(MtError::NonBijectiveDictionary(format!(
                    "{to:?} is the image of more than one token"
                )));
            }
            if let Some(prev) = map.insert(from.clone(), to) {
                return Err(MtError::NonBijectiveDictionary(format!(
                    "{from:?} maps to both {prev:?} and another token"
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn inverse(&self) -> Self {
        Self {
            map: self.map.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        }
    }

    /// Reads a two-column TSV dictionary (`from<TAB>to`). Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_tsv(text: &str) -> Result<Self, MtError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => entries.push((a.trim().to_owned(), b.trim().to_owned())),
                _ => {
                    return Err(MtError::NonBijectiveDictionary(format!(
                        "line {}: expected two tab-separated columns",
                        i + 1
                    )))
                }
            }
        }
        Self::new(entries)
    }

    pub fn apply(&self, text: &str) -> String {
        text.split_whitespace()
            .map(|tok| self.map.get(tok).map_or(tok, String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl TranslationBackend for DictionaryBackend {
    fn translate(&self, _pair: &LangPair, text: &str) -> Result<String, MtError> {
        Ok(self.apply(text))
    }
}

/// A forward engine over `pair` and a backward engine over its reverse,
/// applying `dictionary` and its inverse respectively.
pub fn make_reversible_mock(
    dictionary: impl IntoIterator<Item = (String, String)>,
    pair: &LangPair,
    token_limit: usize,
) -> Result<(Engine, Engine), MtError> {
    let forward = DictionaryBackend::new(dictionary)?;
    let backward = forward.inverse();
    let describe = |p: &LangPair| EngineDescriptor {
        id: format!("mock-{p}"),
        kind: EngineKind::Mock,
        supported_pairs: BTreeSet::from([p.clone()]),
        token_limit,
    };
    Ok((
        Engine::new(describe(pair), Arc::new(forward))?,
        Engine::new(describe(&pair.reversed()), Arc::new(backward))?,
    ))
}
