use std::collections::HashMap;

use super::{Engine, EngineDescriptor, LangPair, MtError};

/// Engines by id, in registration order.
#[derive(Debug, Clone, Default)]
pub struct EngineRegistry {
    engines: Vec<Engine>,
    by_id: HashMap<String, usize>,
    backward: HashMap<String, String>,
}

impl EngineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, engine: Engine) -> Result<(), MtError> {
        if self.by_id.contains_key(engine.id()) {
            return Err(MtError::DuplicateEngine(engine.id().to_owned()));
        }
        self.by_id.insert(engine.id().to_owned(), self.engines.len());
        self.engines.push(engine);
        Ok(())
    }

    /// Declares which engine translates `forward`'s output back.
    pub fn set_backward(&mut self, forward: &str, backward: &str) -> Result<(), MtError> {
        self.get(forward)?;
        self.get(backward)?;
        self.backward.insert(forward.to_owned(), backward.to_owned());
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Engine, MtError> {
        self.by_id
            .get(id)
            .map(|&i| &self.engines[i])
            .ok_or_else(|| MtError::UnknownEngine(id.to_owned()))
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &EngineDescriptor> {
        self.engines.iter().map(Engine::descriptor)
    }

    pub fn len(&self) -> usize {
        self.engines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.engines.is_empty()
    }

    /// Forward engine `id`, the language pair it is used for (`pair` when
    /// given, otherwise its first supported pair), and the engine that
    /// serves the reverse direction: the declared backward engine if any,
    /// else the first registered engine supporting the reversed pair.
    pub fn route(
        &self,
        id: &str,
        pair: Option<&LangPair>,
    ) -> Result<(&Engine, &Engine, LangPair), MtError> {
        let forward = self.get(id)?;
        let pair = match pair {
            Some(p) => p.clone(),
            None => forward
                .descriptor()
                .supported_pairs
                .iter()
                .next()
                .cloned()
                .ok_or_else(|| MtError::InvalidDescriptor(format!("{id}: no language pairs")))?,
        };
        if !forward.supports(&pair) {
            return Err(MtError::UnsupportedPair {
                engine: id.to_owned(),
                src: pair.src,
                tgt: pair.tgt,
            });
        }
        let reverse = pair.reversed();
        let backward = match self.backward.get(id) {
            Some(b) => self.get(b)?,
            None => self
                .engines
                .iter()
                .find(|e| e.supports(&reverse))
                .ok_or_else(|| MtError::UnsupportedPair {
                    engine: format!("(no backward engine for {id})"),
                    src: reverse.src.clone(),
                    tgt: reverse.tgt.clone(),
                })?,
        };
        Ok((forward, backward, pair))
    }
}
