use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AlignError, ParallelCorpus};
use crate::scalar::Scalar;

/// Display name of the empty source word.
pub const NULL_TOKEN: &str = "<NULL>";

/// Row index of the NULL source word; real source words start at 1.
const NULL_ROW: usize = 0;

#[derive(Debug, Clone, Default)]
struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocab {
    fn get(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(id) = self.ids.get(word) {
            return *id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        id
    }

    fn len(&self) -> usize {
        self.words.len()
    }
}

/// Translation table `t(target | source)` with a NULL source row.
///
/// Each row is a distribution over the target words observed co-occurring
/// with that source word (all targets, for NULL). Rows are ordered maps so
/// that every floating point reduction runs in a fixed order.
#[derive(Debug, Clone)]
pub struct LexiconModel<F> {
    sources: Vocab,
    targets: Vocab,
    /// `rows[0]` is NULL, `rows[id + 1]` is source word `id`.
    rows: Vec<BTreeMap<u32, F>>,
}

impl<F: Scalar> LexiconModel<F> {
    /// Builds a model from explicit `(source, target, probability)` entries;
    /// `None` as source denotes NULL. Every row must be a distribution.
    pub fn from_entries<'a, I>(entries: I) -> Result<Self, AlignError>
    where
        I: IntoIterator<Item = (Option<&'a str>, &'a str, F)>,
    {
        let mut model = Self {
            sources: Vocab::default(),
            targets: Vocab::default(),
            rows: vec![BTreeMap::new()],
        };
        for (source, target, p) in entries {
            if !(p >= F::zero() && p <= F::one()) {
                return Err(AlignError::InvalidProbability {
                    word: source.unwrap_or(NULL_TOKEN).to_owned(),
                    target: target.to_owned(),
                    value: p.to_f64_lossy(),
                });
            }
            let row = model.intern_source(source);
            let t = model.targets.intern(target);
            model.rows[row].insert(t, p);
        }
        let tol = F::epsilon().sqrt();
        for (row, dist) in model.rows.iter().enumerate() {
            if dist.is_empty() {
                continue;
            }
            let sum: F = dist.values().copied().sum();
            if (sum - F::one()).abs() > tol {
                return Err(AlignError::InvalidDistribution {
                    word: model.source_name(row).to_owned(),
                    sum: sum.to_f64_lossy(),
                });
            }
        }
        Ok(model)
    }

    /// `t(w | w) = 1` for every word given.
    pub fn identity<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let words: Vec<&str> = words.into_iter().collect();
        Self::from_entries(words.iter().map(|w| (Some(*w), *w, F::one())))
            .expect("identity rows are normalized")
    }

    fn intern_source(&mut self, source: Option<&str>) -> usize {
        match source {
            None => NULL_ROW,
            Some(word) => {
                let id = self.sources.intern(word) as usize + 1;
                if self.rows.len() <= id {
                    self.rows.resize_with(id + 1, BTreeMap::new);
                }
                id
            }
        }
    }

    fn source_row(&self, source: Option<&str>) -> Option<usize> {
        match source {
            None => Some(NULL_ROW),
            Some(word) => self.sources.get(word).map(|id| id as usize + 1),
        }
    }

    fn source_name(&self, row: usize) -> &str {
        if row == NULL_ROW {
            NULL_TOKEN
        } else {
            &self.sources.words[row - 1]
        }
    }

    /// `t(target | source)`; `None` source is NULL. Unknown words and
    /// unobserved pairs have probability zero.
    pub fn prob(&self, source: Option<&str>, target: &str) -> F {
        match (self.source_row(source), self.targets.get(target)) {
            (Some(row), Some(t)) => self.rows[row].get(&t).copied().unwrap_or_else(F::zero),
            _ => F::zero(),
        }
    }

    pub fn knows_target(&self, target: &str) -> bool {
        self.targets.get(target).is_some()
    }

    pub fn knows_source(&self, source: &str) -> bool {
        self.sources.get(source).is_some()
    }

    pub fn source_vocab(&self) -> impl Iterator<Item = &str> {
        self.sources.words.iter().map(String::as_str)
    }

    pub fn target_vocab(&self) -> impl Iterator<Item = &str> {
        self.targets.words.iter().map(String::as_str)
    }

    /// The distribution `t(· | source)` in target-id order.
    pub fn distribution(&self, source: Option<&str>) -> Vec<(&str, F)> {
        self.source_row(source)
            .map(|row| {
                self.rows[row]
                    .iter()
                    .map(|(t, p)| (self.targets.words[*t as usize].as_str(), *p))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Most probable target for `source`; ties go to the earlier-seen target.
    pub fn best_translation(&self, source: Option<&str>) -> Option<(&str, F)> {
        self.distribution(source)
            .into_iter()
            .fold(None, |best, (w, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((w, p)),
            })
    }

    /// Corpus log-likelihood under Model 1 with a uniform alignment prior.
    pub fn log_likelihood(&self, corpus: &ParallelCorpus) -> F {
        let mut ll = F::zero();
        for pair in corpus.pairs() {
            let norm = F::from_usize_lossy(pair.source.len() + 1);
            for t in pair.target.iter() {
                let mut p = self.prob(None, t);
                for s in pair.source.iter() {
                    p = p + self.prob(Some(s), t);
                }
                ll = ll + (p / norm).ln();
            }
        }
        ll
    }
}

/// Incremental EM over a fixed corpus. Each [`EmTrainer::step`] is one full
/// expectation/maximization pass.
#[derive(Debug, Clone)]
pub struct EmTrainer<F> {
    model: LexiconModel<F>,
    /// Corpus as `(source rows, target ids)`; source rows exclude NULL.
    encoded: Vec<(Vec<usize>, Vec<u32>)>,
    null_prob_floor: F,
}

impl<F: Scalar> EmTrainer<F> {
    /// Starts from the uniform distribution over co-occurring pairs, with
    /// NULL paired with every target word.
    pub fn new(corpus: &ParallelCorpus, null_prob_floor: F) -> Result<Self, AlignError> {
        let empty = LexiconModel {
            sources: Vocab::default(),
            targets: Vocab::default(),
            rows: vec![BTreeMap::new()],
        };
        Self::from_model(empty, corpus, null_prob_floor)
    }

    /// Continues from an existing model. Pairs the model already holds keep
    /// their probability; newly co-occurring pairs start at `1 / n`, where
    /// `n` counts the distinct targets the source meets in `corpus`.
    pub fn from_model(
        mut model: LexiconModel<F>,
        corpus: &ParallelCorpus,
        null_prob_floor: F,
    ) -> Result<Self, AlignError> {
        if corpus.is_empty() {
            return Err(AlignError::EmptyCorpus);
        }
        let mut encoded = Vec::with_capacity(corpus.len());
        let mut cooc: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); model.rows.len()];
        for pair in corpus.pairs() {
            let src: Vec<usize> = pair
                .source
                .iter()
                .map(|s| model.intern_source(Some(s)))
                .collect();
            let tgt: Vec<u32> = pair.target.iter().map(|t| model.targets.intern(t)).collect();
            if cooc.len() < model.rows.len() {
                cooc.resize_with(model.rows.len(), BTreeSet::new);
            }
            for &row in src.iter().chain(std::iter::once(&NULL_ROW)) {
                cooc[row].extend(tgt.iter().copied());
            }
            encoded.push((src, tgt));
        }
        // NULL meets every target word in the vocabulary.
        cooc[NULL_ROW].extend(0..model.targets.len() as u32);
        for (row, targets) in cooc.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let init = F::one() / F::from_usize_lossy(targets.len());
            let dist = &mut model.rows[row];
            for t in targets {
                dist.entry(*t).or_insert(init);
            }
        }
        Ok(Self {
            model,
            encoded,
            null_prob_floor,
        })
    }

    pub fn model(&self) -> &LexiconModel<F> {
        &self.model
    }

    pub fn into_model(self) -> LexiconModel<F> {
        self.model
    }

    /// One EM iteration: per-target posterior over the sentence's source
    /// words and NULL, accumulated into expected counts and renormalized
    /// per source row.
    pub fn step(&mut self) {
        let rows = &self.model.rows;
        let mut counts: Vec<BTreeMap<u32, F>> = vec![BTreeMap::new(); rows.len()];
        for (src, tgt) in &self.encoded {
            for &t in tgt {
                let lookup = |row: usize| rows[row].get(&t).copied().unwrap_or_else(F::zero);
                let mut denom = lookup(NULL_ROW);
                for &s in src {
                    denom = denom + lookup(s);
                }
                if denom <= F::zero() {
                    continue;
                }
                for &s in std::iter::once(&NULL_ROW).chain(src) {
                    let w = lookup(s) / denom;
                    let c = counts[s].entry(t).or_insert_with(F::zero);
                    *c = *c + w;
                }
            }
        }
        for (row, dist) in counts.iter_mut().enumerate() {
            let total: F = dist.values().copied().sum();
            if total <= F::zero() {
                // A row with no mass this pass keeps its previous values.
                *dist = self.model.rows[row].clone();
                continue;
            }
            dist.retain(|_, c| *c > F::zero());
            for c in dist.values_mut() {
                *c = *c / total;
            }
        }
        if self.null_prob_floor > F::zero() {
            let null = &mut counts[NULL_ROW];
            for t in 0..self.model.targets.len() as u32 {
                null.entry(t).or_insert_with(F::zero);
            }
            apply_floor(null, self.null_prob_floor);
        }
        self.model.rows = counts;
    }

    pub fn log_likelihood(&self) -> F {
        let mut ll = F::zero();
        for (src, tgt) in &self.encoded {
            let norm = F::from_usize_lossy(src.len() + 1);
            for &t in tgt {
                let lookup =
                    |row: usize| self.model.rows[row].get(&t).copied().unwrap_or_else(F::zero);
                let mut p = lookup(NULL_ROW);
                for &s in src {
                    p = p + lookup(s);
                }
                ll = ll + (p / norm).ln();
            }
        }
        ll
    }
}

/// Raises every entry of a distribution to at least `floor` and rescales the
/// remaining entries proportionally so the row still sums to one. A floor
/// at or above `1 / len` yields the uniform distribution.
fn apply_floor<F: Scalar>(dist: &mut BTreeMap<u32, F>, floor: F) {
    let n = F::from_usize_lossy(dist.len());
    if n.is_zero() {
        return;
    }
    if floor * n >= F::one() {
        dist.values_mut().for_each(|p| *p = F::one() / n);
        return;
    }
    let mut pinned: BTreeSet<u32> = BTreeSet::new();
    loop {
        if pinned.len() == dist.len() {
            dist.values_mut().for_each(|p| *p = F::one() / n);
            return;
        }
        let free_mass = F::one() - floor * F::from_usize_lossy(pinned.len());
        let free_total: F = dist
            .iter()
            .filter(|(t, _)| !pinned.contains(t))
            .map(|(_, p)| *p)
            .sum();
        let newly: Vec<u32> = dist
            .iter()
            .filter(|(t, p)| {
                !pinned.contains(t)
                    && (free_total <= F::zero() || **p * free_mass / free_total < floor)
            })
            .map(|(t, _)| *t)
            .collect();
        if newly.is_empty() {
            for (t, p) in dist.iter_mut() {
                *p = if pinned.contains(t) {
                    floor
                } else {
                    *p * free_mass / free_total
                };
            }
            return;
        }
        pinned.extend(newly);
    }
}

/// Trains a lexicon with `iterations` EM passes from a uniform start.
pub fn train_lexicon<F: Scalar>(
    corpus: &ParallelCorpus,
    iterations: usize,
    null_prob_floor: F,
) -> Result<LexiconModel<F>, AlignError> {
    if iterations == 0 {
        return Err(AlignError::ZeroIterations);
    }
    let mut trainer = EmTrainer::new(corpus, null_prob_floor)?;
    for _ in 0..iterations {
        trainer.step();
    }
    Ok(trainer.into_model())
}

/// Runs `passes` EM iterations over `corpus` starting from `model`,
/// returning a new model. The input model is left untouched.
pub fn refine_lexicon<F: Scalar>(
    model: &LexiconModel<F>,
    corpus: &ParallelCorpus,
    passes: usize,
    null_prob_floor: F,
) -> Result<LexiconModel<F>, AlignError> {
    let mut trainer = EmTrainer::from_model(model.clone(), corpus, null_prob_floor)?;
    for _ in 0..passes {
        trainer.step();
    }
    Ok(trainer.into_model())
}
