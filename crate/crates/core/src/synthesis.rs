//! Synthetic QE data: swapping the source side of tagged triples for a
//! machine translation of it, and seeded span sampling under a quota.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mt::{translate, Engine, LangPair, MtError};
use crate::qe::{read_wmt_triplets, write_wmt_triplets, QeError, QeTriple, TagLineMode};
use crate::text::TokenSequence;

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("triple {index}: {error}")]
    Engine { index: usize, error: MtError },
    #[error("quota for bucket {bucket} exceeds the {available} available spans")]
    InfeasibleQuota {
        bucket: u32,
        requested: usize,
        available: usize,
    },
    #[error(transparent)]
    Qe(#[from] QeError),
}

/// Translates the source side of every triple with `engine` over `pair`,
/// leaving targets and tags untouched. Up to `workers` requests run at
/// once; output order matches input order. Any failure aborts the run and
/// reports the lowest failing index.
pub fn synthesize(
    triples: &[QeTriple],
    engine: &Engine,
    pair: &LangPair,
    workers: usize,
) -> Result<Vec<QeTriple>, SynthesisError> {
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<TokenSequence, MtError>>>> =
        Mutex::new(vec![None; triples.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, triples.len().max(1)) {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= triples.len() {
                    break;
                }
                let out = translate(engine, &pair.src, &pair.tgt, &triples[i].source().join())
                    .map(|text| TokenSequence::from_whitespace(&text));
                if out.is_err() {
                    failed.store(true, Ordering::SeqCst);
                }
                results.lock().expect("results lock poisoned")[i] = Some(out);
            });
        }
    });
    let results = results.into_inner().expect("results lock poisoned");
    // Indices are claimed in order and every claimed index gets a result,
    // so everything below a failure is present.
    let mut out = Vec::with_capacity(triples.len());
    for (index, (triple, res)) in triples.iter().zip(results).enumerate() {
        match res {
            Some(Ok(source)) => out.push(triple.with_source(source)),
            Some(Err(error)) => return Err(SynthesisError::Engine { index, error }),
            None => unreachable!("missing result below the first failure"),
        }
    }
    Ok(out)
}

/// Reads a WMT triplet, synthesizes it and writes `<out_prefix>.{src,mt,tags}`.
/// Nothing is written unless every triple succeeds.
pub fn synthesize_files(
    inputs: (&Path, &Path, &Path),
    mode: TagLineMode,
    engine: &Engine,
    pair: &LangPair,
    workers: usize,
    out_prefix: &Path,
) -> Result<usize, SynthesisError> {
    let triples = read_wmt_triplets(inputs.0, inputs.1, inputs.2, mode)?;
    let out = synthesize(&triples, engine, pair, workers)?;
    write_wmt_triplets(out_prefix, &out)?;
    Ok(out.len())
}

/// Available spans and the number wanted, both keyed by questions per span.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanInventory {
    pub counts: BTreeMap<u32, usize>,
    pub quota: BTreeMap<u32, usize>,
}

impl SpanInventory {
    pub fn new(counts: BTreeMap<u32, usize>, quota: BTreeMap<u32, usize>) -> Self {
        Self { counts, quota }
    }

    pub fn check(&self) -> Result<(), SynthesisError> {
        for (&bucket, &requested) in &self.quota {
            let available = self.counts.get(&bucket).copied().unwrap_or(0);
            if requested > available {
                return Err(SynthesisError::InfeasibleQuota {
                    bucket,
                    requested,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// Samples `quota[k]` distinct span ids from `0..counts[k]` for every bucket,
/// ids sorted within a bucket. Buckets with a zero quota are omitted.
pub fn span_sample(
    inventory: &SpanInventory,
    seed: u64,
) -> Result<BTreeMap<u32, Vec<usize>>, SynthesisError> {
    inventory.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for (&bucket, &n) in &inventory.quota {
        if n == 0 {
            continue;
        }
        let mut ids = sample(&mut rng, inventory.counts[&bucket], n).into_vec();
        ids.sort_unstable();
        out.insert(bucket, ids);
    }
    Ok(out)
}
