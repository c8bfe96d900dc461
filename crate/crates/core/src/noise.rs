//! Injection of randomly sampled off-list documents into a retrieved set.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, RankedDocuments};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("target ratio {0} outside [0, 1)")]
    BadRatio(f64),
    #[error("need {needed} noise candidates outside the retrieved set, corpus has {available} (short by {})", needed - available)]
    InsufficientCandidates { needed: usize, available: usize },
}

/// A retrieved set after noise injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRetrieval {
    /// Retrieved and injected doc_ids in seeded shuffled order.
    pub doc_ids: Vec<String>,
    /// The injected subset, in sampling order.
    pub injected: Vec<String>,
    pub realized_ratio: f64,
}

/// Number of documents to add to `retrieved` so that injected documents make
/// up `target_ratio` of the final set, rounded to the nearest integer.
pub fn noise_count(retrieved: usize, target_ratio: f64) -> usize {
    if retrieved == 0 || target_ratio <= 0.0 {
        return 0;
    }
    libm::round(target_ratio * retrieved as f64 / (1.0 - target_ratio)) as usize
}

/// Adds `noise_count(|retrieved|, target_ratio)` documents sampled uniformly
/// without replacement from the corpus minus the retrieved ids, then shuffles
/// the union. Both steps are driven by one ChaCha8 stream seeded with `seed`.
pub fn inject_noise(
    retrieved: &RankedDocuments,
    corpus: &Corpus,
    target_ratio: f64,
    seed: u64,
) -> Result<NoisyRetrieval, NoiseError> {
    if !(0.0..1.0).contains(&target_ratio) {
        return Err(NoiseError::BadRatio(target_ratio));
    }
    let kept: BTreeSet<&str> = retrieved.doc_ids().collect();
    let n_inject = noise_count(retrieved.len(), target_ratio);
    let candidates: Vec<&str> = corpus
        .documents()
        .iter()
        .map(|d| d.doc_id.as_str())
        .filter(|id| !kept.contains(id))
        .collect();
    if candidates.len() < n_inject {
        return Err(NoiseError::InsufficientCandidates {
            needed: n_inject,
            available: candidates.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let injected: Vec<String> = index::sample(&mut rng, candidates.len(), n_inject)
        .into_iter()
        .map(|i| String::from(candidates[i]))
        .collect();
    let mut doc_ids: Vec<String> = retrieved
        .doc_ids()
        .map(String::from)
        .chain(injected.iter().cloned())
        .collect();
    doc_ids.shuffle(&mut rng);

    let total = retrieved.len() + n_inject;
    let realized_ratio = if total == 0 {
        0.0
    } else {
        n_inject as f64 / total as f64
    };
    Ok(NoisyRetrieval {
        doc_ids,
        injected,
        realized_ratio,
    })
}
