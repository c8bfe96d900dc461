//! The contrastive evidence pool: one deduplicated unit per source document,
//! keeping positive and negative evidence side by side for a fixed question.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sru::{RelevanceLabel, Sru};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("supportive ratio is undefined for a pool without units")]
    Empty,
}

/// Untyped document text, used in place of an [`Sru`] when structured
/// extraction is disabled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawUnit {
    pub source_doc_id: String,
    pub subquery: String,
    pub text: String,
    pub iteration_born: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoolRecord", into = "PoolRecord")]
pub struct EvidencePool {
    anchor_question: String,
    units: BTreeMap<String, Sru>,
    raw_units: BTreeMap<String, RawUnit>,
}

/// Outcome of one merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MergeStats {
    pub inserted: usize,
    pub replaced: usize,
}

impl EvidencePool {
    pub fn new(anchor_question: impl Into<String>) -> Self {
        Self {
            anchor_question: anchor_question.into(),
            units: BTreeMap::new(),
            raw_units: BTreeMap::new(),
        }
    }

    pub fn anchor_question(&self) -> &str {
        &self.anchor_question
    }

    /// Structured units in doc_id order.
    pub fn units(&self) -> impl ExactSizeIterator<Item = &Sru> {
        self.units.values()
    }

    /// Raw units in doc_id order.
    pub fn raw_units(&self) -> impl ExactSizeIterator<Item = &RawUnit> {
        self.raw_units.values()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Sru> {
        self.units.get(doc_id)
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.units.contains_key(doc_id) || self.raw_units.contains_key(doc_id)
    }

    /// Structured plus raw units.
    pub fn len(&self) -> usize {
        self.units.len() + self.raw_units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Merges a batch of units. Within the batch, candidates for one doc_id are
    /// reduced by a total order (higher confidence, then earlier iteration,
    /// then content) so batch order never matters. The batch winner replaces an
    /// incumbent only with strictly higher confidence, or equal confidence and
    /// an earlier iteration.
    pub fn merge<I: IntoIterator<Item = Sru>>(&mut self, new_units: I) -> MergeStats {
        let mut batch: BTreeMap<String, Sru> = BTreeMap::new();
        for unit in new_units {
            match batch.entry(unit.source_doc_id().to_string()) {
                Entry::Vacant(v) => {
                    v.insert(unit);
                }
                Entry::Occupied(mut o) => {
                    if candidate_order(&unit, o.get()) == Ordering::Less {
                        o.insert(unit);
                    }
                }
            }
        }

        let mut stats = MergeStats::default();
        for (doc_id, unit) in batch {
            match self.units.entry(doc_id) {
                Entry::Vacant(v) => {
                    v.insert(unit);
                    stats.inserted += 1;
                }
                Entry::Occupied(mut o) => {
                    if displaces(&unit, o.get()) {
                        o.insert(unit);
                        stats.replaced += 1;
                    }
                }
            }
        }
        stats
    }

    /// Functional form of [`EvidencePool::merge`].
    pub fn merged<I: IntoIterator<Item = Sru>>(mut self, new_units: I) -> Self {
        self.merge(new_units);
        self
    }

    /// Adds raw units, first acquisition per doc_id wins.
    pub fn merge_raw<I: IntoIterator<Item = RawUnit>>(&mut self, new_units: I) -> usize {
        let mut inserted = 0;
        for unit in new_units {
            if let Entry::Vacant(v) = self.raw_units.entry(unit.source_doc_id.clone()) {
                v.insert(unit);
                inserted += 1;
            }
        }
        inserted
    }

    /// Positive (Supportive, Contextual) and negative (Irrelevant) units.
    pub fn partition(&self) -> (Vec<&Sru>, Vec<&Sru>) {
        self.units.values().partition(|u| u.relevance().is_positive())
    }

    pub fn count_label(&self, label: RelevanceLabel) -> usize {
        self.units.values().filter(|u| u.relevance() == label).count()
    }

    /// Fraction of structured units labeled Supportive.
    pub fn supportive_ratio(&self) -> Result<f64, PoolError> {
        if self.units.is_empty() {
            return Err(PoolError::Empty);
        }
        Ok(self.count_label(RelevanceLabel::Supportive) as f64 / self.units.len() as f64)
    }
}

/// Total order on candidates for one doc_id; `Less` means preferred.
fn candidate_order(a: &Sru, b: &Sru) -> Ordering {
    b.confidence()
        .total_cmp(&a.confidence())
        .then(a.iteration_born().cmp(&b.iteration_born()))
        .then(a.relevance().cmp(&b.relevance()))
        .then_with(|| a.summary().cmp(b.summary()))
        .then_with(|| a.evidence().cmp(&b.evidence()))
        .then_with(|| a.subquery().cmp(b.subquery()))
}

fn displaces(challenger: &Sru, incumbent: &Sru) -> bool {
    match challenger.confidence().total_cmp(&incumbent.confidence()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => challenger.iteration_born() < incumbent.iteration_born(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolRecord {
    anchor_question: String,
    units: Vec<Sru>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    raw_units: Vec<RawUnit>,
}

impl From<EvidencePool> for PoolRecord {
    fn from(p: EvidencePool) -> Self {
        Self {
            anchor_question: p.anchor_question,
            units: p.units.into_values().collect(),
            raw_units: p.raw_units.into_values().collect(),
        }
    }
}

impl TryFrom<PoolRecord> for EvidencePool {
    type Error = String;

    fn try_from(r: PoolRecord) -> Result<Self, String> {
        let mut pool = EvidencePool::new(r.anchor_question);
        for u in r.units {
            let id = u.source_doc_id().to_string();
            if pool.units.insert(id.clone(), u).is_some() {
                return Err(alloc::format!("duplicate unit for {id:?}"));
            }
        }
        for u in r.raw_units {
            let id = u.source_doc_id.clone();
            if pool.raw_units.insert(id.clone(), u).is_some() {
                return Err(alloc::format!("duplicate raw unit for {id:?}"));
            }
        }
        Ok(pool)
    }
}
