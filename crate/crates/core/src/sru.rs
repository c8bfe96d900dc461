//! Structured reasoning units: a typed distillate of one retrieved document.

use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relevance of a document to the sub-query that retrieved it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelevanceLabel {
    /// Directly contributes to answering the query.
    Supportive,
    /// Background that may help reasoning without answering directly.
    Contextual,
    /// Uninformative for the query.
    Irrelevant,
}

impl RelevanceLabel {
    pub const ALL: [RelevanceLabel; 3] = [Self::Supportive, Self::Contextual, Self::Irrelevant];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Supportive => "Supportive",
            Self::Contextual => "Contextual",
            Self::Irrelevant => "Irrelevant",
        }
    }

    /// Case-insensitive parse of the three label names. Anything else is rejected.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL.into_iter().find(|l| l.as_str().eq_ignore_ascii_case(s))
    }

    pub fn is_positive(self) -> bool {
        !matches!(self, Self::Irrelevant)
    }
}

impl core::fmt::Display for RelevanceLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SruError {
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("Supportive unit must carry non-empty evidence")]
    SupportiveWithoutEvidence,
    #[error("Irrelevant unit must not carry evidence")]
    IrrelevantWithEvidence,
    #[error("summary is empty")]
    EmptySummary,
    #[error("source_doc_id is empty")]
    EmptySource,
}

/// One structured reasoning unit. Fields are private so every instance has
/// passed [`Sru::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SruRecord", into = "SruRecord")]
pub struct Sru {
    source_doc_id: String,
    subquery: String,
    relevance: RelevanceLabel,
    summary: String,
    evidence: Option<String>,
    confidence: f64,
    iteration_born: u32,
}

impl Sru {
    pub fn new(
        source_doc_id: impl Into<String>,
        subquery: impl Into<String>,
        relevance: RelevanceLabel,
        summary: impl Into<String>,
        evidence: Option<String>,
        confidence: f64,
        iteration_born: u32,
    ) -> Result<Self, SruError> {
        let source_doc_id = source_doc_id.into();
        let summary = summary.into();
        if source_doc_id.is_empty() {
            return Err(SruError::EmptySource);
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(SruError::Confidence(confidence));
        }
        if summary.trim().is_empty() {
            return Err(SruError::EmptySummary);
        }
        match (relevance, &evidence) {
            (RelevanceLabel::Irrelevant, Some(_)) => return Err(SruError::IrrelevantWithEvidence),
            (RelevanceLabel::Supportive, None) => return Err(SruError::SupportiveWithoutEvidence),
            (RelevanceLabel::Supportive, Some(e)) if e.trim().is_empty() => {
                return Err(SruError::SupportiveWithoutEvidence)
            }
            _ => {}
        }
        Ok(Self {
            source_doc_id,
            subquery: subquery.into(),
            relevance,
            summary,
            evidence,
            confidence,
            iteration_born,
        })
    }

    pub fn source_doc_id(&self) -> &str {
        &self.source_doc_id
    }

    pub fn subquery(&self) -> &str {
        &self.subquery
    }

    pub fn relevance(&self) -> RelevanceLabel {
        self.relevance
    }

    pub fn summary(&self) -> &str {
        &self.summary
    }

    pub fn evidence(&self) -> Option<&str> {
        self.evidence.as_deref()
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn iteration_born(&self) -> u32 {
        self.iteration_born
    }

    pub(crate) fn born_at(mut self, iteration: u32) -> Self {
        self.iteration_born = iteration;
        self
    }
}

/// Wire form of an [`Sru`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SruRecord {
    source_doc_id: String,
    subquery: String,
    relevance: RelevanceLabel,
    summary: String,
    evidence: Option<String>,
    confidence: f64,
    iteration_born: u32,
}

impl TryFrom<SruRecord> for Sru {
    type Error = String;

    fn try_from(r: SruRecord) -> Result<Self, String> {
        Sru::new(
            r.source_doc_id,
            r.subquery,
            r.relevance,
            r.summary,
            r.evidence,
            r.confidence,
            r.iteration_born,
        )
        .map_err(|e| e.to_string())
    }
}

impl From<Sru> for SruRecord {
    fn from(s: Sru) -> Self {
        Self {
            source_doc_id: s.source_doc_id,
            subquery: s.subquery,
            relevance: s.relevance,
            summary: s.summary,
            evidence: s.evidence,
            confidence: s.confidence,
            iteration_born: s.iteration_born,
        }
    }
}
