//! A rule-based stand-in for the model. Every reply is a pure function of the
//! request and the toy world, so recordings are reproducible.
//!
//! Extraction is question-aware: a document is Supportive only when it is a
//! fact document of the question that owns the sub-query. Injected noise is
//! therefore labeled Irrelevant. With raw passages (no structured units), the
//! synthesizer votes for the candidate answer mentioned most often.

use std::collections::{BTreeSet, HashMap};

use evrag_core::gateway::TaskRequest;
use evrag_core::{normalize_answer, TaskKind, Transport, TransportError};
use serde_json::{json, Value};

use super::world::{Answer, Question, World};

pub struct Agent {
    world: World,
    by_text: HashMap<String, usize>,
    decompositions: HashMap<String, (usize, Vec<String>)>,
    owner: HashMap<String, usize>,
}

fn fail(message: String) -> TransportError {
    TransportError::Unavailable {
        message,
        retryable: false,
    }
}

/// What the agent can read from a pool view.
struct View<'a> {
    positive: Vec<&'a Value>,
    negative: Vec<&'a Value>,
    raw: Vec<&'a Value>,
}

impl<'a> View<'a> {
    fn parse(evidence: &'a Value) -> Self {
        let list = |k: &str| {
            evidence
                .get(k)
                .and_then(Value::as_array)
                .map(|a| a.iter().collect())
                .unwrap_or_default()
        };
        Self {
            positive: list("positive"),
            negative: list("negative"),
            raw: list("raw"),
        }
    }

    fn supported(&self, doc_id: &str) -> bool {
        self.positive
            .iter()
            .any(|u| u["doc_id"] == doc_id && u["relevance"] == "Supportive")
            || self.raw.iter().any(|r| r["doc_id"] == doc_id)
    }

    fn evidence(&self, doc_id: &str) -> Option<&'a str> {
        self.positive
            .iter()
            .find(|u| u["doc_id"] == doc_id && u["relevance"] == "Supportive")
            .and_then(|u| u["evidence"].as_str())
    }

    /// Sub-queries whose units are all irrelevant.
    fn dead_ends(&self) -> BTreeSet<&'a str> {
        let live: BTreeSet<&str> = self.positive.iter().filter_map(|u| u["subquery"].as_str()).collect();
        self.negative
            .iter()
            .filter_map(|u| u["subquery"].as_str())
            .filter(|sq| !live.contains(sq))
            .collect()
    }
}

fn count_mentions(text: &[String], candidate: &[String]) -> usize {
    if candidate.is_empty() || text.len() < candidate.len() {
        return 0;
    }
    text.windows(candidate.len()).filter(|w| *w == candidate).count()
}

impl Agent {
    pub fn new(world: World) -> Self {
        let mut by_text = HashMap::new();
        let mut decompositions = HashMap::new();
        let mut owner = HashMap::new();
        for (i, q) in world.questions.iter().enumerate() {
            assert!(
                by_text.insert(q.text.clone(), i).is_none(),
                "duplicate question {}",
                q.text
            );
            let mut queries = vec![(q.text.clone(), q.sub_queries.clone())];
            queries.extend(q.routes.iter().map(|r| (r.query.clone(), r.sub_queries.clone())));
            for (query, subs) in queries {
                for sq in &subs {
                    if let Some(prev) = owner.insert(sq.clone(), i) {
                        assert_eq!(prev, i, "sub-query {sq:?} shared between questions");
                    }
                }
                assert!(
                    decompositions.insert(query.clone(), (i, subs)).is_none(),
                    "duplicate query {query}"
                );
            }
        }
        Self {
            world,
            by_text,
            decompositions,
            owner,
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    fn question(&self, req: &TaskRequest) -> Result<&Question, TransportError> {
        let text = req.str_field("question").unwrap_or_default();
        self.by_text
            .get(text)
            .map(|&i| &self.world.questions[i])
            .ok_or_else(|| fail(format!("unknown question {text:?}")))
    }

    fn missing<'q>(q: &'q Question, view: &View<'_>) -> Vec<&'q str> {
        q.required
            .iter()
            .filter(|(_, doc)| !view.supported(doc))
            .map(|(aspect, _)| aspect.as_str())
            .collect()
    }

    fn answer_docs(q: &Question) -> Vec<&str> {
        match &q.answer {
            Answer::Doc(d) => vec![d.as_str()],
            Answer::Join(ds) => ds.iter().map(String::as_str).collect(),
        }
    }

    fn reply(&self, req: &TaskRequest) -> Result<Value, TransportError> {
        match req.kind {
            TaskKind::Decompose => {
                let query = req.str_field("query").unwrap_or_default();
                let (_, subs) = self
                    .decompositions
                    .get(query)
                    .ok_or_else(|| fail(format!("no decomposition for {query:?}")))?;
                Ok(json!({ "sub_queries": subs }))
            }
            TaskKind::ExtractSru => {
                let sq = req.str_field("subquery").unwrap_or_default();
                let doc_id = req.str_field("doc_id").unwrap_or_default();
                let title = req.str_field("title").unwrap_or_default();
                let q = &self.world.questions[*self
                    .owner
                    .get(sq)
                    .ok_or_else(|| fail(format!("unknown sub-query {sq:?}")))?];
                if let Some((_, ev)) = q.support.iter().find(|(d, _)| d == doc_id) {
                    Ok(json!({
                        "relevance": "Supportive",
                        "summary": format!("{title} answers part of: {sq}"),
                        "evidence": ev,
                        "confidence": 0.9,
                    }))
                } else if q.context.iter().any(|d| d == doc_id) {
                    Ok(json!({
                        "relevance": "Contextual",
                        "summary": format!("{title} gives background for: {sq}"),
                        "evidence": null,
                        "confidence": 0.6,
                    }))
                } else {
                    Ok(json!({
                        "relevance": "Irrelevant",
                        "summary": format!("{title} does not address: {sq}"),
                        "evidence": null,
                        "confidence": 0.8,
                    }))
                }
            }
            TaskKind::AssessEvidence => {
                let q = self.question(req)?;
                let view = View::parse(&req.payload["evidence"]);
                let gaps = Self::missing(q, &view);
                let dead: Vec<&str> = view.dead_ends().into_iter().collect();
                let rationale = if gaps.is_empty() {
                    "every aspect of the question is supported".to_owned()
                } else {
                    format!("{} of {} aspects still unsupported", gaps.len(), q.required.len())
                };
                Ok(json!({
                    "sufficient": gaps.is_empty(),
                    "gaps": gaps,
                    "conflicts": [],
                    "negative_constraints": dead,
                    "rationale": rationale,
                }))
            }
            TaskKind::AugmentQuery => {
                let q = self.question(req)?;
                let report = &req.payload["deficiencies"];
                let gap = report["gaps"][0]
                    .as_str()
                    .ok_or_else(|| fail("augment without a gap".into()))?;
                let blocked: BTreeSet<&str> = report["negative_constraints"]
                    .as_array()
                    .map(|a| a.iter().filter_map(Value::as_str).collect())
                    .unwrap_or_default();
                let routes: Vec<_> = q.routes.iter().filter(|r| r.aspect == gap).collect();
                let chosen = routes
                    .iter()
                    .find(|r| r.sub_queries.iter().any(|sq| !blocked.contains(sq.as_str())))
                    .or(routes.last())
                    .ok_or_else(|| fail(format!("no route for gap {gap:?}")))?;
                Ok(json!({ "query": chosen.query }))
            }
            TaskKind::JudgeAbstention => {
                let q = self.question(req)?;
                let view = View::parse(&req.payload["evidence"]);
                let answerable = Self::answer_docs(q).iter().all(|d| view.supported(d));
                let reason = if answerable {
                    String::new()
                } else {
                    format!("no supporting evidence for: {}", Self::missing(q, &view).join("; "))
                };
                Ok(json!({ "answerable": answerable, "reason": reason }))
            }
            TaskKind::SynthesizeAnswer => {
                let q = self.question(req)?;
                let view = View::parse(&req.payload["evidence"]);
                if !view.raw.is_empty() {
                    let text: Vec<String> = view
                        .raw
                        .iter()
                        .flat_map(|r| normalize_answer(r["text"].as_str().unwrap_or_default()))
                        .collect();
                    let mut best: Option<(&str, usize)> = None;
                    for c in &self.world.candidates {
                        let n = count_mentions(&text, &normalize_answer(c));
                        if n > best.map_or(0, |b| b.1) {
                            best = Some((c, n));
                        }
                    }
                    return Ok(json!({ "answer": best.map_or("unknown", |b| b.0) }));
                }
                let parts: Vec<&str> = Self::answer_docs(q).iter().filter_map(|d| view.evidence(d)).collect();
                let answer = if parts.is_empty() {
                    "unknown".to_owned()
                } else if parts.len() == 1 {
                    parts[0].to_owned()
                } else {
                    format!("{}.", parts.join("; "))
                };
                Ok(json!({ "answer": answer }))
            }
        }
    }
}

impl Transport for Agent {
    fn complete(&self, request: &TaskRequest, _feedback: Option<&str>) -> Result<String, TransportError> {
        self.reply(request).map(|v| v.to_string())
    }
}
