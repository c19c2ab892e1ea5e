//! Building the interpretation space of a question.
//!
//! Several generator backends propose readings of the question; the pooled
//! proposals are deduplicated by embedding similarity with a greedy,
//! first-seen-representative pass.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{
    build_interp_gen_prompt, parse_interp_list, ChatBackend, EmbeddingBackend, GatewayError,
};

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.85;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpretationError {
    #[error("dedup threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    EmbeddingDimensionMismatch { expected: usize, got: usize },
    #[error("every generator failed; first error: {0}")]
    AllGeneratorsFailed(GatewayError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub id: String,
    pub text: String,
    pub sources: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationSpace {
    pub question_id: String,
    pub threshold: f64,
    pub members: Vec<Interpretation>,
}

impl InterpretationSpace {
    pub fn empty(question_id: impl Into<String>) -> Self {
        InterpretationSpace {
            question_id: question_id.into(),
            threshold: DEFAULT_DEDUP_THRESHOLD,
            members: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.id.as_str())
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.members.iter().any(|m| m.id == id)
    }
}

/// One proposal before deduplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInterpretation {
    pub generator: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationWarning {
    pub generator: String,
    pub message: String,
}

/// Asks every generator for interpretations and pools the results in
/// backend order. Fails only when no generator succeeds.
pub fn generate_raw(
    question: &str,
    community_context: &str,
    backends: &[&dyn ChatBackend],
) -> Result<(Vec<RawInterpretation>, Vec<GenerationWarning>), InterpretationError> {
    let request = build_interp_gen_prompt(question, community_context)?;
    let mut pooled = Vec::new();
    let mut warnings = Vec::new();
    let mut first_error = None;
    let mut successes = 0;
    for backend in backends {
        let outcome = backend
            .complete(&request)
            .and_then(|raw| parse_interp_list(&raw));
        match outcome {
            Ok(items) => {
                successes += 1;
                pooled.extend(items.into_iter().map(|text| RawInterpretation {
                    generator: backend.name().to_string(),
                    text,
                }));
            }
            Err(e) => {
                log::warn!("interpretation generator {} failed: {e}", backend.name());
                warnings.push(GenerationWarning {
                    generator: backend.name().to_string(),
                    message: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if successes == 0 {
        return Err(match first_error {
            Some(e) => InterpretationError::AllGeneratorsFailed(e),
            None => InterpretationError::Gateway(GatewayError::Config("no generator backends".into())),
        });
    }
    Ok((pooled, warnings))
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Greedy clustering: each candidate joins the first existing member whose
/// representative embedding has cosine >= `threshold`, else starts a new
/// member. Ids are `id_1`, `id_2`, ... in creation order.
pub fn deduplicate(
    question_id: &str,
    raw: &[RawInterpretation],
    embedder: &dyn EmbeddingBackend,
    threshold: f64,
) -> Result<InterpretationSpace, InterpretationError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(InterpretationError::InvalidThreshold(threshold));
    }
    let mut space = InterpretationSpace {
        question_id: question_id.to_string(),
        threshold,
        members: Vec::new(),
    };
    if raw.is_empty() {
        return Ok(space);
    }
    let texts: Vec<String> = raw.iter().map(|r| r.text.clone()).collect();
    let vectors = embedder.embed(&texts)?;
    let dim = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(InterpretationError::EmbeddingDimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    let mut representatives: Vec<&[f64]> = Vec::new();
    for (item, vector) in raw.iter().zip(&vectors) {
        let hit = representatives
            .iter()
            .position(|rep| cosine_similarity(rep, vector) >= threshold);
        match hit {
            Some(i) => {
                space.members[i].sources.insert(item.generator.clone());
            }
            None => {
                representatives.push(vector);
                space.members.push(Interpretation {
                    id: format!("id_{}", space.members.len() + 1),
                    text: item.text.clone(),
                    sources: BTreeSet::from([item.generator.clone()]),
                });
            }
        }
    }
    Ok(space)
}
