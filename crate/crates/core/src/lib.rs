//! Discourse-act traces of long-form answers.
//!
//! An answer's RST tree is cut into action segments, each segment is tagged
//! with a discourse act by a language model, and acts that can answer the
//! question are paired with one of the question's interpretations. The
//! resulting traces feed bigram strategy models, agreement statistics and
//! interpretation coverage metrics.
//!
//! Model calls go through [`gateway`]; mock backends replay recorded
//! fixtures, so every stage can run offline and deterministically.

pub mod cli;
pub mod community;
pub mod config;
pub mod corpus;
pub mod gateway;
pub mod interpretation;
pub mod ontology;
pub mod pipeline;
pub mod rst;
pub mod segmentation;
pub mod stats;

pub use config::PipelineConfig;
pub use interpretation::{Interpretation, InterpretationSpace};
pub use ontology::{DiscourseAct, Family, Ontology, NONE_ACT};
pub use pipeline::{DiscoTrace, TaggedSegment, TraceStep};
pub use rst::{Nuclearity, Relation, RstNode, RstTree};
pub use segmentation::{get_spans, segment_answer, ActionSegment, BoundaryConfig};
