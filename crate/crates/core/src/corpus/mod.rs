//! Raw dumps in, versioned JSONL records out.

pub mod filter;
pub mod jsonl;
pub mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rst::RstTree;
use crate::segmentation::ActionSegment;

pub use filter::{
    filter_comments, filter_corpus, filter_posts, CommentBounds, FilterConfig, FilterReport, FilterRule, RawComment,
    RawPost,
};
pub use jsonl::{read_bodies, read_corpus, read_records, write_bodies, write_corpus, write_records, Record, SCHEMA_VERSION};
pub use sample::sample_questions;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: schema version {found}, expected {expected}")]
    SchemaVersionMismatch { line: usize, found: u64, expected: u64 },
    #[error("no comment bounds for community {0:?}")]
    UnknownCommunity(String),
    #[error("asked for {requested} posts, only {available} available")]
    InsufficientPosts { requested: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub post_id: String,
    pub title: String,
    pub community: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub answer_id: String,
    pub question_id: String,
    pub text: String,
    pub rst_tree: RstTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub answer_id: String,
    pub question_id: String,
    pub segments: Vec<ActionSegment>,
}
