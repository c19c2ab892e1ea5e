//! Everything that talks to language models.
//!
//! Prompt builders are pure functions producing a [`ChatRequest`]; the
//! request's wire body is hashed into a digest that keys recorded fixtures,
//! so a mock backend can replay a run byte for byte. This module is the only
//! place in the crate that performs network I/O.

mod backend;
pub mod prompts;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use backend::{
    complete, network_request_count, Backend, BackendKind, BackendSpec, ChatBackend,
    EmbeddingBackend, Fixture, FixtureEntry,
};
pub use prompts::{
    build_act_prompt, build_interp_gen_prompt, build_interp_label_prompt, build_mimic_prompt,
    parse_act_response, parse_interp_label, parse_interp_list, serialize_assignments,
    ActAssignment, ActPromptInput,
};

pub const DEFAULT_TEMPERATURE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("segment text is empty")]
    EmptySegment,
    #[error("required prompt field {0:?} is empty")]
    EmptyField(&'static str),
    #[error("unparsable model response: {0}")]
    UnparsableResponse(String),
    #[error("response uses unknown action id {0:?}")]
    InvalidActId(String),
    #[error("subsegment index {index} out of range for {n} subsegments")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("subsegment index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("response mixes indexed and unindexed entries")]
    MixedForm,
    #[error("response names unknown interpretation {0:?}")]
    UnknownInterpretationId(String),
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("no fixture recorded for request digest {digest}")]
    FixtureMiss { digest: String },
    #[error("fixture file error: {0}")]
    Fixture(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

impl GatewayError {
    /// Errors that come from talking to a backend rather than from the
    /// content of a response.
    pub fn is_backend_failure(&self) -> bool {
        matches!(
            self,
            GatewayError::TransportError(_)
                | GatewayError::AuthError(_)
                | GatewayError::FixtureMiss { .. }
                | GatewayError::Fixture(_)
                | GatewayError::Config(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    /// Left empty by prompt builders; the backend fills in its model.
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        ChatRequest {
            system: system.into(),
            user: user.into(),
            model_name: String::new(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: None,
        }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model_name = model.into();
        self
    }

    /// JSON body sent to a chat-completion endpoint.
    pub fn wire_body(&self) -> String {
        #[derive(Serialize)]
        struct Message<'a> {
            role: &'a str,
            content: &'a str,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            model: &'a str,
            temperature: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            max_tokens: Option<u32>,
            messages: [Message<'a>; 2],
        }
        let body = Body {
            model: &self.model_name,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            messages: [
                Message {
                    role: "system",
                    content: &self.system,
                },
                Message {
                    role: "user",
                    content: &self.user,
                },
            ],
        };
        serde_json::to_string(&body).expect("request serializes")
    }

    pub fn digest(&self) -> String {
        digest_str(&self.wire_body())
    }
}

/// Body of an embedding request.
pub fn embedding_wire_body(model: &str, texts: &[String]) -> String {
    serde_json::json!({ "model": model, "input": texts }).to_string()
}

pub(crate) fn digest_str(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}
