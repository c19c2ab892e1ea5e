//! Strategy statistics over finished traces.

pub mod bigram;
pub mod chisq;
pub mod kappa;
pub mod metrics;

use thiserror::Error;

pub use bigram::{
    act_sequence, corpus_sequences, cross_perplexity_matrix, fit_bigram, perplexity, train_eval_matrix, BigramModel,
    DenseBigram, PerplexityMatrix, Pooling, Smoothing, TransitionModel, Vocabulary, END, START,
};
pub use chisq::{act_proportion_test, chi_squared_2x2, ActProportion};
pub use kappa::{cohens_kappa, AgreementReport, LabelSpace};
pub use metrics::{
    interpretation_metrics, overanswering_bins, AnswerMetrics, InterpretationMetrics, MetricsOptions,
    OveransweringBin, Summary,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("token {0:?} is outside the model vocabulary")]
    OutOfVocabulary(String),
    #[error("transition {prev} -> {next} has probability zero")]
    ZeroProbabilityTransition { prev: String, next: String },
    #[error("invalid smoothing: {0}")]
    InvalidSmoothing(String),
    #[error("label lists differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("no labels to compare")]
    EmptyLabels,
    #[error("no interpretation space for question {0}")]
    UnknownSpaceReference(String),
    #[error("corpora answer different questions: {0}")]
    QuestionMismatch(String),
    #[error("bin count must be at least 1")]
    InvalidBins,
}
