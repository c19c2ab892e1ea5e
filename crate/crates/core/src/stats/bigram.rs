//! Bigram models over act sequences and their perplexities.
//!
//! Every sequence is wrapped as `START a_1 ... a_n END`. The vocabulary is
//! fixed up front (normally the whole ontology plus `NONE`), so models fitted
//! on different corpora share support and can evaluate each other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::ontology::{Family, Ontology, NONE_ACT};
use crate::pipeline::DiscoTrace;

pub const START: &str = "<START>";
pub const END: &str = "<END>";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Smoothing {
    Mle,
    AddLambda { lambda: f64 },
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::AddLambda { lambda: 1.0 }
    }
}

impl Smoothing {
    pub fn validate(&self) -> Result<(), StatsError> {
        match *self {
            Smoothing::AddLambda { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(StatsError::InvalidSmoothing(format!("lambda must be positive, got {lambda}")))
            }
            _ => Ok(()),
        }
    }
}

/// `mle`, `add_lambda` (lambda 1) or `add_lambda:<lambda>`.
impl FromStr for Smoothing {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let parsed = match s.split_once(':') {
            None if s == "mle" => Smoothing::Mle,
            None if s == "add_lambda" || s == "laplace" => Smoothing::default(),
            Some(("add_lambda", v)) => Smoothing::AddLambda {
                lambda: v
                    .parse()
                    .map_err(|_| StatsError::InvalidSmoothing(format!("bad lambda {v:?}")))?,
            },
            _ => return Err(StatsError::InvalidSmoothing(s)),
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::Mle => write!(f, "mle"),
            Smoothing::AddLambda { lambda } => write!(f, "add_lambda:{lambda}"),
        }
    }
}

/// How per-transition losses are averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One mean over every transition of every sequence.
    #[default]
    Transition,
    /// Mean of per-sequence perplexities.
    Sequence,
}

/// Ordered token set. Index 0 is `START`, the last index is `END`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        Vocabulary::new(tokens)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    /// Builds from the act tokens; duplicates and the boundary tokens are
    /// dropped.
    pub fn new<I, S>(acts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens = vec![START.to_string()];
        for a in acts {
            let a = a.into();
            if a != START && a != END && !tokens.contains(&a) {
                tokens.push(a);
            }
        }
        tokens.push(END.to_string());
        Self::from_tokens(tokens)
    }

    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, index }
    }

    /// All act ids plus `NONE`, or the family codes plus `NONE`.
    pub fn from_ontology(ontology: &Ontology, family_level: bool) -> Self {
        if family_level {
            Self::new(Family::ALL.iter().map(|f| f.code()).chain([NONE_ACT]))
        } else {
            Self::new(ontology.proper_acts().map(|a| a.id.as_str()).chain([NONE_ACT]))
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, token: &str) -> Result<usize, StatsError> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| StatsError::OutOfVocabulary(token.to_string()))
    }

    pub fn start(&self) -> usize {
        0
    }

    pub fn end(&self) -> usize {
        self.tokens.len() - 1
    }

    /// Number of tokens that may follow a context: everything but `START`.
    pub fn legal_next(&self) -> usize {
        self.tokens.len() - 1
    }

    /// Token indices of `START seq END`.
    pub fn encode(&self, sequence: &[String]) -> Result<Vec<usize>, StatsError> {
        let mut out = Vec::with_capacity(sequence.len() + 2);
        out.push(self.start());
        for t in sequence {
            let i = self.index_of(t)?;
            if i == self.start() || i == self.end() {
                return Err(StatsError::OutOfVocabulary(t.clone()));
            }
            out.push(i);
        }
        out.push(self.end());
        Ok(out)
    }
}

/// Act tokens of one trace, optionally projected to families.
pub fn act_sequence(trace: &DiscoTrace, ontology: &Ontology, family_level: bool) -> Vec<String> {
    trace
        .acts()
        .map(|a| if family_level { ontology.family_token(a) } else { a.to_string() })
        .collect()
}

pub fn corpus_sequences(traces: &[DiscoTrace], ontology: &Ontology, family_level: bool) -> Vec<Vec<String>> {
    traces.iter().map(|t| act_sequence(t, ontology, family_level)).collect()
}

/// Anything that assigns p(next | prev) over a vocabulary.
pub trait TransitionModel {
    fn vocabulary(&self) -> &Vocabulary;

    /// Probability by token index.
    fn prob(&self, prev: usize, next: usize) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigramModel {
    pub vocabulary: Vocabulary,
    /// `counts[prev][next]`
    pub counts: Vec<Vec<u64>>,
    pub smoothing: Smoothing,
    pub training_sequences: usize,
}

impl BigramModel {
    pub fn fit(sequences: &[Vec<String>], vocabulary: Vocabulary, smoothing: Smoothing) -> Result<Self, StatsError> {
        smoothing.validate()?;
        if sequences.is_empty() {
            return Err(StatsError::EmptyCorpus);
        }
        let n = vocabulary.len();
        let mut counts = vec![vec![0u64; n]; n];
        for seq in sequences {
            let ids = vocabulary.encode(seq)?;
            for w in ids.windows(2) {
                counts[w[0]][w[1]] += 1;
            }
        }
        Ok(BigramModel {
            vocabulary,
            counts,
            smoothing,
            training_sequences: sequences.len(),
        })
    }

    pub fn count(&self, prev: &str, next: &str) -> Result<u64, StatsError> {
        let p = self.vocabulary.index_of(prev)?;
        let n = self.vocabulary.index_of(next)?;
        Ok(self.counts[p][n])
    }

    /// Probability by token name.
    pub fn probability(&self, prev: &str, next: &str) -> Result<f64, StatsError> {
        let p = self.vocabulary.index_of(prev)?;
        let n = self.vocabulary.index_of(next)?;
        Ok(self.prob(p, n))
    }

    /// Materializes the probability table.
    pub fn to_dense(&self) -> DenseBigram {
        let n = self.vocabulary.len();
        let probs = (0..n).map(|p| (0..n).map(|q| self.prob(p, q)).collect()).collect();
        DenseBigram {
            vocabulary: self.vocabulary.clone(),
            probs,
        }
    }
}

impl TransitionModel for BigramModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    fn prob(&self, prev: usize, next: usize) -> f64 {
        let v = &self.vocabulary;
        if prev == v.end() || next == v.start() {
            return 0.0;
        }
        let row = &self.counts[prev];
        let total: u64 = row.iter().sum();
        let c = row[next] as f64;
        match self.smoothing {
            Smoothing::Mle if total == 0 => 0.0,
            Smoothing::Mle => c / total as f64,
            Smoothing::AddLambda { lambda } => (c + lambda) / (total as f64 + lambda * v.legal_next() as f64),
        }
    }
}

/// Explicit probability table; rows are contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBigram {
    pub vocabulary: Vocabulary,
    pub probs: Vec<Vec<f64>>,
}

impl TransitionModel for DenseBigram {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    fn prob(&self, prev: usize, next: usize) -> f64 {
        self.probs[prev][next]
    }
}

/// Fits on trace act sequences over the ontology vocabulary.
pub fn fit_bigram(
    traces: &[DiscoTrace],
    ontology: &Ontology,
    smoothing: Smoothing,
    family_level: bool,
) -> Result<BigramModel, StatsError> {
    BigramModel::fit(
        &corpus_sequences(traces, ontology, family_level),
        Vocabulary::from_ontology(ontology, family_level),
        smoothing,
    )
}

/// exp of the mean natural-log loss.
pub fn perplexity<M: TransitionModel + ?Sized>(
    model: &M,
    sequences: &[Vec<String>],
    pooling: Pooling,
) -> Result<f64, StatsError> {
    if sequences.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let vocab = model.vocabulary();
    let mut total_nll = 0.0;
    let mut total_n = 0usize;
    let mut per_sequence = 0.0;
    for seq in sequences {
        let ids = vocab.encode(seq)?;
        let mut nll = 0.0;
        for w in ids.windows(2) {
            let p = model.prob(w[0], w[1]);
            if p <= 0.0 {
                return Err(StatsError::ZeroProbabilityTransition {
                    prev: vocab.tokens()[w[0]].clone(),
                    next: vocab.tokens()[w[1]].clone(),
                });
            }
            nll -= p.ln();
        }
        let n = ids.len() - 1;
        total_nll += nll;
        total_n += n;
        per_sequence += (nll / n as f64).exp();
    }
    Ok(match pooling {
        Pooling::Transition => (total_nll / total_n as f64).exp(),
        Pooling::Sequence => per_sequence / sequences.len() as f64,
    })
}

/// Rows are training corpora, columns evaluation corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl PerplexityMatrix {
    pub fn get(&self, train: &str, eval: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == train)?;
        let c = self.col_labels.iter().position(|l| l == eval)?;
        Some(self.values[r][c])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("train");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// One `train,eval,perplexity` row per cell.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("train,eval,perplexity\n");
        for (r, row) in self.row_labels.iter().zip(&self.values) {
            for (c, v) in self.col_labels.iter().zip(row) {
                out.push_str(&format!("{r},{c},{v}\n"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}

/// Fits one model per corpus and evaluates it on every corpus, in input
/// order.
pub fn cross_perplexity_matrix(
    corpora: &[(String, Vec<Vec<String>>)],
    vocabulary: &Vocabulary,
    smoothing: Smoothing,
    pooling: Pooling,
) -> Result<PerplexityMatrix, StatsError> {
    train_eval_matrix(corpora, corpora, vocabulary, smoothing, pooling)
}

/// Rows fit on `train`, columns evaluate on `eval`.
pub fn train_eval_matrix(
    train: &[(String, Vec<Vec<String>>)],
    eval: &[(String, Vec<Vec<String>>)],
    vocabulary: &Vocabulary,
    smoothing: Smoothing,
    pooling: Pooling,
) -> Result<PerplexityMatrix, StatsError> {
    if train.is_empty() || eval.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let models = train
        .iter()
        .map(|(_, seqs)| BigramModel::fit(seqs, vocabulary.clone(), smoothing))
        .collect::<Result<Vec<_>, _>>()?;
    let values = models
        .iter()
        .map(|m| {
            eval.iter()
                .map(|(_, seqs)| perplexity(m, seqs, pooling))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PerplexityMatrix {
        row_labels: train.iter().map(|(n, _)| n.clone()).collect(),
        col_labels: eval.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}

/// Transition counts keyed by token names, for reporting.
pub fn count_table(model: &BigramModel) -> BTreeMap<(String, String), u64> {
    let t = model.vocabulary.tokens();
    let mut out = BTreeMap::new();
    for (p, row) in model.counts.iter().enumerate() {
        for (n, &c) in row.iter().enumerate() {
            if c > 0 {
                out.insert((t[p].clone(), t[n].clone()), c);
            }
        }
    }
    out
}
