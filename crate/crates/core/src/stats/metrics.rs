//! How answers spread over the interpretations of their question.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::interpretation::InterpretationSpace;
use crate::ontology::{Family, Ontology};
use crate::pipeline::DiscoTrace;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    /// Only steps whose act belongs to one of these families count as
    /// addressing an interpretation. `None` counts every eligible act.
    pub addressing_families: Option<BTreeSet<Family>>,
}

impl MetricsOptions {
    fn addresses(&self, ontology: &Ontology, act_id: &str) -> bool {
        match &self.addressing_families {
            None => true,
            Some(set) => ontology.family_of(act_id).is_some_and(|f| set.contains(&f)),
        }
    }
}

/// Interpretation ids an answer addresses.
fn addressed(trace: &DiscoTrace, ontology: &Ontology, options: &MetricsOptions) -> BTreeSet<String> {
    trace
        .steps
        .iter()
        .filter(|s| ontology.is_eligible(&s.act_id).unwrap_or(false) && options.addresses(ontology, &s.act_id))
        .filter_map(|s| s.interpretation_id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerMetrics {
    pub answer_id: String,
    pub question_id: String,
    pub space_size: usize,
    /// Present only when the space has at least two members.
    pub coverage: Option<f64>,
    pub matched: usize,
    pub eligible: usize,
    pub dedication: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Summary {
            n: values.len(),
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationMetrics {
    pub answers: Vec<AnswerMetrics>,
    /// Unassigned eligible segments over all eligible segments, counting
    /// only answers whose space is non-empty.
    pub unmatched_rate: Option<f64>,
    /// Per question.
    pub space_size: Option<Summary>,
    pub coverage: Option<Summary>,
    pub matched_per_answer: Option<Summary>,
    pub eligible_per_answer: Option<Summary>,
    /// Over every (answer, addressed interpretation) pair.
    pub dedication: Option<Summary>,
}

pub fn interpretation_metrics(
    traces: &[DiscoTrace],
    spaces: &BTreeMap<String, InterpretationSpace>,
    ontology: &Ontology,
    options: &MetricsOptions,
) -> Result<InterpretationMetrics, StatsError> {
    let mut answers = Vec::with_capacity(traces.len());
    let (mut unmatched, mut eligible_total) = (0usize, 0usize);
    let mut questions = BTreeSet::new();
    for trace in traces {
        let space = spaces
            .get(&trace.question_id)
            .ok_or_else(|| StatsError::UnknownSpaceReference(trace.question_id.clone()))?;
        questions.insert(trace.question_id.as_str());
        let eligible_steps: Vec<_> = trace
            .steps
            .iter()
            .filter(|s| ontology.is_eligible(&s.act_id).unwrap_or(false))
            .collect();
        let eligible = eligible_steps.len();
        let matched = eligible_steps.iter().filter(|s| s.interpretation_id.is_some()).count();
        let ids = addressed(trace, ontology, options);
        let coverage = (space.len() >= 2).then(|| ids.len() as f64 / space.len() as f64);
        let mut dedication = BTreeMap::new();
        for id in &ids {
            let n = eligible_steps
                .iter()
                .filter(|s| s.interpretation_id.as_deref() == Some(id.as_str()))
                .count();
            dedication.insert(id.clone(), n as f64 / eligible as f64);
        }
        if !space.is_empty() {
            unmatched += eligible - matched;
            eligible_total += eligible;
        }
        answers.push(AnswerMetrics {
            answer_id: trace.answer_id.clone(),
            question_id: trace.question_id.clone(),
            space_size: space.len(),
            coverage,
            matched,
            eligible,
            dedication,
        });
    }
    let sizes: Vec<f64> = questions.iter().map(|q| spaces[*q].len() as f64).collect();
    let coverage: Vec<f64> = answers.iter().filter_map(|a| a.coverage).collect();
    let matched: Vec<f64> = answers.iter().map(|a| a.matched as f64).collect();
    let eligible: Vec<f64> = answers.iter().map(|a| a.eligible as f64).collect();
    let dedication: Vec<f64> = answers.iter().flat_map(|a| a.dedication.values().copied()).collect();
    Ok(InterpretationMetrics {
        unmatched_rate: (eligible_total > 0).then(|| unmatched as f64 / eligible_total as f64),
        space_size: Summary::of(&sizes),
        coverage: Summary::of(&coverage),
        matched_per_answer: Summary::of(&matched),
        eligible_per_answer: Summary::of(&eligible),
        dedication: Summary::of(&dedication),
        answers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OveransweringBin {
    pub lower: f64,
    pub upper: f64,
    pub n_interpretations: usize,
    pub mean_human_frequency: Option<f64>,
    pub mean_model_probability: Option<f64>,
}

/// Bins every interpretation by the share of human answers addressing it,
/// then averages the share of model answers addressing it per bin. Bin `k`
/// of `n` holds frequencies in `[k/n, (k+1)/n)`; the last bin is closed.
pub fn overanswering_bins(
    human: &[DiscoTrace],
    model: &[DiscoTrace],
    spaces: &BTreeMap<String, InterpretationSpace>,
    ontology: &Ontology,
    options: &MetricsOptions,
    n_bins: usize,
) -> Result<Vec<OveransweringBin>, StatsError> {
    if n_bins == 0 {
        return Err(StatsError::InvalidBins);
    }
    let group = |traces: &[DiscoTrace]| {
        let mut by_q: BTreeMap<String, Vec<BTreeSet<String>>> = BTreeMap::new();
        for t in traces {
            by_q.entry(t.question_id.clone())
                .or_default()
                .push(addressed(t, ontology, options));
        }
        by_q
    };
    let (h, m) = (group(human), group(model));
    if h.keys().ne(m.keys()) {
        let only: Vec<_> = h
            .keys()
            .filter(|q| !m.contains_key(*q))
            .chain(m.keys().filter(|q| !h.contains_key(*q)))
            .cloned()
            .collect();
        return Err(StatsError::QuestionMismatch(only.join(", ")));
    }
    let share = |answers: &[BTreeSet<String>], id: &str| {
        answers.iter().filter(|a| a.contains(id)).count() as f64 / answers.len() as f64
    };
    let mut human_sum = vec![0.0; n_bins];
    let mut model_sum = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (q, human_answers) in &h {
        let space = spaces
            .get(q)
            .ok_or_else(|| StatsError::UnknownSpaceReference(q.clone()))?;
        for id in space.ids() {
            let f = share(human_answers, id);
            let bin = ((f * n_bins as f64).floor() as usize).min(n_bins - 1);
            counts[bin] += 1;
            human_sum[bin] += f;
            model_sum[bin] += share(&m[q], id);
        }
    }
    Ok((0..n_bins)
        .map(|k| {
            let c = counts[k];
            OveransweringBin {
                lower: k as f64 / n_bins as f64,
                upper: (k + 1) as f64 / n_bins as f64,
                n_interpretations: c,
                mean_human_frequency: (c > 0).then(|| human_sum[k] / c as f64),
                mean_model_probability: (c > 0).then(|| model_sum[k] / c as f64),
            }
        })
        .collect())
}
