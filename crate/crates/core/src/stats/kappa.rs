//! Cohen's kappa between two annotators.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSpace {
    Act,
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub n_items: usize,
    pub observed: f64,
    pub expected: f64,
    pub label_space: LabelSpace,
    /// Chance agreement was 1; kappa is reported as 1 by convention.
    pub degenerate: bool,
}

pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T], label_space: LabelSpace) -> Result<AgreementReport, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::EmptyLabels);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut ma: HashMap<&T, usize> = HashMap::new();
    let mut mb: HashMap<&T, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
    }
    let observed = agree / n;
    let expected: f64 = ma
        .iter()
        .map(|(label, &ca)| ca as f64 * mb.get(label).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    let degenerate = expected >= 1.0;
    let kappa = if degenerate {
        1.0
    } else {
        (observed - expected) / (1.0 - expected)
    };
    Ok(AgreementReport {
        kappa,
        n_items: a.len(),
        observed,
        expected,
        label_space,
        degenerate,
    })
}
