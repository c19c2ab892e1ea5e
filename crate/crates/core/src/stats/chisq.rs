//! Per-act presence proportions compared across two corpora.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::StatsError;
use crate::ontology::Ontology;
use crate::pipeline::DiscoTrace;

/// Pearson statistic and p-value of a 2x2 table, no continuity correction.
/// A table with an empty row or column gives (0, 1).
pub fn chi_squared_2x2(table: [[u64; 2]; 2]) -> (f64, f64) {
    let [[a, b], [c, d]] = table.map(|r| r.map(|x| x as f64));
    let n = a + b + c + d;
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return (0.0, 1.0);
    }
    let chi2 = n * (a * d - b * c).powi(2) / (rows[0] * rows[1] * cols[0] * cols[1]);
    let dist = ChiSquared::new(1.0).expect("one degree of freedom");
    (chi2, dist.sf(chi2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActProportion {
    pub act_id: String,
    pub prop_a: f64,
    pub prop_b: f64,
    pub chi2: f64,
    pub p_value: f64,
    pub significant_after_bonferroni: bool,
}

/// Proportion of answers containing each act in either corpus, tested per
/// act. Every proper act of the ontology is tested; the sentinel is not.
pub fn act_proportion_test(
    corpus_a: &[DiscoTrace],
    corpus_b: &[DiscoTrace],
    ontology: &Ontology,
    alpha: f64,
) -> Result<Vec<ActProportion>, StatsError> {
    if corpus_a.is_empty() || corpus_b.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let acts: Vec<&str> = ontology.proper_acts().map(|a| a.id.as_str()).collect();
    let threshold = alpha / acts.len() as f64;
    let present = |corpus: &[DiscoTrace], act: &str| corpus.iter().filter(|t| t.acts().any(|x| x == act)).count() as u64;
    let (na, nb) = (corpus_a.len() as u64, corpus_b.len() as u64);
    Ok(acts
        .into_iter()
        .map(|act| {
            let (ha, hb) = (present(corpus_a, act), present(corpus_b, act));
            let (chi2, p_value) = chi_squared_2x2([[ha, na - ha], [hb, nb - hb]]);
            ActProportion {
                act_id: act.to_string(),
                prop_a: ha as f64 / na as f64,
                prop_b: hb as f64 / nb as f64,
                chi2,
                p_value,
                significant_after_bonferroni: p_value < threshold,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::TraceStep;

    fn trace(acts: &[&str]) -> DiscoTrace {
        DiscoTrace {
            answer_id: "a".into(),
            question_id: "q".into(),
            steps: acts
                .iter()
                .enumerate()
                .map(|(i, a)| TraceStep {
                    act_id: a.to_string(),
                    interpretation_id: None,
                    edu_indices: vec![i],
                })
                .collect(),
            diagnostics: vec![],
        }
    }

    #[test]
    fn hand_table() {
        let (chi2, p) = chi_squared_2x2([[30, 20], [10, 40]]);
        assert!((chi2 - 50.0 / 3.0).abs() < 1e-12);
        // closed form for one degree of freedom
        let expected = statrs::function::erf::erfc((chi2 / 2.0).sqrt());
        assert!((p - expected).abs() < 1e-12);
        assert!(p < 1e-4);
        assert_eq!(chi_squared_2x2([[0, 5], [0, 7]]), (0.0, 1.0));
    }

    #[test]
    fn identical_corpora_are_not_significant() {
        let o = Ontology::default_ontology();
        let c = vec![trace(&["action_AQ_assert_answer"]), trace(&["action_SI_clarification", "NONE"])];
        for r in act_proportion_test(&c, &c, &o, 0.05).unwrap() {
            assert_eq!(r.p_value, 1.0);
            assert!(!r.significant_after_bonferroni);
        }
    }

    #[test]
    fn extreme_split_is_significant() {
        let o = Ontology::default_ontology();
        let a = vec![trace(&["action_AQ_assert_answer"]); 50];
        let b = vec![trace(&["action_NO_non_answer"]); 50];
        let rows = act_proportion_test(&a, &b, &o, 0.05).unwrap();
        let n = o.proper_acts().count() as f64;
        let row = rows.iter().find(|r| r.act_id == "action_AQ_assert_answer").unwrap();
        assert_eq!((row.prop_a, row.prop_b), (1.0, 0.0));
        assert!(row.significant_after_bonferroni);
        for r in &rows {
            assert_eq!(r.significant_after_bonferroni, r.p_value < 0.05 / n);
        }
        assert!(rows.iter().all(|r| r.act_id != "NONE"));
        assert_eq!(act_proportion_test(&[], &b, &o, 0.05).unwrap_err(), StatsError::EmptyCorpus);
    }
}
