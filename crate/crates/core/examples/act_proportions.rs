//! Per-act chi-squared tests between two corpora with a Bonferroni gate.
//!
//! cargo run --example act_proportions

use discotrace::pipeline::TraceStep;
use discotrace::stats::act_proportion_test;
use discotrace::{DiscoTrace, Ontology};

fn corpus(n: usize, extra: &str, every: usize) -> Vec<DiscoTrace> {
    (0..n)
        .map(|i| {
            let mut acts = vec!["action_AQ_assert_answer"];
            if i % every == 0 {
                acts.push(extra);
            }
            DiscoTrace {
                answer_id: format!("a{i}"),
                question_id: format!("q{i}"),
                steps: acts
                    .iter()
                    .enumerate()
                    .map(|(j, a)| TraceStep {
                        act_id: a.to_string(),
                        interpretation_id: None,
                        edu_indices: vec![j],
                    })
                    .collect(),
                diagnostics: vec![],
            }
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ontology = Ontology::default_ontology();
    let humans = corpus(60, "action_AQ_cite_external_source", 2);
    let model = corpus(60, "action_AQ_provide_example", 3);
    for row in act_proportion_test(&humans, &model, &ontology, 0.05)? {
        if row.prop_a > 0.0 || row.prop_b > 0.0 {
            println!(
                "{:40} {:.2} vs {:.2}  chi2 {:7.3}  p {:.2e}{}",
                row.act_id,
                row.prop_a,
                row.prop_b,
                row.chi2,
                row.p_value,
                if row.significant_after_bonferroni { "  *" } else { "" }
            );
        }
    }
    Ok(())
}
