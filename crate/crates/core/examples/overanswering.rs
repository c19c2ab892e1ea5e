//! Coverage, dedication and overanswering bins on the replay corpus, with
//! a model that addresses every interpretation it can.
//!
//! cargo run --example overanswering

use std::collections::BTreeMap;
use std::path::Path;

use discotrace::corpus::read_bodies;
use discotrace::pipeline::TraceStep;
use discotrace::stats::{interpretation_metrics, overanswering_bins, MetricsOptions};
use discotrace::{DiscoTrace, InterpretationSpace, Ontology};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay");
    let ontology = Ontology::default_ontology();
    let human: Vec<DiscoTrace> = read_bodies(dir.join("traces.golden.jsonl"))?;
    let spaces: BTreeMap<String, InterpretationSpace> = read_bodies::<InterpretationSpace>(dir.join("spaces.golden.jsonl"))?
        .into_iter()
        .map(|s| (s.question_id.clone(), s))
        .collect();
    let options = MetricsOptions::default();

    let m = interpretation_metrics(&human, &spaces, &ontology, &options)?;
    println!("coverage {:?}", m.coverage);
    println!("unmatched rate {:?}", m.unmatched_rate);
    for a in m.answers.iter().filter(|a| !a.dedication.is_empty()) {
        println!("  {} dedication {:?}", a.answer_id, a.dedication);
    }

    let model: Vec<DiscoTrace> = spaces
        .values()
        .map(|s| DiscoTrace {
            answer_id: format!("{}-model", s.question_id),
            question_id: s.question_id.clone(),
            steps: s
                .ids()
                .enumerate()
                .map(|(i, id)| TraceStep {
                    act_id: "action_AQ_assert_answer".into(),
                    interpretation_id: Some(id.to_string()),
                    edu_indices: vec![i],
                })
                .collect(),
            diagnostics: vec![],
        })
        .collect();
    for bin in overanswering_bins(&human, &model, &spaces, &ontology, &options, 4)? {
        println!(
            "[{:.2}, {:.2})  n={}  human {:?}  model {:?}",
            bin.lower, bin.upper, bin.n_interpretations, bin.mean_human_frequency, bin.mean_model_probability
        );
    }
    Ok(())
}
