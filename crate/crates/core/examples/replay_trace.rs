//! Trace answers end to end against recorded model responses.
//!
//! cargo run --example replay_trace

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use discotrace::corpus::{read_bodies, AnswerRecord, QuestionRecord};
use discotrace::pipeline::{trace_answer, TraceInput};
use discotrace::{InterpretationSpace, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay");
    let config = PipelineConfig::load(dir.join("pipeline.toml"))?;
    let ontology = config.load_ontology()?;
    let acts = config.role_backend("act_labeler")?;
    let labels = config.role_backend("interpretation_labeler")?;

    let questions: HashMap<String, String> = read_bodies::<QuestionRecord>(dir.join("questions.jsonl"))?
        .into_iter()
        .map(|q| (q.post_id, q.title))
        .collect();
    let spaces: BTreeMap<String, InterpretationSpace> = read_bodies::<InterpretationSpace>(dir.join("spaces.golden.jsonl"))?
        .into_iter()
        .map(|s| (s.question_id.clone(), s))
        .collect();

    for a in read_bodies::<AnswerRecord>(dir.join("answers.jsonl"))? {
        let input = TraceInput {
            answer_id: &a.answer_id,
            question_id: &a.question_id,
            question: &questions[&a.question_id],
            answer_text: &a.text,
            tree: &a.rst_tree,
        };
        let trace = trace_answer(&input, spaces.get(&a.question_id), &ontology, &config.boundaries, &acts, &labels);
        println!("{} ({})", a.answer_id, questions[&a.question_id]);
        for step in &trace.steps {
            let name = ontology.get(&step.act_id).map_or(step.act_id.as_str(), |d| d.display_name.as_str());
            println!("  {:?} {} -> {}", step.edu_indices, name, step.interpretation_id.as_deref().unwrap_or("-"));
        }
        for d in &trace.diagnostics {
            println!("  degraded: {}", d.message);
        }
    }
    Ok(())
}
