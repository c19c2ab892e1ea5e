//! Print the four prompts for one question and answer.
//!
//! cargo run --example render_prompts

use std::collections::BTreeMap;

use discotrace::community;
use discotrace::gateway::{build_act_prompt, build_interp_gen_prompt, build_interp_label_prompt, build_mimic_prompt, ActPromptInput};
use discotrace::Ontology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ontology = Ontology::default_ontology();
    let question = "How did medieval peasants keep time?";
    let answer = "Church bells rang the canonical hours. Sundials filled the gaps.";
    let subs = vec!["Church bells rang the canonical hours.".to_string()];
    let act = build_act_prompt(
        &ActPromptInput {
            question,
            answer,
            prev_segment: None,
            prev_label: None,
            segment: &subs[0],
            subsegments: &subs,
        },
        &ontology,
    )?;
    let generation = build_interp_gen_prompt(question, community::description("AskHistorians").unwrap_or(""))?;
    let readings: BTreeMap<String, String> = [("id_1".to_string(), "How did peasants tell the time of day?".to_string())].into();
    let label = build_interp_label_prompt(question, &readings, answer, &subs[0], "Assert Answer")?;
    let mimic = build_mimic_prompt(
        question,
        "AskHistorians",
        &community::explanation("AskHistorians").unwrap_or_default(),
        community::guidelines("AskHistorians").unwrap_or(""),
    )?;
    for (name, r) in [("act tagging", act), ("interpretation generation", generation), ("interpretation labeling", label), ("mimic", mimic)] {
        println!("==== {name} (temperature {}, digest {})", r.temperature, r.digest());
        println!("---- system\n{}\n---- user\n{}\n", r.system, r.user);
    }
    Ok(())
}
