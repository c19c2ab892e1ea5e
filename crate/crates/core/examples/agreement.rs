//! Cohen's kappa between two annotations, at act and family level.
//!
//! cargo run --example agreement

use discotrace::stats::{cohens_kappa, LabelSpace};
use discotrace::Ontology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ontology = Ontology::default_ontology();
    let a = [
        "action_AQ_assert_answer",
        "action_AQ_provide_reasoning",
        "action_AQ_provide_example",
        "action_CQ_reject_presupposition",
        "action_NO_presentational",
        "action_AQ_assert_answer",
    ];
    let b = [
        "action_AQ_assert_answer",
        "action_AQ_provide_background",
        "action_AQ_provide_example",
        "action_CQ_comment_on_question",
        "action_NO_presentational",
        "action_AQ_provide_reasoning",
    ];
    let acts = cohens_kappa(&a, &b, LabelSpace::Act)?;
    let fa: Vec<String> = a.iter().map(|x| ontology.family_token(x)).collect();
    let fb: Vec<String> = b.iter().map(|x| ontology.family_token(x)).collect();
    let families = cohens_kappa(&fa, &fb, LabelSpace::Family)?;
    println!("act level:    kappa {:.3} (observed {:.3}, chance {:.3})", acts.kappa, acts.observed, acts.expected);
    println!("family level: kappa {:.3} (observed {:.3}, chance {:.3})", families.kappa, families.observed, families.expected);
    Ok(())
}
