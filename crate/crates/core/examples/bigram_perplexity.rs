//! Fit bigram strategy models and compare corpora by cross-perplexity.
//!
//! cargo run --example bigram_perplexity

use discotrace::stats::{cross_perplexity_matrix, perplexity, BigramModel, Pooling, Smoothing, Vocabulary};

fn corpus(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = Vocabulary::new(["assert", "reason", "example", "cite", "NONE"]);
    let experts = corpus(&[
        &["assert", "reason", "cite"],
        &["assert", "cite", "reason"],
        &["assert", "reason", "example", "cite"],
    ]);
    let casual = corpus(&[&["assert"], &["example", "assert"], &["assert", "example"], &["NONE"]]);

    let model = BigramModel::fit(&experts, vocab.clone(), Smoothing::Mle)?;
    println!("p(reason | assert) = {:.3}", model.probability("assert", "reason")?);
    match perplexity(&model, &casual, Pooling::Transition) {
        Ok(pp) => println!("mle perplexity on casual answers: {pp:.3}"),
        Err(e) => println!("mle cannot score casual answers: {e}"),
    }

    let matrix = cross_perplexity_matrix(
        &[("experts".into(), experts), ("casual".into(), casual)],
        &vocab,
        Smoothing::AddLambda { lambda: 1.0 },
        Pooling::Transition,
    )?;
    print!("{}", matrix.to_csv());
    Ok(())
}
