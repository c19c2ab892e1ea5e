//! Pool interpretations from two generators and merge paraphrases by
//! embedding similarity.
//!
//! cargo run --example dedup_interpretations

use std::collections::BTreeSet;

use discotrace::community;
use discotrace::gateway::{ChatBackend, ChatRequest, EmbeddingBackend, GatewayError};
use discotrace::interpretation::{deduplicate, generate_raw};

struct Canned(&'static str, &'static str);

impl ChatBackend for Canned {
    fn name(&self) -> &str {
        self.0
    }

    fn complete(&self, _request: &ChatRequest) -> Result<String, GatewayError> {
        Ok(self.1.to_string())
    }
}

/// Bag-of-words vectors over a fixed word list.
struct Words(Vec<&'static str>);

impl EmbeddingBackend for Words {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        Ok(texts
            .iter()
            .map(|t| {
                let words: BTreeSet<String> = t.to_lowercase().split(|c: char| !c.is_alphanumeric()).map(String::from).collect();
                self.0.iter().map(|w| f64::from(u8::from(words.contains(*w)))).collect()
            })
            .collect())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Canned("gen-a", "1. Which word order is most common across languages?\n2. Which word order does English use?");
    let b = Canned("gen-b", "1. Which word order is most common across the languages of the world?\n2. Is word order fixed in spoken English?");
    let embedder = Words(vec!["word", "order", "common", "languages", "english", "spoken", "fixed", "world", "use"]);

    let title = "What is the most common word order?";
    let (raw, warnings) = generate_raw(title, community::description("asklinguistics").unwrap_or(""), &[&a, &b])?;
    println!("{} proposals, {} warnings", raw.len(), warnings.len());
    let space = deduplicate("q1", &raw, &embedder, 0.85)?;
    for m in &space.members {
        println!("{} {:?} {}", m.id, m.sources, m.text);
    }
    Ok(())
}
