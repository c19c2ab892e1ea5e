//! Filter a raw post dump and draw a seeded sample of the survivors.
//!
//! cargo run --example filter_posts

use std::path::Path;

use discotrace::corpus::{filter_corpus, read_bodies, sample_questions, FilterConfig, RawPost};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/filter/posts.jsonl");
    let posts: Vec<RawPost> = read_bodies(path)?;
    let report = filter_corpus(&posts, &FilterConfig::default())?;
    println!("kept {} of {}", report.kept.len(), posts.len());
    for (rule, n) in report.tally.iter().filter(|(_, n)| **n > 0) {
        println!("  {rule:?}: {n}");
    }
    println!("kept without a profanity score: {:?}", report.unscored);
    for post in sample_questions(&report.kept, 3, 42)? {
        println!("sampled: {}", post.title);
    }
    Ok(())
}
