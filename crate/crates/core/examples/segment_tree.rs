//! Parse a serialized RST tree and split it into action segments.
//!
//! cargo run --example segment_tree

use discotrace::rst::parse_rst_tree;
use discotrace::{segment_answer, BoundaryConfig};

const TREE: &str = r#"{
  "relation": "Contrast", "nuclearity": "NN",
  "left": {
    "relation": "Elaboration", "nuclearity": "NS",
    "left": {"edu": "Most languages put the subject first."},
    "right": {"edu": "Subject-object-verb is the single most common order."}
  },
  "right": {
    "relation": "Background", "nuclearity": "SN",
    "left": {"edu": "English is an exception among its neighbours."},
    "right": {"edu": "It settled on subject-verb-object."}
  }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_rst_tree(TREE)?;
    for config in [BoundaryConfig::default(), BoundaryConfig { min_span_k: 1, ..BoundaryConfig::default() }] {
        println!("min_span_k = {}", config.min_span_k);
        for seg in segment_answer("demo", &tree, &config) {
            println!("  {:?} {}", seg.edu_indices, seg.text);
        }
    }
    Ok(())
}
