//! Splitting an RST tree into coarse action segments.
//!
//! The tree is walked bottom-up. A node whose (relation, nuclearity) pair is
//! a boundary pair keeps its children apart; `Background` additionally needs
//! at least `min_span_k` EDUs on both sides, otherwise the whole subtree
//! collapses into one span. A non-boundary node keeps splits found deeper in
//! the tree and collapses only when neither child was split.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::rst::{Nuclearity, Relation, RstNode, RstTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundaryConfig {
    pub boundary_pairs: BTreeSet<(Relation, Nuclearity)>,
    pub min_span_k: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        use Nuclearity::*;
        use Relation::*;
        let pairs = [
            (Contrast, NN),
            (Comparison, NN),
            (TopicChange, NN),
            (TopicChange, NS),
            (TopicChange, SN),
            (Evaluation, NS),
            (Evaluation, SN),
            (Evaluation, NN),
            (Summary, NN),
            (Summary, NS),
            (Summary, SN),
            (Background, NS),
            (Background, SN),
        ];
        BoundaryConfig {
            boundary_pairs: pairs.into_iter().collect(),
            min_span_k: 3,
        }
    }
}

impl BoundaryConfig {
    /// A config with no boundary pairs; every tree yields one segment.
    pub fn empty() -> Self {
        BoundaryConfig {
            boundary_pairs: BTreeSet::new(),
            min_span_k: 3,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.min_span_k == 0 {
            return Err("min_span_k must be at least 1".into());
        }
        Ok(())
    }
}

pub fn is_boundary(relation: Relation, nuclearity: Nuclearity, config: &BoundaryConfig) -> bool {
    config.boundary_pairs.contains(&(relation, nuclearity))
}

/// A span is the ordered list of EDU indices it covers.
pub type Span = Vec<usize>;

pub fn get_spans(node: &RstNode, config: &BoundaryConfig) -> Vec<Span> {
    match node {
        RstNode::Leaf(edu) => vec![vec![edu.index]],
        RstNode::Internal {
            relation,
            nuclearity,
            left,
            right,
        } => {
            let l = get_spans(left, config);
            let r = get_spans(right, config);
            if is_boundary(*relation, *nuclearity, config) {
                let wide_enough = || {
                    let l_edus: usize = l.iter().map(Vec::len).sum();
                    let r_edus: usize = r.iter().map(Vec::len).sum();
                    l_edus >= config.min_span_k && r_edus >= config.min_span_k
                };
                if *relation != Relation::Background || wide_enough() {
                    return concat(l, r);
                }
                return vec![collapse(node)];
            }
            if l.len() + r.len() > 2 {
                return concat(l, r);
            }
            vec![collapse(node)]
        }
    }
}

fn concat(mut l: Vec<Span>, r: Vec<Span>) -> Vec<Span> {
    l.extend(r);
    l
}

fn collapse(node: &RstNode) -> Span {
    node.leaves().into_iter().map(|e| e.index).collect()
}

/// A contiguous run of EDUs suspected to carry a single discourse act.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSegment {
    pub answer_id: String,
    pub edu_indices: Vec<usize>,
    pub text: String,
}

pub fn segment_answer(answer_id: &str, tree: &RstTree, config: &BoundaryConfig) -> Vec<ActionSegment> {
    let edus = tree.edus();
    get_spans(tree.root(), config)
        .into_iter()
        .map(|span| {
            let text = crate::rst::join_edus(span.iter().map(|&i| edus[i]));
            ActionSegment {
                answer_id: answer_id.to_string(),
                edu_indices: span,
                text,
            }
        })
        .collect()
}

/// Checks that `segments` cover `0..edu_count` in order with no gap or overlap.
pub fn is_partition(segments: &[Vec<usize>], edu_count: usize) -> bool {
    let mut expected = 0;
    for seg in segments {
        if seg.is_empty() {
            return false;
        }
        for &i in seg {
            if i != expected {
                return false;
            }
            expected += 1;
        }
    }
    expected == edu_count
}
