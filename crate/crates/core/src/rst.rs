//! RST tree data model.
//!
//! Trees arrive as JSON documents produced by an external discourse parser.
//! Internal nodes look like
//! `{"relation": "Elaboration", "nuclearity": "NS", "left": .., "right": ..}`
//! and leaves like `{"edu": "text"}`. Parsing validates the relation and
//! nuclearity vocabularies and the binary shape, and numbers EDUs
//! left-to-right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RstError {
    #[error("malformed tree document: {0}")]
    MalformedDocument(String),
    #[error("unknown rhetorical relation {0:?}")]
    UnknownRelation(String),
    #[error("unknown nuclearity {0:?}")]
    UnknownNuclearity(String),
    #[error("internal node must have exactly two children: {0}")]
    NonBinaryNode(String),
}

/// The 18 coarse-grained RST-DT relation classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Elaboration,
    Attribution,
    Joint,
    SameUnit,
    Explanation,
    Enablement,
    Background,
    Evaluation,
    Cause,
    Contrast,
    Temporal,
    Comparison,
    TopicChange,
    MannerMeans,
    TextualOrganization,
    Condition,
    Summary,
    TopicComment,
}

impl Relation {
    pub const ALL: [Relation; 18] = [
        Relation::Elaboration,
        Relation::Attribution,
        Relation::Joint,
        Relation::SameUnit,
        Relation::Explanation,
        Relation::Enablement,
        Relation::Background,
        Relation::Evaluation,
        Relation::Cause,
        Relation::Contrast,
        Relation::Temporal,
        Relation::Comparison,
        Relation::TopicChange,
        Relation::MannerMeans,
        Relation::TextualOrganization,
        Relation::Condition,
        Relation::Summary,
        Relation::TopicComment,
    ];

    /// Canonical Title-Case label, hyphens preserved.
    pub fn label(self) -> &'static str {
        match self {
            Relation::Elaboration => "Elaboration",
            Relation::Attribution => "Attribution",
            Relation::Joint => "Joint",
            Relation::SameUnit => "Same-Unit",
            Relation::Explanation => "Explanation",
            Relation::Enablement => "Enablement",
            Relation::Background => "Background",
            Relation::Evaluation => "Evaluation",
            Relation::Cause => "Cause",
            Relation::Contrast => "Contrast",
            Relation::Temporal => "Temporal",
            Relation::Comparison => "Comparison",
            Relation::TopicChange => "Topic-Change",
            Relation::MannerMeans => "Manner-Means",
            Relation::TextualOrganization => "Textual-Organization",
            Relation::Condition => "Condition",
            Relation::Summary => "Summary",
            Relation::TopicComment => "Topic-Comment",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Relation {
    type Err = RstError;

    /// Case-insensitive; `_` and space are accepted in place of `-`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize_label(s);
        Relation::ALL
            .iter()
            .copied()
            .find(|r| normalize_label(r.label()) == norm)
            .ok_or_else(|| RstError::UnknownRelation(s.to_string()))
    }
}

fn normalize_label(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| match c {
            '_' | ' ' => '-',
            c => c.to_ascii_lowercase(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nuclearity {
    NN,
    NS,
    SN,
}

impl Nuclearity {
    pub const ALL: [Nuclearity; 3] = [Nuclearity::NN, Nuclearity::NS, Nuclearity::SN];

    pub fn label(self) -> &'static str {
        match self {
            Nuclearity::NN => "NN",
            Nuclearity::NS => "NS",
            Nuclearity::SN => "SN",
        }
    }
}

impl fmt::Display for Nuclearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Nuclearity {
    type Err = RstError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NN" => Ok(Nuclearity::NN),
            "NS" => Ok(Nuclearity::NS),
            "SN" => Ok(Nuclearity::SN),
            _ => Err(RstError::UnknownNuclearity(s.to_string())),
        }
    }
}

/// Elementary discourse unit. Text is kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edu {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RstNode {
    Leaf(Edu),
    Internal {
        relation: Relation,
        nuclearity: Nuclearity,
        left: Box<RstNode>,
        right: Box<RstNode>,
    },
}

impl RstNode {
    pub fn leaf(index: usize, text: impl Into<String>) -> Self {
        RstNode::Leaf(Edu {
            index,
            text: text.into(),
        })
    }

    pub fn internal(relation: Relation, nuclearity: Nuclearity, left: RstNode, right: RstNode) -> Self {
        RstNode::Internal {
            relation,
            nuclearity,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, RstNode::Leaf(_))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            RstNode::Leaf(_) => 1,
            RstNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// All leaf EDUs of this subtree in document order.
    pub fn leaves(&self) -> Vec<&Edu> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                RstNode::Leaf(edu) => out.push(edu),
                RstNode::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Index of the leftmost EDU.
    pub fn first_index(&self) -> usize {
        let mut node = self;
        loop {
            match node {
                RstNode::Leaf(edu) => return edu.index,
                RstNode::Internal { left, .. } => node = left,
            }
        }
    }

    fn to_value(&self) -> Value {
        match self {
            RstNode::Leaf(edu) => {
                let mut m = Map::new();
                m.insert("edu".into(), Value::String(edu.text.clone()));
                Value::Object(m)
            }
            RstNode::Internal {
                relation,
                nuclearity,
                left,
                right,
            } => {
                let mut m = Map::new();
                m.insert("relation".into(), Value::String(relation.label().into()));
                m.insert("nuclearity".into(), Value::String(nuclearity.label().into()));
                m.insert("left".into(), left.to_value());
                m.insert("right".into(), right.to_value());
                Value::Object(m)
            }
        }
    }
}

/// Leaves of `node` in order, cloned.
pub fn get_leaves(node: &RstNode) -> Vec<Edu> {
    node.leaves().into_iter().cloned().collect()
}

/// A validated binary RST tree over one answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstTree {
    root: RstNode,
    edu_count: usize,
}

impl RstTree {
    /// Builds a tree from a node, renumbering EDUs left-to-right and
    /// checking that every EDU has non-blank text.
    pub fn new(mut root: RstNode) -> Result<Self, RstError> {
        let mut next = 0;
        renumber(&mut root, &mut next)?;
        Ok(RstTree {
            root,
            edu_count: next,
        })
    }

    pub fn root(&self) -> &RstNode {
        &self.root
    }

    pub fn edu_count(&self) -> usize {
        self.edu_count
    }

    pub fn edus(&self) -> Vec<&Edu> {
        self.root.leaves()
    }

    /// EDU texts joined with single spaces.
    pub fn text(&self) -> String {
        join_edus(self.root.leaves().into_iter())
    }

    pub fn to_json_value(&self) -> Value {
        self.root.to_value()
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }
}

fn renumber(node: &mut RstNode, next: &mut usize) -> Result<(), RstError> {
    match node {
        RstNode::Leaf(edu) => {
            if edu.text.trim().is_empty() {
                return Err(RstError::MalformedDocument(format!(
                    "EDU {} has empty text",
                    *next
                )));
            }
            edu.index = *next;
            *next += 1;
            Ok(())
        }
        RstNode::Internal { left, right, .. } => {
            renumber(left, next)?;
            renumber(right, next)
        }
    }
}

pub(crate) fn join_edus<'a>(edus: impl Iterator<Item = &'a Edu>) -> String {
    let mut s = String::new();
    for edu in edus {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(edu.text.trim());
    }
    s
}

/// Parses a serialized tree document.
pub fn parse_rst_tree(serialized: &str) -> Result<RstTree, RstError> {
    let value: Value =
        serde_json::from_str(serialized).map_err(|e| RstError::MalformedDocument(e.to_string()))?;
    tree_from_value(&value)
}

pub fn tree_from_value(value: &Value) -> Result<RstTree, RstError> {
    let root = node_from_value(value, "$")?;
    RstTree::new(root)
}

fn node_from_value(value: &Value, path: &str) -> Result<RstNode, RstError> {
    let obj = value
        .as_object()
        .ok_or_else(|| RstError::MalformedDocument(format!("{path}: expected an object")))?;

    if let Some(edu) = obj.get("edu") {
        if obj.contains_key("left") || obj.contains_key("right") {
            return Err(RstError::MalformedDocument(format!(
                "{path}: leaf cannot have children"
            )));
        }
        let text = edu
            .as_str()
            .ok_or_else(|| RstError::MalformedDocument(format!("{path}.edu: expected a string")))?;
        return Ok(RstNode::leaf(0, text));
    }

    if let Some(children) = obj.get("children") {
        let n = children.as_array().map(|a| a.len()).unwrap_or(0);
        return Err(RstError::NonBinaryNode(format!("{path}: {n} children")));
    }

    let relation = obj
        .get("relation")
        .ok_or_else(|| RstError::MalformedDocument(format!("{path}: missing \"relation\" or \"edu\"")))?
        .as_str()
        .ok_or_else(|| RstError::MalformedDocument(format!("{path}.relation: expected a string")))?
        .parse::<Relation>()?;
    let nuclearity = obj
        .get("nuclearity")
        .ok_or_else(|| RstError::MalformedDocument(format!("{path}: missing \"nuclearity\"")))?
        .as_str()
        .ok_or_else(|| RstError::MalformedDocument(format!("{path}.nuclearity: expected a string")))?
        .parse::<Nuclearity>()?;

    match (obj.get("left"), obj.get("right")) {
        (Some(l), Some(r)) => {
            let left = node_from_value(l, &format!("{path}.left"))?;
            let right = node_from_value(r, &format!("{path}.right"))?;
            Ok(RstNode::internal(relation, nuclearity, left, right))
        }
        (l, r) => {
            let n = l.is_some() as usize + r.is_some() as usize;
            Err(RstError::NonBinaryNode(format!("{path}: {n} children")))
        }
    }
}

impl Serialize for RstTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RstTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        tree_from_value(&value).map_err(serde::de::Error::custom)
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.label())
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Relation);
string_serde!(Nuclearity);

#[cfg(test)]
mod tests {
    use super::*;

    fn left_skewed(n: usize) -> RstNode {
        let mut node = RstNode::leaf(0, "e0");
        for i in 1..n {
            node = RstNode::internal(
                Relation::Elaboration,
                Nuclearity::NS,
                node,
                RstNode::leaf(i, format!("e{i}")),
            );
        }
        node
    }

    #[test]
    fn single_leaf_document() {
        let t = parse_rst_tree(r#"{"edu": "Yes."}"#).unwrap();
        assert_eq!(t.edu_count(), 1);
        assert_eq!(t.text(), "Yes.");
    }

    #[test]
    fn smallest_internal_node() {
        let t = parse_rst_tree(
            r#"{"relation":"Elaboration","nuclearity":"NS","left":{"edu":"A"},"right":{"edu":"B"}}"#,
        )
        .unwrap();
        assert_eq!(t.edu_count(), 2);
        let edus = t.edus();
        assert_eq!((edus[0].index, edus[1].index), (0, 1));
    }

    #[test]
    fn vocabulary_rejection() {
        let err = parse_rst_tree(
            r#"{"relation":"Foo","nuclearity":"NS","left":{"edu":"A"},"right":{"edu":"B"}}"#,
        )
        .unwrap_err();
        assert_eq!(err, RstError::UnknownRelation("Foo".into()));

        let err = parse_rst_tree(
            r#"{"relation":"Joint","nuclearity":"XX","left":{"edu":"A"},"right":{"edu":"B"}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, RstError::UnknownNuclearity(_)));
    }

    #[test]
    fn structural_rejection() {
        let err = parse_rst_tree(r#"{"relation":"Joint","nuclearity":"NN","left":{"edu":"A"}}"#)
            .unwrap_err();
        assert!(matches!(err, RstError::NonBinaryNode(_)));
        let err = parse_rst_tree(
            r#"{"relation":"Joint","nuclearity":"NN","children":[{"edu":"A"},{"edu":"B"},{"edu":"C"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, RstError::NonBinaryNode(_)));
        assert!(matches!(
            parse_rst_tree("{\"edu\": ").unwrap_err(),
            RstError::MalformedDocument(_)
        ));
        assert!(matches!(
            parse_rst_tree(r#"{"edu": "   "}"#).unwrap_err(),
            RstError::MalformedDocument(_)
        ));
    }

    #[test]
    fn relation_case_normalization() {
        assert_eq!("topic-change".parse::<Relation>().unwrap(), Relation::TopicChange);
        assert_eq!("TOPIC_CHANGE".parse::<Relation>().unwrap(), Relation::TopicChange);
        assert_eq!("same-unit".parse::<Relation>().unwrap().label(), "Same-Unit");
        assert_eq!(Relation::ALL.len(), 18);
    }

    #[test]
    fn leaves_in_order() {
        assert_eq!(get_leaves(&RstNode::leaf(0, "x")).len(), 1);

        let tree = RstTree::new(left_skewed(5)).unwrap();
        // manual in-order walk of the left spine
        let mut manual = Vec::new();
        let mut node = tree.root();
        let mut rights = Vec::new();
        while let RstNode::Internal { left, right, .. } = node {
            rights.push(right.as_ref());
            node = left;
        }
        manual.push(node);
        manual.extend(rights.into_iter().rev());
        let manual: Vec<Edu> = manual
            .into_iter()
            .map(|n| match n {
                RstNode::Leaf(e) => e.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(get_leaves(tree.root()), manual);
        assert_eq!(
            manual.iter().map(|e| e.index).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4]
        );
    }

    #[test]
    fn round_trip() {
        let doc = r#"{"relation":"Topic-Change","nuclearity":"NN","left":{"edu":"One"},"right":{"relation":"Background","nuclearity":"SN","left":{"edu":"Two"},"right":{"edu":"Three"}}}"#;
        let t = parse_rst_tree(doc).unwrap();
        assert_eq!(t.to_json(), doc);
        assert_eq!(parse_rst_tree(&t.to_json()).unwrap(), t);
    }
}
