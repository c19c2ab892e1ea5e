//! From action segments to a trace of (act, interpretation) steps.
//!
//! Tagging runs left to right through an answer's segments, giving the
//! model the previous segment and its label. A response may label the whole
//! segment or individual EDUs; EDU labels are then merged into maximal runs
//! of the same act. Eligible runs are finally paired with an interpretation
//! of the question. A segment whose call keeps failing becomes `NONE` with a
//! diagnostic instead of aborting the answer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::gateway::{
    build_act_prompt, build_interp_label_prompt, parse_act_response, parse_interp_label,
    ActAssignment, ActPromptInput, ChatBackend, ChatRequest, GatewayError,
};
use crate::interpretation::InterpretationSpace;
use crate::ontology::{Ontology, NONE_ACT};
use crate::rst::RstTree;
use crate::segmentation::{segment_answer, ActionSegment, BoundaryConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSegment {
    pub edu_indices: Vec<usize>,
    pub act_id: String,
    /// Set when the run absorbed a later action segment carrying the same act.
    pub continuation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub act_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpretation_id: Option<String>,
    pub edu_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ActTagging,
    InterpretationLabeling,
}

/// Record of a degradation applied while building a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stage: Stage,
    pub edu_indices: Vec<usize>,
    pub request_digest: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoTrace {
    pub answer_id: String,
    pub question_id: String,
    pub steps: Vec<TraceStep>,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
}

impl DiscoTrace {
    pub fn acts(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(|s| s.act_id.as_str())
    }
}

/// Calls `backend` until the response parses, at most `1 + retry_limit`
/// times. Backend failures are not retried here; live backends already
/// retry transient transport errors.
fn ask<T>(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    parse: impl Fn(&str) -> Result<T, GatewayError>,
) -> Result<T, GatewayError> {
    let attempts = 1 + backend.retry_limit();
    let mut last = None;
    for _ in 0..attempts {
        match backend.complete(request) {
            Ok(raw) => match parse(&raw) {
                Ok(v) => return Ok(v),
                Err(e) => last = Some(e),
            },
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Per-EDU labels for one segment from a parsed response. Unlabeled
/// subsegments inherit the label of the closest labeled one before them, or
/// the first label when none precedes.
fn expand_labels(assignments: &[ActAssignment], n: usize) -> Vec<String> {
    if let [single] = assignments {
        if single.subsegment_index.is_none() {
            return vec![single.action_id.clone(); n];
        }
    }
    let mut slots: Vec<Option<String>> = vec![None; n];
    for a in assignments {
        if let Some(i) = a.subsegment_index {
            slots[i] = Some(a.action_id.clone());
        }
    }
    let first = slots.iter().flatten().next().cloned().unwrap_or_else(|| NONE_ACT.to_string());
    let mut current = first;
    slots
        .into_iter()
        .map(|s| {
            if let Some(label) = s {
                current = label;
            }
            current.clone()
        })
        .collect()
}

pub fn tag_answer(
    question: &str,
    answer_text: &str,
    segments: &[ActionSegment],
    tree: &RstTree,
    ontology: &Ontology,
    backend: &dyn ChatBackend,
) -> (Vec<TaggedSegment>, Vec<Diagnostic>) {
    let edus = tree.edus();
    let mut diagnostics = Vec::new();
    // (edu index, act, originating segment)
    let mut labeled: Vec<(usize, String, usize)> = Vec::with_capacity(tree.edu_count());
    let mut prev: Option<(&str, String)> = None;

    for (seg_no, segment) in segments.iter().enumerate() {
        let subsegments: Vec<String> = segment
            .edu_indices
            .iter()
            .map(|&i| edus[i].text.clone())
            .collect();
        let input = ActPromptInput {
            question,
            answer: answer_text,
            prev_segment: prev.as_ref().map(|(t, _)| *t),
            prev_label: prev.as_ref().map(|(_, l)| l.as_str()),
            segment: &segment.text,
            subsegments: &subsegments,
        };
        let labels = match build_act_prompt(&input, ontology) {
            Ok(request) => {
                match ask(backend, &request, |raw| parse_act_response(raw, ontology, subsegments.len())) {
                    Ok(assignments) => expand_labels(&assignments, subsegments.len()),
                    Err(e) => {
                        log::warn!("act tagging degraded to NONE: {e}");
                        diagnostics.push(Diagnostic {
                            stage: Stage::ActTagging,
                            edu_indices: segment.edu_indices.clone(),
                            request_digest: backend.request_digest(&request),
                            message: e.to_string(),
                        });
                        vec![NONE_ACT.to_string(); subsegments.len()]
                    }
                }
            }
            Err(e) => {
                diagnostics.push(Diagnostic {
                    stage: Stage::ActTagging,
                    edu_indices: segment.edu_indices.clone(),
                    request_digest: String::new(),
                    message: e.to_string(),
                });
                vec![NONE_ACT.to_string(); subsegments.len()]
            }
        };
        let last = labels.last().cloned().unwrap_or_else(|| NONE_ACT.to_string());
        for (&edu, label) in segment.edu_indices.iter().zip(labels) {
            labeled.push((edu, label, seg_no));
        }
        prev = Some((segment.text.as_str(), last));
    }

    let mut tagged: Vec<TaggedSegment> = Vec::new();
    let mut last_seg = usize::MAX;
    for (edu, act, seg_no) in labeled {
        match tagged.last_mut() {
            Some(run) if run.act_id == act => {
                if seg_no != last_seg {
                    run.continuation = true;
                }
                run.edu_indices.push(edu);
            }
            _ => tagged.push(TaggedSegment {
                edu_indices: vec![edu],
                act_id: act,
                continuation: false,
            }),
        }
        last_seg = seg_no;
    }
    (tagged, diagnostics)
}

fn span_text(tree: &RstTree, indices: &[usize]) -> String {
    let edus = tree.edus();
    crate::rst::join_edus(indices.iter().map(|&i| edus[i]))
}

#[allow(clippy::too_many_arguments)]
pub fn pair_interpretations(
    answer_id: &str,
    question: &str,
    space: &InterpretationSpace,
    tagged: &[TaggedSegment],
    answer_text: &str,
    tree: &RstTree,
    ontology: &Ontology,
    backend: &dyn ChatBackend,
) -> DiscoTrace {
    let interpretations: BTreeMap<String, String> = space
        .members
        .iter()
        .map(|m| (m.id.clone(), m.text.clone()))
        .collect();
    let mut diagnostics = Vec::new();
    let mut steps = Vec::with_capacity(tagged.len());

    for seg in tagged {
        let eligible = ontology.is_eligible(&seg.act_id).unwrap_or(false);
        let mut interpretation_id = None;
        if eligible && !space.is_empty() {
            let label = ontology
                .get(&seg.act_id)
                .map(|a| a.display_name.as_str())
                .unwrap_or(&seg.act_id);
            let text = span_text(tree, &seg.edu_indices);
            match build_interp_label_prompt(question, &interpretations, answer_text, &text, label) {
                Ok(request) => {
                    match ask(backend, &request, |raw| parse_interp_label(raw, space.ids())) {
                        Ok(id) => interpretation_id = id,
                        Err(e) => {
                            log::warn!("interpretation labeling degraded to NONE: {e}");
                            diagnostics.push(Diagnostic {
                                stage: Stage::InterpretationLabeling,
                                edu_indices: seg.edu_indices.clone(),
                                request_digest: backend.request_digest(&request),
                                message: e.to_string(),
                            });
                        }
                    }
                }
                Err(e) => diagnostics.push(Diagnostic {
                    stage: Stage::InterpretationLabeling,
                    edu_indices: seg.edu_indices.clone(),
                    request_digest: String::new(),
                    message: e.to_string(),
                }),
            }
        }
        steps.push(TraceStep {
            act_id: seg.act_id.clone(),
            interpretation_id,
            edu_indices: seg.edu_indices.clone(),
        });
    }

    DiscoTrace {
        answer_id: answer_id.to_string(),
        question_id: space.question_id.clone(),
        steps,
        diagnostics,
    }
}

/// Everything needed to trace one answer.
#[derive(Debug, Clone)]
pub struct TraceInput<'a> {
    pub answer_id: &'a str,
    pub question_id: &'a str,
    pub question: &'a str,
    pub answer_text: &'a str,
    pub tree: &'a RstTree,
}

/// Segments, tags and pairs one answer. Without a space, or with an empty
/// one, no interpretation calls are made.
pub fn trace_answer(
    input: &TraceInput<'_>,
    space: Option<&InterpretationSpace>,
    ontology: &Ontology,
    boundaries: &BoundaryConfig,
    act_backend: &dyn ChatBackend,
    label_backend: &dyn ChatBackend,
) -> DiscoTrace {
    let segments = segment_answer(input.answer_id, input.tree, boundaries);
    let (tagged, mut diagnostics) = tag_answer(
        input.question,
        input.answer_text,
        &segments,
        input.tree,
        ontology,
        act_backend,
    );
    let empty = InterpretationSpace::empty(input.question_id);
    let space = space.unwrap_or(&empty);
    let mut trace = pair_interpretations(
        input.answer_id,
        input.question,
        space,
        &tagged,
        input.answer_text,
        input.tree,
        ontology,
        label_backend,
    );
    trace.question_id = input.question_id.to_string();
    diagnostics.append(&mut trace.diagnostics);
    trace.diagnostics = diagnostics;
    trace
}

/// Checks the structural invariants of a finished trace.
pub fn validate_trace(
    trace: &DiscoTrace,
    edu_count: usize,
    ontology: &Ontology,
    space: Option<&InterpretationSpace>,
) -> Result<(), String> {
    let spans: Vec<Vec<usize>> = trace.steps.iter().map(|s| s.edu_indices.clone()).collect();
    if !crate::segmentation::is_partition(&spans, edu_count) {
        return Err(format!("{}: steps do not partition {edu_count} EDUs", trace.answer_id));
    }
    for pair in trace.steps.windows(2) {
        if pair[0].act_id == pair[1].act_id {
            return Err(format!("{}: adjacent steps share act {}", trace.answer_id, pair[0].act_id));
        }
    }
    for step in &trace.steps {
        if step.act_id != NONE_ACT && !ontology.contains(&step.act_id) {
            return Err(format!("{}: unknown act {}", trace.answer_id, step.act_id));
        }
        if let Some(id) = &step.interpretation_id {
            if !ontology.is_eligible(&step.act_id).unwrap_or(false) {
                return Err(format!("{}: ineligible act {} carries {id}", trace.answer_id, step.act_id));
            }
            if !space.is_some_and(|s| s.contains_id(id)) {
                return Err(format!("{}: unknown interpretation {id}", trace.answer_id));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpretation::Interpretation;
    use crate::rst::{Nuclearity, Relation, RstNode};
    use std::collections::BTreeSet;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    /// Replies from a queue in call order and counts calls.
    struct Queue {
        replies: Mutex<Vec<Result<String, GatewayError>>>,
        calls: AtomicUsize,
        retries: usize,
    }

    impl Queue {
        fn new(replies: &[&str]) -> Self {
            Queue {
                replies: Mutex::new(replies.iter().rev().map(|s| Ok(s.to_string())).collect()),
                calls: AtomicUsize::new(0),
                retries: 0,
            }
        }
    }

    impl ChatBackend for Queue {
        fn name(&self) -> &str {
            "queue"
        }
        fn complete(&self, _: &ChatRequest) -> Result<String, GatewayError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.replies
                .lock()
                .unwrap()
                .pop()
                .unwrap_or(Err(GatewayError::TransportError("queue exhausted".into())))
        }
        fn retry_limit(&self) -> usize {
            self.retries
        }
    }

    fn one(act: &str) -> String {
        format!(r#"[{{"action_id": "{act}"}}]"#)
    }

    const ASSERT: &str = "action_AQ_assert_answer";
    const REJECT: &str = "action_CQ_reject_presupposition";
    const CLARIFY: &str = "action_SI_clarification";
    const PRESENT: &str = "action_NO_presentational";

    fn two_segment_tree() -> RstTree {
        // Contrast splits EDUs {0,1} from {2,3}
        RstTree::new(RstNode::internal(
            Relation::Contrast,
            Nuclearity::NN,
            RstNode::internal(
                Relation::Elaboration,
                Nuclearity::NS,
                RstNode::leaf(0, "Detox is a myth."),
                RstNode::leaf(0, "Your liver filters toxins."),
            ),
            RstNode::internal(
                Relation::Elaboration,
                Nuclearity::NS,
                RstNode::leaf(0, "Drink water."),
                RstNode::leaf(0, "Sleep well."),
            ),
        ))
        .unwrap()
    }

    fn space(n: usize) -> InterpretationSpace {
        InterpretationSpace {
            question_id: "q".into(),
            threshold: 0.85,
            members: (1..=n)
                .map(|i| Interpretation {
                    id: format!("id_{i}"),
                    text: format!("reading {i}?"),
                    sources: BTreeSet::from(["g".to_string()]),
                })
                .collect(),
        }
    }

    #[test]
    fn single_segment_answer() {
        let tree = RstTree::new(RstNode::leaf(0, "Because of Rayleigh scattering.")).unwrap();
        let segs = segment_answer("a", &tree, &BoundaryConfig::default());
        let b = Queue::new(&[&one(ASSERT)]);
        let (tagged, diags) = tag_answer("Why is the sky blue?", &tree.text(), &segs, &tree, &Ontology::default_ontology(), &b);
        assert_eq!(
            tagged,
            vec![TaggedSegment {
                edu_indices: vec![0],
                act_id: ASSERT.into(),
                continuation: false
            }]
        );
        assert!(diags.is_empty());
    }

    #[test]
    fn per_subsegment_split() {
        let tree = two_segment_tree();
        let segs = segment_answer("a", &tree, &BoundaryConfig::default());
        let split = format!(
            r#"[{{"subsegment_index":0,"action_id":"{REJECT}"}},{{"subsegment_index":1,"action_id":"{ASSERT}"}}]"#
        );
        let b = Queue::new(&[&split, &one(CLARIFY)]);
        let (tagged, _) = tag_answer("Best detox?", &tree.text(), &segs, &tree, &Ontology::default_ontology(), &b);
        let acts: Vec<_> = tagged.iter().map(|t| t.act_id.as_str()).collect();
        assert_eq!(acts, vec![REJECT, ASSERT, CLARIFY]);
        assert_eq!(tagged[0].edu_indices, vec![0]);
        assert_eq!(tagged[1].edu_indices, vec![1]);
        assert_eq!(tagged[2].edu_indices, vec![2, 3]);
    }

    #[test]
    fn continuation_merges_with_predecessor() {
        let tree = two_segment_tree();
        let segs = segment_answer("a", &tree, &BoundaryConfig::default());
        assert_eq!(segs.len(), 2);
        let b = Queue::new(&[&one(ASSERT), &one(ASSERT)]);
        let (tagged, _) = tag_answer("Q?", &tree.text(), &segs, &tree, &Ontology::default_ontology(), &b);
        assert_eq!(
            tagged,
            vec![TaggedSegment {
                edu_indices: vec![0, 1, 2, 3],
                act_id: ASSERT.into(),
                continuation: true
            }]
        );
    }

    #[test]
    fn unindexed_subsegments_inherit() {
        let a = ActAssignment {
            subsegment_index: Some(1),
            action_id: "X".into(),
        };
        let b = ActAssignment {
            subsegment_index: Some(3),
            action_id: "Y".into(),
        };
        assert_eq!(expand_labels(&[a, b], 5), vec!["X", "X", "X", "Y", "Y"]);
    }

    #[test]
    fn parse_failures_degrade_to_none() {
        let tree = two_segment_tree();
        let segs = segment_answer("a", &tree, &BoundaryConfig::default());
        let mut b = Queue::new(&["garbage", "still garbage", &one(PRESENT)]);
        b.retries = 1;
        let (tagged, diags) = tag_answer("Q?", &tree.text(), &segs, &tree, &Ontology::default_ontology(), &b);
        assert_eq!(tagged[0].act_id, NONE_ACT);
        assert_eq!(tagged[1].act_id, PRESENT);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].stage, Stage::ActTagging);
        assert_eq!(diags[0].edu_indices, vec![0, 1]);
        assert_eq!(diags[0].request_digest.len(), 64);
        assert_eq!(b.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn empty_space_makes_no_label_calls() {
        let tree = two_segment_tree();
        let tagged = vec![TaggedSegment {
            edu_indices: vec![0, 1, 2, 3],
            act_id: ASSERT.into(),
            continuation: false,
        }];
        let b = Queue::new(&[]);
        let trace = pair_interpretations("a", "Q?", &space(0), &tagged, "", &tree, &Ontology::default_ontology(), &b);
        assert_eq!(b.calls.load(Ordering::SeqCst), 0);
        assert_eq!(trace.steps[0].interpretation_id, None);
    }

    #[test]
    fn eligible_segments_get_ids() {
        let tree = two_segment_tree();
        let tagged = vec![
            TaggedSegment {
                edu_indices: vec![0],
                act_id: REJECT.into(),
                continuation: false,
            },
            TaggedSegment {
                edu_indices: vec![1, 2],
                act_id: ASSERT.into(),
                continuation: false,
            },
            TaggedSegment {
                edu_indices: vec![3],
                act_id: CLARIFY.into(),
                continuation: false,
            },
        ];
        let b = Queue::new(&[r#"[{"interpretation_id":"id_2"}]"#, r#"[{"interpretation_id":"id_9"}]"#]);
        let o = Ontology::default_ontology();
        let s = space(3);
        let trace = pair_interpretations("a", "Q?", &s, &tagged, "", &tree, &o, &b);
        assert_eq!(b.calls.load(Ordering::SeqCst), 2);
        assert_eq!(trace.steps[0].interpretation_id, None);
        assert_eq!(trace.steps[1].interpretation_id.as_deref(), Some("id_2"));
        assert_eq!(trace.steps[2].interpretation_id, None);
        assert_eq!(trace.diagnostics.len(), 1);
        assert!(trace.diagnostics[0].message.contains("id_9"));
        validate_trace(&trace, 4, &o, Some(&s)).unwrap();
    }

    #[test]
    fn validation_catches_violations() {
        let o = Ontology::default_ontology();
        let s = space(2);
        let mut t = DiscoTrace {
            answer_id: "a".into(),
            question_id: "q".into(),
            steps: vec![TraceStep {
                act_id: REJECT.into(),
                interpretation_id: Some("id_1".into()),
                edu_indices: vec![0],
            }],
            diagnostics: vec![],
        };
        assert!(validate_trace(&t, 1, &o, Some(&s)).unwrap_err().contains("ineligible"));
        t.steps[0].act_id = ASSERT.into();
        assert!(validate_trace(&t, 1, &o, Some(&s)).is_ok());
        assert!(validate_trace(&t, 2, &o, Some(&s)).is_err());
        t.steps[0].interpretation_id = Some("id_7".into());
        assert!(validate_trace(&t, 1, &o, Some(&s)).is_err());
    }
}
