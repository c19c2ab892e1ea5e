//! Prompt templates and response parsers.
//!
//! Four prompts are used: act tagging, interpretation generation,
//! interpretation labeling and community mimicry. Templates use `{name}`
//! placeholders filled in a single pass, so user text containing braces is
//! never re-expanded.

use std::collections::{BTreeMap, HashSet};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ChatRequest, GatewayError};
use crate::ontology::{Ontology, NONE_ACT};

/// Placeholder shown when a segment has no predecessor.
pub const NO_PREVIOUS: &str = "(none)";

const ACT_SYSTEM: &str = r#"You are an expert discourse analyst trying to understand how people answer questions on Reddit. You will analyze answers by tagging each text segment from a Reddit answer with a discourse action.

**Rules**
1. **Select EXACTLY ONE action_id per segment or subsegment.**
2. If the current segment continues the previous action, reuse the previous action_id.
3. If a new rhetorical move begins, select the appropriate new action_id.
4. If no action fits, use "NONE".

**Subsegment Labeling**
Each segment you receive was produced by a discourse parser. You will also be shown the subsegments (sentences) that make up the segment. If all subsegments serve the same discourse function, return a single-element array with one action_id. If different subsegments serve **different discourse functions**, return an array with one entry per subsegment, each with its subsegment_index and action_id.

Common patterns worth splitting:
- Background/reasoning subsegments followed by an answer subsegment
- An answer subsegment followed by a redirect or recommendation
- A presupposition rejection followed by an alternative answer

Do NOT split when:
- A subsegment contains light framing for the next (e.g., "So basically," followed by an answer -> single Assert Answer)
- The difference is just emphasis vs. substance within the same move

**Caveats and Task Nuances**
1. Consider the expected answer type of the question when labeling actions. Responding to "Where can I find X" with a website recommendation is an "Answer the Question" action, not a "Direct to Resource" action. If the resource is the answer itself, label it as "Assert Answer". If the resource is suggested as additional reading, use Direct to Resource.
2. When a segment contains both an answer and supporting reasoning: if subsegments are provided and the answer and reasoning fall in **different subsegments**, split them. If they are in the **same subsegment** (tightly integrated), label it as "Provide Reasoning or Justification" if the justification is non-trivial, otherwise "Assert Answer".
3. When a segment explains WHY something is the case, determine what it is explaining:
- If it explains why an *answer* is correct -> "Provide Reasoning or Justification"
- If it explains why a *premise of the question* is wrong -> "Reject Presupposition"
Example: For "Why is the sky blue?", the segment "Because of Rayleigh scattering" is justification. For "What's the best liver detox cleanse?", the segment "The concept of 'detoxing' your liver is misleading -- your liver already filters toxins continuously" is rejecting the presupposition.
4. Sharing a personal anecdote or experience is "Provide Example", NOT "Provide Background." Background sets up context, frameworks, or history *before* answering. Examples use concrete cases (including personal ones) to *support or illustrate* an answer.
- "I have a doctorate, and sometimes introduce myself as Dr." -> Provide Example
- "The use of honorifics has a long and contested history in academia." -> Provide Background
5. When a segment follows a recommendation and provides supporting information, ask: does it explain why the recommendation is good *in terms of the original question*, or does it answer a *different* question?
- If it explains why the recommendation addresses the original question -> "Provide Reasoning or Justification"
- If it introduces new information that answers a tangentially related but different question -> "Answer a Question or Interpretation outside of Interpretation Space"
6. When a segment invokes an external source (study, statistic, law, quote, expert consensus) to support a claim, use "Cite External Source" -- NOT "Provide Example" or "Provide Reasoning." The key test: does the credibility derive from an independently verifiable external source, or from the answerer's own experience/logic?
- "A 2019 Lancet study found no significant effect." -> Cite External Source
- "I saw the same thing happen at my last job." -> Provide Example
- "That's because the compiler needs type info at compile time." -> Provide Reasoning

**Action Ontology**
{ontology}

**Output Format**
Always respond with ONLY a JSON array. No explanation, no reasoning, no commentary.

Single action for whole segment:
[{"action_id": "action_AQ_assert_answer"}]

Distinct actions per subsegment:
[{"subsegment_index": 0, "action_id": "action_CQ_reject_presupposition"}, {"subsegment_index": 1, "action_id": "action_AQ_assert_answer"}]

When no action fits:
[{"action_id": "NONE"}]"#;

const ACT_USER: &str = r#"**Question**
{question}

**Full Answer**
{answer}

**Previous Segment** action="{prev_label}"
{segment_prev}

**Current Segment**
{segment}

**Subsegments**
{subsegments}

Respond with ONLY a JSON array."#;

const INTERP_GEN_SYSTEM_HEAD: &str = "Users in a question answering community typically try to express a need for information through a question. Sometimes, from the language of their question alone, it is not clear what their exact information need is. This leads to many distinct interpretations of their question, each representing different information needs. You will be given a **question** asked in a specific online community that may have many distinct interpretations. Your task is to output those interpretations as unambiguous distinct questions.";

const INTERP_GEN_SYSTEM_RULES: &str = r#"**Critical Rules**
- Each interpretation must be a **different plausible reading** of the SAME question -- a different thing the user could have MEANT by their words.
- Do NOT generate sub-questions, follow-up questions, related questions, or questions that explore different aspects of the topic.
- Ask yourself: "Could the user have typed this exact question while meaning THIS?" If the answer is no, it is not a valid interpretation.
- Interpretations should differ in WHAT the user is asking, not provide additional angles on the same clear question.

If the user's information need is already clear from their question, output 'NONE'. Otherwise, output the numbered list of interpretations as unambiguous questions and nothing else."#;

const INTERP_GEN_USER: &str = "**Question**\n{question}";

const INTERP_LABEL_SYSTEM: &str = r#"You are an expert discourse analyst. A Reddit answer segment has already been labeled with a discourse action. Your task is to determine which interpretation of the original question the segment best addresses.

**Rules**
1. You are given a question, its possible interpretations, and a segment from an answer that has been labeled with a discourse action.
2. Determine which question interpretation the segment most directly addresses, adopts, or targets. This may be explicit or implicit.
3. If the segment clearly and directly addresses one of the interpretations, return that interpretation's ID.
4. If the segment does not clearly target any specific interpretation, return "NONE".

**Output Format**
Respond with exactly ONE JSON object:
[{"interpretation_id": "id_1"}]

When no specific interpretation is targeted:
[{"interpretation_id": "NONE"}]"#;

const INTERP_LABEL_USER: &str = r#"**Question**
{question}

**Question Interpretations**
{interpretations}

**Full Answer**
{answer}

**Segment** (labeled as "{action_label}")
{segment}

Respond with EXACTLY ONE JSON dictionary (NOT an array)."#;

const MIMIC_SYSTEM: &str = "r/{subreddit} is a subreddit for {subreddit_explanation}. The community guidelines for r/{subreddit} are as follows: {community_guidelines}.";

const MIMIC_USER: &str = "Answer the question as if you were a redditor in that subreddit: {question}";

/// Fills `{name}` placeholders in one left-to-right pass.
fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let name_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        let name = &after[..name_len];
        let closes = after[name_len..].starts_with('}');
        match vars.iter().find(|(k, _)| *k == name) {
            Some((_, value)) if closes && name_len > 0 => {
                out.push_str(value);
                rest = &after[name_len + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Inputs for one act-tagging call.
#[derive(Debug, Clone)]
pub struct ActPromptInput<'a> {
    pub question: &'a str,
    pub answer: &'a str,
    pub prev_segment: Option<&'a str>,
    pub prev_label: Option<&'a str>,
    pub segment: &'a str,
    pub subsegments: &'a [String],
}

pub fn build_act_prompt(input: &ActPromptInput<'_>, ontology: &Ontology) -> Result<ChatRequest, GatewayError> {
    if input.segment.trim().is_empty() || input.subsegments.is_empty() {
        return Err(GatewayError::EmptySegment);
    }
    let system = render(ACT_SYSTEM, &[("ontology", &ontology.render_for_prompt())]);
    let subsegments = input
        .subsegments
        .iter()
        .enumerate()
        .map(|(i, s)| format!("[{i}] {}", s.trim()))
        .collect::<Vec<_>>()
        .join("\n");
    let user = render(
        ACT_USER,
        &[
            ("question", input.question),
            ("answer", input.answer),
            ("prev_label", input.prev_label.unwrap_or(NO_PREVIOUS)),
            ("segment_prev", input.prev_segment.unwrap_or(NO_PREVIOUS)),
            ("segment", input.segment),
            ("subsegments", &subsegments),
        ],
    );
    Ok(ChatRequest::new(system, user))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActAssignment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsegment_index: Option<usize>,
    pub action_id: String,
}

/// Removes surrounding whitespace and a Markdown code fence, if any.
fn strip_fences(raw: &str) -> &str {
    let mut s = raw.trim();
    if let Some(inner) = s.strip_prefix("```") {
        let body = match inner.find('\n') {
            Some(nl) => &inner[nl + 1..],
            None => inner,
        };
        s = body.trim_end().strip_suffix("```").unwrap_or(body).trim();
    }
    s
}

pub fn parse_act_response(
    raw: &str,
    ontology: &Ontology,
    n_subsegments: usize,
) -> Result<Vec<ActAssignment>, GatewayError> {
    let text = strip_fences(raw);
    let value: Value = serde_json::from_str(text)
        .map_err(|e| GatewayError::UnparsableResponse(format!("{e}: {text:.80}")))?;
    let entries = value
        .as_array()
        .ok_or_else(|| GatewayError::UnparsableResponse("expected a JSON array".into()))?;
    if entries.is_empty() {
        return Err(GatewayError::UnparsableResponse("empty array".into()));
    }
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let obj = entry
            .as_object()
            .ok_or_else(|| GatewayError::UnparsableResponse("array entries must be objects".into()))?;
        let action_id = obj
            .get("action_id")
            .and_then(Value::as_str)
            .ok_or_else(|| GatewayError::UnparsableResponse("entry without string action_id".into()))?
            .trim()
            .to_string();
        let subsegment_index = match obj.get("subsegment_index") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| {
                GatewayError::UnparsableResponse("subsegment_index must be a non-negative integer".into())
            })? as usize),
        };
        if action_id != NONE_ACT && !ontology.contains(&action_id) {
            return Err(GatewayError::InvalidActId(action_id));
        }
        out.push(ActAssignment {
            subsegment_index,
            action_id,
        });
    }

    let indexed = out.iter().filter(|a| a.subsegment_index.is_some()).count();
    if indexed == 0 {
        if out.len() != 1 {
            return Err(GatewayError::UnparsableResponse(
                "whole-segment form must contain exactly one entry".into(),
            ));
        }
        return Ok(out);
    }
    if indexed != out.len() {
        return Err(GatewayError::MixedForm);
    }
    let mut seen = HashSet::new();
    for a in &out {
        let index = a.subsegment_index.unwrap_or_default();
        if index >= n_subsegments {
            return Err(GatewayError::IndexOutOfRange {
                index,
                n: n_subsegments,
            });
        }
        if !seen.insert(index) {
            return Err(GatewayError::DuplicateIndex(index));
        }
    }
    Ok(out)
}

/// Inverse of [`parse_act_response`] for valid assignment lists.
pub fn serialize_assignments(assignments: &[ActAssignment]) -> String {
    serde_json::to_string(assignments).expect("assignments serialize")
}

pub fn build_interp_gen_prompt(question: &str, community_context: &str) -> Result<ChatRequest, GatewayError> {
    if question.trim().is_empty() {
        return Err(GatewayError::EmptyField("question"));
    }
    let context = community_context.trim();
    let system = if context.is_empty() {
        format!("{INTERP_GEN_SYSTEM_HEAD}\n\n{INTERP_GEN_SYSTEM_RULES}")
    } else {
        format!("{INTERP_GEN_SYSTEM_HEAD}\n\n{context}\n\n{INTERP_GEN_SYSTEM_RULES}")
    };
    let user = render(INTERP_GEN_USER, &[("question", question)]);
    Ok(ChatRequest::new(system, user))
}

pub fn parse_interp_list(raw: &str) -> Result<Vec<String>, GatewayError> {
    let text = strip_fences(raw);
    let bare = text.trim().trim_matches(|c| c == '\'' || c == '"' || c == '.');
    if bare.eq_ignore_ascii_case(NONE_ACT) {
        return Ok(Vec::new());
    }
    let numbered = Regex::new(r"^\s*\(?(\d+)[.):]\s*(.*)$").expect("valid regex");
    let mut items: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(caps) = numbered.captures(line) {
            items.push(caps[2].trim().to_string());
        } else if let Some(last) = items.last_mut() {
            // wrapped continuation of the previous item
            last.push(' ');
            last.push_str(line.trim());
        }
    }
    if items.is_empty() {
        return Err(GatewayError::UnparsableResponse(
            "expected NONE or a numbered list".into(),
        ));
    }
    items.retain(|s| !s.is_empty());
    Ok(items)
}

/// Builds the interpretation-labeling prompt. `interpretations` maps ids
/// (`id_1`, ...) to question renderings.
pub fn build_interp_label_prompt(
    question: &str,
    interpretations: &BTreeMap<String, String>,
    answer: &str,
    segment: &str,
    act_label: &str,
) -> Result<ChatRequest, GatewayError> {
    if segment.trim().is_empty() {
        return Err(GatewayError::EmptySegment);
    }
    let mut ids: Vec<&String> = interpretations.keys().collect();
    ids.sort_by_key(|id| interp_sort_key(id));
    let listing = ids
        .iter()
        .map(|id| format!("{id}: {}", interpretations[*id]))
        .collect::<Vec<_>>()
        .join("\n");
    let user = render(
        INTERP_LABEL_USER,
        &[
            ("question", question),
            ("interpretations", &listing),
            ("answer", answer),
            ("segment", segment),
            ("action_label", act_label),
        ],
    );
    Ok(ChatRequest::new(INTERP_LABEL_SYSTEM, user))
}

/// Orders `id_2` before `id_10`.
fn interp_sort_key(id: &str) -> (u64, String) {
    let n = id
        .strip_prefix("id_")
        .and_then(|n| n.parse().ok())
        .unwrap_or(u64::MAX);
    (n, id.to_string())
}

/// Parses an interpretation-labeling response. Returns `None` for `NONE`.
///
/// Accepts a bare object or a one-element array, since the output
/// instructions show both.
pub fn parse_interp_label<'a, I>(raw: &str, known_ids: I) -> Result<Option<String>, GatewayError>
where
    I: IntoIterator<Item = &'a str>,
{
    let text = strip_fences(raw);
    let value: Value = serde_json::from_str(text)
        .map_err(|e| GatewayError::UnparsableResponse(format!("{e}: {text:.80}")))?;
    let obj = match &value {
        Value::Object(o) => o,
        Value::Array(a) if a.len() == 1 => a[0]
            .as_object()
            .ok_or_else(|| GatewayError::UnparsableResponse("expected an object".into()))?,
        _ => {
            return Err(GatewayError::UnparsableResponse(
                "expected exactly one object".into(),
            ))
        }
    };
    let id = obj
        .get("interpretation_id")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::UnparsableResponse("missing interpretation_id".into()))?
        .trim();
    if id.eq_ignore_ascii_case(NONE_ACT) {
        return Ok(None);
    }
    if known_ids.into_iter().any(|k| k == id) {
        Ok(Some(id.to_string()))
    } else {
        Err(GatewayError::UnknownInterpretationId(id.to_string()))
    }
}

pub fn build_mimic_prompt(
    question: &str,
    subreddit_name: &str,
    subreddit_explanation: &str,
    guidelines: &str,
) -> Result<ChatRequest, GatewayError> {
    for (name, value) in [
        ("question", question),
        ("subreddit_name", subreddit_name),
        ("subreddit_explanation", subreddit_explanation),
        ("guidelines", guidelines),
    ] {
        if value.trim().is_empty() {
            return Err(GatewayError::EmptyField(name));
        }
    }
    let name = subreddit_name.trim().trim_start_matches("r/");
    let system = render(
        MIMIC_SYSTEM,
        &[
            ("subreddit", name),
            ("subreddit_explanation", subreddit_explanation.trim()),
            ("community_guidelines", guidelines.trim()),
        ],
    );
    let user = render(MIMIC_USER, &[("question", question.trim())]);
    Ok(ChatRequest::new(system, user))
}
