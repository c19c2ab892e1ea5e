//! Replay scenario shared by the integration and acceptance tests.
//!
//! The scenario is written as scripted model replies. Running the library
//! against recording backends turns it into the committed fixture files:
//! the chat/embedding fixture plus golden spaces and traces.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use discotrace::corpus::{write_bodies, AnswerRecord, QuestionRecord};
use discotrace::gateway::{ChatBackend, ChatRequest, EmbeddingBackend, Fixture, GatewayError};
use discotrace::interpretation::{deduplicate, generate_raw, DEFAULT_DEDUP_THRESHOLD};
use discotrace::pipeline::{trace_answer, DiscoTrace, TraceInput};
use discotrace::{community, BoundaryConfig, InterpretationSpace, Nuclearity, Ontology, Relation, RstNode, RstTree};

pub const CHAT_MODEL: &str = "fixture-model";
pub const GEN_A_MODEL: &str = "gen-a-model";
pub const GEN_B_MODEL: &str = "gen-b-model";
pub const EMBED_MODEL: &str = "embed-model";
/// Matches the default `retry_limit` of configured backends.
pub const RETRY_LIMIT: usize = 2;

pub fn replay_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay")
}

fn leaf(text: &str) -> RstNode {
    RstNode::leaf(0, text)
}

fn node(relation: Relation, nuclearity: Nuclearity, left: RstNode, right: RstNode) -> RstNode {
    RstNode::internal(relation, nuclearity, left, right)
}

pub struct ScriptedQuestion {
    pub question: QuestionRecord,
    pub gen_a: &'static str,
    pub gen_b: &'static str,
    pub vectors: &'static [(&'static str, &'static [f64])],
}

pub struct ScriptedAnswer {
    pub answer: AnswerRecord,
    /// Act-tagging replies, one per action segment.
    pub acts: Vec<String>,
    /// Labeling replies, one per eligible step.
    pub labels: Vec<String>,
}

pub const ASSERT: &str = "action_AQ_assert_answer";
pub const REASONING: &str = "action_AQ_provide_reasoning";
pub const BACKGROUND: &str = "action_AQ_provide_background";
pub const EXAMPLE: &str = "action_AQ_provide_example";
pub const CITE: &str = "action_AQ_cite_external_source";
pub const RECOMMEND: &str = "action_AQ_recommendation";
pub const REJECT: &str = "action_CQ_reject_presupposition";
pub const CLARIFY: &str = "action_SI_clarification";
pub const RESOURCE: &str = "action_RQ_direct_to_resource";
pub const PRESENT: &str = "action_NO_presentational";
pub const NON_ANSWER: &str = "action_NO_non_answer";

fn whole(act: &str) -> String {
    format!(r#"[{{"action_id": "{act}"}}]"#)
}

fn split(acts: &[(usize, &str)]) -> String {
    let items: Vec<String> = acts
        .iter()
        .map(|(i, a)| format!(r#"{{"subsegment_index": {i}, "action_id": "{a}"}}"#))
        .collect();
    format!("[{}]", items.join(", "))
}

fn label(id: &str) -> String {
    format!(r#"{{"interpretation_id": "{id}"}}"#)
}

fn question(id: &str, title: &str, community: &str) -> QuestionRecord {
    QuestionRecord {
        post_id: id.into(),
        title: title.into(),
        community: community.into(),
    }
}

fn answer(id: &str, q: &str, root: RstNode) -> AnswerRecord {
    let tree = RstTree::new(root).expect("scenario trees are valid");
    AnswerRecord {
        answer_id: id.into(),
        question_id: q.into(),
        text: tree.text(),
        rst_tree: tree,
    }
}

pub fn questions() -> Vec<ScriptedQuestion> {
    vec![
        ScriptedQuestion {
            question: question("q1", "What is the most common word order?", "asklinguistics"),
            gen_a: "1. Which word order is most common among the world's languages?\n2. Which word order is most common in English sentences?",
            gen_b: "1. Which word order do most of the world's languages use?\n2. Which word order is most common in spoken rather than written language?",
            vectors: &[
                ("Which word order is most common among the world's languages?", &[1.0, 0.0, 0.0]),
                ("Which word order is most common in English sentences?", &[0.0, 1.0, 0.0]),
                ("Which word order do most of the world's languages use?", &[0.95, 0.312_249_899_919_871_8, 0.0]),
                ("Which word order is most common in spoken rather than written language?", &[0.0, 0.0, 1.0]),
            ],
        },
        ScriptedQuestion {
            question: question("q2", "What's the best liver detox cleanse?", "NoStupidQuestions"),
            gen_a: "1. Which commercial detox cleanse works best for the liver?\n2. What is the best way to support liver health?",
            gen_b: "NONE",
            vectors: &[
                ("Which commercial detox cleanse works best for the liver?", &[1.0, 0.0]),
                ("What is the best way to support liver health?", &[0.0, 1.0]),
            ],
        },
        ScriptedQuestion {
            question: question("q3", "Why is the sky blue?", "explainlikeimfive"),
            gen_a: "NONE",
            gen_b: "none",
            vectors: &[],
        },
        ScriptedQuestion {
            question: question("q4", "How did medieval peasants keep time?", "AskHistorians"),
            gen_a: "1. How did medieval peasants tell the time of day?",
            gen_b: "1. How did peasants in the Middle Ages know what time of day it was?",
            vectors: &[
                ("How did medieval peasants tell the time of day?", &[1.0, 0.0]),
                ("How did peasants in the Middle Ages know what time of day it was?", &[0.9, 0.435_889_894_354_067_4]),
            ],
        },
    ]
}

pub fn answers() -> Vec<ScriptedAnswer> {
    use Nuclearity::*;
    use Relation::*;
    vec![
        // asks which reading is meant
        ScriptedAnswer {
            answer: answer("a1", "q1", leaf("Do you mean across all languages, or in English specifically?")),
            acts: vec![whole(CLARIFY)],
            labels: vec![label("id_1")],
        },
        // adopts the English reading and answers it
        ScriptedAnswer {
            answer: answer(
                "a2",
                "q1",
                node(
                    Evaluation,
                    NS,
                    leaf("In English it is subject-verb-object."),
                    node(
                        Elaboration,
                        NS,
                        leaf("That is why 'dog bites man' differs from 'man bites dog'."),
                        leaf("Word order carries the grammatical roles."),
                    ),
                ),
            ),
            acts: vec![whole(ASSERT), whole(REASONING)],
            labels: vec![label("id_2"), label("id_2")],
        },
        // walks through several readings
        ScriptedAnswer {
            answer: answer(
                "a3",
                "q1",
                node(
                    Contrast,
                    NN,
                    node(
                        Contrast,
                        NN,
                        leaf("Across the world's languages, subject-object-verb is the most frequent order."),
                        leaf("Typological surveys put it at roughly 45 percent of documented languages."),
                    ),
                    node(
                        Contrast,
                        NN,
                        leaf("Within English sentences, subject-verb-object dominates."),
                        leaf("Even casual speech like 'want coffee?' keeps the verb before the object."),
                    ),
                ),
            ),
            acts: vec![whole(ASSERT), whole(CITE), whole(ASSERT), whole(EXAMPLE)],
            labels: vec![label("id_1"), label("id_1"), label("id_2"), label("id_3")],
        },
        // rejects the premise, then answers in the same segment
        ScriptedAnswer {
            answer: answer(
                "a4",
                "q2",
                node(
                    Evaluation,
                    SN,
                    node(
                        Elaboration,
                        NS,
                        leaf("The concept of 'detoxing' your liver is misleading."),
                        leaf("Drinking less alcohol is the best thing you can do for it."),
                    ),
                    leaf("Ask your doctor for a liver panel if you are worried."),
                ),
            ),
            acts: vec![split(&[(0, REJECT), (1, ASSERT)]), whole(RECOMMEND)],
            labels: vec![label("id_2"), r#"[{"interpretation_id": "id_2"}]"#.to_string()],
        },
        ScriptedAnswer {
            answer: answer(
                "a5",
                "q2",
                node(
                    Contrast,
                    NN,
                    leaf("The NIH liver disease pages cover this well."),
                    leaf("Most cleanse products have never been tested in trials."),
                ),
            ),
            acts: vec![whole(RESOURCE), whole(ASSERT)],
            labels: vec![label("id_2"), label("id_1")],
        },
        // the tagger never returns usable JSON
        ScriptedAnswer {
            answer: answer(
                "a6",
                "q2",
                node(Elaboration, NS, leaf("Lemon water every morning."), leaf("It worked for my aunt.")),
            ),
            acts: vec!["Probably a personal anecdote.".to_string()],
            labels: vec![],
        },
        // one segment, partially indexed subsegments; empty space
        ScriptedAnswer {
            answer: answer(
                "a7",
                "q3",
                node(
                    Elaboration,
                    NS,
                    leaf("Because of Rayleigh scattering."),
                    node(
                        Elaboration,
                        NS,
                        leaf("Shorter blue wavelengths scatter more off air molecules,"),
                        leaf("so blue light reaches your eyes from every direction."),
                    ),
                ),
            ),
            acts: vec![split(&[(0, ASSERT), (1, REASONING)])],
            labels: vec![],
        },
        // same act twice in a row merges into one step
        ScriptedAnswer {
            answer: answer(
                "a8",
                "q3",
                node(
                    Contrast,
                    NN,
                    node(
                        Contrast,
                        NN,
                        leaf("Sunlight contains every colour."),
                        leaf("The atmosphere treats those colours differently."),
                    ),
                    leaf("Blue wins because it scatters the most."),
                ),
            ),
            acts: vec![whole(BACKGROUND), whole(BACKGROUND), whole(ASSERT)],
            labels: vec![],
        },
        // short background collapses the whole tree into one segment
        ScriptedAnswer {
            answer: answer(
                "a9",
                "q4",
                node(
                    Background,
                    SN,
                    node(
                        Elaboration,
                        NS,
                        leaf("Most villages had no clocks until the fourteenth century."),
                        leaf("Daily life followed the sun and the seasons."),
                    ),
                    node(
                        Contrast,
                        NN,
                        leaf("Church bells rang the canonical hours."),
                        leaf("Dohrn-van Rossum's history of the hour documents this in detail."),
                    ),
                ),
            ),
            acts: vec![split(&[(0, BACKGROUND), (2, ASSERT), (3, CITE)])],
            labels: vec![label("id_1"), label("id_1"), label("NONE")],
        },
        ScriptedAnswer {
            answer: answer(
                "a10",
                "q4",
                node(
                    Contrast,
                    NN,
                    leaf("Great question!"),
                    node(
                        Contrast,
                        NN,
                        leaf("Nobody can say for every village."),
                        leaf("Bells and sundials marked the hours for most people."),
                    ),
                ),
            ),
            acts: vec![whole(PRESENT), whole(NON_ANSWER), whole(ASSERT)],
            labels: vec![label("id_1")],
        },
    ]
}

/// Replies from a script and records every exchange under the digest the
/// configured mock backend will look up. Repeated requests get the reply
/// they got the first time.
pub struct Recorder {
    name: String,
    model: String,
    script: Mutex<VecDeque<String>>,
    seen: Mutex<HashMap<String, String>>,
    fixture: Mutex<Fixture>,
}

impl Recorder {
    pub fn new(name: &str, model: &str) -> Self {
        Recorder {
            name: name.into(),
            model: model.into(),
            script: Mutex::new(VecDeque::new()),
            seen: Mutex::new(HashMap::new()),
            fixture: Mutex::new(Fixture::default()),
        }
    }

    pub fn load(&self, replies: &[String]) {
        let mut s = self.script.lock().unwrap();
        assert!(s.is_empty(), "{}: {} scripted replies left unused", self.name, s.len());
        s.extend(replies.iter().cloned());
    }

    pub fn load_more(&self, replies: &[String]) {
        self.script.lock().unwrap().extend(replies.iter().cloned());
    }

    pub fn assert_drained(&self) {
        let s = self.script.lock().unwrap();
        assert!(s.is_empty(), "{}: {} scripted replies left unused", self.name, s.len());
    }

    pub fn into_fixture(self) -> Fixture {
        self.fixture.into_inner().unwrap()
    }
}

impl ChatBackend for Recorder {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        let prepared = request.clone().with_model(self.model.clone());
        let digest = prepared.digest();
        if let Some(r) = self.seen.lock().unwrap().get(&digest) {
            return Ok(r.clone());
        }
        let reply = self
            .script
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| panic!("{}: script exhausted", self.name));
        self.seen.lock().unwrap().insert(digest, reply.clone());
        self.fixture.lock().unwrap().insert(&prepared, reply.clone());
        Ok(reply)
    }

    fn retry_limit(&self) -> usize {
        RETRY_LIMIT
    }

    fn request_digest(&self, request: &ChatRequest) -> String {
        request.clone().with_model(self.model.clone()).digest()
    }
}

pub struct EmbedRecorder {
    vectors: HashMap<String, Vec<f64>>,
    fixture: Mutex<Fixture>,
}

impl EmbeddingBackend for EmbedRecorder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        let out: Vec<Vec<f64>> = texts
            .iter()
            .map(|t| self.vectors.get(t).unwrap_or_else(|| panic!("no vector for {t:?}")).clone())
            .collect();
        self.fixture.lock().unwrap().insert_embeddings(EMBED_MODEL, texts, &out);
        Ok(out)
    }
}

pub struct Generated {
    pub questions: Vec<QuestionRecord>,
    pub answers: Vec<AnswerRecord>,
    pub fixture: Fixture,
    pub spaces: Vec<InterpretationSpace>,
    pub traces: Vec<DiscoTrace>,
}

/// Runs the scenario through the library with recording backends.
pub fn generate() -> Generated {
    let ontology = Ontology::default_ontology();
    let boundaries = BoundaryConfig::default();
    let gen_a = Recorder::new("gen-a", GEN_A_MODEL);
    let gen_b = Recorder::new("gen-b", GEN_B_MODEL);
    let embed = EmbedRecorder {
        vectors: questions()
            .iter()
            .flat_map(|q| q.vectors.iter().map(|(t, v)| (t.to_string(), v.to_vec())))
            .collect(),
        fixture: Mutex::new(Fixture::default()),
    };

    let mut spaces = Vec::new();
    let mut qs = Vec::new();
    for sq in questions() {
        gen_a.load(&[sq.gen_a.to_string()]);
        gen_b.load(&[sq.gen_b.to_string()]);
        let q = &sq.question;
        let context = community::description(&q.community).unwrap_or("");
        let (raw, _) = generate_raw(&q.title, context, &[&gen_a, &gen_b]).expect("scripted generators succeed");
        spaces.push(deduplicate(&q.post_id, &raw, &embed, DEFAULT_DEDUP_THRESHOLD).expect("dedup"));
        qs.push(sq.question);
    }
    let by_q: BTreeMap<&str, &InterpretationSpace> = spaces.iter().map(|s| (s.question_id.as_str(), s)).collect();
    let titles: HashMap<&str, &str> = qs.iter().map(|q| (q.post_id.as_str(), q.title.as_str())).collect();

    let labeler = Recorder::new("labeler", CHAT_MODEL);
    let mut traces = Vec::new();
    let mut records = Vec::new();
    for sa in answers() {
        labeler.load(&sa.acts);
        labeler.load_more(&sa.labels);
        let a = &sa.answer;
        let input = TraceInput {
            answer_id: &a.answer_id,
            question_id: &a.question_id,
            question: titles[a.question_id.as_str()],
            answer_text: &a.text,
            tree: &a.rst_tree,
        };
        let trace = trace_answer(
            &input,
            Some(by_q[a.question_id.as_str()]),
            &ontology,
            &boundaries,
            &labeler,
            &labeler,
        );
        labeler.assert_drained();
        traces.push(trace);
        records.push(sa.answer);
    }

    let mut fixture = Fixture::default();
    for part in [
        gen_a.into_fixture(),
        gen_b.into_fixture(),
        embed.fixture.into_inner().unwrap(),
        labeler.into_fixture(),
    ] {
        fixture.extend(part);
    }
    Generated {
        questions: qs,
        answers: records,
        fixture,
        spaces,
        traces,
    }
}

/// Writes the scenario files into `dir`.
pub fn write_scenario(g: &Generated, dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    write_bodies(dir.join("questions.jsonl"), &g.questions).unwrap();
    write_bodies(dir.join("answers.jsonl"), &g.answers).unwrap();
    write_bodies(dir.join("spaces.golden.jsonl"), &g.spaces).unwrap();
    write_bodies(dir.join("traces.golden.jsonl"), &g.traces).unwrap();
    g.fixture.write(dir.join("chat.jsonl")).unwrap();
}

pub const SCENARIO_FILES: &[&str] = &[
    "questions.jsonl",
    "answers.jsonl",
    "spaces.golden.jsonl",
    "traces.golden.jsonl",
    "chat.jsonl",
];
