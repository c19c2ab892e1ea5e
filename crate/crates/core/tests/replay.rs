mod common;

use std::path::Path;

use discotrace::cli;
use discotrace::corpus::read_bodies;
use discotrace::gateway::network_request_count;
use discotrace::pipeline::validate_trace;
use discotrace::{DiscoTrace, InterpretationSpace, Ontology, NONE_ACT};

use common::*;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["discotrace".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    cli::run(argv)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
#[ignore = "rewrites tests/fixtures/replay"]
fn regenerate_replay_fixtures() {
    write_scenario(&generate(), &replay_dir());
}

#[test]
fn replay_fixtures_are_current() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(&generate(), dir.path());
    for name in SCENARIO_FILES {
        let fresh = std::fs::read(dir.path().join(name)).unwrap();
        let committed = std::fs::read(replay_dir().join(name)).unwrap();
        assert!(fresh == committed, "{name} is stale; run the ignored regenerate test");
    }
}

#[test]
fn cli_replay_reproduces_golden_outputs() {
    let fx = replay_dir();
    let config = fx.join("pipeline.toml");
    let dir = tempfile::tempdir().unwrap();
    let spaces = dir.path().join("spaces.jsonl");
    let before = network_request_count();

    let code = run(&[
        "--config",
        p(&config),
        "interp",
        "--in",
        p(&fx.join("questions.jsonl")),
        "--out",
        p(&spaces),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read(&spaces).unwrap(),
        std::fs::read(fx.join("spaces.golden.jsonl")).unwrap()
    );

    let mut outputs = Vec::new();
    for round in 0..2 {
        let out = dir.path().join(format!("traces{round}.jsonl"));
        let code = run(&[
            "--config",
            p(&config),
            "trace",
            "--in",
            p(&fx.join("answers.jsonl")),
            "--questions",
            p(&fx.join("questions.jsonl")),
            "--spaces",
            p(&spaces),
            "--out",
            p(&out),
        ]);
        assert_eq!(code, 0);
        // a6 degrades, so a diagnostics file appears next to the output
        let diag = std::fs::read_to_string(dir.path().join(format!("traces{round}.jsonl.diagnostics.jsonl"))).unwrap();
        assert_eq!(diag.lines().count(), 1);
        assert!(diag.contains("a6"));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs[0] == outputs[1], "two replays differ");
    assert!(outputs[0] == std::fs::read(fx.join("traces.golden.jsonl")).unwrap());
    assert_eq!(network_request_count(), before);
}

fn golden() -> (Vec<DiscoTrace>, Vec<InterpretationSpace>) {
    let fx = replay_dir();
    (
        read_bodies(fx.join("traces.golden.jsonl")).unwrap(),
        read_bodies(fx.join("spaces.golden.jsonl")).unwrap(),
    )
}

fn steps(t: &DiscoTrace) -> Vec<(&str, Option<&str>, Vec<usize>)> {
    t.steps
        .iter()
        .map(|s| (s.act_id.as_str(), s.interpretation_id.as_deref(), s.edu_indices.clone()))
        .collect()
}

#[test]
fn golden_traces_are_valid() {
    let (traces, spaces) = golden();
    let ontology = Ontology::default_ontology();
    let answers: Vec<discotrace::corpus::AnswerRecord> = read_bodies(replay_dir().join("answers.jsonl")).unwrap();
    assert_eq!(traces.len(), 10);
    for (t, a) in traces.iter().zip(&answers) {
        assert_eq!(t.answer_id, a.answer_id);
        let space = spaces.iter().find(|s| s.question_id == t.question_id);
        validate_trace(t, a.rst_tree.edu_count(), &ontology, space).unwrap();
    }
}

#[test]
fn spaces_merge_paraphrases() {
    let (_, spaces) = golden();
    let sizes: Vec<usize> = spaces.iter().map(|s| s.len()).collect();
    assert_eq!(sizes, [3, 2, 0, 1]);
    let q1 = &spaces[0].members[0];
    assert_eq!(q1.sources.len(), 2);
    let q4 = &spaces[3].members[0];
    assert_eq!(q4.sources.iter().map(String::as_str).collect::<Vec<_>>(), ["gen-a", "gen-b"]);
}

#[test]
fn three_answers_to_an_ambiguous_question() {
    let (traces, _) = golden();
    let by = |id: &str| traces.iter().find(|t| t.answer_id == id).unwrap();
    assert_eq!(steps(by("a1")), [(CLARIFY, Some("id_1"), vec![0])]);
    assert_eq!(
        steps(by("a2")),
        [(ASSERT, Some("id_2"), vec![0]), (REASONING, Some("id_2"), vec![1, 2])]
    );
    let ids: std::collections::BTreeSet<_> = by("a3").steps.iter().filter_map(|s| s.interpretation_id.clone()).collect();
    assert_eq!(ids.len(), 3);
}

#[test]
fn scenario_edge_cases() {
    let (traces, _) = golden();
    let by = |id: &str| traces.iter().find(|t| t.answer_id == id).unwrap();

    // one segment split per subsegment; the rejected premise is not labeled
    assert_eq!(
        steps(by("a4")),
        [
            (REJECT, None, vec![0]),
            (ASSERT, Some("id_2"), vec![1]),
            (RECOMMEND, Some("id_2"), vec![2])
        ]
    );

    let a6 = by("a6");
    assert_eq!(steps(a6), [(NONE_ACT, None, vec![0, 1])]);
    assert_eq!(a6.diagnostics.len(), 1);
    assert!(!a6.diagnostics[0].request_digest.is_empty());

    // unindexed subsegment inherits the previous label; empty space means no ids
    assert_eq!(steps(by("a7")), [(ASSERT, None, vec![0]), (REASONING, None, vec![1, 2])]);
    assert_eq!(steps(by("a8")), [(BACKGROUND, None, vec![0, 1]), (ASSERT, None, vec![2])]);

    assert_eq!(
        steps(by("a9")),
        [
            (BACKGROUND, Some("id_1"), vec![0, 1]),
            (ASSERT, Some("id_1"), vec![2]),
            (CITE, None, vec![3])
        ]
    );
    assert_eq!(
        steps(by("a10")),
        [(PRESENT, None, vec![0]), (NON_ANSWER, None, vec![1]), (ASSERT, Some("id_1"), vec![2])]
    );
}
